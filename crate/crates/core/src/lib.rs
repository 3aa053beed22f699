//! Event-based modeling of microarchitectural defenses.
//!
//! A [`Model`](ast::Model) describes machine state, event specifications
//! with multi-cycle delays, initial constraints and assertions. The crate
//! parses models from a YAML-based format, executes them under compressed
//! time ([`engine`]), checks assertions exhaustively within bounds
//! ([`checker`]), composes defenses written as transform programs
//! ([`integra`]) and emits Alloy source ([`alloy`]).

pub mod alloy;
pub mod ast;
pub mod bitvec;
pub mod checker;
pub mod cli;
pub mod corpus;
pub mod engine;
pub mod eval;
pub mod integra;
pub mod parser;
pub mod print;
pub mod render;
pub mod validate;

pub use ast::{Assertion, AssertionMode, EventSpec, Model, StateRef, Trace};
pub use bitvec::BitVecValue;
pub use checker::{check, CheckReport, Verdict};
pub use engine::{run_trace, EngineConfig};


pub use parser::{parse_model, ModelError, ParseError};
