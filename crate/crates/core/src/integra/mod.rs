//! Composable model transforms.
//!
//! A transform program is a list of additive directives, one per line.
//! Programs compose into a canonical normal form, so the composed result
//! does not depend on the order in which programs are listed.
//!
//! | directive | arguments |
//! |---|---|
//! | `ADD_EVENT` | name, carried data, triggers, state changes, delay, `Yes`/`No` [, max instances] |
//! | `ADD_DATA_FIELD` | event, `name: BV[w]` |
//! | `ADD_TRIGGER` | event, trigger clause |
//! | `GUARD_AND` / `GUARD_OR` | event, condition |
//! | `ADD_STATE_CHANGE` | event, state-change clause |
//! | `ADD_DELAY` | event, amount |
//! | `ADD_TYPE` | name, `field: BV[w]`, ... |
//! | `ADD_INSTANCE` | name, type |
//! | `ADD_ASSERTION` | name, `ALWAYS ...` / `FINALLY ...` |
//! | `ADD_INITIAL` | condition |
//! | `DUPLICATE_STATE` / `DUPLICATE_EVENTS` | suffix, suffix |
//! | `SECRET_FREE` / `OBSERVABLE_EQUAL` | `instance.field` |

mod apply;
mod compose;
mod parse;

use std::fmt::Write;

use crate::ast::{Assertion, BoolExpr, DataField, EventSpec, InstanceSpec, SourceSpan, StateChangeClause, StateRef, TriggerClause, TypeSpec};
use crate::parser::ParseError;
use crate::print;
use crate::validate::Diagnostic;

pub use apply::apply;
pub use compose::compose;
pub use parse::parse_integra;

/// Name of the combined cross-machine observation assertion.
pub const NI_ASSERTION: &str = "NonInterference";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    AddEventSpec { spec: EventSpec, max_instances: Option<u32> },
    AddDataField { event: String, field: DataField },
    AddTriggerClause { event: String, clause: TriggerClause },
    GuardAnd { event: String, condition: BoolExpr },
    GuardOr { event: String, condition: BoolExpr },
    AddStateChange { event: String, clause: StateChangeClause },
    AddDelay { event: String, amount: u64 },
    AddTypeSpec(TypeSpec),
    AddInstance(InstanceSpec),
    AddAssertion(Assertion),
    AddInitialConstraint(BoolExpr),
    DuplicateStateForNI { m1: String, m2: String },
    DuplicateEventsForNI { m1: String, m2: String },
    SecretFree(StateRef),
    ObservableEqual(StateRef),
}

impl Transform {
    pub fn directive(&self) -> &'static str {
        match self {
            Transform::AddEventSpec { .. } => "ADD_EVENT",
            Transform::AddDataField { .. } => "ADD_DATA_FIELD",
            Transform::AddTriggerClause { .. } => "ADD_TRIGGER",
            Transform::GuardAnd { .. } => "GUARD_AND",
            Transform::GuardOr { .. } => "GUARD_OR",
            Transform::AddStateChange { .. } => "ADD_STATE_CHANGE",
            Transform::AddDelay { .. } => "ADD_DELAY",
            Transform::AddTypeSpec(_) => "ADD_TYPE",
            Transform::AddInstance(_) => "ADD_INSTANCE",
            Transform::AddAssertion(_) => "ADD_ASSERTION",
            Transform::AddInitialConstraint(_) => "ADD_INITIAL",
            Transform::DuplicateStateForNI { .. } => "DUPLICATE_STATE",
            Transform::DuplicateEventsForNI { .. } => "DUPLICATE_EVENTS",
            Transform::SecretFree(_) => "SECRET_FREE",
            Transform::ObservableEqual(_) => "OBSERVABLE_EQUAL",
        }
    }

    /// Rank in the canonical order of a normal-form program.
    fn rank(&self) -> u8 {
        match self {
            Transform::AddTypeSpec(_) => 0,
            Transform::AddInstance(_) => 1,
            Transform::AddEventSpec { .. } => 2,
            Transform::AddDataField { .. } => 3,
            Transform::GuardAnd { .. } => 4,
            Transform::GuardOr { .. } => 5,
            Transform::AddTriggerClause { .. } => 6,
            Transform::AddStateChange { .. } => 7,
            Transform::AddDelay { .. } => 8,
            Transform::AddAssertion(_) => 9,
            Transform::AddInitialConstraint(_) => 10,
            Transform::DuplicateStateForNI { .. } => 11,
            Transform::DuplicateEventsForNI { .. } => 12,
            Transform::SecretFree(_) => 13,
            Transform::ObservableEqual(_) => 14,
        }
    }

    /// The directive line that parses back to this transform.
    pub fn to_line(&self) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let args: Vec<String> = match self {
            Transform::AddEventSpec { spec, max_instances } => {
                let mut v = vec![
                    spec.name.clone(),
                    q(&print::carried_data(&spec.carried_data)),
                    q(&print::triggers(&spec.triggers)),
                    q(&print::state_changes(&spec.state_changes)),
                    spec.delay.to_string(),
                    if spec.present_at_start { "Yes" } else { "No" }.into(),
                ];
                if let Some(n) = max_instances {
                    v.push(n.to_string());
                }
                v
            }
            Transform::AddDataField { event, field } => {
                vec![event.clone(), format!("{}: BV[{}]", field.name, field.width)]
            }
            Transform::AddTriggerClause { event, clause } => vec![event.clone(), q(&print::trigger(clause))],
            Transform::GuardAnd { event, condition } | Transform::GuardOr { event, condition } => {
                vec![event.clone(), q(&print::bool_expr(condition))]
            }
            Transform::AddStateChange { event, clause } => vec![event.clone(), q(&print::state_change(clause))],
            Transform::AddDelay { event, amount } => vec![event.clone(), amount.to_string()],
            Transform::AddTypeSpec(t) => std::iter::once(t.name.clone())
                .chain(t.fields.iter().map(|f| format!("{}: BV[{}]", f.name, f.width)))
                .collect(),
            Transform::AddInstance(i) => vec![i.name.clone(), i.type_name.clone()],
            Transform::AddAssertion(a) => vec![a.name.clone(), q(&print::assertion_body(a))],
            Transform::AddInitialConstraint(c) => vec![q(&print::bool_expr(c))],
            Transform::DuplicateStateForNI { m1, m2 } | Transform::DuplicateEventsForNI { m1, m2 } => {
                vec![m1.clone(), m2.clone()]
            }
            Transform::SecretFree(r) | Transform::ObservableEqual(r) => vec![r.to_string()],
        };
        format!("{} {}", self.directive(), args.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformProgram {
    pub name: String,
    pub transforms: Vec<Transform>,
}

impl TransformProgram {
    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            transforms: Vec::new(),
        }
    }

    /// Directive count.
    pub fn loc(&self) -> usize {
        self.transforms.len()
    }

    pub fn to_text(&self) -> String {
        let mut o = format!("# {}\n", self.name);
        for t in &self.transforms {
            writeln!(o, "{}", t.to_line()).unwrap();
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntegraError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("event `{event}` is guarded with both AND and OR")]
    AndOrConflict { event: String },
    #[error("{0}")]
    Unresolved(String),
    #[error("{0}")]
    Conflict(String),
    #[error("transformed model is invalid:\n{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

impl IntegraError {
    pub fn span(&self) -> Option<&SourceSpan> {
        match self {
            IntegraError::Syntax(e) => Some(&e.span),
            _ => None,
        }
    }
}
