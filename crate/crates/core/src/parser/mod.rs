//! Model-file and mini-grammar front end.

pub mod expr;
pub mod lexer;
mod model;
pub mod yaml;

use std::fmt;

use crate::ast::{Assertion, Model, SourceSpan, StateChangeClause, TriggerClause};
use crate::validate::{validate, Diagnostic};

pub use model::{parse_carried_data, parse_width};

/// A syntax error at a source location.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
        }
    }
}

/// Why a model file was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    Syntax(ParseError),
    /// Validation errors, each with a location.
    Invalid(Vec<Diagnostic>),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Syntax(e) => write!(f, "{e}"),
            ModelError::Invalid(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ModelError {}

impl From<ParseError> for ModelError {
    fn from(e: ParseError) -> Self {
        ModelError::Syntax(e)
    }
}

impl ModelError {
    /// Location of the first problem.
    pub fn span(&self) -> Option<&SourceSpan> {
        match self {
            ModelError::Syntax(e) => Some(&e.span),
            ModelError::Invalid(ds) => ds.first().and_then(|d| d.span.as_ref()),
        }
    }
}

/// A parsed, validated model plus any warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub model: Model,
    pub warnings: Vec<Diagnostic>,
}

/// Parses and validates a model, keeping validation warnings.
pub fn parse_model_file(text: &str, file: &str) -> Result<Parsed, ModelError> {
    let model = model::build(text, file)?;
    let diags = validate(&model);
    let (errors, warnings): (Vec<_>, Vec<_>) = diags.into_iter().partition(Diagnostic::is_error);
    if !errors.is_empty() {
        let fallback = SourceSpan::new(file, 1, 1, 1);
        let errors = errors
            .into_iter()
            .map(|mut d| {
                d.span.get_or_insert_with(|| fallback.clone());
                d
            })
            .collect();
        return Err(ModelError::Invalid(errors));
    }
    Ok(Parsed { model, warnings })
}

/// Parses and validates model text.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    parse_model_file(text, "<input>").map(|p| p.model)
}

/// Parses raw bytes, reporting invalid UTF-8 with its location.
pub fn parse_model_bytes(bytes: &[u8], file: &str) -> Result<Parsed, ModelError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_model_file(text, file),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = good.iter().filter(|b| **b == b'\n').count() as u32 + 1;
            let line_start = good.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
            let col = String::from_utf8_lossy(&good[line_start..]).chars().count() as u32 + 1;
            Err(ModelError::Syntax(ParseError::new(
                SourceSpan::new(file, line, col, col),
                "invalid UTF-8",
            )))
        }
    }
}

fn string_error(e: expr::ExprError) -> ParseError {
    let col = e.pos as u32 + 1;
    ParseError::new(SourceSpan::new("<string>", 1, col, col), e.message)
}

/// Parses a `TriggersEvent` value.
pub fn parse_trigger_string(text: &str) -> Result<Vec<TriggerClause>, ParseError> {
    expr::triggers(text).map_err(string_error)
}

/// Parses a `StateChanges` value.
pub fn parse_statechange_string(text: &str) -> Result<Vec<StateChangeClause>, ParseError> {
    expr::statechanges(text).map_err(string_error)
}

/// Parses an `Assert` value; the assertion is named `name`.
pub fn parse_assertion_string(name: &str, text: &str) -> Result<Assertion, ParseError> {
    let (mode, body) = expr::assertion(text).map_err(string_error)?;
    Ok(Assertion {
        name: name.to_string(),
        mode,
        body,
    })
}

/// Parses an unprimed constraint expression.
pub fn parse_constraint_string(text: &str) -> Result<crate::ast::BoolExpr, ParseError> {
    expr::bool_expr(text, expr::Context::Constraint).map_err(string_error)
}
