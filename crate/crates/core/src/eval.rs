//! Evaluation of expressions against a step and an optional successor.

use crate::ast::{ArithOp, BoolExpr, CmpOp, Expr, StepRecord};
use crate::bitvec::BitVecValue;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unresolved reference `{0}`")]
    Unresolved(String),
    #[error("primed reference `{0}` has no successor step")]
    NoSuccessor(String),
}

/// Bindings visible to an expression.
#[derive(Clone, Copy)]
pub struct Scope<'a> {
    pub cur: &'a StepRecord,
    /// Successor step for primed references.
    pub next: Option<&'a StepRecord>,
    /// Carried data of the evaluating instance.
    pub data: &'a [(String, BitVecValue)],
}

impl<'a> Scope<'a> {
    pub fn at(cur: &'a StepRecord) -> Self {
        Self { cur, next: None, data: &[] }
    }

    fn pick(&self, primed: bool, what: &dyn Fn() -> String) -> Result<&'a StepRecord, EvalError> {
        if primed {
            self.next.ok_or_else(|| EvalError::NoSuccessor(what()))
        } else {
            Ok(self.cur)
        }
    }
}

pub fn eval_expr(e: &Expr, s: &Scope) -> Result<BitVecValue, EvalError> {
    Ok(match e {
        Expr::Lit(n) => BitVecValue::literal(*n),
        Expr::State(r) => {
            let step = s.pick(r.primed, &|| r.to_string())?;
            step.value(&r.instance, &r.field)
                .ok_or_else(|| EvalError::Unresolved(r.to_string()))?
        }
        Expr::Data(f) => s
            .data
            .iter()
            .find(|(n, _)| n == f)
            .map(|(_, v)| *v)
            .ok_or_else(|| EvalError::Unresolved(format!("self.{f}")))?,
        Expr::Time { primed } => {
            BitVecValue::wrapping(64, s.pick(*primed, &|| "TimingRecord.time'".into())?.time)
        }
        Expr::Step { primed } => BitVecValue::wrapping(
            64,
            s.pick(*primed, &|| "StepRecord.step'".into())?.step_index as u64,
        ),
        Expr::Count { event, primed } => {
            let step = s.pick(*primed, &|| format!("#{event}'"))?;
            BitVecValue::wrapping(64, step.deployed_count(event))
        }
        Expr::Binary(op, a, b) => {
            let x = eval_expr(a, s)?;
            let y = eval_expr(b, s)?;
            match op {
                ArithOp::Add => x.wrapping_add(&y),
                ArithOp::Sub => x.wrapping_sub(&y),
            }
        }
    })
}

pub fn eval_bool(b: &BoolExpr, s: &Scope) -> Result<bool, EvalError> {
    Ok(match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Cmp(op, x, y) => {
            let o = eval_expr(x, s)?.compare(&eval_expr(y, s)?);
            match op {
                CmpOp::Eq => o.is_eq(),
                CmpOp::Ne => o.is_ne(),
                CmpOp::Lt => o.is_lt(),
                CmpOp::Le => o.is_le(),
                CmpOp::Gt => o.is_gt(),
                CmpOp::Ge => o.is_ge(),
            }
        }
        BoolExpr::And(x, y) => eval_bool(x, s)? && eval_bool(y, s)?,
        BoolExpr::Or(x, y) => eval_bool(x, s)? || eval_bool(y, s)?,
        BoolExpr::Not(x) => !eval_bool(x, s)?,
    })
}
