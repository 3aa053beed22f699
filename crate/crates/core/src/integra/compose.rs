//! Canonical normal form of a collection of programs.
//!
//! Delays are summed per event, guards are combined per event into one
//! AND (or OR) guard over the sorted distinct conditions, identical
//! additions collapse, and everything is sorted by directive rank and
//! payload. The result is independent of program order.

use std::collections::BTreeMap;

use crate::ast::BoolExpr;
use crate::print;

use super::{IntegraError, Transform, TransformProgram};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    And,
    Or,
}

fn sort_key(t: &Transform) -> (u8, String) {
    (t.rank(), format!("{t:?}"))
}

pub fn compose(programs: &[TransformProgram]) -> Result<TransformProgram, IntegraError> {
    let mut names: Vec<&str> = programs.iter().map(|p| p.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let name = if names.is_empty() {
        "identity".to_string()
    } else {
        names.join("+")
    };

    let mut delays: BTreeMap<String, u64> = BTreeMap::new();
    let mut guards: BTreeMap<String, (Mode, Vec<BoolExpr>)> = BTreeMap::new();
    let mut dup_state: Option<(String, String)> = None;
    let mut dup_events: Option<(String, String)> = None;
    let mut rest: Vec<Transform> = Vec::new();

    for t in programs.iter().flat_map(|p| &p.transforms) {
        match t {
            Transform::AddDelay { event, amount } => {
                let d = delays.entry(event.clone()).or_default();
                *d = d.checked_add(*amount).ok_or_else(|| {
                    IntegraError::Conflict(format!("summed delay of `{event}` overflows"))
                })?;
            }
            Transform::GuardAnd { event, condition } | Transform::GuardOr { event, condition } => {
                let mode = if matches!(t, Transform::GuardAnd { .. }) {
                    Mode::And
                } else {
                    Mode::Or
                };
                let entry = guards.entry(event.clone()).or_insert((mode, Vec::new()));
                if entry.0 != mode {
                    return Err(IntegraError::AndOrConflict { event: event.clone() });
                }
                if !entry.1.contains(condition) {
                    entry.1.push(condition.clone());
                }
            }
            Transform::DuplicateStateForNI { m1, m2 } | Transform::DuplicateEventsForNI { m1, m2 } => {
                let slot = if matches!(t, Transform::DuplicateStateForNI { .. }) {
                    &mut dup_state
                } else {
                    &mut dup_events
                };
                let pair = (m1.clone(), m2.clone());
                match slot {
                    Some(p) if *p != pair => {
                        return Err(IntegraError::Conflict(format!(
                            "{} with suffixes {}/{} conflicts with {}/{}",
                            t.directive(),
                            p.0,
                            p.1,
                            m1,
                            m2
                        )))
                    }
                    _ => *slot = Some(pair),
                }
            }
            other => {
                if !rest.contains(other) {
                    rest.push(other.clone());
                }
            }
        }
    }

    for (event, amount) in delays {
        rest.push(Transform::AddDelay { event, amount });
    }
    for (event, (mode, mut conds)) in guards {
        conds.sort_by_cached_key(print::bool_expr);
        let condition = conds
            .into_iter()
            .reduce(|a, b| match mode {
                Mode::And => BoolExpr::and(a, b),
                Mode::Or => BoolExpr::or(a, b),
            })
            .expect("at least one guard");
        rest.push(match mode {
            Mode::And => Transform::GuardAnd { event, condition },
            Mode::Or => Transform::GuardOr { event, condition },
        });
    }
    if let Some((m1, m2)) = dup_state {
        rest.push(Transform::DuplicateStateForNI { m1, m2 });
    }
    if let Some((m1, m2)) = dup_events {
        rest.push(Transform::DuplicateEventsForNI { m1, m2 });
    }
    rest.sort_by_cached_key(sort_key);
    Ok(TransformProgram { name, transforms: rest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integra::parse_integra;

    fn prog(src: &str, name: &str) -> TransformProgram {
        parse_integra(src, name).unwrap()
    }

    #[test]
    fn delays_add_up() {
        let c = compose(&[prog("ADD_DELAY E, 5", "a"), prog("ADD_DELAY E, 7", "b")]).unwrap();
        assert_eq!(c.transforms, vec![Transform::AddDelay { event: "E".into(), amount: 12 }]);
        assert_eq!(c.name, "a+b");
    }

    #[test]
    fn empty_composition_is_identity() {
        assert_eq!(compose(&[]).unwrap(), TransformProgram::identity());
    }

    #[test]
    fn and_or_conflict() {
        let e = compose(&[prog("GUARD_AND E, x.y = 1", "a"), prog("GUARD_OR E, x.y = 0", "b")]).unwrap_err();
        assert_eq!(e, IntegraError::AndOrConflict { event: "E".into() });
    }

    #[test]
    fn order_independent_and_idempotent() {
        let a = prog("GUARD_AND E, x.y = 1\nADD_INITIAL x.y = 0\nADD_TRIGGER E, Trigger F{NONE}", "a");
        let b = prog("GUARD_AND E, x.z = 1\nADD_INITIAL x.y = 0", "b");
        assert_eq!(compose(&[a.clone(), b.clone()]).unwrap(), compose(&[b, a.clone()]).unwrap());
        assert_eq!(compose(&[a.clone(), a.clone()]).unwrap(), compose(&[a]).unwrap());
    }
}
