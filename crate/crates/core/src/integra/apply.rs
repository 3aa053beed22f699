//! Applying a program to a model.
//!
//! The program is normalized first, then applied in fixed phases:
//! structure (types, instances, events, data fields), guards over the
//! clauses present after the structure phase, clause/delay/assertion/
//! constraint additions, and finally the two-machine product.

use crate::ast::{BoolExpr, EventSpec, Expr, Model, Origins, StateRef};
use crate::validate::validate;

use super::{compose, IntegraError, Transform, TransformProgram, NI_ASSERTION};

fn missing_event(event: &str) -> IntegraError {
    IntegraError::Unresolved(format!("transform targets unknown event `{event}`"))
}

fn add_unique<T: PartialEq>(items: &mut Vec<T>, item: T, same_name: impl Fn(&T) -> bool, what: &str) -> Result<(), IntegraError> {
    match items.iter().find(|x| same_name(x)) {
        Some(existing) if *existing == item => Ok(()),
        Some(_) => Err(IntegraError::Conflict(format!("{what} already exists with a different definition"))),
        None => {
            items.push(item);
            Ok(())
        }
    }
}

pub fn apply(base: &Model, program: &TransformProgram) -> Result<Model, IntegraError> {
    let prog = compose(std::slice::from_ref(program))?;
    let mut m = base.clone();

    for t in &prog.transforms {
        match t {
            Transform::AddTypeSpec(ts) => {
                add_unique(&mut m.state_decl.types, ts.clone(), |x| x.name == ts.name, &format!("type `{}`", ts.name))?
            }
            Transform::AddInstance(i) => add_unique(
                &mut m.state_decl.instances,
                i.clone(),
                |x| x.name == i.name,
                &format!("instance `{}`", i.name),
            )?,
            Transform::AddEventSpec { spec, max_instances } => {
                add_unique(&mut m.events, spec.clone(), |x| x.name == spec.name, &format!("event `{}`", spec.name))?;
                if let Some(cap) = max_instances {
                    match m.instance_caps.insert(spec.name.clone(), *cap) {
                        Some(old) if old != *cap => {
                            return Err(IntegraError::Conflict(format!("event `{}` has two instance caps", spec.name)))
                        }
                        _ => {}
                    }
                }
            }
            Transform::AddDataField { event, field } => {
                let ev = m.event_mut(event).ok_or_else(|| missing_event(event))?;
                add_unique(
                    &mut ev.carried_data,
                    field.clone(),
                    |x| x.name == field.name,
                    &format!("data field `{event}.{}`", field.name),
                )?;
            }
            _ => {}
        }
    }

    for t in &prog.transforms {
        let (event, g, and) = match t {
            Transform::GuardAnd { event, condition } => (event, condition, true),
            Transform::GuardOr { event, condition } => (event, condition, false),
            _ => continue,
        };
        let ev = m.event_mut(event).ok_or_else(|| missing_event(event))?;
        let guard = |c: &mut BoolExpr| {
            let old = std::mem::replace(c, BoolExpr::True);
            *c = match (and, old) {
                (true, old) => BoolExpr::and_simplified(old, g.clone()),
                (false, BoolExpr::True) => BoolExpr::True,
                (false, old) => BoolExpr::or(old, g.clone()),
            };
        };
        ev.triggers.iter_mut().for_each(|t| guard(&mut t.condition));
        ev.state_changes.iter_mut().for_each(|s| guard(&mut s.condition));
    }

    for t in &prog.transforms {
        match t {
            Transform::AddTriggerClause { event, clause } => {
                m.event_mut(event).ok_or_else(|| missing_event(event))?.triggers.push(clause.clone())
            }
            Transform::AddStateChange { event, clause } => m
                .event_mut(event)
                .ok_or_else(|| missing_event(event))?
                .state_changes
                .push(clause.clone()),
            Transform::AddDelay { event, amount } => {
                let ev = m.event_mut(event).ok_or_else(|| missing_event(event))?;
                ev.delay = ev
                    .delay
                    .checked_add(*amount)
                    .ok_or_else(|| IntegraError::Conflict(format!("delay of `{event}` overflows")))?;
            }
            Transform::AddAssertion(a) => {
                add_unique(&mut m.assertions, a.clone(), |x| x.name == a.name, &format!("assertion `{}`", a.name))?
            }
            Transform::AddInitialConstraint(c) if !m.initial_constraints.contains(c) => {
                m.initial_constraints.push(c.clone())
            }
            _ => {}
        }
    }

    let mut dup_state = None;
    let mut dup_events = None;
    let mut secrets = Vec::new();
    let mut observables = Vec::new();
    for t in &prog.transforms {
        match t {
            Transform::DuplicateStateForNI { m1, m2 } => dup_state = Some((m1.clone(), m2.clone())),
            Transform::DuplicateEventsForNI { m1, m2 } => dup_events = Some((m1.clone(), m2.clone())),
            Transform::SecretFree(r) => secrets.push(r.clone()),
            Transform::ObservableEqual(r) => observables.push(r.clone()),
            _ => {}
        }
    }
    m = match (dup_state, dup_events) {
        (None, None) if secrets.is_empty() && observables.is_empty() => m,
        (Some(s), Some(e)) if s == e => product(&m, &s.0, &s.1, &secrets, &observables)?,
        (Some(_), Some(_)) => {
            return Err(IntegraError::Conflict(
                "DUPLICATE_STATE and DUPLICATE_EVENTS use different suffixes".into(),
            ))
        }
        _ => {
            return Err(IntegraError::Conflict(
                "the two-machine product needs both DUPLICATE_STATE and DUPLICATE_EVENTS".into(),
            ))
        }
    };

    let errors: Vec<_> = validate(&m).into_iter().filter(|d| d.is_error()).collect();
    if !errors.is_empty() {
        return Err(IntegraError::Invalid(errors));
    }
    Ok(m)
}

fn suffixed(name: &str, sfx: &str) -> String {
    format!("{name}_{sfx}")
}

fn rename_expr(e: &Expr, sfx: &str) -> Expr {
    e.map_refs(&|x| match x {
        Expr::State(r) => Some(Expr::State(StateRef {
            instance: suffixed(&r.instance, sfx),
            ..r.clone()
        })),
        Expr::Count { event, primed } => Some(Expr::Count {
            event: suffixed(event, sfx),
            primed: *primed,
        }),
        _ => None,
    })
}

fn rename_bool(b: &BoolExpr, sfx: &str) -> BoolExpr {
    b.map_refs(&|x| match x {
        Expr::State(_) | Expr::Count { .. } => Some(rename_expr(x, sfx)),
        _ => None,
    })
}

fn rename_event(e: &EventSpec, sfx: &str) -> EventSpec {
    let mut out = e.clone();
    out.name = suffixed(&e.name, sfx);
    for t in &mut out.triggers {
        t.condition = rename_bool(&t.condition, sfx);
        t.target = suffixed(&t.target, sfx);
        for (_, v) in &mut t.assignments {
            *v = rename_expr(v, sfx);
        }
    }
    for s in &mut out.state_changes {
        s.condition = rename_bool(&s.condition, sfx);
        s.target.instance = suffixed(&s.target.instance, sfx);
        s.value = rename_expr(&s.value, sfx);
    }
    out
}

/// Two copies of `m` whose non-secret state starts equal.
fn product(m: &Model, a: &str, b: &str, secrets: &[StateRef], observables: &[StateRef]) -> Result<Model, IntegraError> {
    for r in secrets.iter().chain(observables) {
        if m.state_decl.field_width(&r.instance, &r.field).is_none() {
            return Err(IntegraError::Unresolved(format!("unknown state field `{r}`")));
        }
    }
    if m.assertions.iter().any(|x| x.name == NI_ASSERTION) && !observables.is_empty() {
        return Err(IntegraError::Conflict(format!("assertion `{NI_ASSERTION}` already exists")));
    }
    let sfxs = [a, b];
    let mut out = m.clone();
    out.origins = Origins::default();
    out.state_decl.instances = sfxs
        .iter()
        .flat_map(|s| {
            m.state_decl.instances.iter().map(move |i| crate::ast::InstanceSpec {
                name: suffixed(&i.name, s),
                type_name: i.type_name.clone(),
            })
        })
        .collect();
    out.events = sfxs
        .iter()
        .flat_map(|s| m.events.iter().map(move |e| rename_event(e, s)))
        .collect();
    out.instance_caps = sfxs
        .iter()
        .flat_map(|s| m.instance_caps.iter().map(move |(k, v)| (suffixed(k, s), *v)))
        .collect();
    out.assertions = sfxs
        .iter()
        .flat_map(|s| {
            m.assertions.iter().map(move |x| crate::ast::Assertion {
                name: suffixed(&x.name, s),
                mode: x.mode,
                body: rename_bool(&x.body, s),
            })
        })
        .collect();
    let tie = |r: &StateRef| {
        BoolExpr::eq(
            Expr::state(&suffixed(&r.instance, a), &r.field),
            Expr::state(&suffixed(&r.instance, b), &r.field),
        )
    };
    if !observables.is_empty() {
        out.assertions.push(crate::ast::Assertion {
            name: NI_ASSERTION.into(),
            mode: crate::ast::AssertionMode::Always,
            body: BoolExpr::conjoin(observables.iter().map(tie)),
        });
    }
    out.initial_constraints = sfxs
        .iter()
        .flat_map(|s| m.initial_constraints.iter().map(move |c| rename_bool(c, s)))
        .collect();
    for (inst, field, _) in m.state_decl.fields() {
        let r = StateRef::new(&inst, &field);
        if !secrets.contains(&r) {
            out.initial_constraints.push(tie(&r));
        }
    }
    Ok(out)
}
