//! Deterministic execution under compressed time.
//!
//! One step fires every active instance: satisfied triggers deploy
//! children into the next step, satisfied state changes write the next
//! machine state, and the active instances complete. Time then advances by
//! one if anything fired, otherwise jumps to the earliest pending
//! activation. Long delays therefore cost one step each.

use crate::ast::{
    Assignment, EventInstance, EventStatus, Model, StateBinding, StepRecord, Trace,
};
use crate::bitvec::BitVecValue;
use crate::eval::{eval_bool, eval_expr, EvalError, Scope};
use crate::print;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub max_steps: u32,
    /// Pad with stutter steps up to `max_steps` instead of stopping at
    /// the first quiescent step.
    pub stutter_to_max: bool,
}

impl EngineConfig {
    pub fn for_model(model: &Model) -> Self {
        Self {
            max_steps: model.max_steps,
            stutter_to_max: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("initial assignment violates constraint {index} `{constraint}`")]
    ConstraintViolated { index: usize, constraint: String },
    #[error("initial assignment has no value for `{0}`")]
    IncompleteAssignment(String),
    #[error("initial assignment binds undeclared field `{0}`")]
    UnknownField(String),
    #[error("value {value} does not fit `{field}` ({width} bits)")]
    ValueTooWide { field: String, value: u64, width: u32 },
    #[error("step {step}: conflicting writes to `{target}` ({first} vs {second})")]
    WriteConflict {
        step: u32,
        target: String,
        first: u64,
        second: u64,
    },
    #[error("step {step}: more than {cap} live instances of `{event}`")]
    InstanceOverflow { step: u32, event: String, cap: u32 },
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Builds a full assignment from `(instance, field, value)` triples.
pub fn assignment(model: &Model, values: &[(&str, &str, u64)]) -> Result<Assignment, EngineError> {
    let mut out = Vec::new();
    for (inst, field, width) in model.state_decl.fields() {
        let v = values
            .iter()
            .find(|(i, f, _)| *i == inst && *f == field)
            .ok_or_else(|| EngineError::IncompleteAssignment(format!("{inst}.{field}")))?;
        let value = BitVecValue::new(width, v.2).map_err(|_| EngineError::ValueTooWide {
            field: format!("{inst}.{field}"),
            value: v.2,
            width,
        })?;
        out.push(StateBinding {
            instance: inst,
            field,
            value,
        });
    }
    Ok(out)
}

fn zero_data(model: &Model, spec: &str) -> Vec<(String, BitVecValue)> {
    model
        .event(spec)
        .map(|e| {
            e.carried_data
                .iter()
                .map(|d| (d.name.clone(), BitVecValue::zero(d.width)))
                .collect()
        })
        .unwrap_or_default()
}

fn check_caps(model: &Model, rec: &StepRecord) -> Result<(), EngineError> {
    for e in &model.events {
        let cap = model.instance_cap(&e.name);
        if rec.deployed_count(&e.name) > cap as u64 {
            return Err(EngineError::InstanceOverflow {
                step: rec.step_index,
                event: e.name.clone(),
                cap,
            });
        }
    }
    Ok(())
}

/// Step 0 with one active instance per present-at-start spec.
pub fn initial_step(model: &Model, assignment: &[StateBinding]) -> Result<StepRecord, EngineError> {
    for b in assignment {
        if model.state_decl.field_width(&b.instance, &b.field).is_none() {
            return Err(EngineError::UnknownField(format!("{}.{}", b.instance, b.field)));
        }
    }
    let mut machine_state = Vec::new();
    for (inst, field, width) in model.state_decl.fields() {
        let b = assignment
            .iter()
            .find(|b| b.instance == inst && b.field == field)
            .ok_or_else(|| EngineError::IncompleteAssignment(format!("{inst}.{field}")))?;
        let value = BitVecValue::new(width, b.value.bits()).map_err(|_| EngineError::ValueTooWide {
            field: format!("{inst}.{field}"),
            value: b.value.bits(),
            width,
        })?;
        machine_state.push(StateBinding {
            instance: inst,
            field,
            value,
        });
    }
    let mut instances = Vec::new();
    for e in model.events.iter().filter(|e| e.present_at_start) {
        instances.push(EventInstance {
            spec: e.name.clone(),
            status: EventStatus::Active,
            appearance_time: 0,
            delay: 0,
            event_id: instances.len() as u64,
            reason: -1,
            parent_id: -1,
            data: zero_data(model, &e.name),
        });
    }
    let rec = StepRecord {
        step_index: 0,
        time: 0,
        machine_state,
        next_event_id: instances.len() as u64,
        instances,
    };
    for (index, c) in model.initial_constraints.iter().enumerate() {
        if !eval_bool(c, &Scope::at(&rec))? {
            return Err(EngineError::ConstraintViolated {
                index,
                constraint: print::bool_expr(c),
            });
        }
    }
    check_caps(model, &rec)?;
    Ok(rec)
}

/// Computes the successor of `cur`.
pub fn step(model: &Model, cur: &StepRecord) -> Result<StepRecord, EngineError> {
    let fields = model.state_decl.fields();
    let mut children: Vec<(String, i64, i64, Vec<(String, BitVecValue)>)> = Vec::new();
    let mut writes: Vec<Option<BitVecValue>> = vec![None; fields.len()];
    let mut fired = false;

    for inst in cur.instances.iter().filter(|i| i.status == EventStatus::Active) {
        fired = true;
        let Some(spec) = model.event(&inst.spec) else {
            continue;
        };
        let scope = Scope {
            cur,
            next: None,
            data: &inst.data,
        };
        for (ci, t) in spec.triggers.iter().enumerate() {
            if !eval_bool(&t.condition, &scope)? {
                continue;
            }
            let mut data = zero_data(model, &t.target);
            for (name, e) in &t.assignments {
                let v = eval_expr(e, &scope)?;
                if let Some(slot) = data.iter_mut().find(|(n, _)| n == name) {
                    slot.1 = v.resize(slot.1.width());
                }
            }
            children.push((t.target.clone(), ci as i64, inst.event_id as i64, data));
        }
        for sc in &spec.state_changes {
            if !eval_bool(&sc.condition, &scope)? {
                continue;
            }
            let idx = fields
                .iter()
                .position(|(i, f, _)| *i == sc.target.instance && *f == sc.target.field)
                .ok_or_else(|| EvalError::Unresolved(sc.target.to_string()))?;
            let v = eval_expr(&sc.value, &scope)?.resize(fields[idx].2);
            match writes[idx] {
                Some(prev) if prev != v => {
                    return Err(EngineError::WriteConflict {
                        step: cur.step_index,
                        target: sc.target.to_string(),
                        first: prev.bits(),
                        second: v.bits(),
                    })
                }
                _ => writes[idx] = Some(v),
            }
        }
    }

    let pending: Vec<&EventInstance> = cur
        .instances
        .iter()
        .filter(|i| i.status == EventStatus::Pending)
        .collect();
    let next_time = if fired || !children.is_empty() {
        cur.time + 1
    } else {
        match pending.iter().map(|i| i.ready_time()).min() {
            Some(ready) => ready.max(cur.time + 1),
            None => cur.time + 1,
        }
    };

    let mut instances: Vec<EventInstance> = pending
        .into_iter()
        .map(|i| {
            let mut i = i.clone();
            if next_time >= i.ready_time() {
                i.status = EventStatus::Active;
            }
            i
        })
        .collect();
    let mut next_id = cur.next_event_id;
    for (spec, reason, parent, data) in children {
        let delay = model.event(&spec).map_or(0, |e| e.effective_delay());
        instances.push(EventInstance {
            spec,
            status: if delay == 0 {
                EventStatus::Active
            } else {
                EventStatus::Pending
            },
            appearance_time: next_time,
            delay,
            event_id: next_id,
            reason,
            parent_id: parent,
            data,
        });
        next_id += 1;
    }

    let machine_state = cur
        .machine_state
        .iter()
        .zip(writes)
        .map(|(b, w)| StateBinding {
            value: w.unwrap_or(b.value),
            ..b.clone()
        })
        .collect();
    let rec = StepRecord {
        step_index: cur.step_index + 1,
        time: next_time,
        machine_state,
        instances,
        next_event_id: next_id,
    };
    check_caps(model, &rec)?;
    Ok(rec)
}

/// Runs with the model's own bound, stuttering to the horizon.
pub fn run_trace(model: &Model, assignment: &[StateBinding]) -> Result<Trace, EngineError> {
    run_trace_with(model, assignment, &EngineConfig::for_model(model))
}

pub fn run_trace_with(model: &Model, assignment: &[StateBinding], cfg: &EngineConfig) -> Result<Trace, EngineError> {
    if cfg.max_steps == 0 {
        return Err(EngineError::NoSteps);
    }
    let first = initial_step(model, assignment)?;
    let initial_assignment = first.machine_state.clone();
    let mut steps = vec![first];
    let mut terminated_early = false;
    while steps.len() < cfg.max_steps as usize {
        let last = steps.last().unwrap();
        if !cfg.stutter_to_max && last.is_quiescent() {
            terminated_early = true;
            break;
        }
        let next = step(model, last)?;
        steps.push(next);
    }
    Ok(Trace {
        steps,
        terminated_early,
        initial_assignment,
    })
}
