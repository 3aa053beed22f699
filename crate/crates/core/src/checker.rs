//! Exhaustive bounded checking over initial assignments.
//!
//! A syntactic pass finds the state bits left open by `field = literal`
//! and `field = field` conjuncts; every combination of those bits is
//! enumerated in lexicographic order (first declared field most
//! significant), filtered by the full initial constraints, executed, and
//! checked against every assertion.

use std::fmt::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::ast::{Assertion, AssertionMode, Assignment, BoolExpr, CmpOp, Expr, Model, StateBinding, StateRef, Trace};
use crate::bitvec::BitVecValue;
use crate::engine::{initial_step, run_trace, EngineError};
use crate::eval::{eval_bool, EvalError, Scope};
use crate::render;

pub const DEFAULT_LIMIT: u64 = 1 << 16;

/// One enumerated bit of a state field; bit 0 is least significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeBit {
    pub state: StateRef,
    pub bit: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("{free_bits} free bits give {configurations} configurations, above the limit of {limit}")]
    EnumerationOverflow {
        free_bits: u32,
        configurations: u128,
        limit: u64,
    },
    #[error("{error} (assignment: {})", render_assignment(.assignment))]
    Engine { error: EngineError, assignment: Assignment },
    #[error("assertion `{assertion}`: {error}")]
    Eval { assertion: String, error: EvalError },
}

pub fn render_assignment(a: &[StateBinding]) -> String {
    a.iter()
        .map(|b| format!("{}.{}={}", b.instance, b.field, b.value))
        .collect::<Vec<_>>()
        .join(" ")
}

/// How each declared field obtains its value during enumeration.
#[derive(Debug, Clone)]
enum Source {
    Free { offset: u32 },
    Pinned(u64),
    Alias(usize),
}

struct Plan {
    fields: Vec<(String, String, u32)>,
    sources: Vec<Source>,
    free_bits: u32,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

fn plan(model: &Model) -> Plan {
    let fields = model.state_decl.fields();
    let index = |r: &StateRef| {
        fields
            .iter()
            .position(|(i, f, _)| *i == r.instance && *f == r.field)
    };
    let mut parent: Vec<usize> = (0..fields.len()).collect();
    let mut pin: Vec<Option<u64>> = vec![None; fields.len()];
    for c in &model.initial_constraints {
        for conj in c.conjuncts() {
            let BoolExpr::Cmp(CmpOp::Eq, a, b) = conj else {
                continue;
            };
            match (a, b) {
                (Expr::State(r), Expr::Lit(v)) | (Expr::Lit(v), Expr::State(r)) if !r.primed => {
                    if let Some(i) = index(r) {
                        pin[i].get_or_insert(*v);
                    }
                }
                (Expr::State(x), Expr::State(y)) if !x.primed && !y.primed => {
                    if let (Some(i), Some(j)) = (index(x), index(y)) {
                        if fields[i].2 == fields[j].2 {
                            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                            let (lo, hi) = (ri.min(rj), ri.max(rj));
                            parent[hi] = lo;
                        }
                    }
                }
                _ => {}
            }
        }
    }
    let mut class_pin: Vec<Option<u64>> = vec![None; fields.len()];
    for i in 0..fields.len() {
        let r = find(&mut parent, i);
        if let Some(v) = pin[i] {
            class_pin[r].get_or_insert(v);
        }
    }
    let mut sources = Vec::with_capacity(fields.len());
    let mut offset = 0;
    for i in 0..fields.len() {
        let r = find(&mut parent, i);
        let src = if r != i {
            Source::Alias(r)
        } else if let Some(v) = class_pin[r] {
            Source::Pinned(v)
        } else {
            let s = Source::Free { offset };
            offset += fields[i].2;
            s
        };
        sources.push(src);
    }
    Plan {
        fields,
        sources,
        free_bits: offset,
    }
}

impl Plan {
    fn assignment(&self, k: u64) -> Assignment {
        let mut values: Vec<u64> = vec![0; self.fields.len()];
        for (i, src) in self.sources.iter().enumerate() {
            let width = self.fields[i].2;
            values[i] = match *src {
                Source::Pinned(v) => v,
                Source::Alias(r) => values[r],
                Source::Free { offset } => {
                    // Free bits are numbered MSB-first across the enumeration word.
                    let shift = self.free_bits - offset - width;
                    (k >> shift) & crate::bitvec::mask(width)
                }
            };
        }
        self.fields
            .iter()
            .zip(values)
            .map(|((inst, field, width), v)| StateBinding {
                instance: inst.clone(),
                field: field.clone(),
                value: BitVecValue::wrapping(*width, v),
            })
            .collect()
    }
}

/// State bits not fixed by simple equalities, MSB first per field.
pub fn free_bits(model: &Model) -> Vec<FreeBit> {
    let p = plan(model);
    let mut out = Vec::new();
    for (i, src) in p.sources.iter().enumerate() {
        if let Source::Free { .. } = src {
            let (inst, field, width) = &p.fields[i];
            for bit in (0..*width).rev() {
                out.push(FreeBit {
                    state: StateRef::new(inst, field),
                    bit,
                });
            }
        }
    }
    out
}

/// Initial assignments satisfying every constraint, in enumeration order.
pub fn admitted(model: &Model, limit: u64) -> Result<Vec<Assignment>, CheckError> {
    let p = plan(model);
    let total = configurations(&p, limit)?;
    let found: Vec<Result<Option<Assignment>, CheckError>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let a = p.assignment(k);
            match initial_step(model, &a) {
                Ok(_) => Ok(Some(a)),
                Err(EngineError::ConstraintViolated { .. }) => Ok(None),
                Err(error) => Err(CheckError::Engine { error, assignment: a }),
            }
        })
        .collect();
    found.into_iter().filter_map(Result::transpose).collect()
}

fn configurations(p: &Plan, limit: u64) -> Result<u64, CheckError> {
    let total: u128 = 1u128 << p.free_bits.min(127);
    if p.free_bits >= 64 || total > limit as u128 {
        return Err(CheckError::EnumerationOverflow {
            free_bits: p.free_bits,
            configurations: total,
            limit,
        });
    }
    Ok(total as u64)
}

/// First step at which `a` is violated on `trace`, if any.
///
/// ALWAYS bodies with primed references are checked at steps `0..N-1`,
/// pairing each step with its successor; other ALWAYS bodies at every
/// step; FINALLY bodies at the last step.
pub fn first_failure(a: &Assertion, trace: &Trace) -> Result<Option<u32>, EvalError> {
    let steps = &trace.steps;
    let holds = |i: usize, next: Option<usize>| {
        eval_bool(
            &a.body,
            &Scope {
                cur: &steps[i],
                next: next.map(|j| &steps[j]),
                data: &[],
            },
        )
    };
    match a.mode {
        AssertionMode::Finally => {
            let last = steps.len() - 1;
            Ok((!holds(last, None)?).then_some(last as u32))
        }
        AssertionMode::Always if a.body.has_primed() => {
            for i in 0..steps.len().saturating_sub(1) {
                if !holds(i, Some(i + 1))? {
                    return Ok(Some(i as u32));
                }
            }
            Ok(None)
        }
        AssertionMode::Always => {
            for i in 0..steps.len() {
                if !holds(i, None)? {
                    return Ok(Some(i as u32));
                }
            }
            Ok(None)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Holds {
        configs_explored: u64,
    },
    Fails {
        step: u32,
        time: u64,
        assignment: Assignment,
        witness: Trace,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionResult {
    pub name: String,
    pub mode: AssertionMode,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub results: Vec<AssertionResult>,
    pub free_bits: u32,
    /// Assignments enumerated before the semantic filter.
    pub enumerated: u64,
    /// Assignments admitted by the initial constraints.
    pub admitted: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl PartialEq for CheckReport {
    fn eq(&self, o: &Self) -> bool {
        self.results == o.results
            && self.free_bits == o.free_bits
            && self.enumerated == o.enumerated
            && self.admitted == o.admitted
    }
}

impl CheckReport {
    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|r| matches!(r.verdict, Verdict::Holds { .. }))
    }

    pub fn result(&self, name: &str) -> Option<&AssertionResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn first_failure(&self) -> Option<&AssertionResult> {
        self.results.iter().find(|r| matches!(r.verdict, Verdict::Fails { .. }))
    }

    /// Deterministic text; wall time is left out.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        for r in &self.results {
            match &r.verdict {
                Verdict::Holds { configs_explored } => {
                    writeln!(o, "{}: HOLDS ({configs_explored} configurations)", r.name).unwrap()
                }
                Verdict::Fails {
                    step,
                    time,
                    assignment,
                    ..
                } => {
                    writeln!(o, "{}: FAILS at step {step} (time {time})", r.name).unwrap();
                    writeln!(o, "  initial: {}", render_assignment(assignment)).unwrap();
                }
            }
        }
        let failing = self.results.iter().filter(|r| matches!(r.verdict, Verdict::Fails { .. })).count();
        writeln!(
            o,
            "{} assertions, {failing} failing; {} free bits, {} enumerated, {} admitted",
            self.results.len(),
            self.free_bits,
            self.enumerated,
            self.admitted
        )
        .unwrap();
        o
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Checks every assertion over all admitted initial assignments.
pub fn check(model: &Model, limit: u64) -> Result<CheckReport, CheckError> {
    let started = Instant::now();
    let p = plan(model);
    let total = configurations(&p, limit)?;
    type Outcome = Result<Option<Vec<Option<u32>>>, CheckError>;
    let outcomes: Vec<Outcome> = (0..total)
        .into_par_iter()
        .map(|k| {
            let a = p.assignment(k);
            let trace = match run_trace(model, &a) {
                Ok(t) => t,
                Err(EngineError::ConstraintViolated { .. }) => return Ok(None),
                Err(error) => return Err(CheckError::Engine { error, assignment: a }),
            };
            let mut fails = Vec::with_capacity(model.assertions.len());
            for asr in &model.assertions {
                let f = first_failure(asr, &trace).map_err(|error| CheckError::Eval {
                    assertion: asr.name.clone(),
                    error,
                })?;
                fails.push(f);
            }
            Ok(Some(fails))
        })
        .collect();

    let mut admitted = 0u64;
    let mut first: Vec<Option<(u64, u32)>> = vec![None; model.assertions.len()];
    for (k, o) in outcomes.into_iter().enumerate() {
        let Some(fails) = o? else { continue };
        admitted += 1;
        for (slot, f) in first.iter_mut().zip(fails) {
            if let (None, Some(step)) = (&slot, f) {
                *slot = Some((k as u64, step));
            }
        }
    }

    let mut results = Vec::new();
    for (asr, f) in model.assertions.iter().zip(first) {
        let verdict = match f {
            None => Verdict::Holds {
                configs_explored: admitted,
            },
            Some((k, step)) => {
                let assignment = p.assignment(k);
                let witness = run_trace(model, &assignment).map_err(|error| CheckError::Engine {
                    error,
                    assignment: assignment.clone(),
                })?;
                Verdict::Fails {
                    step,
                    time: witness.steps[step as usize].time,
                    assignment,
                    witness,
                }
            }
        };
        results.push(AssertionResult {
            name: asr.name.clone(),
            mode: asr.mode,
            verdict,
        });
    }
    Ok(CheckReport {
        results,
        free_bits: p.free_bits,
        enumerated: total,
        admitted,
        wall_time: started.elapsed(),
    })
}

const SUFFIXES: [&str; 2] = ["_m1", "_m2"];

fn is_product(trace: &Trace) -> bool {
    let insts: Vec<&str> = trace
        .initial_assignment
        .iter()
        .map(|b| b.instance.as_str())
        .collect();
    SUFFIXES.iter().all(|s| insts.iter().any(|i| i.ends_with(s)))
}

fn side_by_side(left: &[String], right: &[String], lh: &str, rh: &str) -> String {
    let w = left.iter().map(|l| l.chars().count()).chain([lh.len()]).max().unwrap_or(0) + 4;
    let mut o = format!("{lh:<w$}{rh}\n");
    for i in 0..left.len().max(right.len()) {
        let l = left.get(i).map_or("", String::as_str);
        let r = right.get(i).map_or("", String::as_str);
        writeln!(o, "{:<w$}{}", l, r).unwrap();
    }
    o
}

/// Renders the first failing assertion's witness as annotated event trees.
pub fn explain(report: &CheckReport) -> String {
    let Some(r) = report.first_failure() else {
        return "no counterexample: all assertions hold\n".into();
    };
    let Verdict::Fails {
        step,
        time,
        assignment,
        witness,
    } = &r.verdict
    else {
        unreachable!()
    };
    let mut o = String::new();
    writeln!(o, "assertion `{}` fails at step {step} (time {time})", r.name).unwrap();
    writeln!(o, "initial: {}", render_assignment(assignment)).unwrap();
    let nodes = render::nodes(witness);
    if is_product(witness) {
        let mut cols = Vec::new();
        for s in SUFFIXES {
            let mine: Vec<render::Node> = nodes.iter().filter(|n| n.spec.ends_with(s)).cloned().collect();
            cols.push(render::tree_lines(&mine, Some(*step)));
        }
        o.push('\n');
        o.push_str(&side_by_side(&cols[0], &cols[1], "machine m1", "machine m2"));
        let at = &witness.steps[*step as usize];
        let mut diffs = Vec::new();
        for b in at.machine_state.iter().filter(|b| b.instance.ends_with(SUFFIXES[0])) {
            let base = &b.instance[..b.instance.len() - 3];
            let other = at.value(&format!("{base}{}", SUFFIXES[1]), &b.field);
            if other != Some(b.value) {
                diffs.push(format!(
                    "{base}.{}: m1={} m2={}",
                    b.field,
                    b.value,
                    other.map_or("?".to_string(), |v| v.to_string())
                ));
            }
        }
        if !diffs.is_empty() {
            writeln!(o, "\nstate differing at step {step}:").unwrap();
            for d in diffs {
                writeln!(o, "  {d}").unwrap();
            }
        }
        let mut counts: Vec<(String, [usize; 2])> = Vec::new();
        for n in &nodes {
            for (m, s) in SUFFIXES.iter().enumerate() {
                if let Some(base) = n.spec.strip_suffix(s) {
                    match counts.iter_mut().find(|(b, _)| b == base) {
                        Some((_, c)) => c[m] += 1,
                        None => {
                            let mut c = [0, 0];
                            c[m] = 1;
                            counts.push((base.to_string(), c));
                        }
                    }
                }
            }
        }
        let uneven: Vec<_> = counts.into_iter().filter(|(_, c)| c[0] != c[1]).collect();
        if !uneven.is_empty() {
            writeln!(o, "\nevent counts differing between machines:").unwrap();
            for (b, c) in uneven {
                writeln!(o, "  {b}: m1={} m2={}", c[0], c[1]).unwrap();
            }
        }
    } else {
        o.push('\n');
        for l in render::tree_lines(&nodes, Some(*step)) {
            writeln!(o, "{l}").unwrap();
        }
        let at = &witness.steps[*step as usize];
        writeln!(o, "\nstate at step {step}: {}", render_assignment(&at.machine_state)).unwrap();
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model;

    const COUNTER: &str = include_str!("../../../corpus/models/counter.yaml");

    #[test]
    fn counter_has_no_free_bits_and_holds() {
        let m = parse_model(COUNTER).unwrap();
        assert!(free_bits(&m).is_empty());
        let r = check(&m, DEFAULT_LIMIT).unwrap();
        assert!(r.all_hold(), "{}", r.to_text());
        assert_eq!(r.results.len(), 3);
    }

    #[test]
    fn unconstrained_field_is_fully_free() {
        let src = COUNTER.replace("-  Constraint1: \"ctr1.entry = 0\"", "-  Constraint1: \"true\"");
        let m = parse_model(&src).unwrap();
        assert_eq!(free_bits(&m).len(), 5);
        assert_eq!(free_bits(&m)[0].bit, 4);
        let r = check(&m, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.admitted, 32);
        assert!(matches!(check(&m, 16), Err(CheckError::EnumerationOverflow { .. })));
    }

    #[test]
    fn finally_failure_is_replayable() {
        let src = COUNTER.replace("ALWAYS #ClockEdgeEvent = 1", "FINALLY ctr1.entry = 3");
        let m = parse_model(&src).unwrap();
        let r = check(&m, DEFAULT_LIMIT).unwrap();
        let f = r.result("alwaysOneClock").unwrap();
        let Verdict::Fails { step, witness, .. } = &f.verdict else { panic!() };
        assert_eq!(*step, 32);
        assert_eq!(first_failure(&m.assertions[0], witness).unwrap(), Some(32));
        let text = explain(&r);
        assert!(text.contains("<=="), "{text}");
        assert_eq!(explain(&check(&parse_model(COUNTER).unwrap(), 1).unwrap()), "no counterexample: all assertions hold\n");
    }
}
