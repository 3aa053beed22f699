//! Brute-force reference checker shared by the integration tests.
//!
//! Enumerates every value of every state field (no free-bit analysis),
//! filters with its own expression evaluator, and checks assertions with
//! that evaluator too. Only trace execution is borrowed from the engine.

#![allow(dead_code)]

use maestro::ast::{ArithOp, AssertionMode, Assignment, BoolExpr, CmpOp, Expr, Model, StepRecord};
use maestro::engine::{self, run_trace};

/// Value and width; arithmetic wraps at the wider operand.
type Bv = (u128, u32);

fn mask(w: u32) -> u128 {
    (1u128 << w) - 1
}

struct Env<'a> {
    field: &'a dyn Fn(&str, &str, bool) -> Option<Bv>,
    time: [u64; 2],
    step: [u64; 2],
    count: &'a dyn Fn(&str, bool) -> u64,
}

fn ev(e: &Expr, env: &Env) -> Bv {
    match e {
        Expr::Lit(v) => (*v as u128, (64 - v.leading_zeros()).max(1)),
        Expr::State(r) => (env.field)(&r.instance, &r.field, r.primed).expect("declared field"),
        Expr::Data(_) => panic!("carried data outside a clause"),
        Expr::Time { primed } => (env.time[*primed as usize] as u128, 64),
        Expr::Step { primed } => (env.step[*primed as usize] as u128, 64),
        Expr::Count { event, primed } => ((env.count)(event, *primed) as u128, 64),
        Expr::Binary(op, a, b) => {
            let (x, wa) = ev(a, env);
            let (y, wb) = ev(b, env);
            let w = wa.max(wb);
            let m = mask(w);
            let v = match op {
                ArithOp::Add => (x + y) & m,
                ArithOp::Sub => (x + (m + 1) - y) & m,
            };
            (v, w)
        }
    }
}

fn holds(b: &BoolExpr, env: &Env) -> bool {
    match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Cmp(op, a, c) => {
            let (x, y) = (ev(a, env).0, ev(c, env).0);
            match op {
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            }
        }
        BoolExpr::And(a, c) => holds(a, env) && holds(c, env),
        BoolExpr::Or(a, c) => holds(a, env) || holds(c, env),
        BoolExpr::Not(a) => !holds(a, env),
    }
}

fn at_step(b: &BoolExpr, cur: &StepRecord, next: Option<&StepRecord>) -> bool {
    let field = |i: &str, f: &str, primed: bool| {
        let s = if primed { next? } else { cur };
        s.value(i, f).map(|v| (v.bits() as u128, v.width()))
    };
    let count = |e: &str, primed: bool| {
        let s = if primed { next.expect("successor") } else { cur };
        s.instances.iter().filter(|x| x.spec == e).count() as u64
    };
    let env = Env {
        field: &field,
        time: [cur.time, next.map_or(0, |n| n.time)],
        step: [cur.step_index as u64, next.map_or(0, |n| n.step_index as u64)],
        count: &count,
    };
    holds(b, &env)
}

fn admits(model: &Model, values: &[(String, String, u32, u64)]) -> bool {
    let field = |i: &str, f: &str, _: bool| {
        values
            .iter()
            .find(|(a, b, _, _)| a == i && b == f)
            .map(|(_, _, w, v)| (*v as u128, *w))
    };
    let count = |e: &str, _: bool| model.event(e).map_or(0, |s| s.present_at_start as u64);
    let env = Env {
        field: &field,
        time: [0, 0],
        step: [0, 0],
        count: &count,
    };
    model.initial_constraints.iter().all(|c| holds(c, &env))
}

/// Per assertion, the first failing assignment in enumeration order and
/// the step at which it fails.
pub struct OracleReport {
    pub results: Vec<(String, Option<(Assignment, u32)>)>,
    pub admitted: u64,
}

/// Checks `model` by enumerating all `2^total_bits` initial states,
/// first declared field most significant.
pub fn oracle_check(model: &Model) -> OracleReport {
    let fields = model.state_decl.fields();
    let total: u32 = fields.iter().map(|f| f.2).sum();
    assert!(total <= 24, "oracle enumeration too large: {total} bits");
    let mut results: Vec<(String, Option<(Assignment, u32)>)> =
        model.assertions.iter().map(|a| (a.name.clone(), None)).collect();
    let mut admitted = 0;
    for k in 0u64..(1u64 << total) {
        let mut shift = total;
        let values: Vec<(String, String, u32, u64)> = fields
            .iter()
            .map(|(i, f, w)| {
                shift -= w;
                (i.clone(), f.clone(), *w, (k >> shift) & ((1u64 << w) - 1))
            })
            .collect();
        if !admits(model, &values) {
            continue;
        }
        admitted += 1;
        let triples: Vec<(&str, &str, u64)> = values.iter().map(|(i, f, _, v)| (i.as_str(), f.as_str(), *v)).collect();
        let a = engine::assignment(model, &triples).unwrap();
        let t = run_trace(model, &a).expect("admitted assignment executes");
        let n = t.steps.len();
        for (slot, asr) in results.iter_mut().zip(&model.assertions) {
            if slot.1.is_some() {
                continue;
            }
            let fail = match asr.mode {
                AssertionMode::Finally => (!at_step(&asr.body, &t.steps[n - 1], None)).then_some(n - 1),
                AssertionMode::Always if asr.body.has_primed() => {
                    (0..n - 1).find(|&i| !at_step(&asr.body, &t.steps[i], Some(&t.steps[i + 1])))
                }
                AssertionMode::Always => (0..n).find(|&i| !at_step(&asr.body, &t.steps[i], None)),
            };
            if let Some(s) = fail {
                slot.1 = Some((a.clone(), s as u32));
            }
        }
    }
    OracleReport { results, admitted }
}

/// Compares `actual` with a reviewed file under `corpus/golden`;
/// `UPDATE_GOLDEN=1` rewrites it instead.
pub fn golden(name: &str, actual: &str) -> bool {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some_and(|v| v == "1") {
        std::fs::write(&path, actual).unwrap();
        return true;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    want == actual
}

pub fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub struct FuzzStats {
    pub inputs: u64,
    pub rejected: u64,
    pub unlocated: Vec<String>,
}

fn mutate(rng: &mut impl rand::Rng, src: &[u8]) -> Vec<u8> {
    const NOISE: &[u8] = b" \t\n:-[]{},\"'#|&*!<>=+.0123456789abcXYZ\xff\xc3";
    let mut v = src.to_vec();
    for _ in 0..rng.gen_range(1..6) {
        let n = v.len().max(1);
        match rng.gen_range(0..6) {
            0 if !v.is_empty() => {
                let i = rng.gen_range(0..v.len());
                v[i] = NOISE[rng.gen_range(0..NOISE.len())];
            }
            1 => {
                let i = rng.gen_range(0..=v.len());
                v.insert(i, NOISE[rng.gen_range(0..NOISE.len())]);
            }
            2 if !v.is_empty() => {
                let i = rng.gen_range(0..v.len());
                let j = (i + rng.gen_range(1..40)).min(v.len());
                v.drain(i..j);
            }
            3 => {
                let i = rng.gen_range(0..n).min(v.len());
                let j = (i + rng.gen_range(1..80)).min(v.len());
                let chunk = v[i..j].to_vec();
                let k = rng.gen_range(0..=v.len());
                v.splice(k..k, chunk);
            }
            4 => v.truncate(rng.gen_range(0..=v.len())),
            _ => {
                let lines: Vec<&[u8]> = v.split(|&b| b == b'\n').collect();
                let a = rng.gen_range(0..lines.len());
                let b = rng.gen_range(0..lines.len());
                let mut l: Vec<Vec<u8>> = lines.iter().map(|x| x.to_vec()).collect();
                l.swap(a, b);
                v = l.join(&b'\n');
            }
        }
    }
    v
}

/// Feeds `n` mutated corpus documents to the model and transform parsers.
pub fn fuzz_parsers(n: u64, seed: u64) -> FuzzStats {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let seeds: Vec<(&str, bool)> = maestro::corpus::corpus_manifest()
        .into_iter()
        .filter_map(|e| {
            let text = maestro::corpus::file(e.path.as_deref()?)?;
            Some((text, e.kind == maestro::corpus::EntryKind::Model))
        })
        .collect();
    let mut stats = FuzzStats {
        inputs: 0,
        rejected: 0,
        unlocated: Vec::new(),
    };
    for _ in 0..n {
        let (src, is_model) = seeds[rng.gen_range(0..seeds.len())];
        let input = mutate(&mut rng, src.as_bytes());
        stats.inputs += 1;
        if is_model {
            if let Err(e) = maestro::parser::parse_model_bytes(&input, "fuzz.yaml") {
                stats.rejected += 1;
                if e.span().is_none() {
                    stats.unlocated.push(e.to_string());
                }
            }
        } else {
            let text = String::from_utf8_lossy(&input);
            if maestro::integra::parse_integra(&text, "fuzz").is_err() {
                stats.rejected += 1;
            }
        }
    }
    stats
}
