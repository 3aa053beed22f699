//! Alloy source emission.
//!
//! The output opens a bitvector module and relies on these helpers from
//! it, all with bits listed least significant first:
//!
//! - `BitVecW` signatures for each width `W` in use
//! - `bitVecFromBitsW[b0, .., b(W-1), v]`: `v` holds exactly these bits
//! - `addBitsToVecW[b0, .., b(W-1), v]`: `v'` is `v` plus these bits
//! - `toInt[v]`: the unsigned value of `v`
//! - `intToVecW[i, v]`: `v` holds `i` modulo 2^W
//!
//! Time is left loose (`time' > time`) with activation tied to each
//! instance's ready time, so Alloy may explore schedules the native
//! engine never takes.

use std::fmt::Write;

use crate::ast::{ArithOp, AssertionMode, BoolExpr, CmpOp, EventSpec, Expr, Model, StateRef};
use crate::validate::{Diagnostic, Severity};

pub const DEFAULT_BITVECTOR_LIB: &str = "bitvector";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emitted {
    pub text: String,
    pub diagnostics: Vec<Diagnostic>,
}

fn sig_name(r: &StateRef) -> String {
    format!("{}_{}", r.instance, r.field)
}

fn bits(v: u64, width: u32) -> String {
    (0..width)
        .map(|i| if v >> i & 1 == 1 { "One" } else { "Zero" })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Translation context: the quantified event variable bound to `self`
/// and the name used for count comprehensions.
struct Ctx<'a> {
    this: Option<&'a str>,
    count_var: &'a str,
}

fn prime(primed: bool) -> &'static str {
    if primed {
        "'"
    } else {
        ""
    }
}

fn expr(e: &Expr, cx: &Ctx) -> String {
    match e {
        Expr::Lit(v) => v.to_string(),
        Expr::State(r) => format!("toInt[{}.val{}]", sig_name(r), prime(r.primed)),
        Expr::Data(f) => format!("toInt[{}.{f}]", cx.this.unwrap_or("e")),
        Expr::Time { primed } => format!("TimingRecord.time{}", prime(*primed)),
        Expr::Step { primed } => format!("StepRecord.step{}", prime(*primed)),
        Expr::Count { event, primed } => {
            let v = cx.count_var;
            format!("#{{{v}:{event} | {v}.status{} >= 1}}", prime(*primed))
        }
        Expr::Binary(op, a, b) => {
            let f = match op {
                ArithOp::Add => "add",
                ArithOp::Sub => "sub",
            };
            format!("{f}[{}, {}]", expr(a, cx), expr(b, cx))
        }
    }
}

fn bool_expr(b: &BoolExpr, cx: &Ctx) -> String {
    match b {
        BoolExpr::True => "(no none)".into(),
        BoolExpr::False => "(some none)".into(),
        BoolExpr::Cmp(op, a, c) => format!("({} {} {})", expr(a, cx), op.symbol(), expr(c, cx)),
        BoolExpr::And(a, c) => format!("({} and {})", bool_expr(a, cx), bool_expr(c, cx)),
        BoolExpr::Or(a, c) => format!("({} or {})", bool_expr(a, cx), bool_expr(c, cx)),
        BoolExpr::Not(a) => format!("(not {})", bool_expr(a, cx)),
    }
}

/// `f = lit` on a state field becomes a bit pattern; `f' = f + lit` an
/// increment. Anything else goes through integer translation.
fn state_pattern(b: &BoolExpr, m: &Model) -> Option<String> {
    let BoolExpr::Cmp(CmpOp::Eq, lhs, rhs) = b else {
        return None;
    };
    match (lhs, rhs) {
        (Expr::State(r), Expr::Lit(v)) | (Expr::Lit(v), Expr::State(r)) if !r.primed => {
            let w = m.state_decl.field_width(&r.instance, &r.field)?;
            Some(format!("bitVecFromBits{w}[{}, {}.val]", bits(*v, w), sig_name(r)))
        }
        (Expr::State(next), Expr::Binary(ArithOp::Add, x, k)) if next.primed => match (&**x, &**k) {
            (Expr::State(cur), Expr::Lit(v)) if !cur.primed && cur.unprimed() == next.unprimed() => {
                let w = m.state_decl.field_width(&cur.instance, &cur.field)?;
                Some(format!("addBitsToVec{w}[{}, {}.val]", bits(*v, w), sig_name(cur)))
            }
            _ => None,
        },
        _ => None,
    }
}

fn predicate(b: &BoolExpr, m: &Model, cx: &Ctx) -> String {
    state_pattern(b, m).unwrap_or_else(|| bool_expr(b, cx))
}

/// `p.status = 2`, conjoined with `cond` unless it is trivially true.
fn active_and(cond: &BoolExpr, cx: &Ctx) -> String {
    match cond {
        BoolExpr::True => "p.status = 2".into(),
        c => format!("p.status = 2 and {}", bool_expr(c, cx)),
    }
}

fn events_union(m: &Model) -> String {
    m.events.iter().map(|e| e.name.as_str()).collect::<Vec<_>>().join(" + ")
}

/// Largest timestamp a bounded trace can reach under the engine's schedule.
pub fn time_bound(m: &Model) -> u128 {
    let max_delay = m.events.iter().map(EventSpec::effective_delay).max().unwrap_or(0);
    u128::from(m.max_steps) * (1 + u128::from(max_delay))
}

/// Problems with representing the model's integers in `int_width` bits.
pub fn width_diagnostics(m: &Model) -> Vec<Diagnostic> {
    let cap = 1u128 << m.int_width.min(127);
    let mut out = Vec::new();
    if cap <= u128::from(m.max_steps) {
        out.push(format!("2^{} does not exceed MaxSteps {}", m.int_width, m.max_steps));
    }
    let bound = time_bound(m);
    if cap <= bound {
        out.push(format!("2^{} does not exceed the time bound {bound}", m.int_width));
    }
    out.into_iter()
        .map(|message| Diagnostic {
            severity: Severity::Warning,
            message,
            span: None,
        })
        .collect()
}

pub fn emit(m: &Model, bitvector_lib: &str) -> Emitted {
    let diagnostics = width_diagnostics(m);
    let last = m.max_steps.saturating_sub(1);
    let mut o = String::new();
    for d in &diagnostics {
        writeln!(o, "-- WARNING: {}", d.message).unwrap();
    }
    writeln!(o, "-- Module and Signature Definitions").unwrap();
    writeln!(o, "open {bitvector_lib} as bv").unwrap();
    for e in &m.events {
        writeln!(o, "sig {} {{ ", e.name).unwrap();
        let mut rels = "var status: Int, var appearance_time: Int, var delay: Int, var event_id: Int, var reason:Int, var parent_id: Int"
            .to_string();
        for f in &e.carried_data {
            write!(rels, ", var {}: BitVec{}", f.name, f.width).unwrap();
        }
        writeln!(o, "{rels} }}").unwrap();
    }
    for (inst, field, w) in m.state_decl.fields() {
        writeln!(o, "one sig {inst}_{field} {{var val:BitVec{w}}}").unwrap();
    }
    writeln!(o, "one sig TimingRecord{{var time: Int}}").unwrap();
    writeln!(o, "one sig StepRecord{{var step: Int}}").unwrap();

    writeln!(o, "-- Timing and Steps").unwrap();
    writeln!(o, "fact{{always{{").unwrap();
    writeln!(o, " StepRecord.step < {last} => {{").unwrap();
    writeln!(o, "   StepRecord.step' = add[StepRecord.step,1]").unwrap();
    writeln!(o, "   TimingRecord.time' > TimingRecord.time }}}}}}").unwrap();

    let top = Ctx {
        this: None,
        count_var: "e",
    };
    writeln!(o, "-- Initial State").unwrap();
    let mut init: Vec<String> = m
        .events
        .iter()
        .map(|e| {
            if e.present_at_start {
                format!("(one e: {} | e.status >= 1)", e.name)
            } else {
                format!("(all e: {} | e.status = 0)", e.name)
            }
        })
        .collect();
    for c in &m.initial_constraints {
        init.extend(c.conjuncts().into_iter().map(|x| predicate(x, m, &top)));
    }
    init.push("StepRecord.step = 0 and TimingRecord.time = 0".into());
    writeln!(o, "fact{{{}", init.join(" and ")).unwrap();
    let starts: Vec<&str> = m
        .events
        .iter()
        .filter(|e| e.present_at_start)
        .map(|e| e.name.as_str())
        .collect();
    if starts.is_empty() {
        writeln!(o, "}}").unwrap();
    } else {
        writeln!(
            o,
            "     all e:{} | e.status >= 1 => (e.appearance_time=0 and e.delay = 0)}}",
            starts.join(" + ")
        )
        .unwrap();
    }

    let all = events_union(m);
    writeln!(o, "-- Range and uniqueness constraints").unwrap();
    writeln!(o, "fact{{always{{").unwrap();
    writeln!(o, " -- Unique event ID constraint").unwrap();
    writeln!(
        o,
        " all disj a, b: {all} | (a.status >= 1 and b.status >= 1) => a.event_id != b.event_id"
    )
    .unwrap();
    writeln!(o, " -- Event ID, Parent ID range constraint").unwrap();
    writeln!(o, " all e: {all} | e.event_id >= 0 and e.parent_id >= -1 and e.reason >= -1 and e.parent_id < e.event_id").unwrap();
    writeln!(o, " -- Status field range constraint").unwrap();
    writeln!(o, " all e: {all} | e.status >= 0 and e.status <= 2").unwrap();
    writeln!(o, " -- Event instance counts constraint").unwrap();
    for e in &m.events {
        writeln!(o, " #{{e:{} | e.status >= 1}} <= {}", e.name, m.instance_cap(&e.name)).unwrap();
    }
    writeln!(o, " -- Tie bitvectors to machine state").unwrap();
    for (inst, field, _) in m.state_decl.fields() {
        writeln!(o, " one {inst}_{field}.val").unwrap();
    }
    writeln!(o, "}}}}").unwrap();

    lifecycle(&mut o, m, last);

    writeln!(o, "-- Assertions to check").unwrap();
    for a in &m.assertions {
        writeln!(o, "assert {} {{", a.name).unwrap();
        let body = predicate(&a.body, m, &top);
        match a.mode {
            AssertionMode::Always => writeln!(o, "    always {{StepRecord.step < {last} => {body}}}").unwrap(),
            AssertionMode::Finally => writeln!(o, "    always {{StepRecord.step = {last} => {body}}}").unwrap(),
        }
        writeln!(o, "}}").unwrap();
    }
    let scope = format!("for {} steps, {} Int", m.max_steps, m.int_width);
    writeln!(o, "run {{}} {scope}").unwrap();
    for a in &m.assertions {
        writeln!(o, "check {} {scope}", a.name).unwrap();
    }
    Emitted { text: o, diagnostics }
}

fn lifecycle(o: &mut String, m: &Model, last: u32) {
    let clause = Ctx {
        this: Some("p"),
        count_var: "x",
    };
    writeln!(o, "-- Lifecycle constraints").unwrap();
    writeln!(o, "fact{{always{{").unwrap();
    writeln!(o, "StepRecord.step < {last} => {{").unwrap();

    writeln!(o, " -- Deployment").unwrap();
    for parent in &m.events {
        for (i, t) in parent.triggers.iter().enumerate() {
            let Some(child) = m.event(&t.target) else { continue };
            let delay = child.effective_delay();
            let status = if delay == 0 { 2 } else { 1 };
            let mut post = vec![
                "c.status = 0".to_string(),
                format!("c.status' = {status}"),
                "c.appearance_time' = TimingRecord.time'".into(),
                format!("c.delay' = {delay}"),
                format!("c.reason' = {}", i + 1),
                "c.parent_id' = p.event_id".into(),
            ];
            for f in &child.carried_data {
                let v = t
                    .assignments
                    .iter()
                    .find(|(n, _)| *n == f.name)
                    .map(|(_, v)| expr(v, &clause))
                    .unwrap_or_else(|| "0".into());
                post.push(format!("intToVec{}[{v}, c.{}']", f.width, f.name));
            }
            writeln!(
                o,
                " all p: {} | ({}) => (some c: {} | {})",
                parent.name,
                active_and(&t.condition, &clause),
                child.name,
                post.join(" and ")
            )
            .unwrap();
        }
    }
    for child in &m.events {
        let causes: Vec<String> = m
            .events
            .iter()
            .flat_map(|p| p.triggers.iter().map(move |t| (p, t)))
            .filter(|(_, t)| t.target == child.name)
            .map(|(p, t)| format!("(some p: {} | {})", p.name, active_and(&t.condition, &clause)))
            .collect();
        let cause = if causes.is_empty() {
            "(some none)".to_string()
        } else {
            causes.join(" or ")
        };
        writeln!(o, " all c: {} | (c.status = 0 and c.status' >= 1) => ({cause})", child.name).unwrap();
    }

    writeln!(o, " -- Maintenance").unwrap();
    for e in &m.events {
        let n = &e.name;
        writeln!(
            o,
            " all e: {n} | e.status = 1 => ((e.status' = 1 and TimingRecord.time' < add[e.appearance_time, e.delay]) or (e.status' = 2 and TimingRecord.time' >= add[e.appearance_time, e.delay]))"
        )
        .unwrap();
        let mut keep = vec!["appearance_time", "delay", "event_id", "reason", "parent_id"]
            .into_iter()
            .map(|r| format!("e.{r}' = e.{r}"))
            .collect::<Vec<_>>();
        keep.extend(e.carried_data.iter().map(|f| format!("e.{0}' = e.{0}", f.name)));
        writeln!(o, " all e: {n} | (e.status = 1 and e.status' >= 1) => ({})", keep.join(" and ")).unwrap();
    }

    writeln!(o, " -- State updates").unwrap();
    for (inst, field, w) in m.state_decl.fields() {
        let target = StateRef::new(&inst, &field);
        let mut writers = Vec::new();
        for e in &m.events {
            for s in e.state_changes.iter().filter(|s| s.target.unprimed() == target) {
                let cond = active_and(&s.condition, &clause);
                writeln!(
                    o,
                    " all p: {} | ({cond}) => intToVec{w}[{}, {inst}_{field}.val']",
                    e.name,
                    expr(&s.value, &clause)
                )
                .unwrap();
                writers.push(format!("(some p: {} | {cond})", e.name));
            }
        }
        if writers.is_empty() {
            writeln!(o, " {inst}_{field}.val' = {inst}_{field}.val").unwrap();
        } else {
            writeln!(o, " (not ({})) => {inst}_{field}.val' = {inst}_{field}.val", writers.join(" or ")).unwrap();
        }
    }

    writeln!(o, " -- Completion").unwrap();
    for e in &m.events {
        writeln!(o, " all e: {} | e.status = 2 => e.status' = 0", e.name).unwrap();
    }
    writeln!(o, "}}}}}}").unwrap();
}
