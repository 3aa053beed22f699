//! Canonical text for expressions and clauses, and model-file output.
//!
//! Printing inserts only the parentheses needed to re-parse to the same
//! tree, so `parse(print(x)) == x` for every well-formed `x`.

use std::fmt::Write;

use crate::ast::{
    ArithOp, Assertion, AssertionMode, BoolExpr, DataField, Expr, Model, StateChangeClause, TriggerClause,
    STEP_RECORD, TIMING_RECORD,
};

fn prime(p: bool) -> &'static str {
    if p {
        "'"
    } else {
        ""
    }
}

fn expr_into(out: &mut String, e: &Expr, atom: bool) {
    match e {
        Expr::Lit(n) => write!(out, "{n}").unwrap(),
        Expr::State(r) => write!(out, "{r}").unwrap(),
        Expr::Data(f) => write!(out, "self.{f}").unwrap(),
        Expr::Time { primed } => write!(out, "{TIMING_RECORD}.time{}", prime(*primed)).unwrap(),
        Expr::Step { primed } => write!(out, "{STEP_RECORD}.step{}", prime(*primed)).unwrap(),
        Expr::Count { event, primed } => write!(out, "#{event}{}", prime(*primed)).unwrap(),
        Expr::Binary(op, a, b) => {
            if atom {
                out.push('(');
            }
            expr_into(out, a, false);
            out.push_str(match op {
                ArithOp::Add => " + ",
                ArithOp::Sub => " - ",
            });
            expr_into(out, b, true);
            if atom {
                out.push(')');
            }
        }
    }
}

pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    expr_into(&mut s, e, false);
    s
}

/// Binding strength: or = 1, and = 2, not = 3, atoms = 4.
fn bool_into(out: &mut String, b: &BoolExpr, min: u8) {
    let (prec, body): (u8, Box<dyn Fn(&mut String)>) = match b {
        BoolExpr::True => (4, Box::new(|o: &mut String| o.push_str("true"))),
        BoolExpr::False => (4, Box::new(|o: &mut String| o.push_str("false"))),
        BoolExpr::Cmp(op, x, y) => (
            4,
            Box::new(move |o: &mut String| {
                expr_into(o, x, false);
                write!(o, " {} ", op.symbol()).unwrap();
                expr_into(o, y, false);
            }),
        ),
        BoolExpr::Or(x, y) => (
            1,
            Box::new(move |o: &mut String| {
                bool_into(o, x, 1);
                o.push_str(" or ");
                bool_into(o, y, 2);
            }),
        ),
        BoolExpr::And(x, y) => (
            2,
            Box::new(move |o: &mut String| {
                bool_into(o, x, 2);
                o.push_str(" and ");
                bool_into(o, y, 3);
            }),
        ),
        BoolExpr::Not(x) => (
            3,
            Box::new(move |o: &mut String| {
                o.push_str("not ");
                bool_into(o, x, 3);
            }),
        ),
    };
    if prec < min {
        out.push('(');
        body(out);
        out.push(')');
    } else {
        body(out);
    }
}

pub fn bool_expr(b: &BoolExpr) -> String {
    let mut s = String::new();
    bool_into(&mut s, b, 0);
    s
}

fn guard_prefix(c: &BoolExpr) -> String {
    match c {
        BoolExpr::True => String::new(),
        c => format!("IF {} : ", bool_expr(c)),
    }
}

pub fn trigger(t: &TriggerClause) -> String {
    let data = if t.assignments.is_empty() {
        "NONE".to_string()
    } else {
        t.assignments
            .iter()
            .map(|(f, e)| format!("{f}={}", expr(e)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!("{}Trigger {}{{{data}}}", guard_prefix(&t.condition), t.target)
}

pub fn state_change(s: &StateChangeClause) -> String {
    format!("{}SC {} <- {}", guard_prefix(&s.condition), s.target, expr(&s.value))
}

fn join_or_none(items: Vec<String>) -> String {
    if items.is_empty() {
        "None".into()
    } else {
        items.join("; ")
    }
}

pub fn triggers(ts: &[TriggerClause]) -> String {
    join_or_none(ts.iter().map(trigger).collect())
}

pub fn state_changes(ss: &[StateChangeClause]) -> String {
    join_or_none(ss.iter().map(state_change).collect())
}

pub fn carried_data(ds: &[DataField]) -> String {
    join_or_none(ds.iter().map(|d| format!("{}: BV[{}]", d.name, d.width)).collect()).replace("; ", ", ")
}

pub fn assertion_body(a: &Assertion) -> String {
    let mode = match a.mode {
        AssertionMode::Always => "ALWAYS",
        AssertionMode::Finally => "FINALLY",
    };
    format!("{mode} {}", bool_expr(&a.body))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Serializes a model in the model-file format.
pub fn model_yaml(m: &Model) -> String {
    let mut o = String::new();
    o.push_str("---\nMachineState:\n");
    if m.state_decl.types.is_empty() {
        o.push_str("  - TypeSpec: []\n");
    } else {
        o.push_str("  - TypeSpec:\n");
        for t in &m.state_decl.types {
            let fields: Vec<String> = t.fields.iter().map(|f| format!("{}: BV[{}]", f.name, f.width)).collect();
            writeln!(o, "     - {}: {{{}}}", t.name, fields.join(", ")).unwrap();
        }
    }
    if m.state_decl.instances.is_empty() {
        o.push_str("  - InstanceSpec: []\n");
    } else {
        o.push_str("  - InstanceSpec:\n");
        for i in &m.state_decl.instances {
            writeln!(o, "     - {}: {}", i.name, i.type_name).unwrap();
        }
    }
    o.push_str("Events:\n");
    for e in &m.events {
        writeln!(o, "  - Name: {}", quote(&e.name)).unwrap();
        writeln!(o, "    CarriesData: {}", quote(&carried_data(&e.carried_data))).unwrap();
        writeln!(o, "    TriggersEvent: {}", quote(&triggers(&e.triggers))).unwrap();
        writeln!(o, "    StateChanges: {}", quote(&state_changes(&e.state_changes))).unwrap();
        writeln!(o, "    TimingDelay: {}", quote(&e.delay.to_string())).unwrap();
        let p = if e.present_at_start { "Yes" } else { "No" };
        writeln!(o, "    PresentAtStart: {}", quote(p)).unwrap();
        if let Some(cap) = m.instance_caps.get(&e.name) {
            writeln!(o, "    MaxInstances: {cap}").unwrap();
        }
    }
    if m.assertions.is_empty() {
        o.push_str("Assertions: []\n");
    } else {
        o.push_str("Assertions:\n");
        for a in &m.assertions {
            writeln!(o, "  - Name: {}", quote(&a.name)).unwrap();
            writeln!(o, "    Assert: {}", quote(&assertion_body(a))).unwrap();
        }
    }
    if m.initial_constraints.is_empty() {
        o.push_str("InitialState: []\n");
    } else {
        o.push_str("InitialState:\n");
        for (i, c) in m.initial_constraints.iter().enumerate() {
            writeln!(o, "  - Constraint{}: {}", i + 1, quote(&bool_expr(c))).unwrap();
        }
    }
    writeln!(o, "MaxSteps: {}", m.max_steps).unwrap();
    writeln!(o, "IntWidth: {}", m.int_width).unwrap();
    o
}
