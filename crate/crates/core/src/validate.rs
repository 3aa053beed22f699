//! Static well-formedness checks over a [`Model`].

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::ast::{BoolExpr, Expr, Model, SourceSpan, StateRef, STEP_RECORD, TIMING_RECORD};
use crate::bitvec::MAX_WIDTH;
use crate::parser::expr::RESERVED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.span {
            Some(s) => write!(f, "{s}: {sev}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

struct Ctx<'m> {
    model: &'m Model,
    out: Vec<Diagnostic>,
}

/// Where an expression occurs, for reference legality.
#[derive(Clone, Copy)]
enum Scope<'a> {
    /// Inside an event; carried data of that event is visible.
    Event(&'a str),
    Constraint,
    Assertion { primes: bool },
}

impl<'m> Ctx<'m> {
    fn push(&mut self, severity: Severity, key: &str, message: String) {
        self.out.push(Diagnostic {
            severity,
            message,
            span: self.model.origins.get(key).cloned(),
        });
    }

    fn error(&mut self, key: &str, message: String) {
        self.push(Severity::Error, key, message);
    }

    fn state_ref(&mut self, key: &str, r: &StateRef) {
        if self.model.state_decl.instance(&r.instance).is_none() {
            self.error(key, format!("unresolved instance `{}`", r.instance));
        } else if self.model.state_decl.field_width(&r.instance, &r.field).is_none() {
            self.error(key, format!("unresolved field `{}.{}`", r.instance, r.field));
        }
    }

    fn expr(&mut self, key: &str, e: &Expr, scope: Scope) {
        let mut refs = Vec::new();
        e.walk(&mut |x| refs.push(x.clone()));
        for x in refs {
            let primed = x.has_primed() && !matches!(x, Expr::Binary(..));
            if primed && !matches!(scope, Scope::Assertion { primes: true }) {
                self.error(key, "primed reference only allowed in ALWAYS assertions".into());
            }
            match &x {
                Expr::State(r) => self.state_ref(key, r),
                Expr::Data(f) => match scope {
                    Scope::Event(ev) => {
                        let has = self.model.event(ev).is_some_and(|s| s.data_width(f).is_some());
                        if !has {
                            self.error(key, format!("unresolved carried-data field `self.{f}` in `{ev}`"));
                        }
                    }
                    _ => self.error(key, format!("`self.{f}` used outside an event clause")),
                },
                Expr::Count { event, .. } => {
                    if self.model.event(event).is_none() {
                        self.error(key, format!("unresolved event `{event}` in count"));
                    }
                }
                Expr::Lit(_) | Expr::Time { .. } | Expr::Step { .. } | Expr::Binary(..) => {}
            }
        }
    }

    fn bool_expr(&mut self, key: &str, b: &BoolExpr, scope: Scope) {
        let mut all = Vec::new();
        collect_top_exprs(b, &mut all);
        for e in all {
            self.expr(key, &e, scope);
        }
    }
}

fn collect_top_exprs(b: &BoolExpr, out: &mut Vec<Expr>) {
    match b {
        BoolExpr::True | BoolExpr::False => {}
        BoolExpr::Cmp(_, x, y) => {
            out.push(x.clone());
            out.push(y.clone());
        }
        BoolExpr::And(x, y) | BoolExpr::Or(x, y) => {
            collect_top_exprs(x, out);
            collect_top_exprs(y, out);
        }
        BoolExpr::Not(x) => collect_top_exprs(x, out),
    }
}

/// Returns one diagnostic per violated model invariant; empty means valid.
pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let mut c = Ctx {
        model,
        out: Vec::new(),
    };
    let decl = &model.state_decl;

    let mut seen = HashSet::new();
    for t in &decl.types {
        let key = format!("type:{}", t.name);
        if !seen.insert(t.name.as_str()) {
            c.error(&key, format!("duplicate type `{}`", t.name));
        }
        let mut fields = HashSet::new();
        for f in &t.fields {
            if !fields.insert(f.name.as_str()) {
                c.error(&key, format!("duplicate field `{}` in type `{}`", f.name, t.name));
            }
            if !(1..=MAX_WIDTH).contains(&f.width) {
                c.error(&key, format!("field `{}.{}` has width {} outside 1..={MAX_WIDTH}", t.name, f.name, f.width));
            }
        }
    }
    let mut seen = HashSet::new();
    for i in &decl.instances {
        let key = format!("instance:{}", i.name);
        if !seen.insert(i.name.as_str()) {
            c.error(&key, format!("duplicate instance `{}`", i.name));
        }
        if RESERVED.contains(&i.name.as_str()) || i.name == TIMING_RECORD || i.name == STEP_RECORD {
            c.error(&key, format!("instance name `{}` is reserved", i.name));
        }
        if decl.type_spec(&i.type_name).is_none() {
            c.error(&key, format!("instance `{}` has unresolved type `{}`", i.name, i.type_name));
        }
    }

    if model.events.is_empty() {
        c.error("section:Events", "at least one event required".into());
    }
    let mut seen = HashSet::new();
    for ev in &model.events {
        let key = format!("event:{}", ev.name);
        if !seen.insert(ev.name.as_str()) {
            c.error(&key, format!("duplicate event `{}`", ev.name));
        }
        let mut data = HashSet::new();
        for d in &ev.carried_data {
            if !data.insert(d.name.as_str()) {
                c.error(&key, format!("duplicate carried-data field `{}` in `{}`", d.name, ev.name));
            }
            if !(1..=MAX_WIDTH).contains(&d.width) {
                c.error(&key, format!("carried-data field `{}` has width {} outside 1..={MAX_WIDTH}", d.name, d.width));
            }
        }
        let tkey = format!("event:{}.triggers", ev.name);
        let tkey = if model.origins.get(&tkey).is_some() { tkey } else { key.clone() };
        for t in &ev.triggers {
            c.bool_expr(&tkey, &t.condition, Scope::Event(&ev.name));
            match model.event(&t.target) {
                None => c.error(&tkey, format!("unresolved event `{}` in trigger of `{}`", t.target, ev.name)),
                Some(target) => {
                    for (f, e) in &t.assignments {
                        if target.data_width(f).is_none() {
                            c.error(&tkey, format!("event `{}` carries no data field `{f}`", t.target));
                        }
                        c.expr(&tkey, e, Scope::Event(&ev.name));
                    }
                }
            }
        }
        let skey = format!("event:{}.state_changes", ev.name);
        let skey = if model.origins.get(&skey).is_some() { skey } else { key.clone() };
        for s in &ev.state_changes {
            c.bool_expr(&skey, &s.condition, Scope::Event(&ev.name));
            if s.target.primed {
                c.error(&skey, "state-change target cannot be primed".into());
            }
            c.state_ref(&skey, &s.target);
            c.expr(&skey, &s.value, Scope::Event(&ev.name));
        }
        if ev.present_at_start && ev.delay != 0 {
            c.push(
                Severity::Warning,
                &key,
                format!("`{}` is present at start: delay forced to 0 (declared {})", ev.name, ev.delay),
            );
        }
    }
    for (name, cap) in &model.instance_caps {
        let key = format!("event:{name}");
        if model.event(name).is_none() {
            c.error(&key, format!("instance cap for unresolved event `{name}`"));
        }
        if *cap == 0 {
            c.error(&key, format!("instance cap for `{name}` must be positive"));
        }
    }

    let mut seen = HashSet::new();
    for a in &model.assertions {
        let key = format!("assertion:{}", a.name);
        if !seen.insert(a.name.as_str()) {
            c.error(&key, format!("duplicate assertion `{}`", a.name));
        }
        let primes = a.mode == crate::ast::AssertionMode::Always;
        if !primes && a.body.has_primed() {
            c.error(&key, "primed reference illegal in FINALLY".into());
        }
        c.bool_expr(&key, &a.body, Scope::Assertion { primes: true });
    }
    for (i, b) in model.initial_constraints.iter().enumerate() {
        c.bool_expr(&format!("constraint:{i}"), b, Scope::Constraint);
    }

    if model.max_steps < 1 {
        c.error("section:MaxSteps", "MaxSteps must be at least 1".into());
    }
    if !(1..=MAX_WIDTH).contains(&model.int_width) {
        c.error("section:IntWidth", format!("IntWidth must be in 1..={MAX_WIDTH}"));
    } else if model.int_width < 64 && (1u64 << model.int_width) <= model.max_steps as u64 {
        c.push(
            Severity::Warning,
            "section:IntWidth",
            format!("2^{} does not exceed MaxSteps {}", model.int_width, model.max_steps),
        );
    }
    c.out
}
