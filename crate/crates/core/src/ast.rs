//! Domain types shared by the parser, engine, checker, composer and emitter.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitvec::BitVecValue;

/// Instance cap applied when an event spec does not declare `MaxInstances`.
pub const DEFAULT_INSTANCE_CAP: u32 = 8;

/// Reserved names for the global timing and step records.
pub const TIMING_RECORD: &str = "TimingRecord";
pub const STEP_RECORD: &str = "StepRecord";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub col_start: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, col_start: u32, col_end: u32) -> Self {
        Self {
            file: file.into(),
            line: line.max(1),
            col_start: col_start.max(1),
            col_end: col_end.max(col_start.max(1)),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.col_end > self.col_start {
            write!(f, "{}:{}:{}-{}", self.file, self.line, self.col_start, self.col_end)
        } else {
            write!(f, "{}:{}:{}", self.file, self.line, self.col_start)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSpec {
    pub name: String,
    pub fields: Vec<FieldDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDecl {
    pub types: Vec<TypeSpec>,
    pub instances: Vec<InstanceSpec>,
}

impl StateDecl {
    pub fn type_spec(&self, name: &str) -> Option<&TypeSpec> {
        self.types.iter().find(|t| t.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&InstanceSpec> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn field_width(&self, instance: &str, field: &str) -> Option<u32> {
        let inst = self.instance(instance)?;
        let ty = self.type_spec(&inst.type_name)?;
        ty.fields.iter().find(|f| f.name == field).map(|f| f.width)
    }

    /// Every `(instance, field, width)` in declaration order.
    pub fn fields(&self) -> Vec<(String, String, u32)> {
        let mut out = Vec::new();
        for inst in &self.instances {
            if let Some(ty) = self.type_spec(&inst.type_name) {
                for f in &ty.fields {
                    out.push((inst.name.clone(), f.name.clone(), f.width));
                }
            }
        }
        out
    }

    pub fn total_bits(&self) -> u32 {
        self.fields().iter().map(|(_, _, w)| *w).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateRef {
    pub instance: String,
    pub field: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub primed: bool,
}

impl StateRef {
    pub fn new(instance: impl Into<String>, field: impl Into<String>) -> Self {
        Self {
            instance: instance.into(),
            field: field.into(),
            primed: false,
        }
    }

    pub fn unprimed(&self) -> Self {
        Self {
            primed: false,
            ..self.clone()
        }
    }
}

impl fmt::Display for StateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.field)?;
        if self.primed {
            f.write_str("'")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Lit(u64),
    State(StateRef),
    /// Carried-data field of the evaluating event instance (`self.<field>`).
    Data(String),
    /// `TimingRecord.time`, optionally primed.
    Time { primed: bool },
    /// `StepRecord.step`, optionally primed.
    Step { primed: bool },
    /// `#Event`: number of deployed (pending or active) instances of a spec.
    Count { event: String, primed: bool },
    Binary(ArithOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn state(instance: &str, field: &str) -> Self {
        Expr::State(StateRef::new(instance, field))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Binary(ArithOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Binary(ArithOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn has_primed(&self) -> bool {
        match self {
            Expr::State(r) => r.primed,
            Expr::Time { primed } | Expr::Step { primed } | Expr::Count { primed, .. } => *primed,
            Expr::Binary(_, a, b) => a.has_primed() || b.has_primed(),
            Expr::Lit(_) | Expr::Data(_) => false,
        }
    }

    /// Visits every sub-expression, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        if let Expr::Binary(_, a, b) = self {
            a.walk(f);
            b.walk(f);
        }
    }

    pub fn map_refs(&self, f: &impl Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(e) = f(self) {
            return e;
        }
        match self {
            Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(a.map_refs(f)), Box::new(b.map_refs(f))),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoolExpr {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

impl BoolExpr {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        BoolExpr::Cmp(op, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Self {
        BoolExpr::Cmp(CmpOp::Eq, a, b)
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(a))
    }

    /// Conjunction that drops a literal `true` on either side.
    pub fn and_simplified(a: BoolExpr, b: BoolExpr) -> Self {
        match (a, b) {
            (BoolExpr::True, x) | (x, BoolExpr::True) => x,
            (a, b) => BoolExpr::and(a, b),
        }
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conjoin(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        items.into_iter().fold(BoolExpr::True, BoolExpr::and_simplified)
    }

    pub fn exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.exprs(f);
                b.exprs(f);
            }
            BoolExpr::Not(a) => a.exprs(f),
        }
    }

    pub fn has_primed(&self) -> bool {
        let mut primed = false;
        self.exprs(&mut |e| {
            if e.has_primed() {
                primed = true;
            }
        });
        primed
    }

    pub fn map_refs(&self, f: &impl Fn(&Expr) -> Option<Expr>) -> BoolExpr {
        match self {
            BoolExpr::True => BoolExpr::True,
            BoolExpr::False => BoolExpr::False,
            BoolExpr::Cmp(op, a, b) => BoolExpr::Cmp(*op, a.map_refs(f), b.map_refs(f)),
            BoolExpr::And(a, b) => BoolExpr::and(a.map_refs(f), b.map_refs(f)),
            BoolExpr::Or(a, b) => BoolExpr::or(a.map_refs(f), b.map_refs(f)),
            BoolExpr::Not(a) => BoolExpr::not(a.map_refs(f)),
        }
    }

    /// Top-level conjuncts, flattening nested `and`.
    pub fn conjuncts(&self) -> Vec<&BoolExpr> {
        match self {
            BoolExpr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            BoolExpr::True => Vec::new(),
            other => vec![other],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriggerClause {
    pub condition: BoolExpr,
    pub target: String,
    /// Assignments to the child's carried data; unassigned fields default to zero.
    pub assignments: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateChangeClause {
    pub condition: BoolExpr,
    pub target: StateRef,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataField {
    pub name: String,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub name: String,
    pub carried_data: Vec<DataField>,
    pub triggers: Vec<TriggerClause>,
    pub state_changes: Vec<StateChangeClause>,
    /// Declared delay. See [`EventSpec::effective_delay`].
    pub delay: u64,
    pub present_at_start: bool,
}

impl EventSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            carried_data: Vec::new(),
            triggers: Vec::new(),
            state_changes: Vec::new(),
            delay: 0,
            present_at_start: false,
        }
    }

    /// Present-at-start specs always run with delay 0.
    pub fn effective_delay(&self) -> u64 {
        if self.present_at_start {
            0
        } else {
            self.delay
        }
    }

    pub fn data_width(&self, field: &str) -> Option<u32> {
        self.carried_data.iter().find(|d| d.name == field).map(|d| d.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventStatus {
    Undeployed = 0,
    Pending = 1,
    Active = 2,
}

impl fmt::Display for EventStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventStatus::Undeployed => "undeployed",
            EventStatus::Pending => "pending",
            EventStatus::Active => "active",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventInstance {
    pub spec: String,
    pub status: EventStatus,
    pub appearance_time: u64,
    pub delay: u64,
    pub event_id: u64,
    /// Index of the triggering clause in the parent's spec; -1 at start.
    pub reason: i64,
    /// `event_id` of the parent instance; -1 at start.
    pub parent_id: i64,
    pub data: Vec<(String, BitVecValue)>,
}

impl EventInstance {
    pub fn ready_time(&self) -> u64 {
        self.appearance_time.saturating_add(self.delay)
    }

    pub fn datum(&self, field: &str) -> Option<BitVecValue> {
        self.data.iter().find(|(n, _)| n == field).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssertionMode {
    #[serde(rename = "ALWAYS")]
    Always,
    #[serde(rename = "FINALLY")]
    Finally,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub mode: AssertionMode,
    pub body: BoolExpr,
}

/// Source locations of model items, keyed by item path
/// (`event:Name`, `assertion:Name`, `constraint:0`, `type:Name`, ...).
///
/// Locations never take part in structural equality.
#[derive(Debug, Clone, Default)]
pub struct Origins(pub HashMap<String, SourceSpan>);

impl PartialEq for Origins {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Origins {}

impl Origins {
    pub fn get(&self, key: &str) -> Option<&SourceSpan> {
        self.0.get(key)
    }

    pub fn insert(&mut self, key: impl Into<String>, span: SourceSpan) {
        self.0.insert(key.into(), span);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub state_decl: StateDecl,
    pub events: Vec<EventSpec>,
    pub assertions: Vec<Assertion>,
    pub initial_constraints: Vec<BoolExpr>,
    pub max_steps: u32,
    pub int_width: u32,
    pub instance_caps: BTreeMap<String, u32>,
    pub origins: Origins,
}

impl Model {
    pub fn event(&self, name: &str) -> Option<&EventSpec> {
        self.events.iter().find(|e| e.name == name)
    }

    pub fn event_mut(&mut self, name: &str) -> Option<&mut EventSpec> {
        self.events.iter_mut().find(|e| e.name == name)
    }

    pub fn instance_cap(&self, event: &str) -> u32 {
        self.instance_caps.get(event).copied().unwrap_or(DEFAULT_INSTANCE_CAP)
    }

    pub fn max_delay(&self) -> u64 {
        self.events.iter().map(EventSpec::effective_delay).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateBinding {
    pub instance: String,
    pub field: String,
    pub value: BitVecValue,
}

impl StateBinding {
    pub fn state_ref(&self) -> StateRef {
        StateRef::new(&self.instance, &self.field)
    }
}

/// Machine state in declaration order.
pub type MachineState = Vec<StateBinding>;

/// A concrete initial assignment, one binding per declared state field.
pub type Assignment = Vec<StateBinding>;

pub fn lookup(state: &[StateBinding], instance: &str, field: &str) -> Option<BitVecValue> {
    state
        .iter()
        .find(|b| b.instance == instance && b.field == field)
        .map(|b| b.value)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: u32,
    pub time: u64,
    pub machine_state: MachineState,
    pub instances: Vec<EventInstance>,
    /// Next unused event id; ids are never reused within a trace.
    pub next_event_id: u64,
}

impl StepRecord {
    pub fn value(&self, instance: &str, field: &str) -> Option<BitVecValue> {
        lookup(&self.machine_state, instance, field)
    }

    pub fn is_quiescent(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn deployed_count(&self, spec: &str) -> u64 {
        self.instances.iter().filter(|i| i.spec == spec).count() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<StepRecord>,
    pub terminated_early: bool,
    pub initial_assignment: Assignment,
}

impl Trace {
    pub fn times(&self) -> Vec<(u32, u64)> {
        self.steps.iter().map(|s| (s.step_index, s.time)).collect()
    }

    /// Steps whose predecessor still had deployed events (step 0 counts).
    pub fn non_stutter_steps(&self) -> usize {
        (0..self.steps.len())
            .filter(|&i| i == 0 || !self.steps[i - 1].is_quiescent())
            .count()
    }

    /// Parent edges `(parent_id, child_id)` of the event forest, in first-seen order.
    pub fn edges(&self) -> Vec<(u64, u64)> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for s in &self.steps {
            for i in &s.instances {
                if i.parent_id >= 0 && seen.insert(i.event_id) {
                    out.push((i.parent_id as u64, i.event_id));
                }
            }
        }
        out
    }
}
