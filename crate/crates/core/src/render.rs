//! Text renderings of traces: a line-per-step listing and the event tree.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::ast::{EventStatus, Trace};

/// Line-oriented listing: one header per step, one line per instance as
/// `(spec, id, status, parent, reason, {data})`.
pub fn trace_text(t: &Trace) -> String {
    let mut o = String::new();
    for s in &t.steps {
        write!(o, "step {} time {} |", s.step_index, s.time).unwrap();
        for b in &s.machine_state {
            write!(o, " {}.{}={}", b.instance, b.field, b.value).unwrap();
        }
        o.push('\n');
        for i in &s.instances {
            let data: Vec<String> = i.data.iter().map(|(n, v)| format!("{n}={v}")).collect();
            writeln!(
                o,
                "  ({}, {}, {}, {}, {}, {{{}}})",
                i.spec,
                i.event_id,
                i.status,
                i.parent_id,
                i.reason,
                data.join(", ")
            )
            .unwrap();
        }
    }
    if t.terminated_early {
        o.push_str("terminated early: quiescent\n");
    }
    o
}

pub fn trace_json(t: &Trace) -> String {
    serde_json::to_string_pretty(t).expect("trace serializes")
}

/// Lifetime of one instance within a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: u64,
    pub spec: String,
    pub parent: Option<u64>,
    pub deployed: (u32, u64),
    pub active: Option<(u32, u64)>,
}

pub fn nodes(t: &Trace) -> Vec<Node> {
    let mut by_id: BTreeMap<u64, Node> = BTreeMap::new();
    for s in &t.steps {
        for i in &s.instances {
            let n = by_id.entry(i.event_id).or_insert_with(|| Node {
                id: i.event_id,
                spec: i.spec.clone(),
                parent: (i.parent_id >= 0).then_some(i.parent_id as u64),
                deployed: (s.step_index, s.time),
                active: None,
            });
            if i.status == EventStatus::Active && n.active.is_none() {
                n.active = Some((s.step_index, s.time));
            }
        }
    }
    by_id.into_values().collect()
}

fn node_line(n: &Node, mark: Option<u32>) -> String {
    let mut s = format!("{}#{} s{}/t{}", n.spec, n.id, n.deployed.0, n.deployed.1);
    match n.active {
        Some(a) if a != n.deployed => write!(s, " -> active s{}/t{}", a.0, a.1).unwrap(),
        Some(_) => {}
        None => s.push_str(" (pending at horizon)"),
    }
    if let Some(step) = mark {
        let hit = n.deployed.0 <= step && n.active.is_none_or(|a| a.0 >= step);
        if hit {
            s.push_str("  <==");
        }
    }
    s
}

/// Indented event forest; instances live at step `mark` are flagged.
pub fn tree_lines(ns: &[Node], mark: Option<u32>) -> Vec<String> {
    fn walk(ns: &[Node], id: u64, depth: usize, mark: Option<u32>, out: &mut Vec<String>) {
        let n = ns.iter().find(|n| n.id == id).unwrap();
        out.push(format!("{}{}", "  ".repeat(depth), node_line(n, mark)));
        for c in ns.iter().filter(|c| c.parent == Some(id)) {
            walk(ns, c.id, depth + 1, mark, out);
        }
    }
    let mut out = Vec::new();
    for r in ns.iter().filter(|n| n.parent.is_none()) {
        walk(ns, r.id, 0, mark, &mut out);
    }
    out
}

pub fn event_tree(t: &Trace) -> String {
    let mut s = tree_lines(&nodes(t), None).join("\n");
    s.push('\n');
    s
}
