//! Maps a YAML document onto a [`Model`].

use std::collections::BTreeMap;

use crate::ast::{
    Assertion, DataField, EventSpec, FieldDecl, InstanceSpec, Model, Origins, SourceSpan, StateDecl, TypeSpec,
};

use super::expr::{self, Context, ExprError};
use super::yaml::{self, Key, Node, NodeKind};
use super::ParseError;

const SECTIONS: &[&str] = &["MachineState", "Events", "Assertions", "InitialState", "MaxSteps", "IntWidth"];
const EVENT_FIELDS: &[&str] = &[
    "Name",
    "CarriesData",
    "TriggersEvent",
    "StateChanges",
    "TimingDelay",
    "PresentAtStart",
];

fn err(span: &SourceSpan, msg: impl Into<String>) -> ParseError {
    ParseError::new(span.clone(), msg)
}

fn entries<'a>(node: &'a Node, what: &str) -> Result<&'a [(Key, Node)], ParseError> {
    match &node.kind {
        NodeKind::Map(e) => Ok(e),
        _ => Err(err(&node.span, format!("{what}: expected a mapping, found a {}", node.kind_name()))),
    }
}

/// Sequence items; an empty scalar reads as an empty sequence.
fn items<'a>(node: &'a Node, what: &str) -> Result<&'a [Node], ParseError> {
    match &node.kind {
        NodeKind::Seq(s) => Ok(s),
        NodeKind::Scalar { text, quoted: false } if text.is_empty() => Ok(&[]),
        _ => Err(err(&node.span, format!("{what}: expected a sequence, found a {}", node.kind_name()))),
    }
}

fn scalar<'a>(node: &'a Node, what: &str) -> Result<&'a str, ParseError> {
    node.as_scalar()
        .ok_or_else(|| err(&node.span, format!("{what}: expected a scalar, found a {}", node.kind_name())))
}

fn integer(node: &Node, what: &str) -> Result<u64, ParseError> {
    let s = scalar(node, what)?.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(&node.span, format!("{what}: expected a non-negative integer, found `{s}`")));
    }
    s.parse::<u64>()
        .map_err(|_| err(&node.span, format!("{what}: integer `{s}` is too large")))
}

fn expr_err(node: &Node, e: ExprError) -> ParseError {
    let col = node.content_col() + e.pos as u32;
    ParseError::new(SourceSpan::new(node.span.file.clone(), node.span.line, col, col), e.message)
}

/// Parses `BV[w]`.
pub fn parse_width(text: &str) -> Option<u32> {
    let inner = text.trim().strip_prefix("BV[")?.strip_suffix(']')?;
    if inner.is_empty() || !inner.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    inner.parse().ok()
}

/// Parses a `CarriesData` string: `None` or `name: BV[w], ...`.
pub fn parse_carried_data(text: &str) -> Result<Vec<DataField>, String> {
    let t = text.trim();
    if t == "None" {
        return Ok(Vec::new());
    }
    let t = t.strip_prefix('{').and_then(|s| s.strip_suffix('}')).unwrap_or(t);
    let mut out = Vec::new();
    for part in t.split(',') {
        let (name, ty) = part
            .split_once(':')
            .ok_or_else(|| format!("expected `name: BV[w]`, found `{}`", part.trim()))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || name.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(format!("bad data field name `{name}`"));
        }
        let width = parse_width(ty).ok_or_else(|| format!("expected `BV[w]`, found `{}`", ty.trim()))?;
        out.push(DataField {
            name: name.to_string(),
            width,
        });
    }
    Ok(out)
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn name_of(key: &Key, what: &str) -> Result<String, ParseError> {
    if is_name(&key.text) {
        Ok(key.text.clone())
    } else {
        Err(err(&key.span, format!("{what} `{}` is not a valid identifier", key.text)))
    }
}

struct Builder {
    origins: Origins,
}

impl Builder {
    fn machine_state(&mut self, node: &Node) -> Result<StateDecl, ParseError> {
        let mut decl = StateDecl::default();
        for item in items(node, "MachineState")? {
            for (k, v) in entries(item, "MachineState item")? {
                match k.text.as_str() {
                    "TypeSpec" => {
                        for t in items(v, "TypeSpec")? {
                            for (tk, tv) in entries(t, "TypeSpec item")? {
                                let name = name_of(tk, "type name")?;
                                let mut fields = Vec::new();
                                for (fk, fv) in entries(tv, &format!("type `{name}`"))? {
                                    let fname = name_of(fk, "field name")?;
                                    let ty = scalar(fv, "field type")?;
                                    let width = parse_width(ty)
                                        .ok_or_else(|| err(&fv.span, format!("expected `BV[w]`, found `{ty}`")))?;
                                    fields.push(FieldDecl { name: fname, width });
                                }
                                self.origins.insert(format!("type:{name}"), tk.span.clone());
                                decl.types.push(TypeSpec { name, fields });
                            }
                        }
                    }
                    "InstanceSpec" => {
                        for i in items(v, "InstanceSpec")? {
                            for (ik, iv) in entries(i, "InstanceSpec item")? {
                                let name = name_of(ik, "instance name")?;
                                let type_name = scalar(iv, "instance type")?.to_string();
                                self.origins.insert(format!("instance:{name}"), ik.span.clone());
                                decl.instances.push(InstanceSpec { name, type_name });
                            }
                        }
                    }
                    other => return Err(err(&k.span, format!("unknown MachineState part `{other}`"))),
                }
            }
        }
        Ok(decl)
    }

    fn event(&mut self, node: &Node, caps: &mut BTreeMap<String, u32>) -> Result<EventSpec, ParseError> {
        let fields = entries(node, "event")?;
        let get = |name: &str| fields.iter().find(|(k, _)| k.text == name).map(|(_, v)| v);
        for (k, _) in fields {
            if !EVENT_FIELDS.contains(&k.text.as_str()) && k.text != "MaxInstances" {
                return Err(err(&k.span, format!("unknown event field `{}`", k.text)));
            }
        }
        for f in EVENT_FIELDS {
            if get(f).is_none() {
                return Err(err(&node.span, format!("event is missing required field `{f}`")));
            }
        }
        let name_node = get("Name").unwrap();
        let name = scalar(name_node, "Name")?.to_string();
        if !is_name(&name) {
            return Err(err(&name_node.span, format!("event name `{name}` is not a valid identifier")));
        }
        let mut ev = EventSpec::new(&name);
        let data_node = get("CarriesData").unwrap();
        ev.carried_data = match &data_node.kind {
            NodeKind::Map(e) => {
                let mut out = Vec::new();
                for (k, v) in e {
                    let ty = scalar(v, "data field type")?;
                    let width =
                        parse_width(ty).ok_or_else(|| err(&v.span, format!("expected `BV[w]`, found `{ty}`")))?;
                    out.push(DataField {
                        name: name_of(k, "data field name")?,
                        width,
                    });
                }
                out
            }
            _ => parse_carried_data(scalar(data_node, "CarriesData")?).map_err(|m| err(&data_node.span, m))?,
        };
        let t = get("TriggersEvent").unwrap();
        ev.triggers = expr::triggers(scalar(t, "TriggersEvent")?).map_err(|e| expr_err(t, e))?;
        let s = get("StateChanges").unwrap();
        ev.state_changes = expr::statechanges(scalar(s, "StateChanges")?).map_err(|e| expr_err(s, e))?;
        ev.delay = integer(get("TimingDelay").unwrap(), "TimingDelay")?;
        let p = get("PresentAtStart").unwrap();
        ev.present_at_start = match scalar(p, "PresentAtStart")? {
            "Yes" => true,
            "No" => false,
            other => return Err(err(&p.span, format!("PresentAtStart must be `Yes` or `No`, found `{other}`"))),
        };
        if let Some(c) = get("MaxInstances") {
            let n = integer(c, "MaxInstances")?;
            if n == 0 || n > u32::MAX as u64 {
                return Err(err(&c.span, "MaxInstances must be a positive 32-bit integer"));
            }
            caps.insert(name.clone(), n as u32);
        }
        self.origins.insert(format!("event:{name}"), name_node.span.clone());
        self.origins.insert(format!("event:{name}.triggers"), t.span.clone());
        self.origins.insert(format!("event:{name}.state_changes"), s.span.clone());
        Ok(ev)
    }

    fn assertion(&mut self, node: &Node) -> Result<Assertion, ParseError> {
        let fields = entries(node, "assertion")?;
        let get = |name: &str| fields.iter().find(|(k, _)| k.text == name).map(|(_, v)| v);
        for (k, _) in fields {
            if k.text != "Name" && k.text != "Assert" {
                return Err(err(&k.span, format!("unknown assertion field `{}`", k.text)));
            }
        }
        let name_node = get("Name").ok_or_else(|| err(&node.span, "assertion is missing `Name`"))?;
        let body_node = get("Assert").ok_or_else(|| err(&node.span, "assertion is missing `Assert`"))?;
        let name = scalar(name_node, "Name")?.to_string();
        if !is_name(&name) {
            return Err(err(&name_node.span, format!("assertion name `{name}` is not a valid identifier")));
        }
        let (mode, body) = expr::assertion(scalar(body_node, "Assert")?).map_err(|e| expr_err(body_node, e))?;
        self.origins.insert(format!("assertion:{name}"), name_node.span.clone());
        Ok(Assertion { name, mode, body })
    }
}

pub(super) fn build(text: &str, file: &str) -> Result<Model, ParseError> {
    let root = yaml::parse(text, file)?;
    let sections = entries(&root, "document")?;
    for (k, _) in sections {
        if !SECTIONS.contains(&k.text.as_str()) {
            return Err(err(&k.span, format!("unknown section `{}`", k.text)));
        }
    }
    let get = |name: &str| sections.iter().find(|(k, _)| k.text == name);
    let require = |name: &str| get(name).ok_or_else(|| err(&root.span, format!("missing section `{name}`")));

    let mut b = Builder {
        origins: Origins::default(),
    };
    let (_, ms) = require("MachineState")?;
    let state_decl = b.machine_state(ms)?;

    let (ek, en) = require("Events")?;
    b.origins.insert("section:Events", ek.span.clone());
    let event_nodes = items(en, "Events")?;
    if event_nodes.is_empty() {
        return Err(err(&ek.span, "at least one event required"));
    }
    let mut caps = BTreeMap::new();
    let mut events = Vec::new();
    for n in event_nodes {
        events.push(b.event(n, &mut caps)?);
    }

    let mut assertions = Vec::new();
    if let Some((_, an)) = get("Assertions") {
        for n in items(an, "Assertions")? {
            assertions.push(b.assertion(n)?);
        }
    }

    let mut initial_constraints = Vec::new();
    if let Some((_, inode)) = get("InitialState") {
        for n in items(inode, "InitialState")? {
            for (k, v) in entries(n, "InitialState item")? {
                let text = scalar(v, "constraint")?;
                let c = expr::bool_expr(text, Context::Constraint).map_err(|e| expr_err(v, e))?;
                b.origins
                    .insert(format!("constraint:{}", initial_constraints.len()), k.span.clone());
                initial_constraints.push(c);
            }
        }
    }

    let (mk, mn) = require("MaxSteps")?;
    b.origins.insert("section:MaxSteps", mk.span.clone());
    let max_steps = integer(mn, "MaxSteps")?;
    if max_steps == 0 || max_steps > u32::MAX as u64 {
        return Err(err(&mn.span, "MaxSteps must be a positive 32-bit integer"));
    }
    let (wk, wn) = require("IntWidth")?;
    b.origins.insert("section:IntWidth", wk.span.clone());
    let int_width = integer(wn, "IntWidth")?;
    if int_width == 0 || int_width > 64 {
        return Err(err(&wn.span, "IntWidth must be in 1..=64"));
    }

    Ok(Model {
        state_decl,
        events,
        assertions,
        initial_constraints,
        max_steps: max_steps as u32,
        int_width: int_width as u32,
        instance_caps: caps,
        origins: b.origins,
    })
}
