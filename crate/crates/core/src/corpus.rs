//! The bundled corpus: models, transform programs and expected verdicts.
//!
//! Every file is compiled into the library, so the corpus is available
//! without a checkout. `manifest.json` lists each entry with its kind.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::ast::Model;
use crate::checker::{check, CheckError, Verdict};
use crate::integra::{apply, compose, parse_integra, IntegraError, TransformProgram};
use crate::parser::{parse_assertion_string, parse_model_file, ModelError};

const MANIFEST: &str = include_str!("../../../corpus/manifest.json");

const FILES: &[(&str, &str)] = &[
    ("models/counter.yaml", include_str!("../../../corpus/models/counter.yaml")),
    ("models/fig2-cache-miss.yaml", include_str!("../../../corpus/models/fig2-cache-miss.yaml")),
    ("models/baseline-load.yaml", include_str!("../../../corpus/models/baseline-load.yaml")),
    ("models/two-event-delay.yaml", include_str!("../../../corpus/models/two-event-delay.yaml")),
    ("transforms/torc.integra", include_str!("../../../corpus/transforms/torc.integra")),
    ("transforms/dsrc.integra", include_str!("../../../corpus/transforms/dsrc.integra")),
    ("transforms/dsrm.integra", include_str!("../../../corpus/transforms/dsrm.integra")),
    ("transforms/ssmesi.integra", include_str!("../../../corpus/transforms/ssmesi.integra")),
    ("transforms/ni-torc.integra", include_str!("../../../corpus/transforms/ni-torc.integra")),
    ("transforms/ni-dsrc.integra", include_str!("../../../corpus/transforms/ni-dsrc.integra")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Model,
    Transform,
    ExpectedVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Holds,
    Fails,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub kind: EntryKind,
    pub description: String,
    /// Corpus-relative file path; absent for expected verdicts.
    #[serde(default)]
    pub path: Option<String>,
    /// Base model id of an expected verdict.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub transforms: Vec<String>,
    #[serde(default)]
    pub verdicts: BTreeMap<String, Expected>,
}

#[derive(Deserialize)]
struct Manifest {
    entries: Vec<CorpusEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no corpus entry `{0}`")]
    Unknown(String),
    #[error("corpus entry `{0}` has the wrong kind")]
    WrongKind(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integra(#[from] IntegraError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

pub fn corpus_manifest() -> Vec<CorpusEntry> {
    serde_json::from_str::<Manifest>(MANIFEST)
        .expect("bundled manifest is valid")
        .entries
}

pub fn entry(id: &str) -> Result<CorpusEntry, CorpusError> {
    corpus_manifest()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| CorpusError::Unknown(id.into()))
}

/// Source text of a bundled file by corpus-relative path.
pub fn file(path: &str) -> Option<&'static str> {
    FILES.iter().find(|(p, _)| *p == path).map(|(_, s)| *s)
}

fn source(id: &str, kind: EntryKind) -> Result<(String, &'static str), CorpusError> {
    let e = entry(id)?;
    if e.kind != kind {
        return Err(CorpusError::WrongKind(id.into()));
    }
    let path = e.path.ok_or_else(|| CorpusError::WrongKind(id.into()))?;
    let text = file(&path).ok_or_else(|| CorpusError::Unknown(path.clone()))?;
    Ok((path, text))
}

pub fn load_model(id: &str) -> Result<Model, CorpusError> {
    let (path, text) = source(id, EntryKind::Model)?;
    Ok(parse_model_file(text, &path)?.model)
}

/// A transform program named after its corpus id.
pub fn load_program(id: &str) -> Result<TransformProgram, CorpusError> {
    let (_, text) = source(id, EntryKind::Transform)?;
    parse_integra(text, id).map_err(|e| CorpusError::Integra(e.into()))
}

/// Base model of an expected-verdict entry with all its programs applied.
pub fn build(e: &CorpusEntry) -> Result<Model, CorpusError> {
    let base = load_model(e.model.as_deref().ok_or_else(|| CorpusError::WrongKind(e.id.clone()))?)?;
    let progs = e
        .transforms
        .iter()
        .map(|t| load_program(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(apply(&base, &compose(&progs)?)?)
}

/// Names of expected verdicts that disagree with a fresh check.
pub fn mismatches(e: &CorpusEntry, limit: u64) -> Result<Vec<String>, CorpusError> {
    let report = check(&build(e)?, limit)?;
    Ok(e.verdicts
        .iter()
        .filter(|(name, want)| {
            let got = report.result(name).map(|r| match r.verdict {
                Verdict::Holds { .. } => Expected::Holds,
                Verdict::Fails { .. } => Expected::Fails,
            });
            got != Some(**want)
        })
        .map(|(name, _)| name.clone())
        .collect())
}

/// Two-event model whose second event has delay `d`.
///
/// The integer width is the smallest that keeps every timestamp of a
/// `MaxSteps`-bounded trace representable.
pub fn two_event_model(d: u64) -> Model {
    let mut m = load_model("two-event-delay").expect("bundled model parses");
    m.event_mut("FinishEvent").expect("bundled model has FinishEvent").delay = d;
    let horizon = u128::from(m.max_steps) * (1 + u128::from(d));
    m.int_width = (1..=64).find(|w| (1u128 << w) > horizon).unwrap_or(64);
    let after = parse_assertion_string("doneOnlyAfterDelay", &format!("ALWAYS flag.done = 0 or TimingRecord.time > {d}"))
        .expect("assertion parses");
    for a in &mut m.assertions {
        if a.name == after.name {
            *a = after.clone();
        }
    }
    m
}
