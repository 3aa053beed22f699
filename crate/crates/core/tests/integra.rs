//! Composition laws over the bundled transform programs.

use maestro::ast::Model;
use maestro::corpus::{corpus_manifest, load_model, load_program, EntryKind};
use maestro::integra::{apply, compose, parse_integra, TransformProgram};
use proptest::prelude::*;

fn programs() -> Vec<TransformProgram> {
    corpus_manifest()
        .into_iter()
        .filter(|e| e.kind == EntryKind::Transform)
        .map(|e| load_program(&e.id).unwrap())
        .collect()
}

fn is_product(p: &TransformProgram) -> bool {
    p.to_text().contains("DUPLICATE_")
}

fn superset(base: &Model, m: &Model) {
    for e in &base.events {
        let t = m.event(&e.name).unwrap_or_else(|| panic!("event {} dropped", e.name));
        assert_eq!(t.carried_data[..e.carried_data.len()], e.carried_data[..]);
        assert!(t.triggers.len() >= e.triggers.len() && t.state_changes.len() >= e.state_changes.len());
        assert!(t.delay >= e.delay);
    }
    for f in base.state_decl.fields() {
        assert!(m.state_decl.fields().contains(&f));
    }
    for a in &base.assertions {
        assert!(m.assertions.contains(a));
    }
    for c in &base.initial_constraints {
        assert!(m.initial_constraints.contains(c));
    }
}

#[test]
fn defenses_only_add() {
    let base = load_model("baseline-load").unwrap();
    for p in programs().iter().filter(|p| !is_product(p)) {
        superset(&base, &apply(&base, p).unwrap());
    }
}

/// Delays sum, so only programs without `ADD_DELAY` collapse.
#[test]
fn compose_is_idempotent() {
    for p in programs().into_iter().filter(|p| !p.to_text().contains("ADD_DELAY")) {
        assert_eq!(compose(&[p.clone(), p.clone()]).unwrap(), compose(&[p]).unwrap());
    }
}

#[test]
fn normal_form_round_trips_through_text() {
    for p in programs() {
        let c = compose(&[p]).unwrap();
        let again = parse_integra(&c.to_text(), &c.name).unwrap();
        assert_eq!(compose(&[again]).unwrap(), c);
    }
}

#[test]
fn identity_is_neutral() {
    let base = load_model("baseline-load").unwrap();
    assert_eq!(apply(&base, &TransformProgram::identity()).unwrap(), base);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any selection of programs, in any order, gives one composed model.
    #[test]
    fn order_never_matters(mask in 1u32..64, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let base = load_model("baseline-load").unwrap();
        let all = programs();
        let chosen: Vec<_> = all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect();
        let mut shuffled = chosen.clone();
        shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let a = compose(&chosen).and_then(|c| apply(&base, &c));
        let b = compose(&shuffled).and_then(|c| apply(&base, &c));
        prop_assert_eq!(a, b);
    }
}

#[test]
fn only_secret_bits_differ_between_machines() {
    use maestro::checker::free_bits;
    let base = load_model("baseline-load").unwrap();
    let ni = load_program("ni-torc").unwrap();
    let m = apply(&base, &compose(&[ni]).unwrap()).unwrap();
    let bits = free_bits(&m);
    let second: Vec<String> = bits
        .iter()
        .filter(|b| b.state.instance.ends_with("_m2"))
        .map(|b| b.state.to_string())
        .collect();
    assert_eq!(second, ["line_m2.present"]);
    assert!(bits.iter().any(|b| b.state.to_string() == "line_m1.present"));
    assert_eq!(bits.len(), 8);
}
