//! Trace invariants over randomly generated acyclic event graphs.

use std::collections::{BTreeMap, BTreeSet};

use maestro::ast::{EventStatus, Model, Trace};
use maestro::corpus::two_event_model;
use maestro::engine::{assignment, run_trace, run_trace_with, EngineConfig};
use maestro::parse_model;
use proptest::prelude::*;

/// Event `i` may trigger any later event, optionally guarded on its own
/// counter; every event increments its own 3-bit counter.
#[derive(Debug, Clone)]
struct Shape {
    delays: Vec<u64>,
    edges: Vec<(usize, usize, Option<u64>)>,
    max_steps: u32,
    init: Vec<u64>,
}

fn shape() -> impl Strategy<Value = Shape> {
    (2usize..=6).prop_flat_map(|n| {
        let edge = (0..n - 1).prop_flat_map(move |i| (Just(i), i + 1..n, proptest::option::of(0u64..8)));
        (
            proptest::collection::vec(0u64..40, n),
            proptest::collection::vec(edge, 1..2 * n),
            2u32..24,
            proptest::collection::vec(0u64..8, n),
        )
            .prop_map(|(delays, edges, max_steps, init)| Shape {
                delays,
                edges,
                max_steps,
                init,
            })
    })
}

fn model(s: &Shape) -> Model {
    let n = s.delays.len();
    let fields: Vec<String> = (0..n).map(|i| format!("f{i}: BV[3]")).collect();
    let mut y = format!(
        "MachineState:\n  - TypeSpec:\n     - S: {{{}}}\n  - InstanceSpec:\n     - s: S\nEvents:\n",
        fields.join(", ")
    );
    for i in 0..n {
        let triggers: Vec<String> = s
            .edges
            .iter()
            .filter(|e| e.0 == i)
            .map(|(_, j, g)| match g {
                Some(k) => format!("IF s.f{i} != {k} : Trigger E{j}{{NONE}}"),
                None => format!("Trigger E{j}{{NONE}}"),
            })
            .collect();
        let triggers = if triggers.is_empty() { "None".into() } else { triggers.join("; ") };
        y += &format!(
            "  - Name: \"E{i}\"\n    CarriesData: \"None\"\n    TriggersEvent: \"{triggers}\"\n    \
             StateChanges: \"SC s.f{i} <- s.f{i} + 1\"\n    TimingDelay: \"{}\"\n    PresentAtStart: \"{}\"\n    MaxInstances: 64\n",
            if i == 0 { 0 } else { s.delays[i] },
            if i == 0 { "Yes" } else { "No" }
        );
    }
    y += &format!("MaxSteps: {}\nIntWidth: 16\n", s.max_steps);
    parse_model(&y).unwrap()
}

fn run(s: &Shape) -> (Model, Trace) {
    let m = model(s);
    let names: Vec<String> = (0..s.init.len()).map(|i| format!("f{i}")).collect();
    let triples: Vec<(&str, &str, u64)> = names.iter().zip(&s.init).map(|(f, v)| ("s", f.as_str(), *v)).collect();
    let a = assignment(&m, &triples).unwrap();
    let t = run_trace(&m, &a).unwrap();
    (m, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn deterministic(s in shape()) {
        let (m, t) = run(&s);
        prop_assert_eq!(run_trace(&m, &t.initial_assignment).unwrap(), t);
    }

    #[test]
    fn steps_are_numbered_and_time_increases(s in shape()) {
        let (m, t) = run(&s);
        prop_assert_eq!(t.steps.len(), m.max_steps as usize);
        for (i, w) in t.steps.windows(2).enumerate() {
            prop_assert_eq!(w[0].step_index as usize, i);
            prop_assert!(w[1].time > w[0].time);
        }
    }

    #[test]
    fn parents_were_active_one_step_earlier(s in shape()) {
        let (_, t) = run(&s);
        let mut first_seen: BTreeMap<u64, usize> = BTreeMap::new();
        for (x, st) in t.steps.iter().enumerate() {
            for i in &st.instances {
                first_seen.entry(i.event_id).or_insert(x);
            }
        }
        let mut children = BTreeSet::new();
        for (p, c) in t.edges() {
            prop_assert!(children.insert(c), "event {} has two parents", c);
            let x = first_seen[&c];
            prop_assert!(x >= 1);
            let parent_active = t.steps[x - 1]
                .instances
                .iter()
                .any(|i| i.event_id == p && i.status == EventStatus::Active);
            prop_assert!(parent_active, "parent {} of {} not active at step {}", p, c, x - 1);
        }
    }

    #[test]
    fn quiescent_state_is_stable(s in shape()) {
        let (_, t) = run(&s);
        if let Some(q) = t.steps.iter().position(|st| st.is_quiescent()) {
            for st in &t.steps[q..] {
                prop_assert!(st.is_quiescent());
                prop_assert_eq!(&st.machine_state, &t.steps[q].machine_state);
            }
        }
    }

    #[test]
    fn no_stutter_is_a_prefix(s in shape()) {
        let (m, t) = run(&s);
        let cfg = EngineConfig { max_steps: m.max_steps, stutter_to_max: false };
        let short = run_trace_with(&m, &t.initial_assignment, &cfg).unwrap();
        prop_assert!(short.steps.len() <= t.steps.len());
        prop_assert_eq!(&short.steps[..], &t.steps[..short.steps.len()]);
    }

    #[test]
    fn delay_does_not_change_step_count(d in 1u64..100_000) {
        let run = |m: &Model| {
            let a = assignment(m, &[("flag", "done", 0)]).unwrap();
            run_trace(m, &a).unwrap()
        };
        let base = run(&two_event_model(1));
        let t = run(&two_event_model(d));
        prop_assert_eq!(t.non_stutter_steps(), base.non_stutter_steps());
        prop_assert_eq!(t.steps.len(), base.steps.len());
    }
}
