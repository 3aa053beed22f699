//! Grows the delay between two events by orders of magnitude. The
//! number of steps stays fixed while a cycle-by-cycle stepper would
//! need one step per cycle.

use std::time::Instant;

use maestro::checker::{check, DEFAULT_LIMIT};
use maestro::corpus::two_event_model;
use maestro::engine::{assignment, run_trace};

fn main() {
    println!("{:>9} {:>12} {:>14} {:>12}", "delay", "event steps", "cycle steps", "check time");
    for d in [6u64, 62, 620, 6_200, 62_000, 620_000] {
        let model = two_event_model(d);
        let start = assignment(&model, &[("flag", "done", 0)]).unwrap();
        let trace = run_trace(&model, &start).unwrap();
        let started = Instant::now();
        let report = check(&model, DEFAULT_LIMIT).unwrap();
        let elapsed = started.elapsed();
        assert!(report.all_hold());
        let finish = trace.steps.iter().rev().find(|s| !s.is_quiescent()).map_or(0, |s| s.time);
        println!("{d:>9} {:>12} {:>14} {elapsed:>12.2?}", trace.non_stutter_steps(), finish + 1);
    }
}
