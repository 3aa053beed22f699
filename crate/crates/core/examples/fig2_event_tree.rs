//! Runs the dirty-line cache miss and prints its step/time table and
//! event tree. Four long delays cost one step each.

use maestro::checker::{admitted, DEFAULT_LIMIT};
use maestro::corpus::load_model;
use maestro::{render, run_trace};

fn main() {
    let model = load_model("fig2-cache-miss").expect("bundled model");
    let start = admitted(&model, DEFAULT_LIMIT).expect("enumerates").remove(0);
    let trace = run_trace(&model, &start).expect("runs");
    for (step, time) in trace.times() {
        println!("step {step:>2}  time {time:>3}");
    }
    println!();
    print!("{}", render::event_tree(&trace));
}
