//! Checks the clocked counter: one clock edge per step, the counter
//! increments by one, and time advances by one.

use maestro::checker::{check, DEFAULT_LIMIT};
use maestro::corpus::load_model;

fn main() {
    let model = load_model("counter").expect("bundled model");
    let report = check(&model, DEFAULT_LIMIT).expect("check runs");
    print!("{}", report.to_text());
    println!("checked in {:?}", report.wall_time);
}
