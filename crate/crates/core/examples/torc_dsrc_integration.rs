//! The two-level integration workflow on the load model: add one
//! defense at a time, check its non-interference property, and try the
//! repair when a combination fails.

use maestro::checker::{check, DEFAULT_LIMIT};
use maestro::corpus::{load_model, load_program};
use maestro::integra::{apply, compose};

fn verdict(ids: &[&str]) -> String {
    let base = load_model("baseline-load").unwrap();
    let progs: Vec<_> = ids.iter().map(|id| load_program(id).unwrap()).collect();
    let model = apply(&base, &compose(&progs).unwrap()).unwrap();
    let report = check(&model, DEFAULT_LIMIT).unwrap();
    match report.first_failure() {
        None => format!("holds over {} initial states", report.admitted),
        Some(r) => format!("{} fails", r.name),
    }
}

fn main() {
    for ids in [
        &["ni-torc"][..],
        &["torc", "ni-torc"],
        &["dsrc", "ni-dsrc"],
        &["torc", "dsrc", "ni-torc"],
        &["torc", "dsrc", "ni-dsrc"],
        &["torc", "dsrm", "ni-torc"],
        &["torc", "dsrm", "ni-dsrc"],
        &["torc", "dsrc", "ssmesi", "ni-torc"],
        &["torc", "dsrc", "ssmesi", "ni-dsrc"],
    ] {
        println!("{:<28} {}", ids.join(" + "), verdict(ids));
    }
}
