//! Explains why TORC and DSRC leak together: side-by-side event trees
//! of the two machines, the observable that differs, and the events one
//! machine ran more often.

use maestro::checker::{check, explain, DEFAULT_LIMIT};
use maestro::corpus::{load_model, load_program};
use maestro::integra::{apply, compose};

fn main() {
    let base = load_model("baseline-load").unwrap();
    let progs: Vec<_> = ["torc", "dsrc", "ni-torc"].iter().map(|id| load_program(id).unwrap()).collect();
    let model = apply(&base, &compose(&progs).unwrap()).unwrap();
    let report = check(&model, DEFAULT_LIMIT).unwrap();
    print!("{}", explain(&report));
}
