//! Composes every ordered pair of bundled programs both ways and
//! compares the resulting models.

use maestro::corpus::{corpus_manifest, load_model, load_program, EntryKind};
use maestro::integra::{apply, compose};

fn main() {
    let base = load_model("baseline-load").unwrap();
    let progs: Vec<_> = corpus_manifest()
        .into_iter()
        .filter(|e| e.kind == EntryKind::Transform)
        .map(|e| load_program(&e.id).unwrap())
        .collect();
    let (mut pairs, mut equal) = (0, 0);
    for p in &progs {
        for q in progs.iter().filter(|q| q.name != p.name) {
            pairs += 1;
            let pq = compose(&[p.clone(), q.clone()]).and_then(|c| apply(&base, &c));
            let qp = compose(&[q.clone(), p.clone()]).and_then(|c| apply(&base, &c));
            equal += (pq == qp) as u32;
        }
    }
    println!("{equal}/{pairs} ordered pairs give identical models");
    let normal = compose(&progs).unwrap();
    println!("\nnormal form of all {} programs ({} directives):", progs.len(), normal.loc());
    print!("{}", normal.to_text());
}
