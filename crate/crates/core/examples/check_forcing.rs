//! Glue identities and error forcing, with a counterexample for the
//! construction-1 set.

use std::error::Error;

use tileweave::pattern::{builtin, Builtin};
use tileweave::tileset::{construct_er, construct_kl, Mode};
use tileweave::verify::{check_bijection, check_error_forcing, check_lemma_equalities, ForcingOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let opts = ForcingOptions::default();
    for b in [Builtin::S, Builtin::C, Builtin::W] {
        let t = construct_kl(&builtin(b), Mode::Reachable)?;
        let r = construct_er(&t)?;
        let lemma = check_lemma_equalities(&r)?;
        let fr = check_error_forcing(&r, &opts)?;
        let ft = check_error_forcing(&t, &opts)?;
        println!(
            "{b:?}: identities {} over {} triples; R forced={} ({} configs); T violating {}/{}; bijection={}",
            lemma.passed, lemma.triples_checked, fr.forced_always, fr.configurations_checked,
            ft.violating_configurations, ft.configurations_checked, check_bijection(&t, &r).passed,
        );
    }

    let t = construct_kl(&builtin(Builtin::S), Mode::Reachable)?;
    let w = &check_error_forcing(&t, &opts)?.violations[0];
    println!("\nwitness ({:?}):", w.case);
    for (id, (x, y)) in w.placements() {
        println!("  ({x},{y}) {id}");
    }
    println!("mismatched pairs: {:?}", w.replay(&t).unwrap());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
