//! A user-defined pattern: west plus twice south, mod 3.

use std::error::Error;

use tileweave::pattern::{Boundary, PatternSpec, Rule};
use tileweave::tuple::Label;
use tileweave::tileset::{construct_er, construct_kl, Mode};
use tileweave::verify::{check_error_forcing, ForcingOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let spec = PatternSpec {
        name: Some("diag2".into()),
        w: 2,
        h: 2,
        alphabet: 3,
        rule: Rule::AffineMod {
            coeffs: vec![vec![Some(1), None], vec![Some(0), Some(2)]],
            modulus: 3,
            bot_as_zero: true,
        },
        boundary: Some(Boundary { x_axis: vec![Label(1)], y_axis: vec![Label(1)] }),
    };
    println!("{}", serde_json::to_string(&spec)?);
    let t = construct_kl(&spec, Mode::Reachable)?;
    let r = construct_er(&t)?;
    let forced = check_error_forcing(&r, &ForcingOptions::default())?.forced_always;
    println!("{} tile types, oracle agreement at 64: {}, forced: {forced}",
        r.len(), tileweave::cli::oracle_agrees(&r, &spec, 64)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
