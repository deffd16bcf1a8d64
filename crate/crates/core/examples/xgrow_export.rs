//! Xgrow tile file and JSON for the error-resilient Sierpinski set.

use std::error::Error;

use tileweave::io::{export_xgrow, tileset_from_json, tileset_to_json};
use tileweave::pattern::{builtin, Builtin};
use tileweave::tileset::{construct_er, construct_kl, Mode};

pub fn run() -> Result<(), Box<dyn Error>> {
    let r = construct_er(&construct_kl(&builtin(Builtin::S), Mode::Reachable)?)?;
    print!("{}", export_xgrow(&r));

    let json = tileset_to_json(&r);
    let back = tileset_from_json(&json, std::path::Path::new("<memory>"))?;
    assert_eq!(back, r);
    println!("% JSON round trip ok, {} bytes", json.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
