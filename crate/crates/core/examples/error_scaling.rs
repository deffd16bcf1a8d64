//! Mismatch rate against the per-side error probability, log-log slope.

use std::error::Error;

use tileweave::pattern::{builtin, Builtin};
use tileweave::tileset::{construct_er, construct_kl, Mode};
use tileweave::verify::{epsilon_slope, ProbeOptions};

pub fn run() -> Result<(), Box<dyn Error>> {
    let t = construct_kl(&builtin(Builtin::S), Mode::Reachable)?;
    let r = construct_er(&t)?;
    let eps = [0.02, 0.05, 0.1];
    let report = epsilon_slope(&t, &r, &eps, &ProbeOptions::new(64, 20, 1))?;
    for (name, fit) in [("T", &report.t), ("R", &report.r)] {
        for p in &fit.points {
            println!("{name} eps={:<5} rate={:.5} edges={}", p.eps, p.rate, p.window_edges);
        }
        println!("{name} slope {:?}", fit.slope);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
