//! One kinetic run per tile set at the same conditions.

use std::error::Error;

use tileweave::ktam::simulate;
use tileweave::pattern::{builtin, Builtin};
use tileweave::tileset::{construct_er, construct_kl, Mode};

pub fn run() -> Result<(), Box<dyn Error>> {
    let t = construct_kl(&builtin(Builtin::S), Mode::Reachable)?;
    let r = construct_er(&t)?;
    for g_se in [5.5, 6.7] {
        for (name, ts) in [("T", &t), ("R", &r)] {
            let mut p = tileweave::ktam::SimParams::new(g_se, (48, 48));
            p.rng_seed = 7;
            let out = simulate(ts, &p)?;
            println!(
                "{name} g_se={g_se} g_mc={:.1}: placed={} mismatches={} N={} events={} [{}]",
                p.g_mc, out.tiles_placed, out.mismatch_edges, out.n, out.events, out.flag
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
