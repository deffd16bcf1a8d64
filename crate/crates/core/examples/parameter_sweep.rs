//! Small seeded sweep written as CSV.

use std::error::Error;

use tileweave::io::sweep_to_csv;
use tileweave::ktam::{sweep, GmcRule, SimParams};
use tileweave::pattern::{builtin, Builtin};
use tileweave::tileset::{construct_er, construct_kl, Mode};

pub fn run() -> Result<(), Box<dyn Error>> {
    let r = construct_er(&construct_kl(&builtin(Builtin::S), Mode::Reachable)?)?;
    let mut base = SimParams::new(6.0, (32, 32));
    base.rng_seed = 2024;
    let results = sweep(&r, &[5.5, 6.1, 6.7], 3, &base, GmcRule::default())?;
    print!("{}", sweep_to_csv(&results)?);
    for s in &results {
        println!("# g_se={} median N={}", s.g_se, s.median_n);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
