//! Grow the error-resilient Sierpinski set at temperature 2 and render it.

use std::error::Error;

use tileweave::atam::{assemble, labels};
use tileweave::io::{render_ppm, RenderPalette};
use tileweave::pattern::{builtin, Builtin, PatternOracle};
use tileweave::tileset::{construct_er, construct_kl, Mode};

pub fn run() -> Result<(), Box<dyn Error>> {
    let t = construct_kl(&builtin(Builtin::S), Mode::Reachable)?;
    let r = construct_er(&t)?;
    let size = 64;
    let a = assemble(&r, size - 1, size - 1)?;
    let grid = labels(&a, &r);

    let want = PatternOracle::builtin(Builtin::S).grid(size, size)?;
    assert_eq!(grid.first_difference(&want), None);
    println!("{} tiles placed, matches the pattern", a.occupied());

    let img = render_ppm(&grid, &RenderPalette::default_for(r.alphabet), 4, &[]);
    let path = std::env::temp_dir().join("tileweave_sierpinski.ppm");
    std::fs::write(&path, &img)?;
    println!("wrote {} ({} bytes)", path.display(), img.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
