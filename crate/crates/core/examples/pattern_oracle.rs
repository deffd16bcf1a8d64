//! Evaluate the built-in Sierpinski pattern directly from its recursion.

use std::error::Error;

use tileweave::pattern::{Builtin, PatternOracle};

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut oracle = PatternOracle::builtin(Builtin::S);
    let grid = oracle.grid(32, 16)?;
    for y in (0..grid.height).rev() {
        let line: String = (0..grid.width)
            .map(|x| match grid.get(x, y) {
                Some(l) if l.0 == 1 => '#',
                _ => '.',
            })
            .collect();
        println!("{line}");
    }
    // Windows include the ⊥ cells outside the quadrant.
    println!("window at (1,1): {:?}", oracle.window(1, 1)?);
    println!("row(3) at (0,0) = {}", oracle.row(3, 0, 0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
