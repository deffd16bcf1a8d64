//! Compile each built-in pattern into both tile sets and compare sizes.

use std::error::Error;

use tileweave::pattern::{builtin, Builtin};
use tileweave::tileset::{construct_er, construct_kl, Mode, TileKind};

pub fn run() -> Result<(), Box<dyn Error>> {
    println!("{:<4}{:>10}{:>12}{:>8}", "", "reachable", "exhaustive", "ER");
    for b in [Builtin::S, Builtin::C, Builtin::W] {
        let spec = builtin(b);
        let t = construct_kl(&spec, Mode::Reachable)?;
        let full = construct_kl(&spec, Mode::Exhaustive)?;
        let r = construct_er(&t)?;
        println!("{:<4}{:>10}{:>12}{:>8}", format!("{b:?}"), t.len(), full.len(), r.len());
    }

    let t = construct_kl(&builtin(Builtin::S), Mode::Reachable)?;
    let r = construct_er(&t)?;
    println!("\nER tiles for S:");
    for tile in &r.tiles {
        let kind = match tile.kind() {
            TileKind::Seed => "seed",
            TileKind::HorizontalBoundary => "h-boundary",
            TileKind::VerticalBoundary => "v-boundary",
            TileKind::Interior => "interior",
        };
        println!(
            "  {} label={} {:<10} N={}/{} E={}/{}",
            tile.id, tile.label.0, kind,
            tile.glues.n.color, tile.glues.n.strength,
            tile.glues.e.color, tile.glues.e.strength,
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
