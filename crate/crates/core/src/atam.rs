//! Error-free temperature-2 growth of rectilinear tile systems on a finite
//! rectangle.

use thiserror::Error;

use crate::pattern::PatternGrid;
use crate::tileset::{Compiled, Dir, TileSystem, TEMPERATURE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtamError {
    #[error("site ({x},{y}) is already occupied")]
    Occupied { x: usize, y: usize },
    #[error("site ({x},{y}) is outside the {width}x{height} assembly")]
    OutOfBounds { x: usize, y: usize, width: usize, height: usize },
    #[error("stuck at ({x},{y}): no tile binds to west bond {west} and south bond {south}")]
    Stuck { x: usize, y: usize, west: String, south: String },
    #[error("nondeterministic at ({x},{y}): tiles {candidates:?} can all bind")]
    Nondeterministic { x: usize, y: usize, candidates: Vec<String> },
}

/// A finite rectangle of sites, each empty or holding a tile index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assembly {
    pub width: usize,
    pub height: usize,
    cells: Vec<Option<u32>>,
}

impl Assembly {
    pub fn new(width: usize, height: usize) -> Self {
        Assembly {
            width,
            height,
            cells: vec![None; width * height],
        }
    }

    /// An assembly holding only the seed at the origin.
    pub fn seeded(ts: &Compiled, width: usize, height: usize) -> Self {
        let mut a = Assembly::new(width, height);
        a.cells[0] = Some(ts.seed as u32);
        a
    }

    pub fn get(&self, x: usize, y: usize) -> Option<usize> {
        if x < self.width && y < self.height {
            self.cells[y * self.width + x].map(|t| t as usize)
        } else {
            None
        }
    }

    /// Neighbor of `(x, y)` in direction `d`, if inside and occupied.
    pub fn neighbor(&self, x: usize, y: usize, d: Dir) -> Option<usize> {
        let (dx, dy) = d.offset();
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        if nx < 0 || ny < 0 {
            return None;
        }
        self.get(nx as usize, ny as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, tile: Option<usize>) {
        self.cells[y * self.width + x] = tile.map(|t| t as u32);
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Adjacent occupied pairs whose abutting bonds differ, as
    /// `(x, y, dir)` with `dir` either `E` or `N`.
    pub fn mismatches(&self, ts: &Compiled) -> Vec<(usize, usize, Dir)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let Some(a) = self.get(x, y) else { continue };
                for d in [Dir::E, Dir::N] {
                    if let Some(b) = self.neighbor(x, y, d) {
                        if ts.mismatch(a, d, b) {
                            out.push((x, y, d));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn mismatch_count(&self, ts: &Compiled) -> usize {
        self.mismatches(ts).len()
    }
}

/// Summed strength of matched sides of `tile` at the empty site `(x, y)`.
pub fn binding_strength(ts: &Compiled, a: &Assembly, tile: usize, x: usize, y: usize) -> u8 {
    Dir::ALL
        .into_iter()
        .filter_map(|d| a.neighbor(x, y, d).map(|n| ts.interaction(tile, d, n)))
        .sum()
}

pub fn can_bind(ts: &Compiled, a: &Assembly, tile: usize, x: usize, y: usize) -> Result<bool, AtamError> {
    if x >= a.width || y >= a.height {
        return Err(AtamError::OutOfBounds {
            x,
            y,
            width: a.width,
            height: a.height,
        });
    }
    if a.get(x, y).is_some() {
        return Err(AtamError::Occupied { x, y });
    }
    Ok(binding_strength(ts, a, tile, x, y) >= TEMPERATURE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FillOrder {
    #[default]
    Diagonal,
    RowMajor,
}

/// Grows the seed into `[0, max_x] × [0, max_y]`, requiring exactly one
/// binding tile type at every site.
pub fn assemble(ts: &TileSystem, max_x: usize, max_y: usize) -> Result<Assembly, AtamError> {
    assemble_compiled(&Compiled::new(ts), ts, max_x, max_y, FillOrder::Diagonal)
}

pub fn assemble_compiled(
    c: &Compiled,
    ts: &TileSystem,
    max_x: usize,
    max_y: usize,
    order: FillOrder,
) -> Result<Assembly, AtamError> {
    let (width, height) = (max_x + 1, max_y + 1);
    let mut a = Assembly::seeded(c, width, height);
    let place = |a: &mut Assembly, x: usize, y: usize| -> Result<(), AtamError> {
        if x == 0 && y == 0 {
            return Ok(());
        }
        let mut found = Vec::new();
        for t in 0..c.len() {
            if binding_strength(c, a, t, x, y) >= TEMPERATURE {
                found.push(t);
            }
        }
        match found.as_slice() {
            [t] => {
                a.set(x, y, Some(*t));
                Ok(())
            }
            [] => {
                let bond = |d| {
                    a.neighbor(x, y, d)
                        .map(|n| ts.tiles[n].glue(d.opposite()))
                        .map_or("none".to_string(), |g| format!("{}/{}", g.color, g.strength))
                };
                Err(AtamError::Stuck {
                    x,
                    y,
                    west: bond(Dir::W),
                    south: bond(Dir::S),
                })
            }
            many => Err(AtamError::Nondeterministic {
                x,
                y,
                candidates: many.iter().map(|&t| ts.tiles[t].id.clone()).collect(),
            }),
        }
    };
    match order {
        FillOrder::Diagonal => {
            for d in 0..width + height - 1 {
                for x in d.saturating_sub(height - 1)..=d.min(width - 1) {
                    place(&mut a, x, d - x)?;
                }
            }
        }
        FillOrder::RowMajor => {
            for y in 0..height {
                for x in 0..width {
                    place(&mut a, x, y)?;
                }
            }
        }
    }
    Ok(a)
}

/// The pattern shown by an assembly: each occupied cell's label.
pub fn labels(a: &Assembly, ts: &TileSystem) -> PatternGrid {
    let mut g = PatternGrid::new(a.width, a.height);
    for y in 0..a.height {
        for x in 0..a.width {
            g.set(x, y, a.get(x, y).map(|t| ts.tiles[t].label));
        }
    }
    g
}
