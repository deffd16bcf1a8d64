//! File formats: tile-set JSON, Xgrow tile files, PPM images, sweep CSV and
//! verification reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ktam::SweepResult;
use crate::pattern::PatternGrid;
use crate::tileset::{glue_index, Dir, TileSystem, TileType};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Canonical JSON text of a tile system, newline terminated.
pub fn tileset_to_json(ts: &TileSystem) -> String {
    let mut s = serde_json::to_string_pretty(ts).expect("tile systems serialize");
    s.push('\n');
    s
}

/// Parses and validates a tile system. `origin` names the source in errors.
pub fn tileset_from_json(text: &str, origin: &Path) -> Result<TileSystem, IoError> {
    let ts: TileSystem = serde_json::from_str(text).map_err(|source| IoError::Json {
        path: origin.to_path_buf(),
        source,
    })?;
    let invalid = |msg: String| IoError::Invalid {
        path: origin.to_path_buf(),
        msg,
    };
    for (i, t) in ts.tiles.iter().enumerate() {
        let fresh = TileType::new(t.label, t.glues.clone());
        if fresh.id != t.id {
            return Err(invalid(format!("tiles[{i}].id `{}` does not match its content (expected `{}`)", t.id, fresh.id)));
        }
        if let Some(d) = Dir::ALL.into_iter().find(|&d| t.strength(d) > 2) {
            return Err(invalid(format!("tiles[{i}].glues.{d:?}.strength must be 0, 1 or 2")));
        }
        if t.label.0 >= ts.alphabet {
            return Err(invalid(format!("tiles[{i}].label {} is outside the alphabet", t.label)));
        }
    }
    ts.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(ts)
}

pub fn read_tileset(path: &Path) -> Result<TileSystem, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    tileset_from_json(&text, path)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

/// Xgrow tile-file text. Tiles are listed in id order; bond 0 is the null
/// bond and bonds `1..=B` follow the canonical glue order.
pub fn export_xgrow(ts: &TileSystem) -> String {
    let idx = glue_index(ts);
    let mut order: Vec<&TileType> = ts.tiles.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut s = String::new();
    let _ = writeln!(s, "% {} tile set, {} contexts, alphabet {}, window {}x{}", ts.provenance, mode_name(ts), ts.alphabet, ts.w, ts.h);
    let _ = writeln!(s, "num tile types={}", order.len());
    let _ = writeln!(s, "num binding types={}", idx.len() - 1);
    s.push_str("tile edges={\n");
    for t in &order {
        let b = Dir::ALL.map(|d| idx.get(t.glue(d)));
        let _ = writeln!(s, "{{{} {} {} {}}} % label={} id={}", b[0], b[1], b[2], b[3], t.label, t.id);
    }
    s.push_str("}\n");
    let strengths: Vec<String> = idx.strengths[1..].iter().map(u8::to_string).collect();
    let _ = writeln!(s, "binding strengths={{{}}}", strengths.join(" "));
    if let Some(k) = order.iter().position(|t| t.id == ts.seed_id) {
        let _ = writeln!(s, "seed=1,1,{}", k + 1);
    }
    s
}

fn mode_name(ts: &TileSystem) -> &'static str {
    match ts.mode {
        crate::tileset::Mode::Exhaustive => "exhaustive",
        crate::tileset::Mode::Reachable => "reachable",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderPalette {
    /// Color per label.
    pub colors: Vec<[u8; 3]>,
    pub background: [u8; 3],
    pub mismatch: [u8; 3],
}

impl RenderPalette {
    /// Label 0 white, label 1 dark grey, further labels on evenly spaced
    /// hues.
    pub fn default_for(alphabet: u16) -> Self {
        let extra = alphabet.saturating_sub(2) as usize;
        let mut colors = vec![[255, 255, 255], [64, 64, 64]];
        for k in 0..extra {
            colors.push(hue(k as f64 / extra as f64));
        }
        colors.truncate(alphabet.max(1) as usize);
        RenderPalette {
            colors,
            background: [24, 28, 48],
            mismatch: [230, 20, 20],
        }
    }

    pub fn color(&self, label: Option<crate::tuple::Label>) -> [u8; 3] {
        match label {
            None => self.background,
            Some(l) => self.colors.get(l.0 as usize).copied().unwrap_or(self.background),
        }
    }
}

fn hue(h: f64) -> [u8; 3] {
    // Fully saturated HSV at value 0.85.
    let v = 0.85;
    let i = (h * 6.0).floor();
    let f = h * 6.0 - i;
    let (p, q, t) = (0.0, v * (1.0 - f), v * f);
    let (r, g, b) = match i as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [(r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8]
}

/// Binary PPM of a pattern grid with `(0,0)` at the bottom-left. Each
/// mismatched edge `(x, y, dir)` is drawn along the shared cell border.
pub fn render_ppm(grid: &PatternGrid, palette: &RenderPalette, cell_px: usize, mismatches: &[(usize, usize, Dir)]) -> Vec<u8> {
    let px = cell_px.max(1);
    let (w, h) = (grid.width * px, grid.height * px);
    let mut img = vec![0u8; w * h * 3];
    let mut paint = |x: usize, y: usize, c: [u8; 3]| {
        // Row 0 of the image is the top.
        let row = h - 1 - y;
        let i = (row * w + x) * 3;
        img[i..i + 3].copy_from_slice(&c);
    };
    for gy in 0..grid.height {
        for gx in 0..grid.width {
            let c = palette.color(grid.get(gx, gy));
            for dy in 0..px {
                for dx in 0..px {
                    paint(gx * px + dx, gy * px + dy, c);
                }
            }
        }
    }
    for &(x, y, d) in mismatches {
        let (ox, oy) = match d {
            Dir::E => (x + 1, y),
            _ => (x, y + 1),
        };
        if ox >= grid.width || oy >= grid.height {
            continue;
        }
        if px == 1 {
            paint(x, y, palette.mismatch);
            paint(ox, oy, palette.mismatch);
            continue;
        }
        for k in 0..px {
            match d {
                Dir::E => {
                    paint(ox * px, oy * px + k, palette.mismatch);
                    paint(ox * px - 1, oy * px + k, palette.mismatch);
                }
                _ => {
                    paint(ox * px + k, oy * px, palette.mismatch);
                    paint(ox * px + k, oy * px - 1, palette.mismatch);
                }
            }
        }
    }
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(&img);
    out
}

/// Sweep records as CSV with a header row.
pub fn sweep_to_csv(results: &[SweepResult]) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results.iter().flat_map(|s| &s.records) {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub systems: Vec<String>,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn new(systems: Vec<String>) -> Self {
        VerifyReport {
            systems,
            passed: true,
            checks: Vec::new(),
        }
    }

    pub fn push<T: Serialize>(&mut self, name: &str, passed: bool, summary: String, detail: &T) {
        self.passed &= passed;
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            passed,
            summary,
            detail: serde_json::to_value(detail).expect("report details serialize"),
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
