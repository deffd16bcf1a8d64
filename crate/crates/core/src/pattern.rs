//! Recursively defined quadrant patterns.
//!
//! A `(w,h)`-recursive pattern assigns each cell `(x, y)` with `x, y >= 0` a
//! label computed from the `w × h` window whose upper-right corner is the
//! cell itself (excluding that cell). Cells outside the quadrant are `⊥`.
//!
//! Windows are flattened bottom row first, left to right, with the top row
//! one cell short: `Π block(w, h-1)(x, y-1) · row(w-1)(x-1, y)`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tuple::{Label, Sym, TupleValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("window must be at least 2x2, got {w}x{h}")]
    WindowTooSmall { w: usize, h: usize },
    #[error("alphabet must be non-empty")]
    EmptyAlphabet,
    #[error("coefficient grid must be {h} rows of {w} entries with the top-right cell null")]
    BadCoefficients { w: usize, h: usize },
    #[error("modulus {modulus} must equal the alphabet size {alphabet}")]
    ModulusMismatch { modulus: u16, alphabet: u16 },
    #[error("label {label} is outside the alphabet of size {alphabet}")]
    LabelOutOfRange { label: u16, alphabet: u16 },
    #[error("table entry has {got} inputs, window needs {want}")]
    TableArity { got: usize, want: usize },
    #[error("boundary sequence `{axis}` is empty")]
    EmptyBoundary { axis: &'static str },
    #[error("boundary sequences disagree at the origin ({x_axis} vs {y_axis})")]
    OriginConflict { x_axis: Label, y_axis: Label },
    #[error("rule is undefined on input {0}")]
    Undefined(String),
    #[error("boundary position is ambiguous for window {0}")]
    AmbiguousBoundary(String),
    #[error("unknown built-in pattern `{0}` (expected S, C or W)")]
    UnknownBuiltin(String),
    #[error("table input `{0}` is not a flat tuple")]
    BadTableInput(String),
}

/// An affine rule `Σ c·v mod m`, or an explicit lookup table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    AffineMod {
        /// `h` rows listed top row first, `w` entries each, top-right `null`.
        coeffs: Vec<Vec<Option<i64>>>,
        modulus: u16,
        bot_as_zero: bool,
    },
    Table { entries: Vec<TableEntry> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub input: TupleValue,
    pub output: Label,
}

/// Periodic label sequences overriding the rule on `y = 0` (`x_axis`,
/// indexed by `x`) and on `x = 0` (`y_axis`, indexed by `y`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub x_axis: Vec<Label>,
    pub y_axis: Vec<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub w: usize,
    pub h: usize,
    /// Alphabet size; labels are `0..alphabet`.
    pub alphabet: u16,
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
}

/// Which built-in test pattern to construct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Sierpinski triangle.
    S,
    /// Sierpinski carpet.
    C,
    /// The (3,3) pattern W.
    W,
}

impl std::str::FromStr for Builtin {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" | "s" => Ok(Builtin::S),
            "C" | "c" => Ok(Builtin::C),
            "W" | "w" => Ok(Builtin::W),
            other => Err(PatternError::UnknownBuiltin(other.to_string())),
        }
    }
}

fn l(v: u16) -> Label {
    Label(v)
}

pub fn builtin(which: Builtin) -> PatternSpec {
    match which {
        Builtin::S => PatternSpec {
            name: Some("S".into()),
            w: 2,
            h: 2,
            alphabet: 2,
            rule: Rule::AffineMod {
                coeffs: vec![vec![Some(1), None], vec![Some(0), Some(1)]],
                modulus: 2,
                bot_as_zero: true,
            },
            boundary: Some(Boundary {
                x_axis: vec![l(1)],
                y_axis: vec![l(1)],
            }),
        },
        Builtin::C => PatternSpec {
            name: Some("C".into()),
            w: 2,
            h: 2,
            alphabet: 3,
            rule: Rule::AffineMod {
                coeffs: vec![vec![Some(1), None], vec![Some(1), Some(1)]],
                modulus: 3,
                bot_as_zero: true,
            },
            boundary: Some(Boundary {
                x_axis: vec![l(1)],
                y_axis: vec![l(1)],
            }),
        },
        Builtin::W => PatternSpec {
            name: Some("W".into()),
            w: 3,
            h: 3,
            alphabet: 2,
            rule: Rule::AffineMod {
                coeffs: vec![
                    vec![Some(1), Some(0), None],
                    vec![Some(0), Some(1), Some(0)],
                    vec![Some(1), Some(0), Some(1)],
                ],
                modulus: 2,
                bot_as_zero: true,
            },
            boundary: Some(Boundary {
                x_axis: vec![l(1), l(0)],
                y_axis: vec![l(1), l(0)],
            }),
        },
    }
}

/// Compiled rule with a hash-indexed table.
#[derive(Clone, Debug)]
enum CompiledRule {
    Affine {
        /// Coefficient per window input position.
        coeffs: Vec<i64>,
        modulus: i64,
        bot_as_zero: bool,
    },
    Table(HashMap<Vec<Sym>, Label>),
}

impl PatternSpec {
    /// Number of window inputs, `wh - 1`.
    pub fn window_len(&self) -> usize {
        self.w * self.h - 1
    }

    pub fn validate(&self) -> Result<(), PatternError> {
        self.compile().map(|_| ())
    }

    fn check_label(&self, lab: Label) -> Result<(), PatternError> {
        if lab.0 >= self.alphabet {
            return Err(PatternError::LabelOutOfRange {
                label: lab.0,
                alphabet: self.alphabet,
            });
        }
        Ok(())
    }

    fn compile(&self) -> Result<CompiledRule, PatternError> {
        let (w, h) = (self.w, self.h);
        if w < 2 || h < 2 {
            return Err(PatternError::WindowTooSmall { w, h });
        }
        if self.alphabet == 0 {
            return Err(PatternError::EmptyAlphabet);
        }
        if let Some(b) = &self.boundary {
            if b.x_axis.is_empty() {
                return Err(PatternError::EmptyBoundary { axis: "x_axis" });
            }
            if b.y_axis.is_empty() {
                return Err(PatternError::EmptyBoundary { axis: "y_axis" });
            }
            for &lab in b.x_axis.iter().chain(&b.y_axis) {
                self.check_label(lab)?;
            }
            if b.x_axis[0] != b.y_axis[0] {
                return Err(PatternError::OriginConflict {
                    x_axis: b.x_axis[0],
                    y_axis: b.y_axis[0],
                });
            }
        }
        match &self.rule {
            Rule::AffineMod {
                coeffs,
                modulus,
                bot_as_zero,
            } => {
                if *modulus != self.alphabet {
                    return Err(PatternError::ModulusMismatch {
                        modulus: *modulus,
                        alphabet: self.alphabet,
                    });
                }
                let shape_ok = coeffs.len() == h
                    && coeffs.iter().all(|r| r.len() == w)
                    && coeffs[0][w - 1].is_none()
                    && coeffs
                        .iter()
                        .enumerate()
                        .all(|(ri, r)| r.iter().enumerate().all(|(ci, c)| c.is_some() || (ri == 0 && ci == w - 1)));
                if !shape_ok {
                    return Err(PatternError::BadCoefficients { w, h });
                }
                // Window order is bottom row first; the file lists the top row first.
                let mut flat = Vec::with_capacity(self.window_len());
                for row in coeffs.iter().rev() {
                    flat.extend(row.iter().flatten().copied());
                }
                Ok(CompiledRule::Affine {
                    coeffs: flat,
                    modulus: i64::from(*modulus),
                    bot_as_zero: *bot_as_zero,
                })
            }
            Rule::Table { entries } => {
                let mut map = HashMap::with_capacity(entries.len());
                for e in entries {
                    let syms = e
                        .input
                        .syms()
                        .map_err(|_| PatternError::BadTableInput(e.input.to_string()))?;
                    if syms.len() != self.window_len() {
                        return Err(PatternError::TableArity {
                            got: syms.len(),
                            want: self.window_len(),
                        });
                    }
                    for lab in syms.iter().flatten() {
                        self.check_label(*lab)?;
                    }
                    self.check_label(e.output)?;
                    map.insert(syms, e.output);
                }
                Ok(CompiledRule::Table(map))
            }
        }
    }

    /// The same pattern viewed through a window one column wider (extra
    /// column on the left, ignored by the rule).
    pub fn widen_w(&self) -> PatternSpec {
        self.widen(1, 0)
    }

    /// The same pattern viewed through a window one row taller (extra row at
    /// the bottom, ignored by the rule).
    pub fn widen_h(&self) -> PatternSpec {
        self.widen(0, 1)
    }

    fn widen(&self, dw: usize, dh: usize) -> PatternSpec {
        let (w2, h2) = (self.w + dw, self.h + dh);
        let rule = match &self.rule {
            Rule::AffineMod {
                coeffs,
                modulus,
                bot_as_zero,
            } => {
                let mut rows: Vec<Vec<Option<i64>>> = coeffs
                    .iter()
                    .map(|r| {
                        let mut nr = vec![Some(0); dw];
                        nr.extend(r.iter().copied());
                        nr
                    })
                    .collect();
                for _ in 0..dh {
                    rows.push(vec![Some(0); w2]);
                }
                Rule::AffineMod {
                    coeffs: rows,
                    modulus: *modulus,
                    bot_as_zero: *bot_as_zero,
                }
            }
            Rule::Table { entries } => {
                // Every value of the new cells maps to the old output.
                let extra = dw * h2 + dh * self.w;
                let domain: Vec<Sym> = std::iter::once(None)
                    .chain((0..self.alphabet).map(|v| Some(Label(v))))
                    .collect();
                let mut out = Vec::new();
                for e in entries {
                    let old = e.input.syms().unwrap_or_default();
                    for combo in product(&domain, extra) {
                        let new = widen_window(&old, &combo, self.w, self.h, dw, dh);
                        out.push(TableEntry {
                            input: TupleValue::flat(new),
                            output: e.output,
                        });
                    }
                }
                Rule::Table { entries: out }
            }
        };
        PatternSpec {
            name: self.name.clone(),
            w: w2,
            h: h2,
            alphabet: self.alphabet,
            rule,
            boundary: self.boundary.clone(),
        }
    }
}

fn product(domain: &[Sym], n: usize) -> Vec<Vec<Sym>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                domain.iter().map(move |d| {
                    let mut q = p.clone();
                    q.push(*d);
                    q
                })
            })
            .collect();
    }
    out
}

/// Lays the old window inside a window grown by `dw` columns on the left and
/// `dh` rows at the bottom, filling new cells from `extra` in window order.
fn widen_window(old: &[Sym], extra: &[Sym], w: usize, h: usize, dw: usize, dh: usize) -> Vec<Sym> {
    let (w2, h2) = (w + dw, h + dh);
    let mut it = extra.iter().copied();
    let mut out = Vec::with_capacity(w2 * h2 - 1);
    for r in 0..h2 {
        let cols = if r == h2 - 1 { w2 - 1 } else { w2 };
        for c in 0..cols {
            if r >= dh && c >= dw {
                out.push(old[(r - dh) * w + (c - dw)]);
            } else {
                out.push(it.next().unwrap_or(None));
            }
        }
    }
    out
}

fn window_text(window: &[Sym]) -> String {
    TupleValue::flat(window.iter().copied()).to_string()
}

/// Evaluates a pattern with an unbounded dense memo of the computed
/// lower-left rectangle.
#[derive(Clone, Debug)]
pub struct PatternOracle {
    spec: PatternSpec,
    rule: CompiledRule,
    width: usize,
    height: usize,
    cells: Vec<Label>,
}

impl PatternOracle {
    pub fn new(spec: PatternSpec) -> Result<Self, PatternError> {
        let rule = spec.compile()?;
        Ok(PatternOracle {
            spec,
            rule,
            width: 0,
            height: 0,
            cells: Vec::new(),
        })
    }

    pub fn builtin(which: Builtin) -> Self {
        Self::new(builtin(which)).expect("built-in patterns are valid")
    }

    pub fn spec(&self) -> &PatternSpec {
        &self.spec
    }

    /// Applies the bare rule to a window (boundary overrides not consulted).
    pub fn apply_rule(&self, window: &[Sym]) -> Result<Label, PatternError> {
        match &self.rule {
            CompiledRule::Affine {
                coeffs,
                modulus,
                bot_as_zero,
            } => {
                let mut acc: i64 = 0;
                for (c, v) in coeffs.iter().zip(window) {
                    match v {
                        Some(lab) => acc += c * i64::from(lab.0),
                        None if *c == 0 || *bot_as_zero => {}
                        None => return Err(PatternError::Undefined(window_text(window))),
                    }
                }
                Ok(Label(acc.rem_euclid(*modulus) as u16))
            }
            CompiledRule::Table(map) => map
                .get(window)
                .copied()
                .ok_or_else(|| PatternError::Undefined(window_text(window))),
        }
    }

    /// The pattern's window function: boundary values are inferred from the
    /// window when it shows the cell lies on an axis, otherwise the rule.
    ///
    /// Windows that cannot occur on the boundary fall back to the rule.
    pub fn apply_window(&self, window: &[Sym]) -> Result<Label, PatternError> {
        let (w, h) = (self.spec.w, self.spec.h);
        debug_assert_eq!(window.len(), self.spec.window_len());
        let Some(b) = &self.spec.boundary else {
            return self.apply_rule(window);
        };
        let below_missing = window[(h - 2) * w + (w - 1)].is_none();
        let left_missing = window[(h - 1) * w + (w - 2)].is_none();
        let inferred = if below_missing {
            let seen = &window[(h - 1) * w..(h - 1) * w + (w - 1)];
            infer_periodic(&b.x_axis, seen)
        } else if left_missing {
            let seen: Vec<Sym> = (0..h - 1).map(|r| window[r * w + (w - 1)]).collect();
            infer_periodic(&b.y_axis, &seen)
        } else {
            return self.apply_rule(window);
        };
        match inferred {
            Inference::Unique(lab) => Ok(lab),
            Inference::Inconsistent => self.apply_rule(window),
            Inference::Ambiguous => Err(PatternError::AmbiguousBoundary(window_text(window))),
        }
    }

    fn ensure(&mut self, x: usize, y: usize) -> Result<(), PatternError> {
        if x < self.width && y < self.height {
            return Ok(());
        }
        let nw = (x + 1).max(self.width * 2).max(16);
        let nh = (y + 1).max(self.height * 2).max(16);
        let mut next = vec![Label(0); nw * nh];
        for yy in 0..self.height {
            next[yy * nw..yy * nw + self.width]
                .copy_from_slice(&self.cells[yy * self.width..(yy + 1) * self.width]);
        }
        let (ow, oh) = (self.width, self.height);
        self.width = nw;
        self.height = nh;
        self.cells = next;
        let mut window = vec![None; self.spec.window_len()];
        for yy in 0..nh {
            for xx in 0..nw {
                if xx < ow && yy < oh {
                    continue;
                }
                let v = self.compute(xx, yy, &mut window)?;
                self.cells[yy * nw + xx] = v;
            }
        }
        Ok(())
    }

    fn stored(&self, x: i64, y: i64) -> Sym {
        if x < 0 || y < 0 {
            None
        } else {
            Some(self.cells[y as usize * self.width + x as usize])
        }
    }

    fn compute(&self, x: usize, y: usize, window: &mut [Sym]) -> Result<Label, PatternError> {
        if let Some(b) = &self.spec.boundary {
            if y == 0 {
                return Ok(b.x_axis[x % b.x_axis.len()]);
            }
            if x == 0 {
                return Ok(b.y_axis[y % b.y_axis.len()]);
            }
        }
        self.fill_window(x as i64, y as i64, window);
        self.apply_rule(window)
    }

    fn fill_window(&self, x: i64, y: i64, window: &mut [Sym]) {
        let (w, h) = (self.spec.w as i64, self.spec.h as i64);
        let mut i = 0;
        for dy in (0..h).rev() {
            let cols = if dy == 0 { w - 1 } else { w };
            for c in 0..cols {
                window[i] = self.stored(x - (w - 1) + c, y - dy);
                i += 1;
            }
        }
    }

    /// `P(x, y)`: `⊥` outside the quadrant.
    pub fn evaluate(&mut self, x: i64, y: i64) -> Result<Sym, PatternError> {
        if x < 0 || y < 0 {
            return Ok(None);
        }
        self.ensure(x as usize, y as usize)?;
        Ok(self.stored(x, y))
    }

    /// The flattened window of `(x, y)` as read from the memo.
    pub fn window(&mut self, x: i64, y: i64) -> Result<Vec<Sym>, PatternError> {
        self.evaluate(x.max(0), y.max(0))?;
        let mut window = vec![None; self.spec.window_len()];
        self.fill_window(x, y, &mut window);
        Ok(window)
    }

    /// `row^n(x, y) = (P(x-n+1, y), …, P(x, y))`.
    pub fn row(&mut self, n: usize, x: i64, y: i64) -> Result<TupleValue, PatternError> {
        let n = n as i64;
        let syms = (0..n)
            .map(|i| self.evaluate(x - n + 1 + i, y))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TupleValue::flat(syms))
    }

    /// `block^{w,h}(x, y)`: rows of width `w`, bottom row first.
    pub fn block(&mut self, w: usize, h: usize, x: i64, y: i64) -> Result<TupleValue, PatternError> {
        let h = h as i64;
        let rows = (0..h)
            .map(|i| self.row(w, x, y - h + 1 + i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TupleValue::Node(rows))
    }

    /// `col^n(x, y) = (P(x, y-n+1), …, P(x, y))`.
    pub fn col(&mut self, n: usize, x: i64, y: i64) -> Result<TupleValue, PatternError> {
        let n = n as i64;
        let syms = (0..n)
            .map(|i| self.evaluate(x, y - n + 1 + i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TupleValue::flat(syms))
    }

    /// Labels of `[0, width) × [0, height)`.
    pub fn grid(&mut self, width: usize, height: usize) -> Result<PatternGrid, PatternError> {
        let mut g = PatternGrid::new(width, height);
        if width > 0 && height > 0 {
            self.ensure(width - 1, height - 1)?;
        }
        for y in 0..height {
            for x in 0..width {
                g.set(x, y, self.stored(x as i64, y as i64));
            }
        }
        Ok(g)
    }

    /// Distinct labels used on `[0, n)²`.
    pub fn labels_used(&mut self, n: usize) -> Result<BTreeSet<Label>, PatternError> {
        Ok(self.grid(n, n)?.cells.into_iter().flatten().collect())
    }
}

enum Inference {
    Unique(Label),
    Inconsistent,
    Ambiguous,
}

/// Finds the label at position `n` of a periodic axis sequence given the
/// values seen at `n-L .. n-1` (`⊥` for negative positions).
fn infer_periodic(seq: &[Label], seen: &[Sym]) -> Inference {
    let p = seq.len() as i64;
    let len = seen.len() as i64;
    let mut found: Option<Label> = None;
    for n in 0..(p + len) {
        let consistent = seen.iter().enumerate().all(|(k, s)| {
            let pos = n - len + k as i64;
            if pos < 0 {
                s.is_none()
            } else {
                *s == Some(seq[(pos % p) as usize])
            }
        });
        if consistent {
            let lab = seq[(n % p) as usize];
            match found {
                None => found = Some(lab),
                Some(prev) if prev != lab => return Inference::Ambiguous,
                Some(_) => {}
            }
        }
    }
    found.map_or(Inference::Inconsistent, Inference::Unique)
}

/// A finite `width × height` grid of labels or `⊥`, origin at the bottom
/// left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Sym>,
}

impl PatternGrid {
    pub fn new(width: usize, height: usize) -> Self {
        PatternGrid {
            width,
            height,
            cells: vec![None; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Sym {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: Sym) {
        self.cells[y * self.width + x] = v;
    }

    /// First cell (row-major from the origin) where the grids differ.
    pub fn first_difference(&self, other: &PatternGrid) -> Option<(usize, usize)> {
        if self.width != other.width || self.height != other.height {
            return Some((self.width.min(other.width), self.height.min(other.height)));
        }
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .find(|&(x, y)| self.get(x, y) != other.get(x, y))
    }
}
