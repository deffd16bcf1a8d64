//! Tile types, tile systems, and the two constructions: pattern to
//! rectilinear tile system, and rectilinear tile system to compact
//! error-resilient tile system with the same number of tile types.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pattern::{PatternError, PatternOracle, PatternSpec};
use crate::tuple::{self, Label, Sym, TupleError, TupleValue};

/// Binding threshold of every system built here.
pub const TEMPERATURE: u8 = 2;

/// Default number of diagonals scanned before the reachable-context closure
/// gives up.
pub const DEFAULT_DIAGONAL_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum TileSetError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("malformed glue color: {0}")]
    Tuple(#[from] TupleError),
    #[error("rule has no value for window {0}")]
    MissingRuleInput(String),
    #[error("pattern is not ({w},{h})-recursive: window {window} yields both {a} and {b}")]
    NotRecursive {
        w: usize,
        h: usize,
        window: String,
        a: Label,
        b: Label,
    },
    #[error("reachable-context closure did not settle within {cap} diagonals")]
    ClosureCap { cap: usize },
    #[error("the error-resilient transform needs a construction-1 system, got {0}")]
    WrongProvenance(Provenance),
    #[error("tile {id}: {msg}")]
    BadTile { id: String, msg: String },
    #[error("seed tile `{0}` is not in the system")]
    MissingSeed(String),
    #[error("tiles {a} and {b} have identical glues")]
    DuplicateGlues { a: String, b: String },
    #[error("duplicate tile id {0}")]
    DuplicateId(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::E => Dir::W,
            Dir::S => Dir::N,
            Dir::W => Dir::E,
        }
    }

    /// Unit offset `(dx, dy)`, `y` pointing north.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Dir::N => (0, 1),
            Dir::E => (1, 0),
            Dir::S => (0, -1),
            Dir::W => (-1, 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Glue {
    pub color: TupleValue,
    pub strength: u8,
}

impl Glue {
    pub fn new(color: TupleValue, strength: u8) -> Self {
        Glue { color, strength }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Glues {
    #[serde(rename = "N")]
    pub n: Glue,
    #[serde(rename = "E")]
    pub e: Glue,
    #[serde(rename = "S")]
    pub s: Glue,
    #[serde(rename = "W")]
    pub w: Glue,
}

impl Glues {
    pub fn get(&self, d: Dir) -> &Glue {
        match d {
            Dir::N => &self.n,
            Dir::E => &self.e,
            Dir::S => &self.s,
            Dir::W => &self.w,
        }
    }

    pub fn get_mut(&mut self, d: Dir) -> &mut Glue {
        match d {
            Dir::N => &mut self.n,
            Dir::E => &mut self.e,
            Dir::S => &mut self.s,
            Dir::W => &mut self.w,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileType {
    pub id: String,
    pub label: Label,
    pub glues: Glues,
}

impl TileType {
    /// Builds a tile whose id is the content hash of its label and glues.
    pub fn new(label: Label, glues: Glues) -> Self {
        let id = content_id(label, &glues);
        TileType { id, label, glues }
    }

    pub fn glue(&self, d: Dir) -> &Glue {
        self.glues.get(d)
    }

    pub fn color(&self, d: Dir) -> &TupleValue {
        &self.glues.get(d).color
    }

    pub fn strength(&self, d: Dir) -> u8 {
        self.glues.get(d).strength
    }

    pub fn kind(&self) -> TileKind {
        let st = |d| self.strength(d);
        match (st(Dir::N), st(Dir::E), st(Dir::S), st(Dir::W)) {
            (2, 2, 0, 0) => TileKind::Seed,
            (1, 2, 0, 2) => TileKind::HorizontalBoundary,
            (2, 1, 2, 0) => TileKind::VerticalBoundary,
            _ => TileKind::Interior,
        }
    }

    /// Recomputes the content id after glues were edited in place.
    pub fn rehash(&mut self) {
        self.id = content_id(self.label, &self.glues);
    }
}

fn content_id(label: Label, glues: &Glues) -> String {
    let mut h = Sha256::new();
    h.update(label.to_string());
    for d in Dir::ALL {
        let g = glues.get(d);
        h.update(format!("|{:?}:{}/{}", d, g.color, g.strength));
    }
    let digest = h.finalize();
    format!("t{}", hex::encode(&digest[..8]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TileKind {
    Seed,
    HorizontalBoundary,
    VerticalBoundary,
    Interior,
}

impl TileKind {
    pub fn is_boundary(self) -> bool {
        !matches!(self, TileKind::Interior)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Construction1,
    Construction2,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Construction1 => "construction1",
            Provenance::Construction2 => "construction2",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    #[default]
    Reachable,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "reachable" => Ok(Mode::Reachable),
            other => Err(format!("unknown mode `{other}` (expected reachable or exhaustive)")),
        }
    }
}

/// A temperature-2 tile assembly system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileSystem {
    pub alphabet: u16,
    pub w: usize,
    pub h: usize,
    pub provenance: Provenance,
    pub mode: Mode,
    pub seed_id: String,
    pub tiles: Vec<TileType>,
}

impl TileSystem {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn seed(&self) -> Option<&TileType> {
        self.tiles.iter().find(|t| t.id == self.seed_id)
    }

    pub fn tile(&self, id: &str) -> Option<&TileType> {
        self.tiles.iter().find(|t| t.id == id)
    }

    pub fn interior(&self) -> impl Iterator<Item = &TileType> {
        self.tiles.iter().filter(|t| t.kind() == TileKind::Interior)
    }

    pub fn count_kind(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|t| t.kind() == kind).count()
    }

    /// Checks the seed, id uniqueness, and that tile types are distinct.
    pub fn validate(&self) -> Result<(), TileSetError> {
        let seed = self
            .seed()
            .ok_or_else(|| TileSetError::MissingSeed(self.seed_id.clone()))?;
        if seed.kind() != TileKind::Seed {
            return Err(TileSetError::BadTile {
                id: seed.id.clone(),
                msg: "seed must have N/E strength 2 and S/W strength 0".into(),
            });
        }
        let mut ids = HashSet::new();
        let mut by_glues: HashMap<&Glues, &str> = HashMap::new();
        for t in &self.tiles {
            if !ids.insert(t.id.as_str()) {
                return Err(TileSetError::DuplicateId(t.id.clone()));
            }
            if let Some(prev) = by_glues.insert(&t.glues, &t.id) {
                return Err(TileSetError::DuplicateGlues {
                    a: prev.to_string(),
                    b: t.id.clone(),
                });
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Self, TileSetError> {
        self.tiles.sort_by(|a, b| a.id.cmp(&b.id));
        self.validate()?;
        Ok(self)
    }
}

/// Splits a flattened window into `(block, row)` tuples: `h-1` rows of `w`
/// symbols, then one row of `w-1`.
pub fn window_to_context(window: &[Sym], w: usize, h: usize) -> (TupleValue, TupleValue) {
    let rows = (0..h - 1)
        .map(|r| TupleValue::flat(window[r * w..(r + 1) * w].iter().copied()))
        .collect();
    let row = TupleValue::flat(window[(h - 1) * w..].iter().copied());
    (TupleValue::Node(rows), row)
}

/// The construction-1 tile for one `(block, row)` context.
pub fn kl_tile(window: &[Sym], w: usize, h: usize, label: Label) -> Result<TileType, TileSetError> {
    let (block, row) = window_to_context(window, w, h);
    let lab = TupleValue::label(label);
    let east = tuple::shift_insert(&row, &lab)?;
    let north = tuple::shift_insert(&block, &tuple::concat(&row, &TupleValue::flat([Some(label)]))?)?;
    let below_all_bot = window[(h - 2) * w..(h - 1) * w].iter().all(Option::is_none);
    let left_all_bot = window[(h - 1) * w..].iter().all(Option::is_none);
    // (N, E, S, W)
    let strengths = match (below_all_bot, left_all_bot) {
        (true, true) => (2, 2, 0, 0),
        (true, false) => (1, 2, 0, 2),
        (false, true) => (2, 1, 2, 0),
        (false, false) => (1, 1, 1, 1),
    };
    Ok(TileType::new(
        label,
        Glues {
            n: Glue::new(north, strengths.0),
            e: Glue::new(east, strengths.1),
            s: Glue::new(block, strengths.2),
            w: Glue::new(row, strengths.3),
        },
    ))
}

/// Windows admitted by the two `⊥`-placement conditions: within a row `⊥`
/// only precedes labels, within a column `⊥` only sits below labels.
pub fn admissible_windows(w: usize, h: usize, alphabet: u16) -> Vec<Vec<Sym>> {
    let row_options = |len: usize| -> Vec<Vec<Sym>> {
        // `k` leading ⊥ followed by any labels.
        let mut out = Vec::new();
        for k in 0..=len {
            let mut partial: Vec<Vec<Sym>> = vec![vec![None; k]];
            for _ in k..len {
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        (0..alphabet).map(move |v| {
                            let mut q = p.clone();
                            q.push(Some(Label(v)));
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        out
    };
    let full = row_options(w);
    let short = row_options(w - 1);
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Sym>> = vec![Vec::new()];
    for r in 0..h {
        let options = if r == h - 1 { &short } else { &full };
        let mut next = Vec::new();
        for prefix in &stack {
            for opt in options {
                // A label below a ⊥ in the same column is not admissible.
                let ok = opt.iter().enumerate().all(|(c, s)| {
                    s.is_some() || (0..r).all(|pr| prefix[pr * w + c].is_none())
                });
                if ok {
                    let mut q = prefix.clone();
                    q.extend_from_slice(opt);
                    next.push(q);
                }
            }
        }
        stack = next;
    }
    out.append(&mut stack);
    out
}

/// Compiles a pattern into a rectilinear tile system.
///
/// `Reachable` emits only contexts realized by the pattern (closure over
/// growing diagonals); `Exhaustive` emits every admissible context.
pub fn construct_kl(spec: &PatternSpec, mode: Mode) -> Result<TileSystem, TileSetError> {
    construct_kl_with_cap(spec, mode, DEFAULT_DIAGONAL_CAP)
}

pub fn construct_kl_with_cap(spec: &PatternSpec, mode: Mode, cap: usize) -> Result<TileSystem, TileSetError> {
    let mut oracle = PatternOracle::new(spec.clone())?;
    let (w, h) = (spec.w, spec.h);
    let contexts = match mode {
        Mode::Reachable => reachable_contexts(&mut oracle, cap)?,
        Mode::Exhaustive => {
            let mut map = BTreeMap::new();
            for win in admissible_windows(w, h, spec.alphabet) {
                let lab = oracle.apply_window(&win).map_err(|e| match e {
                    PatternError::Undefined(text) => TileSetError::MissingRuleInput(text),
                    other => other.into(),
                })?;
                map.insert(win, lab);
            }
            map
        }
    };
    let mut tiles = Vec::with_capacity(contexts.len());
    let mut seed_id = String::new();
    for (win, lab) in &contexts {
        let t = kl_tile(win, w, h, *lab)?;
        if t.kind() == TileKind::Seed {
            seed_id = t.id.clone();
        }
        tiles.push(t);
    }
    TileSystem {
        alphabet: spec.alphabet,
        w,
        h,
        provenance: Provenance::Construction1,
        mode,
        seed_id,
        tiles,
    }
    .finish()
}

/// Minimum number of diagonals scanned before the closure may stop.
pub const MIN_DIAGONALS: usize = 64;

/// Windows realized by the pattern, scanned diagonal by diagonal.
///
/// The scan stops once the run of diagonals without a new window is at
/// least as long as the prefix before the last discovery (and at least
/// `w + h`, after [`MIN_DIAGONALS`]). Self-similar patterns surface new
/// windows at geometrically spaced scales, so a fixed quiet run undercounts.
pub fn reachable_contexts(oracle: &mut PatternOracle, cap: usize) -> Result<BTreeMap<Vec<Sym>, Label>, TileSetError> {
    let (w, h) = (oracle.spec().w, oracle.spec().h);
    let mut seen: HashMap<Vec<Sym>, Label> = HashMap::new();
    let mut last_fresh = 0usize;
    for d in 0..cap {
        let di = d as i64;
        // Growing the memo once per diagonal keeps the scan linear.
        oracle.evaluate(di, di)?;
        for x in 0..=di {
            let y = di - x;
            let win = oracle.window(x, y)?;
            let lab = oracle.evaluate(x, y)?.expect("quadrant cell");
            match seen.get(&win) {
                Some(&prev) if prev != lab => {
                    return Err(TileSetError::NotRecursive {
                        w,
                        h,
                        window: TupleValue::flat(win).to_string(),
                        a: prev,
                        b: lab,
                    });
                }
                Some(_) => {}
                None => {
                    seen.insert(win, lab);
                    last_fresh = d;
                }
            }
        }
        let quiet = d - last_fresh;
        if d + 1 >= MIN_DIAGONALS && quiet >= (w + h).max(last_fresh + 1) {
            return Ok(seen.into_iter().collect());
        }
    }
    Err(TileSetError::ClosureCap { cap })
}

/// Splits a construction-1 south color into `(block, col)`: the block with
/// its last column removed, and that last column.
pub fn split_south(b: &TupleValue) -> Result<(TupleValue, TupleValue), TupleError> {
    let rows = b.children()?;
    let mut block = Vec::with_capacity(rows.len());
    let mut col = Vec::with_capacity(rows.len());
    for r in rows {
        let syms = r.syms()?;
        let Some((last, rest)) = syms.split_last() else {
            return Err(TupleError::Empty);
        };
        block.push(TupleValue::flat(rest.iter().copied()));
        col.push(TupleValue::Leaf(*last));
    }
    Ok((TupleValue::Node(block), TupleValue::Node(col)))
}

/// The error-resilient replacement `r_t` of a construction-1 tile.
pub fn er_tile(t: &TileType, w: usize, h: usize) -> Result<TileType, TileSetError> {
    let bad = |msg: String| TileSetError::BadTile {
        id: t.id.clone(),
        msg,
    };
    let b = t.color(Dir::S);
    let row = t.color(Dir::W);
    if b.arity()? != h - 1 || b.children()?.iter().any(|r| r.arity().ok() != Some(w)) {
        return Err(bad(format!("south color {b} is not {} rows of {w}", h - 1)));
    }
    if row.arity()? != w - 1 {
        return Err(bad(format!("west color {row} is not a {}-tuple", w - 1)));
    }
    let (block, col) = split_south(b)?;
    let lab = TupleValue::label(t.label);
    let pair = |a: TupleValue, b: TupleValue| TupleValue::Node(vec![a, b]);
    let glues = Glues {
        w: Glue::new(pair(block.clone(), row.clone()), t.strength(Dir::W)),
        s: Glue::new(pair(block.clone(), col.clone()), t.strength(Dir::S)),
        e: Glue::new(
            pair(tuple::deep_shift_insert(&block, &col)?, tuple::shift_insert(row, &lab)?),
            t.strength(Dir::E),
        ),
        n: Glue::new(
            pair(tuple::shift_insert(&block, row)?, tuple::shift_insert(&col, &lab)?),
            t.strength(Dir::N),
        ),
    };
    Ok(TileType::new(t.label, glues))
}

/// Transforms a construction-1 system into its compact error-resilient
/// counterpart. The seed maps to the seed.
pub fn construct_er(tas: &TileSystem) -> Result<TileSystem, TileSetError> {
    if tas.provenance != Provenance::Construction1 {
        return Err(TileSetError::WrongProvenance(tas.provenance));
    }
    let mut seed_id = String::new();
    let mut tiles = Vec::with_capacity(tas.tiles.len());
    for t in &tas.tiles {
        let r = er_tile(t, tas.w, tas.h)?;
        if t.id == tas.seed_id {
            seed_id = r.id.clone();
        }
        tiles.push(r);
    }
    TileSystem {
        alphabet: tas.alphabet,
        w: tas.w,
        h: tas.h,
        provenance: Provenance::Construction2,
        mode: tas.mode,
        seed_id,
        tiles,
    }
    .finish()
}

/// Integer bond indices for glues: `0` for every strength-0 glue, `1..` for
/// distinct `(color, strength)` pairs in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueIndex {
    map: HashMap<Glue, u32>,
    /// Strength per index; entry 0 is the null bond.
    pub strengths: Vec<u8>,
    /// Glue per index; entry 0 is `None`.
    pub glues: Vec<Option<Glue>>,
}

impl GlueIndex {
    pub fn get(&self, g: &Glue) -> u32 {
        if g.strength == 0 {
            return 0;
        }
        self.map[g]
    }

    pub fn try_get(&self, g: &Glue) -> Option<u32> {
        if g.strength == 0 {
            Some(0)
        } else {
            self.map.get(g).copied()
        }
    }

    /// Number of indices including the null bond.
    pub fn len(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.len() <= 1
    }
}

pub fn glue_index(ts: &TileSystem) -> GlueIndex {
    let mut distinct: Vec<(String, &Glue)> = ts
        .tiles
        .iter()
        .flat_map(|t| Dir::ALL.into_iter().map(move |d| t.glue(d)))
        .filter(|g| g.strength > 0)
        .map(|g| (g.color.to_string(), g))
        .collect();
    distinct.sort_by(|a, b| (&a.0, a.1.strength).cmp(&(&b.0, b.1.strength)));
    distinct.dedup_by(|a, b| a.1 == b.1);
    let mut map = HashMap::with_capacity(distinct.len());
    let mut strengths = vec![0];
    let mut glues = vec![None];
    for (i, (_, g)) in distinct.into_iter().enumerate() {
        map.insert(g.clone(), i as u32 + 1);
        strengths.push(g.strength);
        glues.push(Some(g.clone()));
    }
    GlueIndex { map, strengths, glues }
}

/// Integer view of a tile system for the simulators and checkers.
#[derive(Clone, Debug)]
pub struct Compiled {
    /// Bond index per tile, indexed by [`Dir::index`].
    pub bonds: Vec<[u32; 4]>,
    pub strengths: Vec<[u8; 4]>,
    pub labels: Vec<Label>,
    pub kinds: Vec<TileKind>,
    pub seed: usize,
    pub index: GlueIndex,
}

impl Compiled {
    pub fn new(ts: &TileSystem) -> Self {
        let index = glue_index(ts);
        let mut bonds = Vec::with_capacity(ts.len());
        let mut strengths = Vec::with_capacity(ts.len());
        for t in &ts.tiles {
            bonds.push(Dir::ALL.map(|d| index.get(t.glue(d))));
            strengths.push(Dir::ALL.map(|d| t.strength(d)));
        }
        Compiled {
            bonds,
            strengths,
            labels: ts.tiles.iter().map(|t| t.label).collect(),
            kinds: ts.tiles.iter().map(TileType::kind).collect(),
            seed: ts.tiles.iter().position(|t| t.id == ts.seed_id).unwrap_or(0),
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty()
    }

    pub fn bond(&self, tile: usize, d: Dir) -> u32 {
        self.bonds[tile][d.index()]
    }

    /// Strength contributed across the `d` side of `a` onto `b` placed at
    /// that side: the bond strength when the glues are equal, else 0.
    pub fn interaction(&self, a: usize, d: Dir, b: usize) -> u8 {
        let ga = self.bond(a, d);
        if ga != 0 && ga == self.bond(b, d.opposite()) {
            self.index.strengths[ga as usize]
        } else {
            0
        }
    }

    /// True when the abutting glues differ.
    pub fn mismatch(&self, a: usize, d: Dir, b: usize) -> bool {
        self.bond(a, d) != self.bond(b, d.opposite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{builtin, Builtin};

    fn t(s: &str) -> TupleValue {
        s.parse().unwrap()
    }

    #[test]
    fn sierpinski_reachable_has_eleven_tiles() {
        let ts = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        assert_eq!(ts.len(), 11);
        assert_eq!(ts.count_kind(TileKind::Interior), 8);
        assert_eq!(ts.count_kind(TileKind::VerticalBoundary), 1);
        assert_eq!(ts.count_kind(TileKind::HorizontalBoundary), 1);
        assert_eq!(ts.count_kind(TileKind::Seed), 1);
        let seed = ts.seed().unwrap();
        assert_eq!(seed.label, Label(1));
        assert_eq!(seed.color(Dir::N), &t("((_,1))"));
        assert_eq!(seed.color(Dir::E), &t("(1)"));
        assert_eq!(seed.color(Dir::S), &t("((_,_))"));
        assert_eq!(seed.color(Dir::W), &t("(_)"));
        let first = ts
            .tiles
            .iter()
            .find(|x| x.color(Dir::W) == &t("(0)") && x.color(Dir::S) == &t("((1,0))"))
            .unwrap();
        assert_eq!(first.label, Label(0));
        assert_eq!(first.color(Dir::E), &t("(0)"));
        assert_eq!(first.color(Dir::N), &t("((0,0))"));
    }

    #[test]
    fn boundary_strengths() {
        let ts = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let h = ts.tiles.iter().find(|x| x.kind() == TileKind::HorizontalBoundary).unwrap();
        assert_eq!(h.color(Dir::S), &t("((_,_))"));
        assert_eq!(h.color(Dir::W), &t("(1)"));
        assert_eq!(h.color(Dir::N), &t("((1,1))"));
        let v = ts.tiles.iter().find(|x| x.kind() == TileKind::VerticalBoundary).unwrap();
        assert_eq!(v.color(Dir::S), &t("((_,1))"));
        assert_eq!(v.color(Dir::N), &t("((_,1))"));
        assert_eq!(v.color(Dir::E), &t("(1)"));
    }

    #[test]
    fn exhaustive_sierpinski_counts() {
        // Row 1 admits (⊥,⊥), (⊥,a), (a,b): 7 options; the short row admits
        // ⊥ only under a ⊥ column: 3 + 7·2 = 17.
        assert_eq!(admissible_windows(2, 2, 2).len(), 17);
        let ts = construct_kl(&builtin(Builtin::S), Mode::Exhaustive).unwrap();
        assert_eq!(ts.len(), 17);
        assert!(ts.len() <= 27);
        assert_eq!(ts.seed().unwrap().label, Label(1));
    }

    #[test]
    fn admissible_windows_brute_force() {
        // Independent enumeration over all (Λ∪⊥)^{wh-1} filtered by the two
        // conditions as literally stated.
        for (w, h, a) in [(2, 2, 2u16), (2, 2, 3), (3, 2, 2), (2, 3, 2), (3, 3, 2)] {
            let n = w * h - 1;
            let dom: Vec<Sym> = std::iter::once(None).chain((0..a).map(|v| Some(Label(v)))).collect();
            let total = dom.len().pow(n as u32);
            let mut count = 0;
            for mut code in 0..total {
                let mut win = Vec::with_capacity(n);
                for _ in 0..n {
                    win.push(dom[code % dom.len()]);
                    code /= dom.len();
                }
                let at = |r: usize, c: usize| -> Option<Sym> {
                    if r == h - 1 && c == w - 1 {
                        None
                    } else {
                        Some(win[r * w + c])
                    }
                };
                let mut ok = true;
                for r in 0..h {
                    for j in 0..w {
                        for k in 0..w {
                            if let (Some(a), Some(b)) = (at(r, j), at(r, k)) {
                                if a.is_none() && b.is_some() && j >= k {
                                    ok = false;
                                }
                            }
                        }
                    }
                }
                for i in 0..h {
                    for j in 0..h {
                        for k in 0..w {
                            if let (Some(a), Some(b)) = (at(i, k), at(j, k)) {
                                if a.is_none() && b.is_some() && i >= j {
                                    ok = false;
                                }
                            }
                        }
                    }
                }
                if ok {
                    count += 1;
                }
            }
            assert_eq!(admissible_windows(w, h, a).len(), count, "({w},{h}) |Λ|={a}");
        }
    }

    #[test]
    fn kl_color_identities() {
        for b in [Builtin::S, Builtin::C, Builtin::W] {
            for mode in [Mode::Reachable, Mode::Exhaustive] {
                let ts = construct_kl(&builtin(b), mode).unwrap();
                for x in &ts.tiles {
                    let lab = TupleValue::label(x.label);
                    assert_eq!(x.color(Dir::E), &tuple::shift_insert(x.color(Dir::W), &lab).unwrap());
                    let tail = tuple::concat(x.color(Dir::W), &TupleValue::flat([Some(x.label)])).unwrap();
                    assert_eq!(x.color(Dir::N), &tuple::shift_insert(x.color(Dir::S), &tail).unwrap());
                }
            }
        }
    }

    #[test]
    fn reachable_is_subset_of_exhaustive() {
        for b in [Builtin::S, Builtin::C, Builtin::W] {
            let r = construct_kl(&builtin(b), Mode::Reachable).unwrap();
            let e = construct_kl(&builtin(b), Mode::Exhaustive).unwrap();
            let ids: HashSet<_> = e.tiles.iter().map(|x| &x.glues).collect();
            assert!(r.tiles.iter().all(|x| ids.contains(&x.glues)), "{b:?}");
        }
    }

    #[test]
    fn er_seed_of_sierpinski() {
        let ts = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let rs = construct_er(&ts).unwrap();
        assert_eq!(rs.len(), ts.len());
        let seed = rs.seed().unwrap();
        assert_eq!(seed.color(Dir::W), &t("(((_)),(_))"));
        assert_eq!(seed.color(Dir::S), &t("(((_)),(_))"));
        assert_eq!(seed.color(Dir::N), &t("(((_)),(1))"));
        assert_eq!(seed.color(Dir::E), &t("(((_)),(1))"));
        assert_eq!(seed.color(Dir::E).display_compact(), "(_,1)");
    }

    #[test]
    fn er_requires_construction_one() {
        let ts = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let rs = construct_er(&ts).unwrap();
        assert!(matches!(construct_er(&rs), Err(TileSetError::WrongProvenance(_))));
    }

    #[test]
    fn er_rejects_malformed_colors() {
        let mut ts = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        ts.tiles[0].glues.w.color = t("(0,1)");
        assert!(matches!(construct_er(&ts), Err(TileSetError::BadTile { .. })));
    }

    #[test]
    fn er_per_tile_identities_and_labels() {
        for b in [Builtin::S, Builtin::C, Builtin::W] {
            let ts = construct_kl(&builtin(b), Mode::Reachable).unwrap();
            let rs = construct_er(&ts).unwrap();
            let mut la: Vec<_> = ts.tiles.iter().map(|x| x.label).collect();
            let mut lb: Vec<_> = rs.tiles.iter().map(|x| x.label).collect();
            la.sort();
            lb.sort();
            assert_eq!(la, lb);
            for r in &rs.tiles {
                let (w, s, e, n) = (r.color(Dir::W), r.color(Dir::S), r.color(Dir::E), r.color(Dir::N));
                let lab = TupleValue::label(r.label);
                assert_eq!(w.first().unwrap(), s.first().unwrap());
                assert_eq!(e.first().unwrap(), &tuple::deep_shift_insert(s.first().unwrap(), s.second().unwrap()).unwrap());
                assert_eq!(n.first().unwrap(), &tuple::shift_insert(w.first().unwrap(), w.second().unwrap()).unwrap());
                assert_eq!(n.second().unwrap(), &tuple::shift_insert(s.second().unwrap(), &lab).unwrap());
                assert_eq!(e.second().unwrap(), &tuple::shift_insert(w.second().unwrap(), &lab).unwrap());
            }
        }
    }

    #[test]
    fn glue_index_conventions() {
        let ts = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let idx = glue_index(&ts);
        let seed = ts.seed().unwrap();
        assert_eq!(idx.get(seed.glue(Dir::S)), 0);
        assert_eq!(idx.get(seed.glue(Dir::W)), 0);
        assert!(idx.get(seed.glue(Dir::N)) >= 1);
        // Same color, different strengths: the seed's N color ((_,1)) also
        // appears on the vertical boundary tile's S side.
        let v = ts.tiles.iter().find(|x| x.kind() == TileKind::VerticalBoundary).unwrap();
        assert_eq!(seed.color(Dir::N), v.color(Dir::S));
        assert_eq!(idx.get(seed.glue(Dir::N)), idx.get(v.glue(Dir::S)));
        let one = Glue::new(seed.color(Dir::N).clone(), 1);
        let mut ts2 = ts.clone();
        ts2.tiles[0].glues.e = one.clone();
        let idx2 = glue_index(&ts2);
        assert_ne!(idx2.get(&one), idx2.get(seed.glue(Dir::N)));
        assert_eq!(glue_index(&ts), glue_index(&ts));
    }

    #[test]
    fn single_glue_system_index() {
        let g = Glue::new(t("(1)"), 2);
        let zero = Glue::new(t("(_)"), 0);
        let tile = TileType::new(
            Label(1),
            Glues {
                n: g.clone(),
                e: g.clone(),
                s: zero.clone(),
                w: zero,
            },
        );
        let ts = TileSystem {
            alphabet: 2,
            w: 2,
            h: 2,
            provenance: Provenance::Construction1,
            mode: Mode::Reachable,
            seed_id: tile.id.clone(),
            tiles: vec![tile],
        };
        ts.validate().unwrap();
        let idx = glue_index(&ts);
        assert_eq!(idx.len(), 2);
        assert_eq!(idx.get(&g), 1);
    }
}
