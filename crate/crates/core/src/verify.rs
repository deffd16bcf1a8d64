//! Mechanical checks of the construction's guarantees on concrete tile
//! systems: glue equalities around a growth site, error forcing, the
//! tile-for-tile correspondence between the two constructions, and an
//! error-rate exponent probe.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tileset::{Compiled, Dir, Provenance, TileKind, TileSystem};
use crate::tuple::{self, TupleError, TupleValue};

/// Default edge-comparison budget for exhaustive forcing checks.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;
/// Default random completions per base configuration in sampled mode.
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("this check needs a {want} system, got {got}")]
    WrongProvenance { want: Provenance, got: Provenance },
    #[error("exhaustive enumeration needs ~{needed} edge comparisons (budget {budget}); use sampled mode")]
    Budget { needed: u128, budget: u128 },
    #[error("epsilon values must lie in [0, 0.2], got {0}")]
    Epsilon(f64),
    #[error("at least {min} runs are required, got {got}")]
    Runs { min: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaFailure {
    pub u: String,
    pub v: String,
    pub w: String,
    /// Which of the three equalities failed (1-based).
    pub equality: u8,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub triples_checked: u64,
    pub failures: Vec<LemmaFailure>,
    pub passed: bool,
}

fn lemma_equalities(v_n: &TupleValue, v_e: &TupleValue, w_e: &TupleValue, w_n: &TupleValue) -> Result<[bool; 3], TupleError> {
    let e1 = v_n.first()? == w_e.first()?;
    let e2 = tuple::deep_shift_insert(v_n.first()?, v_n.second()?)? == tuple::shift_insert(v_e.first()?, v_e.second()?)?;
    let e3 = tuple::shift_insert(w_e.first()?, w_e.second()?)? == tuple::deep_shift_insert(w_n.first()?, w_n.second()?)?;
    Ok([e1, e2, e3])
}

/// Checks the three glue equalities for every triple `(u, v, w)` of interior
/// tiles with `v` east of `u` and `w` north of `u`, both bonds matching.
pub fn check_lemma_equalities(ts: &TileSystem) -> Result<LemmaReport, VerifyError> {
    if ts.provenance != Provenance::Construction2 {
        return Err(VerifyError::WrongProvenance {
            want: Provenance::Construction2,
            got: ts.provenance,
        });
    }
    let interior: Vec<_> = ts.interior().collect();
    let mut by_west: HashMap<&TupleValue, Vec<usize>> = HashMap::new();
    let mut by_south: HashMap<&TupleValue, Vec<usize>> = HashMap::new();
    for (i, t) in interior.iter().enumerate() {
        by_west.entry(t.color(Dir::W)).or_default().push(i);
        by_south.entry(t.color(Dir::S)).or_default().push(i);
    }
    let mut checked = 0;
    let mut failures = Vec::new();
    for u in &interior {
        let (Some(vs), Some(ws)) = (by_west.get(u.color(Dir::E)), by_south.get(u.color(Dir::N))) else {
            continue;
        };
        for &vi in vs {
            for &wi in ws {
                checked += 1;
                let (v, w) = (interior[vi], interior[wi]);
                let fail = |equality: u8, detail: String| LemmaFailure {
                    u: u.id.clone(),
                    v: v.id.clone(),
                    w: w.id.clone(),
                    equality,
                    detail,
                };
                match lemma_equalities(v.color(Dir::N), v.color(Dir::E), w.color(Dir::E), w.color(Dir::N)) {
                    Ok(eqs) => {
                        for (k, ok) in eqs.into_iter().enumerate() {
                            if !ok {
                                failures.push(fail(k as u8 + 1, "sides differ".into()));
                            }
                        }
                    }
                    Err(e) => failures.push(fail(0, e.to_string())),
                }
            }
        }
    }
    Ok(LemmaReport {
        triples_checked: checked,
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingMode {
    /// Every completion tried literally.
    Exhaustive,
    /// Exact, but completions are found through glue lookups.
    Indexed,
    /// Random completions per base configuration.
    Sampled,
}

/// Which input of `t` is mismatched in the base configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ForcingCase {
    /// `t` mismatches `v` below it; `p`, `q` complete to the east.
    SouthMismatch,
    /// `t` mismatches `w` to its west; `r`, `s` complete to the north.
    WestMismatch,
}

/// A base configuration plus a completion with no further mismatch. Tiles
/// sit at `u (0,0)`, `v (1,0)`, `w (0,1)`, `t (1,1)`, and the completion at
/// `(2,0), (2,1)` or `(0,2), (1,2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub case: ForcingCase,
    pub u: String,
    pub v: String,
    pub w: String,
    pub t: String,
    pub completion: [String; 2],
}

impl Witness {
    /// Tile ids with their positions.
    pub fn placements(&self) -> Vec<(String, (usize, usize))> {
        let mut out = vec![
            (self.u.clone(), (0, 0)),
            (self.v.clone(), (1, 0)),
            (self.w.clone(), (0, 1)),
            (self.t.clone(), (1, 1)),
        ];
        let at = match self.case {
            ForcingCase::SouthMismatch => [(2, 0), (2, 1)],
            ForcingCase::WestMismatch => [(0, 2), (1, 2)],
        };
        out.push((self.completion[0].clone(), at[0]));
        out.push((self.completion[1].clone(), at[1]));
        out
    }

    /// Places the witness and returns every mismatched adjacent pair, as
    /// pairs of positions.
    pub fn replay(&self, ts: &TileSystem) -> Option<Vec<Edge>> {
        let mut grid: HashMap<(usize, usize), &crate::tileset::TileType> = HashMap::new();
        for (id, pos) in self.placements() {
            grid.insert(pos, ts.tile(&id)?);
        }
        let mut out = Vec::new();
        let mut keys: Vec<_> = grid.keys().copied().collect();
        keys.sort();
        for (x, y) in keys {
            let a = grid[&(x, y)];
            for (d, nb) in [(Dir::E, (x + 1, y)), (Dir::N, (x, y + 1))] {
                if let Some(b) = grid.get(&nb) {
                    if a.glue(d) != b.glue(d.opposite()) {
                        out.push(((x, y), nb));
                    }
                }
            }
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingReport {
    pub system: String,
    pub mode: ForcingMode,
    pub configurations_checked: u64,
    /// Base configurations whose second input also mismatches.
    pub doubly_mismatched: u64,
    pub completions_checked: u64,
    pub violations: Vec<Witness>,
    /// Violating base configurations; witnesses are kept only up to the
    /// configured limit.
    pub violating_configurations: u64,
    pub forced_always: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForcingOptions {
    pub mode: ForcingMode,
    pub budget: u128,
    pub samples: u64,
    pub seed: u64,
    pub max_witnesses: usize,
}

impl Default for ForcingOptions {
    fn default() -> Self {
        ForcingOptions {
            mode: ForcingMode::Exhaustive,
            budget: DEFAULT_BUDGET,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            max_witnesses: 16,
        }
    }
}

/// A short fingerprint of a tile system: the first tile ids' hash.
pub fn system_fingerprint(ts: &TileSystem) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for t in &ts.tiles {
        h.update(t.id.as_bytes());
    }
    format!("{}-{}-{}", ts.provenance, ts.len(), &hex::encode(h.finalize())[..12])
}

/// Base configurations `(u, v, w, t)` of interior tiles: `u–v` and `u–w`
/// match, `t` mismatches at least one input.
fn base_configurations(c: &Compiled) -> (Vec<[usize; 4]>, u64) {
    let interior: Vec<usize> = (0..c.len()).filter(|&t| c.kinds[t] == TileKind::Interior).collect();
    let mut configs = Vec::new();
    let mut doubly = 0;
    for &u in &interior {
        for &v in &interior {
            if c.mismatch(u, Dir::E, v) {
                continue;
            }
            for &w in &interior {
                if c.mismatch(u, Dir::N, w) {
                    continue;
                }
                for &t in &interior {
                    let south = c.mismatch(v, Dir::N, t);
                    let west = c.mismatch(w, Dir::E, t);
                    match (south, west) {
                        (false, false) => {}
                        (true, true) => doubly += 1,
                        _ => configs.push([u, v, w, t]),
                    }
                }
            }
        }
    }
    (configs, doubly)
}

/// Whether completion `(a, b)` adds no mismatch: `a` at the first
/// completion site, `b` at the second.
fn clean_completion(c: &Compiled, case: ForcingCase, v: usize, w: usize, t: usize, a: usize, b: usize) -> bool {
    match case {
        // p = a east of v, q = b east of t.
        ForcingCase::SouthMismatch => {
            !c.mismatch(v, Dir::E, a) && !c.mismatch(a, Dir::N, b) && !c.mismatch(t, Dir::E, b)
        }
        // r = a north of w, s = b north of t.
        ForcingCase::WestMismatch => {
            !c.mismatch(w, Dir::N, a) && !c.mismatch(a, Dir::E, b) && !c.mismatch(t, Dir::N, b)
        }
    }
}

pub fn check_error_forcing(ts: &TileSystem, opts: &ForcingOptions) -> Result<ForcingReport, VerifyError> {
    let c = Compiled::new(ts);
    let (configs, doubly) = base_configurations(&c);
    let n = c.len() as u128;
    if opts.mode == ForcingMode::Exhaustive {
        let needed = configs.len() as u128 * n * n * 3;
        if needed > opts.budget {
            return Err(VerifyError::Budget {
                needed,
                budget: opts.budget,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // Indexed lookups: tiles by bond on each side.
    let mut by_side: [HashMap<u32, Vec<usize>>; 4] = Default::default();
    for t in 0..c.len() {
        for d in Dir::ALL {
            by_side[d.index()].entry(c.bond(t, d)).or_default().push(t);
        }
    }
    let empty = Vec::new();
    let mut completions = 0u64;
    let mut violations = Vec::new();
    let mut violating = 0u64;
    for &[u, v, w, t] in &configs {
        let case = if c.mismatch(v, Dir::N, t) {
            ForcingCase::SouthMismatch
        } else {
            ForcingCase::WestMismatch
        };
        let found: Option<(usize, usize)> = match opts.mode {
            ForcingMode::Exhaustive => {
                let mut hit = None;
                'scan: for a in 0..c.len() {
                    for b in 0..c.len() {
                        completions += 1;
                        if clean_completion(&c, case, v, w, t, a, b) {
                            hit = Some((a, b));
                            break 'scan;
                        }
                    }
                }
                hit
            }
            ForcingMode::Indexed => {
                // First site must match its fixed neighbor, second site must
                // match `t`; then look for a matching pair between them.
                let (first, second, link) = match case {
                    ForcingCase::SouthMismatch => (
                        by_side[Dir::W.index()].get(&c.bond(v, Dir::E)).unwrap_or(&empty),
                        by_side[Dir::W.index()].get(&c.bond(t, Dir::E)).unwrap_or(&empty),
                        Dir::N,
                    ),
                    ForcingCase::WestMismatch => (
                        by_side[Dir::S.index()].get(&c.bond(w, Dir::N)).unwrap_or(&empty),
                        by_side[Dir::S.index()].get(&c.bond(t, Dir::N)).unwrap_or(&empty),
                        Dir::E,
                    ),
                };
                let wanted: HashMap<u32, usize> = second.iter().map(|&b| (c.bond(b, link.opposite()), b)).collect();
                completions += (first.len() * second.len()) as u64;
                first
                    .iter()
                    .find_map(|&a| wanted.get(&c.bond(a, link)).map(|&b| (a, b)))
                    .filter(|&(a, b)| clean_completion(&c, case, v, w, t, a, b))
            }
            ForcingMode::Sampled => {
                let mut hit = None;
                for _ in 0..opts.samples {
                    completions += 1;
                    let a = rng.gen_range(0..c.len());
                    let b = rng.gen_range(0..c.len());
                    if clean_completion(&c, case, v, w, t, a, b) {
                        hit = Some((a, b));
                        break;
                    }
                }
                hit
            }
        };
        if let Some((a, b)) = found {
            violating += 1;
            if violations.len() < opts.max_witnesses {
                let id = |k: usize| ts.tiles[k].id.clone();
                violations.push(Witness {
                    case,
                    u: id(u),
                    v: id(v),
                    w: id(w),
                    t: id(t),
                    completion: [id(a), id(b)],
                });
            }
        }
    }
    Ok(ForcingReport {
        system: system_fingerprint(ts),
        mode: opts.mode,
        configurations_checked: configs.len() as u64,
        doubly_mismatched: doubly,
        completions_checked: completions,
        forced_always: violating == 0,
        violating_configurations: violating,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionReport {
    pub t_count: usize,
    pub r_count: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Recovers each construction-1 tile from its error-resilient image and
/// checks that this is one-to-one and label preserving.
pub fn check_bijection(t_sys: &TileSystem, r_sys: &TileSystem) -> BijectionReport {
    let mut failures = Vec::new();
    if t_sys.len() != r_sys.len() {
        failures.push(format!("|T| = {} but |R| = {}", t_sys.len(), r_sys.len()));
    }
    let mut by_context: HashMap<(&TupleValue, &TupleValue), Vec<usize>> = HashMap::new();
    for (i, t) in t_sys.tiles.iter().enumerate() {
        by_context.entry((t.color(Dir::S), t.color(Dir::W))).or_default().push(i);
    }
    let mut image: HashMap<usize, &str> = HashMap::new();
    for r in &r_sys.tiles {
        let recovered = (|| -> Result<(TupleValue, TupleValue), TupleError> {
            let s = r.color(Dir::S);
            Ok((tuple::wedge(s.first()?, s.second()?)?, r.color(Dir::W).second()?.clone()))
        })();
        let (south, west) = match recovered {
            Ok(x) => x,
            Err(e) => {
                failures.push(format!("{}: cannot invert colors ({e})", r.id));
                continue;
            }
        };
        match by_context.get(&(&south, &west)).map(Vec::as_slice) {
            Some([i]) => {
                let t = &t_sys.tiles[*i];
                if t.label != r.label {
                    failures.push(format!("{} has label {} but its preimage {} has {}", r.id, r.label, t.id, t.label));
                }
                if let Some(prev) = image.insert(*i, &r.id) {
                    failures.push(format!("{} and {} both invert to {}", prev, r.id, t.id));
                }
            }
            Some(many) => failures.push(format!("{} inverts to {} tiles of T", r.id, many.len())),
            None => failures.push(format!("{} inverts to no tile of T (S={south}, W={west})", r.id)),
        }
    }
    let mut la: Vec<_> = t_sys.tiles.iter().map(|t| t.label).collect();
    let mut lb: Vec<_> = r_sys.tiles.iter().map(|t| t.label).collect();
    la.sort();
    lb.sort();
    if la != lb {
        failures.push("label multisets differ".into());
    }
    BijectionReport {
        t_count: t_sys.len(),
        r_count: r_sys.len(),
        passed: failures.is_empty(),
        failures,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPoint {
    pub eps: f64,
    /// Mismatch edges per site inside the measurement window.
    pub rate: f64,
    /// Mismatch edges inside the measurement window.
    pub window_edges: u64,
    pub clusters: u64,
    pub mismatch_edges: u64,
    /// Mismatch edges with no other mismatch edge touching their 3×3
    /// neighborhood.
    pub isolated_edges: u64,
    pub rollbacks: u64,
    pub capped_runs: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub points: Vec<EpsilonPoint>,
    pub slope: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub t: SlopeFit,
    pub r: SlopeFit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeOptions {
    pub size: usize,
    pub runs: usize,
    pub seed: u64,
    /// Rollbacks allowed per run before it is abandoned as-is.
    pub rollback_cap: u64,
    /// Width of the frame excluded from the measurement window. Sites next
    /// to the boundary or the canvas edge lack the neighbors that would
    /// force a second mismatch.
    pub margin: usize,
}

impl ProbeOptions {
    pub fn new(size: usize, runs: usize, seed: u64) -> Self {
        ProbeOptions {
            size,
            runs,
            seed,
            rollback_cap: 50 * (size * size) as u64,
            margin: 2,
        }
    }
}

struct ProbeRun {
    mismatches: Vec<((usize, usize), (usize, usize))>,
    rollbacks: u64,
    capped: bool,
}

/// One row-major growth with per-side waivers: each input side of an
/// interior site is waived with probability `eps`, and the tile is drawn
/// uniformly from interior types agreeing with the sides still enforced.
/// A site with no such type undoes growth back to the nearest earlier
/// erroneous placement and regrows from there.
fn probe_run(c: &Compiled, n: usize, eps: f64, rng: &mut ChaCha8Rng, cap: u64) -> ProbeRun {
    let interior: Vec<usize> = (0..c.len()).filter(|&t| c.kinds[t] == TileKind::Interior).collect();
    let mut by_west: HashMap<u32, Vec<usize>> = HashMap::new();
    let mut by_south: HashMap<u32, Vec<usize>> = HashMap::new();
    let mut by_both: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for &t in &interior {
        by_west.entry(c.bond(t, Dir::W)).or_default().push(t);
        by_south.entry(c.bond(t, Dir::S)).or_default().push(t);
        by_both.entry((c.bond(t, Dir::W), c.bond(t, Dir::S))).or_default().push(t);
    }
    let empty = Vec::new();
    let mut grid = vec![usize::MAX; n * n];
    let mut erroneous = vec![false; n * n];
    // Erroneous placements in placement order (row-major index).
    let mut errors: Vec<usize> = Vec::new();
    let mut rollbacks = 0;
    let mut capped = false;
    let mut i = 0;
    while i < n * n {
        let (x, y) = (i % n, i / n);
        if x == 0 || y == 0 {
            let tile = if i == 0 {
                c.seed
            } else {
                // Boundary growth is error-free: the unique strength-2 binder.
                (0..c.len())
                    .find(|&t| {
                        let (d, nb) = if y == 0 { (Dir::W, i - 1) } else { (Dir::S, i - n) };
                        c.kinds[t].is_boundary() && c.interaction(t, d, grid[nb]) >= 2
                    })
                    .expect("boundary tile")
            };
            grid[i] = tile;
            i += 1;
            continue;
        }
        let (west, south) = (grid[i - 1], grid[i - n]);
        let want_w = c.bond(west, Dir::E);
        let want_s = c.bond(south, Dir::N);
        let waive_w = rng.gen_bool(eps);
        let waive_s = rng.gen_bool(eps);
        let pool: &Vec<usize> = match (waive_w, waive_s) {
            (false, false) => by_both.get(&(want_w, want_s)).unwrap_or(&empty),
            (true, false) => by_south.get(&want_s).unwrap_or(&empty),
            (false, true) => by_west.get(&want_w).unwrap_or(&empty),
            (true, true) => &interior,
        };
        if pool.is_empty() {
            if rollbacks >= cap {
                capped = true;
                break;
            }
            rollbacks += 1;
            let near = |e: usize| {
                let (ex, ey) = (e % n, e / n);
                ey + 1 >= y && ey <= y && ex + 1 >= x && ex <= x + 1
            };
            let target = errors.iter().rev().copied().find(|&e| near(e)).or_else(|| errors.last().copied());
            let Some(to) = target else {
                capped = true;
                break;
            };
            for k in to..=i {
                grid[k] = usize::MAX;
                erroneous[k] = false;
            }
            errors.retain(|&e| e < to);
            i = to;
            continue;
        }
        let tile = pool[rng.gen_range(0..pool.len())];
        grid[i] = tile;
        if c.bond(tile, Dir::W) != want_w || c.bond(tile, Dir::S) != want_s {
            erroneous[i] = true;
            errors.push(i);
        }
        i += 1;
    }
    let mut mismatches = Vec::new();
    for y in 0..n {
        for x in 0..n {
            let a = grid[y * n + x];
            if a == usize::MAX {
                continue;
            }
            if x + 1 < n && grid[y * n + x + 1] != usize::MAX && c.mismatch(a, Dir::E, grid[y * n + x + 1]) {
                mismatches.push(((x, y), (x + 1, y)));
            }
            if y + 1 < n && grid[(y + 1) * n + x] != usize::MAX && c.mismatch(a, Dir::N, grid[(y + 1) * n + x]) {
                mismatches.push(((x, y), (x, y + 1)));
            }
        }
    }
    ProbeRun {
        mismatches,
        rollbacks,
        capped,
    }
}

/// A pair of adjacent positions, west/south one first.
pub type Edge = ((usize, usize), (usize, usize));

fn edges_near(a: &Edge, b: &Edge) -> bool {
    let close = |p: (usize, usize), q: (usize, usize)| p.0.abs_diff(q.0) <= 1 && p.1.abs_diff(q.1) <= 1;
    [a.0, a.1].iter().any(|&p| [b.0, b.1].iter().any(|&q| close(p, q)))
}

/// Groups of mismatch edges linked through 3×3 proximity, and the number of
/// edges with no neighbor at all.
pub fn cluster_mismatches(edges: &[Edge]) -> (usize, usize) {
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut by_cell: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, e) in edges.iter().enumerate() {
        by_cell.entry(e.0).or_default().push(k);
    }
    let mut has_neighbor = vec![false; edges.len()];
    for (k, e) in edges.iter().enumerate() {
        let (x, y) = e.0;
        for cx in x.saturating_sub(2)..=x + 2 {
            for cy in y.saturating_sub(2)..=y + 2 {
                for &j in by_cell.get(&(cx, cy)).into_iter().flatten() {
                    if j != k && edges_near(e, &edges[j]) {
                        has_neighbor[k] = true;
                        let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let roots: HashSet<usize> = (0..edges.len()).map(|k| find(&mut parent, k)).collect();
    (roots.len(), has_neighbor.iter().filter(|&&h| !h).count())
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

pub fn epsilon_fit(ts: &TileSystem, eps_values: &[f64], opts: &ProbeOptions) -> Result<SlopeFit, VerifyError> {
    if opts.runs < 10 {
        return Err(VerifyError::Runs { min: 10, got: opts.runs });
    }
    if let Some(&e) = eps_values.iter().find(|&&e| !(0.0..=0.2).contains(&e)) {
        return Err(VerifyError::Epsilon(e));
    }
    let c = Compiled::new(ts);
    let mut points = Vec::new();
    for (k, &eps) in eps_values.iter().enumerate() {
        let mut pt = EpsilonPoint {
            eps,
            rate: 0.0,
            window_edges: 0,
            clusters: 0,
            mismatch_edges: 0,
            isolated_edges: 0,
            rollbacks: 0,
            capped_runs: 0,
        };
        for run in 0..opts.runs {
            let mut rng = ChaCha8Rng::seed_from_u64(crate::ktam::derive_seed(opts.seed, k, run));
            let r = probe_run(&c, opts.size, eps, &mut rng, opts.rollback_cap);
            let (clusters, isolated) = cluster_mismatches(&r.mismatches);
            pt.clusters += clusters as u64;
            pt.isolated_edges += isolated as u64;
            pt.mismatch_edges += r.mismatches.len() as u64;
            let (lo, hi) = (opts.margin, opts.size.saturating_sub(opts.margin));
            let inside = |p: (usize, usize)| p.0 >= lo && p.1 >= lo && p.0 < hi && p.1 < hi;
            pt.window_edges += r.mismatches.iter().filter(|e| inside(e.0) && inside(e.1)).count() as u64;
            pt.rollbacks += r.rollbacks;
            pt.capped_runs += r.capped as u64;
        }
        let side = opts.size.saturating_sub(2 * opts.margin).max(1);
        pt.rate = pt.window_edges as f64 / (opts.runs * side * side) as f64;
        points.push(pt);
    }
    let usable: Vec<&EpsilonPoint> = points.iter().filter(|p| p.eps > 0.0 && p.rate > 0.0).collect();
    let xs: Vec<f64> = usable.iter().map(|p| p.eps.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.rate.ln()).collect();
    let slope = fit_slope(&xs, &ys);
    Ok(SlopeFit {
        degenerate: slope.is_none(),
        slope,
        points,
    })
}

/// Fits the error-rate exponent for both systems of a pair.
pub fn epsilon_slope(t: &TileSystem, r: &TileSystem, eps_values: &[f64], opts: &ProbeOptions) -> Result<SlopeReport, VerifyError> {
    Ok(SlopeReport {
        t: epsilon_fit(t, eps_values, opts)?,
        r: epsilon_fit(r, eps_values, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{builtin, Builtin};
    use crate::tileset::{construct_er, construct_kl, Mode};

    fn pair(b: Builtin) -> (TileSystem, TileSystem) {
        let t = construct_kl(&builtin(b), Mode::Reachable).unwrap();
        let r = construct_er(&t).unwrap();
        (t, r)
    }

    #[test]
    fn identities_hold_on_builtins() {
        for b in [Builtin::S, Builtin::C, Builtin::W] {
            let rep = check_lemma_equalities(&pair(b).1).unwrap();
            assert!(rep.passed, "{b:?}: {:?}", rep.failures.first());
            assert!(rep.triples_checked > 0);
        }
    }

    #[test]
    fn identities_need_construction_two() {
        assert!(check_lemma_equalities(&pair(Builtin::S).0).is_err());
    }

    #[test]
    fn identities_vacuous_without_interior() {
        let (_, mut r) = pair(Builtin::S);
        r.tiles.retain(|t| t.kind() != TileKind::Interior);
        let rep = check_lemma_equalities(&r).unwrap();
        assert_eq!(rep.triples_checked, 0);
        assert!(rep.passed);
    }

    #[test]
    fn corrupted_east_glue_is_caught() {
        let (_, mut r) = pair(Builtin::S);
        let i = r.tiles.iter().position(|t| t.kind() == TileKind::Interior).unwrap();
        let e = r.tiles[i].color(Dir::E).clone();
        let first = e.first().unwrap().clone();
        r.tiles[i].glues.e.color = TupleValue::Node(vec![first, "(9)".parse().unwrap()]);
        let rep = check_lemma_equalities(&r).unwrap();
        assert!(!rep.passed);
        assert!(rep.failures.iter().any(|f| f.v == r.tiles[i].id));
    }

    #[test]
    fn forcing_on_sierpinski_pair() {
        let (t, r) = pair(Builtin::S);
        let rr = check_error_forcing(&r, &ForcingOptions::default()).unwrap();
        assert!(rr.forced_always);
        assert!(rr.configurations_checked > 0);
        let rt = check_error_forcing(&t, &ForcingOptions::default()).unwrap();
        assert!(!rt.forced_always);
        for wit in &rt.violations {
            let mm = wit.replay(&t).unwrap();
            assert_eq!(mm.len(), 1, "{wit:?}");
        }
    }

    #[test]
    fn indexed_agrees_with_exhaustive() {
        for b in [Builtin::S, Builtin::C] {
            let (t, r) = pair(b);
            for sys in [&t, &r] {
                let ex = check_error_forcing(sys, &ForcingOptions::default()).unwrap();
                let ix = check_error_forcing(
                    sys,
                    &ForcingOptions {
                        mode: ForcingMode::Indexed,
                        ..Default::default()
                    },
                )
                .unwrap();
                assert_eq!(ex.forced_always, ix.forced_always);
                assert_eq!(ex.violating_configurations, ix.violating_configurations);
                assert_eq!(ex.configurations_checked, ix.configurations_checked);
            }
        }
    }

    #[test]
    fn sampled_finds_the_classic_witness() {
        let (t, _) = pair(Builtin::S);
        let rep = check_error_forcing(
            &t,
            &ForcingOptions {
                mode: ForcingMode::Sampled,
                samples: 2000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!rep.forced_always);
    }

    #[test]
    fn budget_is_enforced() {
        let (_, r) = pair(Builtin::S);
        let err = check_error_forcing(
            &r,
            &ForcingOptions {
                budget: 10,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, VerifyError::Budget { .. }));
    }

    #[test]
    fn bijection_on_builtins() {
        for b in [Builtin::S, Builtin::C, Builtin::W] {
            let (t, r) = pair(b);
            let rep = check_bijection(&t, &r);
            assert!(rep.passed, "{b:?}: {:?}", rep.failures);
            assert_eq!(rep.t_count, rep.r_count);
        }
    }

    #[test]
    fn duplicated_tile_breaks_bijection() {
        let (t, mut r) = pair(Builtin::S);
        let dup = r.tiles[3].clone();
        r.tiles.push(dup);
        let rep = check_bijection(&t, &r);
        assert!(!rep.passed);
        assert!(rep.failures.iter().any(|f| f.contains("both invert")));
    }

    #[test]
    fn clusters_and_isolation() {
        let edges = vec![((5, 5), (6, 5)), ((6, 5), (6, 6)), ((20, 20), (20, 21))];
        assert_eq!(cluster_mismatches(&edges), (2, 1));
        assert_eq!(cluster_mismatches(&[]), (0, 0));
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs: Vec<f64> = [0.02f64, 0.05, 0.1].iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = [0.02f64, 0.05, 0.1].iter().map(|e| (3.0 * e * e).ln()).collect();
        assert!((fit_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_epsilon_is_clean_and_degenerate() {
        let (t, _) = pair(Builtin::S);
        let fit = epsilon_fit(&t, &[0.0], &ProbeOptions::new(16, 10, 1)).unwrap();
        assert_eq!(fit.points[0].mismatch_edges, 0);
        assert!(fit.degenerate);
        assert!(epsilon_fit(&t, &[0.3], &ProbeOptions::new(16, 10, 1)).is_err());
        assert!(epsilon_fit(&t, &[0.1], &ProbeOptions::new(16, 3, 1)).is_err());
    }
}
