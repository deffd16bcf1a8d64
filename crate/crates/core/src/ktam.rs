//! Kinetic growth with attachment and detachment, and the largest
//! error-free aggregate measurement.
//!
//! Every empty site touching the assembly receives each admissible tile type
//! at rate `k_f·e^{-g_mc}`; every placed tile except the seed leaves at rate
//! `k_f·e^{-b·g_se}`, where `b` counts only the strength of matched sides.
//! Site rates take few distinct values, so sites are bucketed by rate class
//! and an event costs O(1).

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atam::Assembly;
use crate::tileset::{Compiled, Dir, TileKind, TileSystem};

/// Default `g_mc = 2·g_se − GMC_OFFSET`.
pub const GMC_OFFSET: f64 = 0.1;

pub fn default_gmc(g_se: f64) -> f64 {
    2.0 * g_se - GMC_OFFSET
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("tile system has no interior tiles for the second stage")]
    NoInterior,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub g_se: f64,
    pub g_mc: f64,
    pub k_f: f64,
    pub rng_seed: u64,
    /// `(width, height)` in tiles.
    pub target: (usize, usize),
    pub stop_fraction: f64,
    pub max_events: u64,
    pub two_stage: bool,
}

impl SimParams {
    pub fn new(g_se: f64, target: (usize, usize)) -> Self {
        SimParams {
            g_se,
            g_mc: default_gmc(g_se),
            k_f: 1.0,
            rng_seed: 0,
            target,
            stop_fraction: 0.75,
            max_events: 200_000_000,
            two_stage: false,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Param(m.to_string()));
        if !(self.g_se > 0.0 && self.g_se.is_finite()) {
            return bad("g_se must be positive");
        }
        if !(self.g_mc > 0.0 && self.g_mc.is_finite()) {
            return bad("g_mc must be positive");
        }
        if !(self.k_f > 0.0 && self.k_f.is_finite()) {
            return bad("k_f must be positive");
        }
        if !(self.stop_fraction > 0.0 && self.stop_fraction <= 1.0) {
            return bad("stop_fraction must lie in (0, 1]");
        }
        if self.target.0 == 0 || self.target.1 == 0 {
            return bad("target must be at least 1x1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimFlag {
    Ok,
    Incomplete,
    Stalled,
}

impl fmt::Display for SimFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimFlag::Ok => "ok",
            SimFlag::Incomplete => "incomplete",
            SimFlag::Stalled => "stalled",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub assembly: Assembly,
    pub tiles_placed: usize,
    pub mismatch_edges: usize,
    pub n: usize,
    pub events: u64,
    /// Simulated time in units of `1/k_f`.
    pub time: f64,
    /// Detachments of tiles that were fully surrounded, fully matched, and
    /// bound with `b·g_se ≥ g_mc + 10`.
    pub frozen_detachments: u64,
    pub flag: SimFlag,
    pub wall_time: Duration,
}

impl SimOutcome {
    /// Equality of everything except wall-clock time.
    pub fn same_result(&self, other: &SimOutcome) -> bool {
        self.assembly == other.assembly
            && self.tiles_placed == other.tiles_placed
            && self.mismatch_edges == other.mismatch_edges
            && self.n == other.n
            && self.events == other.events
            && self.time.to_bits() == other.time.to_bits()
            && self.frozen_detachments == other.frozen_detachments
            && self.flag == other.flag
    }
}

const EMPTY: u32 = u32::MAX;
const WALL: u32 = u32::MAX - 1;
const NO_CLASS: u8 = u8::MAX;
/// Class 0 holds empty frontier sites; class `1 + b` holds detachable
/// tiles with matched strength `b`.
const CLASSES: usize = 10;

struct Lattice<'a> {
    c: &'a Compiled,
    stride: usize,
    cells: Vec<u32>,
    class_of: Vec<u8>,
    slot: Vec<u32>,
    members: [Vec<u32>; CLASSES],
    /// Sites that never detach: the seed, and the boundary once the first
    /// stage of two-stage growth has finished.
    fixed: Vec<bool>,
}

impl<'a> Lattice<'a> {
    fn new(c: &'a Compiled, width: usize, height: usize) -> Self {
        let stride = width + 2;
        let n = stride * (height + 2);
        let mut cells = vec![EMPTY; n];
        for y in 0..height + 2 {
            for x in 0..stride {
                if x == 0 || y == 0 || x == width + 1 || y == height + 1 {
                    cells[y * stride + x] = WALL;
                }
            }
        }
        let seed_pos = stride + 1;
        cells[seed_pos] = c.seed as u32;
        let mut fixed = vec![false; n];
        fixed[seed_pos] = true;
        let mut l = Lattice {
            c,
            stride,
            cells,
            class_of: vec![NO_CLASS; n],
            slot: vec![0; n],
            members: Default::default(),
            fixed,
        };
        for p in l.neighbors(seed_pos) {
            l.refresh(p);
        }
        l
    }

    fn neighbors(&self, p: usize) -> [usize; 4] {
        // N, E, S, W; y grows with the index.
        [p + self.stride, p + 1, p - self.stride, p - 1]
    }

    fn matched_strength(&self, p: usize) -> u8 {
        let t = self.cells[p] as usize;
        let mut b = 0;
        for (d, q) in Dir::ALL.into_iter().zip(self.neighbors(p)) {
            let n = self.cells[q];
            if n < WALL {
                b += self.c.interaction(t, d, n as usize);
            }
        }
        b
    }

    fn fully_matched(&self, p: usize) -> bool {
        let t = self.cells[p] as usize;
        Dir::ALL.into_iter().zip(self.neighbors(p)).all(|(d, q)| {
            let n = self.cells[q];
            n < WALL && !self.c.mismatch(t, d, n as usize)
        })
    }

    fn set_class(&mut self, p: usize, class: u8) {
        let old = self.class_of[p];
        if old == class {
            return;
        }
        if old != NO_CLASS {
            let list = &mut self.members[old as usize];
            let i = self.slot[p] as usize;
            let last = *list.last().expect("member present");
            list.swap_remove(i);
            if last as usize != p {
                self.slot[last as usize] = i as u32;
            }
        }
        if class != NO_CLASS {
            let list = &mut self.members[class as usize];
            self.slot[p] = list.len() as u32;
            list.push(p as u32);
        }
        self.class_of[p] = class;
    }

    /// Recomputes the rate class of site `p` from its neighborhood.
    fn refresh(&mut self, p: usize) {
        let class = match self.cells[p] {
            WALL => NO_CLASS,
            EMPTY => {
                let frontier = self.neighbors(p).iter().any(|&q| self.cells[q] < WALL);
                if frontier {
                    0
                } else {
                    NO_CLASS
                }
            }
            _ if self.fixed[p] => NO_CLASS,
            _ => 1 + self.matched_strength(p),
        };
        self.set_class(p, class);
    }

    fn put(&mut self, p: usize, tile: Option<usize>) {
        self.cells[p] = tile.map_or(EMPTY, |t| t as u32);
        self.refresh(p);
        for q in self.neighbors(p) {
            self.refresh(q);
        }
    }

    fn index(&self, x: usize, y: usize) -> usize {
        (y + 1) * self.stride + x + 1
    }

    /// Freezes the bottom row and left column if every site there holds a
    /// tile bound with strength at least 2.
    fn try_freeze_boundary(&mut self, width: usize, height: usize) -> bool {
        let sites: Vec<usize> = (1..width)
            .map(|x| self.index(x, 0))
            .chain((1..height).map(|y| self.index(0, y)))
            .collect();
        let bound = sites.iter().all(|&p| self.cells[p] < WALL && self.matched_strength(p) >= 2);
        if bound {
            for p in sites {
                self.fixed[p] = true;
                self.refresh(p);
            }
        }
        bound
    }

    fn xy(&self, p: usize) -> (usize, usize) {
        (p % self.stride - 1, p / self.stride - 1)
    }

    fn into_assembly(self, width: usize, height: usize) -> Assembly {
        let mut a = Assembly::new(width, height);
        for y in 0..height {
            for x in 0..width {
                let v = self.cells[(y + 1) * self.stride + x + 1];
                if v < WALL {
                    a.set(x, y, Some(v as usize));
                }
            }
        }
        a
    }
}

pub fn simulate(ts: &TileSystem, p: &SimParams) -> Result<SimOutcome, SimError> {
    simulate_compiled(&Compiled::new(ts), p)
}

pub fn simulate_compiled(c: &Compiled, p: &SimParams) -> Result<SimOutcome, SimError> {
    p.validate()?;
    let start = Instant::now();
    let (width, height) = p.target;
    let area = width * height;
    let goal = ((p.stop_fraction * area as f64).ceil() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);

    let all: Vec<usize> = (0..c.len()).collect();
    let boundary: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&t| matches!(c.kinds[t], TileKind::HorizontalBoundary | TileKind::VerticalBoundary))
        .collect();
    let interior: Vec<usize> = all.iter().copied().filter(|&t| c.kinds[t] == TileKind::Interior).collect();
    if p.two_stage && interior.is_empty() {
        return Err(SimError::NoInterior);
    }
    // Empty sites on the bottom row and left column of the target.
    let mut boundary_empty = width + height - 2;
    let mut phase_one = p.two_stage && boundary_empty > 0;

    let mut lat = Lattice::new(c, width, height);
    let r_f = p.k_f * (-p.g_mc).exp();
    let mut off = [0.0; CLASSES];
    for (b, r) in off.iter_mut().enumerate().skip(1) {
        *r = p.k_f * (-((b - 1) as f64) * p.g_se).exp();
    }
    let frozen_b = (p.g_mc + 10.0) / p.g_se;

    let mut placed = 1usize;
    let mut events = 0u64;
    let mut time = 0.0;
    let mut frozen = 0u64;
    let flag = loop {
        if placed >= goal {
            break SimFlag::Ok;
        }
        if events >= p.max_events {
            break SimFlag::Incomplete;
        }
        let admissible: &[usize] = if !p.two_stage {
            &all
        } else if phase_one {
            &boundary
        } else {
            &interior
        };
        let mut rates = [0.0; CLASSES];
        rates[0] = lat.members[0].len() as f64 * admissible.len() as f64 * r_f;
        for k in 1..CLASSES {
            rates[k] = lat.members[k].len() as f64 * off[k];
        }
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            break SimFlag::Stalled;
        }
        events += 1;
        let u: f64 = rng.gen();
        time += -(1.0 - u).ln() / total;
        let mut pick = rng.gen::<f64>() * total;
        let mut class = CLASSES - 1;
        for (k, r) in rates.iter().enumerate() {
            if pick < *r {
                class = k;
                break;
            }
            pick -= r;
        }
        while lat.members[class].is_empty() {
            // Floating-point slack can land past the last non-empty class.
            class -= 1;
        }
        let list = &lat.members[class];
        let site = list[rng.gen_range(0..list.len())] as usize;
        let (x, y) = lat.xy(site);
        if class == 0 {
            let tile = admissible[rng.gen_range(0..admissible.len())];
            lat.put(site, Some(tile));
            placed += 1;
            if x == 0 || y == 0 {
                boundary_empty -= 1;
            }
        } else {
            if (class - 1) as f64 >= frozen_b && lat.fully_matched(site) {
                frozen += 1;
            }
            lat.put(site, None);
            placed -= 1;
            if x == 0 || y == 0 {
                boundary_empty += 1;
            }
        }
        if phase_one && boundary_empty == 0 && lat.try_freeze_boundary(width, height) {
            phase_one = false;
        }
    };
    let assembly = lat.into_assembly(width, height);
    let map = MismatchMap::from_assembly(&assembly, c);
    Ok(SimOutcome {
        tiles_placed: placed,
        mismatch_edges: map.mismatch_count(),
        n: largest_error_free_aggregate(&map),
        assembly,
        events,
        time,
        frozen_detachments: frozen,
        flag,
        wall_time: start.elapsed(),
    })
}

/// Occupancy plus per-edge mismatch flags of a rectangular assembly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MismatchMap {
    pub width: usize,
    pub height: usize,
    pub occupied: Vec<bool>,
    /// Mismatch between `(x, y)` and `(x+1, y)`.
    pub east: Vec<bool>,
    /// Mismatch between `(x, y)` and `(x, y+1)`.
    pub north: Vec<bool>,
}

impl MismatchMap {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        MismatchMap {
            width,
            height,
            occupied: vec![false; n],
            east: vec![false; n],
            north: vec![false; n],
        }
    }

    pub fn from_assembly(a: &Assembly, c: &Compiled) -> Self {
        let mut m = MismatchMap::new(a.width, a.height);
        for (x, y, d) in a.mismatches(c) {
            let i = y * a.width + x;
            match d {
                Dir::E => m.east[i] = true,
                _ => m.north[i] = true,
            }
        }
        for y in 0..a.height {
            for x in 0..a.width {
                m.occupied[y * a.width + x] = a.get(x, y).is_some();
            }
        }
        m
    }

    pub fn mismatch_count(&self) -> usize {
        self.east.iter().chain(&self.north).filter(|&&b| b).count()
    }
}

/// Per row, the width of the occupied prefix with no mismatch to its west
/// or to the row below.
pub fn clean_prefix_widths(m: &MismatchMap) -> Vec<usize> {
    let w = m.width;
    (0..m.height)
        .map(|y| {
            (0..w)
                .take_while(|&x| {
                    let i = y * w + x;
                    m.occupied[i] && (x == 0 || !m.east[i - 1]) && (y == 0 || !m.north[i - w])
                })
                .count()
        })
        .collect()
}

/// Largest `m·n` such that `[0,m) × [0,n)` is fully occupied with no
/// mismatch inside it.
pub fn largest_error_free_aggregate(m: &MismatchMap) -> usize {
    let mut best = 0;
    let mut run_min = usize::MAX;
    for (y, a) in clean_prefix_widths(m).into_iter().enumerate() {
        run_min = run_min.min(a);
        if run_min == 0 {
            break;
        }
        best = best.max(run_min * (y + 1));
    }
    best
}

/// How `g_mc` follows `g_se` across a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GmcRule {
    /// `g_mc = 2·g_se − δ`.
    Offset(f64),
    Fixed(f64),
}

impl Default for GmcRule {
    fn default() -> Self {
        GmcRule::Offset(GMC_OFFSET)
    }
}

impl GmcRule {
    pub fn gmc(self, g_se: f64) -> f64 {
        match self {
            GmcRule::Offset(d) => 2.0 * g_se - d,
            GmcRule::Fixed(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub gse: f64,
    pub gmc: f64,
    pub run: usize,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub tiles_placed: usize,
    pub mismatch_edges: usize,
    pub events: u64,
    pub flag: SimFlag,
    /// Not part of the CSV.
    #[serde(skip)]
    pub frozen_detachments: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub g_se: f64,
    pub g_mc: f64,
    pub records: Vec<RunRecord>,
    pub median_n: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-run seed mixed from the base seed and the run's coordinates.
pub fn derive_seed(base: u64, gse_index: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ gse_index as u64) ^ run as u64)
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Runs `runs` seeded simulations per `g_se` value. Runs are spread over the
/// available cores; results are ordered by `(g_se index, run)`.
pub fn sweep(
    ts: &TileSystem,
    g_se_values: &[f64],
    runs: usize,
    base: &SimParams,
    gmc: GmcRule,
) -> Result<Vec<SweepResult>, SimError> {
    if runs == 0 {
        return Err(SimError::Param("runs must be at least 1".into()));
    }
    let c = Compiled::new(ts);
    let jobs: Vec<(usize, usize)> = (0..g_se_values.len())
        .flat_map(|g| (0..runs).map(move |r| (g, r)))
        .collect();
    let run_one = |&(g, r): &(usize, usize)| -> Result<RunRecord, SimError> {
        let g_se = g_se_values[g];
        let mut p = base.clone();
        p.g_se = g_se;
        p.g_mc = gmc.gmc(g_se);
        p.rng_seed = derive_seed(base.rng_seed, g, r);
        let o = simulate_compiled(&c, &p)?;
        Ok(RunRecord {
            gse: g_se,
            gmc: p.g_mc,
            run: r,
            seed: p.rng_seed,
            n: o.n,
            tiles_placed: o.tiles_placed,
            mismatch_edges: o.mismatch_edges,
            events: o.events,
            flag: o.flag,
            frozen_detachments: o.frozen_detachments,
        })
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len());
    let records: Vec<RunRecord> = if workers <= 1 {
        jobs.iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        let chunks: Vec<Vec<Result<RunRecord, SimError>>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|k| {
                    let jobs = &jobs;
                    let run_one = &run_one;
                    s.spawn(move || jobs.iter().skip(k).step_by(workers).map(run_one).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker")).collect()
        });
        let mut out: Vec<Option<Result<RunRecord, SimError>>> = (0..jobs.len()).map(|_| None).collect();
        for (k, chunk) in chunks.into_iter().enumerate() {
            for (j, rec) in chunk.into_iter().enumerate() {
                out[k + j * workers] = Some(rec);
            }
        }
        out.into_iter().map(|r| r.expect("every job ran")).collect::<Result<_, _>>()?
    };
    Ok(g_se_values
        .iter()
        .enumerate()
        .map(|(g, &g_se)| {
            let recs: Vec<RunRecord> = records[g * runs..(g + 1) * runs].to_vec();
            let ns: Vec<f64> = recs.iter().map(|r| r.n as f64).collect();
            SweepResult {
                g_se,
                g_mc: gmc.gmc(g_se),
                median_n: median(&ns),
                records: recs,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atam::assemble;
    use crate::pattern::{builtin, Builtin};
    use crate::tileset::{construct_er, construct_kl, Mode};
    use rand::Rng;

    fn brute_force(m: &MismatchMap) -> usize {
        let w = m.width;
        let mut best = 0;
        for mm in 1..=m.width {
            for nn in 1..=m.height {
                let mut ok = true;
                for y in 0..nn {
                    for x in 0..mm {
                        let i = y * w + x;
                        if !m.occupied[i] || (x + 1 < mm && m.east[i]) || (y + 1 < nn && m.north[i]) {
                            ok = false;
                        }
                    }
                }
                if ok {
                    best = best.max(mm * nn);
                }
            }
        }
        best
    }

    pub(crate) fn random_map(rng: &mut impl Rng, n: usize) -> MismatchMap {
        let mut m = MismatchMap::new(n, n);
        let fill = rng.gen_range(0.6..1.0);
        let bad = rng.gen_range(0.0..0.08);
        for i in 0..n * n {
            m.occupied[i] = rng.gen_bool(fill);
            m.east[i] = rng.gen_bool(bad);
            m.north[i] = rng.gen_bool(bad);
        }
        m.occupied[0] = true;
        m
    }

    #[test]
    fn aggregate_examples() {
        let mut m = MismatchMap::new(16, 16);
        m.occupied.iter_mut().for_each(|o| *o = true);
        assert_eq!(largest_error_free_aggregate(&m), 256);
        let mut s = MismatchMap::new(16, 16);
        s.occupied[0] = true;
        assert_eq!(largest_error_free_aggregate(&s), 1);
        let mut f = MismatchMap::new(4, 4);
        f.occupied.iter_mut().for_each(|o| *o = true);
        f.north[2 * 4 + 3] = true;
        assert_eq!(largest_error_free_aggregate(&f), 12);
        assert_eq!(brute_force(&f), 12);
    }

    #[test]
    fn aggregate_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = random_map(&mut rng, 12);
            assert_eq!(largest_error_free_aggregate(&m), brute_force(&m));
        }
    }

    #[test]
    fn seed_only_stops_immediately() {
        let t = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let mut p = SimParams::new(6.0, (1, 1));
        p.stop_fraction = 1.0;
        let o = simulate(&t, &p).unwrap();
        assert_eq!((o.tiles_placed, o.events, o.n), (1, 0, 1));
        assert_eq!(o.flag, SimFlag::Ok);
    }

    #[test]
    fn event_cap_flags_incomplete() {
        let t = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let mut p = SimParams::new(6.0, (32, 32));
        p.max_events = 100;
        let o = simulate(&t, &p).unwrap();
        assert_eq!(o.flag, SimFlag::Incomplete);
        assert_eq!(o.events, 100);
    }

    #[test]
    fn rejects_bad_params() {
        let t = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let mut p = SimParams::new(6.0, (8, 8));
        p.stop_fraction = 1.5;
        assert!(simulate(&t, &p).is_err());
        p = SimParams::new(-1.0, (8, 8));
        assert!(simulate(&t, &p).is_err());
    }

    #[test]
    fn reproducible_given_seed() {
        let t = construct_er(&construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap()).unwrap();
        let mut p = SimParams::new(6.1, (24, 24));
        p.rng_seed = 42;
        let a = simulate(&t, &p).unwrap();
        let b = simulate(&t, &p).unwrap();
        assert!(a.same_result(&b));
        p.rng_seed = 43;
        let c = simulate(&t, &p).unwrap();
        assert!(!a.same_result(&c));
    }

    #[test]
    fn outcome_invariants() {
        let t = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let c = Compiled::new(&t);
        for seed in 0..4 {
            let mut p = SimParams::new(5.5, (20, 20));
            p.rng_seed = seed;
            let o = simulate(&t, &p).unwrap();
            assert!(o.n <= o.tiles_placed && o.tiles_placed <= 400);
            assert_eq!(o.tiles_placed, o.assembly.occupied());
            assert_eq!(o.mismatch_edges, o.assembly.mismatch_count(&c));
            assert_eq!(o.assembly.get(0, 0), Some(c.seed));
        }
    }

    #[test]
    fn high_gse_grows_the_exact_pattern() {
        let t = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let r = construct_er(&t).unwrap();
        let c = Compiled::new(&r);
        let want = assemble(&r, 31, 31).unwrap();
        let mut p = SimParams::new(9.0, (32, 32));
        p.rng_seed = 3;
        let o = simulate(&r, &p).unwrap();
        let mut occupied = MismatchMap::from_assembly(&o.assembly, &c);
        occupied.east.iter_mut().for_each(|e| *e = false);
        occupied.north.iter_mut().for_each(|e| *e = false);
        // Mismatches are rare enough not to shrink the aggregate.
        assert_eq!(o.n, largest_error_free_aggregate(&occupied));
        let map = MismatchMap::from_assembly(&o.assembly, &c);
        let mut run_min = usize::MAX;
        for (y, a) in clean_prefix_widths(&map).into_iter().enumerate() {
            run_min = run_min.min(a);
            for x in 0..run_min {
                assert_eq!(o.assembly.get(x, y), want.get(x, y), "({x},{y})");
            }
        }
    }

    #[test]
    fn two_stage_completes() {
        let t = construct_er(&construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap()).unwrap();
        let mut p = SimParams::new(6.5, (24, 24));
        p.two_stage = true;
        p.rng_seed = 9;
        let o = simulate(&t, &p).unwrap();
        assert_eq!(o.flag, SimFlag::Ok);
        let c = Compiled::new(&t);
        for x in 0..24 {
            assert!(o.assembly.get(x, 0).is_some_and(|k| c.kinds[k].is_boundary()));
        }
    }

    #[test]
    fn median_and_seeds() {
        assert_eq!(median(&[10.0, 50.0, 30.0]), 30.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 10.0]), 2.5);
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
        assert_eq!(derive_seed(5, 2, 3), derive_seed(5, 2, 3));
        let a: std::collections::HashSet<u64> = (0..40).map(|r| derive_seed(1, 0, r)).collect();
        let b: std::collections::HashSet<u64> = (0..40).map(|r| derive_seed(2, 0, r)).collect();
        assert!(a.is_disjoint(&b));
    }

    #[test]
    fn sweep_shapes() {
        let t = construct_kl(&builtin(Builtin::S), Mode::Reachable).unwrap();
        let base = SimParams::new(6.0, (12, 12));
        let one = sweep(&t, &[6.0], 1, &base, GmcRule::default()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].records.len(), 1);
        assert_eq!(one[0].median_n, one[0].records[0].n as f64);
        let grid: Vec<f64> = (0..12).map(|i| 4.9 + 0.3 * i as f64).collect();
        assert_eq!(grid.len(), 12);
        let again = sweep(&t, &[6.0], 1, &base, GmcRule::default()).unwrap();
        assert_eq!(one, again);
        assert!(sweep(&t, &[6.0], 0, &base, GmcRule::default()).is_err());
    }
}
