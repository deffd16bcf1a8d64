//! Command-line subcommands. The binary only forwards `argv` to [`run`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::atam::{self, labels};
use crate::io::{self, RenderPalette, VerifyReport};
use crate::ktam::{sweep, GmcRule, SimParams};
use crate::pattern::{builtin, Builtin, PatternOracle, PatternSpec};
use crate::tileset::{construct_er, construct_kl, Compiled, Mode, Provenance, TileSystem};
use crate::verify::{self, ForcingMode, ForcingOptions, ProbeOptions};

#[derive(Parser, Debug)]
#[command(name = "tileweave", version, about = "Compile recursive patterns into tile sets and grow them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a pattern (S, C, W, or a pattern JSON file) into a tile set.
    Generate {
        pattern: String,
        #[arg(long, default_value = "reachable")]
        mode: Mode,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Turn a construction-1 tile set into its error-resilient counterpart.
    Transform {
        tiles: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Grow an N×N square error-free and render it.
    Assemble {
        tiles: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Compare every cell with the pattern recursion.
        #[arg(long)]
        verify_oracle: bool,
        /// Pattern for --verify-oracle; inferred for built-ins if omitted.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long, default_value_t = 4)]
        cell_px: usize,
    },
    /// Kinetic sweep over g_se values, written as CSV.
    Simulate {
        tiles: PathBuf,
        /// `start:end:step`, inclusive.
        #[arg(long)]
        gse_range: String,
        #[arg(long, default_value_t = 25)]
        runs: usize,
        #[arg(long, default_value_t = 128)]
        target: usize,
        #[arg(long)]
        two_stage: bool,
        #[arg(long, default_value_t = 0.75)]
        stop_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200_000_000)]
        max_events: u64,
        /// Fixed g_mc instead of `2·g_se − 0.1`.
        #[arg(long)]
        gmc: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run checks and write a JSON report; exits nonzero if any fails.
    Verify {
        tiles: PathBuf,
        er_tiles: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "lemma2,forcing,bijection")]
        checks: Vec<String>,
        #[arg(long, default_value = "exhaustive")]
        forcing_mode: String,
        #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 96)]
        slope_size: usize,
        #[arg(long, default_value_t = 40)]
        slope_runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write an Xgrow tile file.
    ExportXgrow {
        tiles: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

type CliResult = Result<bool, String>;

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 failed check, 2 error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Generate { pattern, mode, output } => {
            let spec = load_pattern(&pattern)?;
            let ts = construct_kl(&spec, mode).map_err(|e| e.to_string())?;
            write(&output, io::tileset_to_json(&ts).as_bytes())?;
            println!("{} tile types ({} mode) -> {}", ts.len(), mode_str(mode), output.display());
            Ok(true)
        }
        Command::Transform { tiles, output } => {
            let ts = read(&tiles)?;
            let er = construct_er(&ts).map_err(|e| format!("{}: {e}", tiles.display()))?;
            write(&output, io::tileset_to_json(&er).as_bytes())?;
            println!("{} tile types -> {}", er.len(), output.display());
            Ok(true)
        }
        Command::Assemble {
            tiles,
            size,
            output,
            verify_oracle,
            pattern,
            cell_px,
        } => {
            if size == 0 {
                return Err("--size must be at least 1".into());
            }
            let ts = read(&tiles)?;
            let a = atam::assemble(&ts, size - 1, size - 1).map_err(|e| e.to_string())?;
            let grid = labels(&a, &ts);
            let img = io::render_ppm(&grid, &RenderPalette::default_for(ts.alphabet), cell_px, &[]);
            write(&output, &img)?;
            println!("assembled {size}x{size} -> {}", output.display());
            if !verify_oracle {
                return Ok(true);
            }
            let spec = match pattern {
                Some(p) => load_pattern(&p)?,
                None => infer_builtin(&ts).ok_or("cannot infer the pattern of this tile set; pass --pattern")?,
            };
            let want = PatternOracle::new(spec)
                .and_then(|mut o| o.grid(size, size))
                .map_err(|e| e.to_string())?;
            match grid.first_difference(&want) {
                None => {
                    println!("oracle: all {} cells agree", size * size);
                    Ok(true)
                }
                Some((x, y)) => {
                    println!("oracle: first difference at ({x},{y}): assembled {:?}, pattern {:?}", grid.get(x, y), want.get(x, y));
                    Ok(false)
                }
            }
        }
        Command::Simulate {
            tiles,
            gse_range,
            runs,
            target,
            two_stage,
            stop_fraction,
            seed,
            max_events,
            gmc,
            output,
        } => {
            let ts = read(&tiles)?;
            let values = parse_range(&gse_range)?;
            let mut base = SimParams::new(values[0], (target, target));
            base.two_stage = two_stage;
            base.stop_fraction = stop_fraction;
            base.rng_seed = seed;
            base.max_events = max_events;
            let rule = gmc.map_or(GmcRule::default(), GmcRule::Fixed);
            let results = sweep(&ts, &values, runs, &base, rule).map_err(|e| e.to_string())?;
            write(&output, io::sweep_to_csv(&results).map_err(|e| e.to_string())?.as_bytes())?;
            for r in &results {
                let flagged = r.records.iter().filter(|x| x.flag != crate::ktam::SimFlag::Ok).count();
                println!("g_se={:.2} g_mc={:.2} median N={} flagged runs={flagged}", r.g_se, r.g_mc, r.median_n);
            }
            Ok(true)
        }
        Command::Verify {
            tiles,
            er_tiles,
            checks,
            forcing_mode,
            samples,
            eps,
            slope_size,
            slope_runs,
            seed,
            output,
        } => {
            let first = read(&tiles)?;
            let second = er_tiles.as_deref().map(read).transpose()?;
            let mode = match forcing_mode.as_str() {
                "exhaustive" => ForcingMode::Exhaustive,
                "indexed" => ForcingMode::Indexed,
                "sampled" => ForcingMode::Sampled,
                other => return Err(format!("unknown forcing mode `{other}`")),
            };
            let report = run_checks(
                &first,
                second.as_ref(),
                &checks,
                &ForcingOptions {
                    mode,
                    samples,
                    seed,
                    ..Default::default()
                },
                &eps,
                &ProbeOptions::new(slope_size, slope_runs, seed),
            )?;
            write(&output, report.to_json().as_bytes())?;
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.summary);
            }
            Ok(report.passed)
        }
        Command::ExportXgrow { tiles, output } => {
            let ts = read(&tiles)?;
            write(&output, io::export_xgrow(&ts).as_bytes())?;
            println!("{} tile types -> {}", ts.len(), output.display());
            Ok(true)
        }
    }
}

/// Runs the named checks. The subject of `lemma2` and `forcing` is the
/// second system when given, else the first; `bijection` and `slope` need a
/// construction-1 system, paired with its transform when none is given.
pub fn run_checks(
    first: &TileSystem,
    second: Option<&TileSystem>,
    checks: &[String],
    forcing: &ForcingOptions,
    eps: &[f64],
    probe: &ProbeOptions,
) -> Result<VerifyReport, String> {
    let subject = second.unwrap_or(first);
    let pair = || -> Result<(TileSystem, TileSystem), String> {
        if first.provenance != Provenance::Construction1 {
            return Err("this check needs a construction-1 tile set as the first file".into());
        }
        let r = match second {
            Some(r) => r.clone(),
            None => construct_er(first).map_err(|e| e.to_string())?,
        };
        Ok((first.clone(), r))
    };
    let mut report = VerifyReport::new(
        std::iter::once(first)
            .chain(second)
            .map(verify::system_fingerprint)
            .collect(),
    );
    for check in checks {
        match check.trim() {
            "lemma2" => {
                let r = verify::check_lemma_equalities(subject).map_err(|e| e.to_string())?;
                let summary = format!("{} triples, {} failures", r.triples_checked, r.failures.len());
                report.push("lemma2", r.passed, summary, &r);
            }
            "forcing" => {
                let r = verify::check_error_forcing(subject, forcing).map_err(|e| e.to_string())?;
                let summary = format!(
                    "{} base configurations, {} completions, {} violating",
                    r.configurations_checked, r.completions_checked, r.violating_configurations
                );
                report.push("forcing", r.forced_always, summary, &r);
            }
            "bijection" => {
                let (t, r) = pair()?;
                let b = verify::check_bijection(&t, &r);
                let summary = format!("|T|={} |R|={}, {} failures", b.t_count, b.r_count, b.failures.len());
                report.push("bijection", b.passed, summary, &b);
            }
            "slope" => {
                let (t, r) = pair()?;
                let s = verify::epsilon_slope(&t, &r, eps, probe).map_err(|e| e.to_string())?;
                let ok = matches!((s.t.slope, s.r.slope), (Some(a), Some(b)) if (0.6..=1.4).contains(&a) && (1.6..=2.4).contains(&b));
                let show = |v: Option<f64>| v.map_or("degenerate".to_string(), |v| format!("{v:.3}"));
                let summary = format!("slope T={} R={}", show(s.t.slope), show(s.r.slope));
                report.push("slope", ok, summary, &s);
            }
            other => return Err(format!("unknown check `{other}` (expected lemma2, forcing, bijection, slope)")),
        }
    }
    Ok(report)
}

fn mode_str(m: Mode) -> &'static str {
    match m {
        Mode::Reachable => "reachable",
        Mode::Exhaustive => "exhaustive",
    }
}

fn read(path: &Path) -> Result<TileSystem, String> {
    io::read_tileset(path).map_err(|e| e.to_string())
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), String> {
    io::write_file(path, bytes).map_err(|e| e.to_string())
}

/// A built-in name, or a path to a pattern JSON file.
pub fn load_pattern(name: &str) -> Result<PatternSpec, String> {
    if let Ok(b) = name.parse::<Builtin>() {
        return Ok(builtin(b));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(format!("unknown pattern `{name}`: not S, C, W, or an existing file"));
    }
    let text = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
    let spec: PatternSpec = serde_json::from_str(&text).map_err(|e| format!("{name}: {e}"))?;
    spec.validate().map_err(|e| format!("{name}: {e}"))?;
    Ok(spec)
}

/// The built-in pattern whose construction reproduces `ts`, if any.
pub fn infer_builtin(ts: &TileSystem) -> Option<PatternSpec> {
    [Builtin::S, Builtin::C, Builtin::W].into_iter().map(builtin).find(|spec| {
        if (spec.w, spec.h, spec.alphabet) != (ts.w, ts.h, ts.alphabet) {
            return false;
        }
        let Ok(t) = construct_kl(spec, ts.mode) else { return false };
        let candidate = match ts.provenance {
            Provenance::Construction1 => Some(t),
            Provenance::Construction2 => construct_er(&t).ok(),
        };
        candidate.is_some_and(|c| c.tiles == ts.tiles)
    })
}

/// `start:end:step`, end inclusive within rounding.
pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number `{s}` in range `{text}`"));
    let (a, b, step) = match parts.as_slice() {
        [a] => (num(a)?, num(a)?, 1.0),
        [a, b] => (num(a)?, num(b)?, 1.0),
        [a, b, s] => (num(a)?, num(b)?, num(s)?),
        _ => return Err(format!("range `{text}` is not start:end:step")),
    };
    if step <= 0.0 || b < a {
        return Err(format!("range `{text}` must have start <= end and a positive step"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    // Round to 10 decimals so 4.9 + 3·0.3 prints as 5.8.
    Ok((0..count).map(|i| ((a + step * i as f64) * 1e10).round() / 1e10).collect())
}

/// Assembles and compares with the oracle; used by examples and tests.
pub fn oracle_agrees(ts: &TileSystem, spec: &PatternSpec, size: usize) -> Result<bool, String> {
    let c = Compiled::new(ts);
    let a = atam::assemble_compiled(&c, ts, size - 1, size - 1, atam::FillOrder::Diagonal).map_err(|e| e.to_string())?;
    let want = PatternOracle::new(spec.clone())
        .and_then(|mut o| o.grid(size, size))
        .map_err(|e| e.to_string())?;
    Ok(labels(&a, ts).first_difference(&want).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let v = parse_range("4.9:8.2:0.3").unwrap();
        assert_eq!(v.len(), 12);
        assert_eq!(v[3], 5.8);
        assert_eq!(parse_range("6.1").unwrap(), vec![6.1]);
        assert!(parse_range("5:4:1").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn infers_builtins() {
        for b in [Builtin::S, Builtin::C, Builtin::W] {
            let t = construct_kl(&builtin(b), Mode::Reachable).unwrap();
            let r = construct_er(&t).unwrap();
            assert_eq!(infer_builtin(&t).unwrap().name, builtin(b).name);
            assert_eq!(infer_builtin(&r).unwrap().name, builtin(b).name);
        }
    }

    #[test]
    fn unknown_pattern() {
        assert!(load_pattern("Q").unwrap_err().contains("unknown pattern"));
    }
}
