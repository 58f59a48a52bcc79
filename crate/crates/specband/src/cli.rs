//! Command-line front end: TOML config, flag overrides, CSV/JSON artifact
//! emission, and exit-code mapping.
//!
//! Exit codes: 0 success, 1 invalid config, 2 refused precondition,
//! 3 numerical or I/O failure.
//!
//! Artifacts are deterministic: identical configs produce byte-identical
//! CSV and JSON regardless of thread count. Wall time is therefore written
//! to a separate `timing.txt` sidecar, never into `summary.json`.

use crate::ebbm::{self, Reservoirs};
use crate::experiments::{self, VerdictThresholds};
use crate::floquet;
use crate::numerics::Interval;
use crate::potential::PotentialSpec;
use crate::transfer::BumpSpec;
use crate::{Error, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub lo: f64,
    pub hi: f64,
}

/// Full run description. Every field has a default, so an empty file (or no
/// file at all) is a valid config; TOML emit-parse-emit round-trips
/// byte-identically because serialization follows the field order below
/// (scalars and arrays first, tables last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Single length for bands/bloch/landauer/thouless.
    pub l: u32,
    /// Length sequence for sweep/carmona/shrink.
    pub l_seq: Vec<u32>,
    pub kappa: f64,
    pub tol: f64,
    /// Output directory for all artifacts.
    pub out: PathBuf,
    /// Energy grid size of the landauer table.
    pub grid_points: usize,
    /// In-band energy for the bloch command.
    pub energy: f64,
    /// Truncation size of the spectral-measure oracle (carmona).
    pub oracle_n: usize,
    /// Seeds exercised by the audit.
    pub seed_set: Vec<u64>,
    /// Lengths exercised by the audit.
    pub l_set: Vec<u32>,
    /// Worker threads; 0 means machine parallelism.
    pub threads: usize,
    pub potential: PotentialSpec,
    pub window: WindowConfig,
    pub thresholds: VerdictThresholds,
    pub bump: BumpSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            l: 64,
            l_seq: vec![100, 200, 400, 800, 1600],
            kappa: 1.0,
            tol: 1e-8,
            out: PathBuf::from("out"),
            grid_points: 201,
            energy: 0.3,
            oracle_n: 10_000,
            seed_set: vec![1, 2, 3, 4, 5],
            l_set: vec![16, 64, 128],
            threads: 0,
            potential: PotentialSpec::zero(),
            window: WindowConfig { lo: -1.0, hi: 1.0 },
            thresholds: VerdictThresholds::default(),
            bump: BumpSpec {
                center: 0.0,
                width: 0.5,
            },
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn emit(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn interval(&self) -> Result<Interval> {
        Interval::new(self.window.lo, self.window.hi)
            .map_err(|_| Error::Config("window needs lo < hi, both finite".into()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "specband", version = crate::VERSION, about = "Spectral band and conductance laboratory for 1D discrete Schrodinger samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config file; flags below override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Length override: one value sets `l`, several set `l_seq`.
    #[arg(long = "L", global = true, value_delimiter = ',', num_args = 1..)]
    pub l: Option<Vec<u32>>,
    /// Window override as `lo,hi`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (0 = machine parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory override.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Joint L-sweep of the three conductance functionals.
    Sweep,
    /// Band edges, discriminant zeros, and widths at one length.
    Bands,
    /// Bloch amplitudes at one in-band energy.
    Bloch,
    /// Transmission density table plus current and conductance.
    Landauer,
    /// Spectral overlap conductance of the periodized sample.
    Thouless,
    /// Weak-convergence probe against the spectral-measure oracle.
    Carmona,
    /// Invariant audit ledger over seeds and lengths.
    Audit,
    /// Band-shrinkage table with the overlap bound when an oracle exists.
    Shrink,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Bands => "bands",
            Command::Bloch => "bloch",
            Command::Landauer => "landauer",
            Command::Thouless => "thouless",
            Command::Carmona => "carmona",
            Command::Audit => "audit",
            Command::Shrink => "shrink",
        }
    }
}

/// Apply flag overrides on top of the (possibly defaulted) config file.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(ls) = &cli.l {
        if ls.is_empty() {
            return Err(Error::Config("--L needs at least one value".into()));
        }
        cfg.l = ls[0];
        if ls.len() > 1 {
            cfg.l_seq = ls.clone();
        } else {
            cfg.l_seq = vec![ls[0]];
        }
    }
    if let Some(w) = &cli.window {
        let parts: Vec<&str> = w.split(',').collect();
        let parse = |s: &str| s.trim().parse::<f64>().ok();
        match (
            parts.len(),
            parts.first().and_then(|s| parse(s)),
            parts.last().and_then(|s| parse(s)),
        ) {
            (2, Some(lo), Some(hi)) => cfg.window = WindowConfig { lo, hi },
            _ => return Err(Error::Config(format!("--window wants `lo,hi`, got `{w}`"))),
        }
    }
    if let Some(k) = cli.kappa {
        cfg.kappa = k;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(n) = cli.threads {
        cfg.threads = n;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// 17-significant-digit decimal so doubles round-trip exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// RFC-4180 CSV with a header row and LF line endings.
pub fn emit_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InternalConsistency(format!(
                "csv row width {} does not match schema width {}",
                row.len(),
                header.len()
            )));
        }
        let escaped: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        text.push_str(&escaped.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Command dispatch
// ---------------------------------------------------------------------------

/// Run one command, writing its CSV artifacts under `cfg.out` and returning
/// the per-command JSON result object.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<serde_json::Value> {
    cfg.potential
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::create_dir_all(&cfg.out)?;
    let window = cfg.interval()?;
    let v = &cfg.potential;
    match cmd {
        Command::Sweep => {
            let report = experiments::equivalence_sweep(
                v,
                &cfg.l_seq,
                window,
                cfg.kappa,
                cfg.tol,
                cfg.thresholds,
            )?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.l.to_string(),
                        fmt_f64(r.inv_norm_integral),
                        fmt_f64(r.g_lb),
                        fmt_f64(r.g_th),
                        fmt_f64(r.lyapunov_mid),
                    ]
                })
                .collect();
            emit_csv(
                &cfg.out.join("sweep.csv"),
                &["L", "inv_norm_integral", "g_lb", "g_th", "lyapunov_mid"],
                &rows,
            )?;
            std::fs::write(cfg.out.join("plot_sweep.gp"), SWEEP_PLOT_SCRIPT)?;
            Ok(json!({
                "verdict": report.verdict,
                "verdict_note": "finite-size heuristic; see thresholds",
                "ratio_range": report.ratio_range,
                "rows": report.rows,
            }))
        }
        Command::Bands => {
            let bands = floquet::band_edges(v, cfg.l)?;
            let rows: Vec<Vec<String>> = bands
                .bands
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    vec![
                        (i + 1).to_string(),
                        fmt_f64(b.lo),
                        fmt_f64(b.hi),
                        fmt_f64(b.zero),
                        fmt_f64(b.width()),
                        match b.orientation {
                            floquet::Orientation::Decreasing => "decreasing".to_string(),
                            floquet::Orientation::Increasing => "increasing".to_string(),
                        },
                    ]
                })
                .collect();
            emit_csv(
                &cfg.out.join("bands.csv"),
                &["ell", "E1", "E2", "E0", "width", "orientation"],
                &rows,
            )?;
            Ok(json!({
                "L": bands.l,
                "band_count": bands.bands.len(),
                "total_measure": bands.total_measure(),
                "window_measure": bands.spectrum_measure(window),
            }))
        }
        Command::Bloch => {
            let state = floquet::bloch_state(v, cfg.l, cfg.energy)?;
            let rows: Vec<Vec<String>> = state
                .u
                .iter()
                .enumerate()
                .map(|(m, &(re, im))| {
                    vec![
                        (m + 1).to_string(),
                        fmt_f64(re),
                        fmt_f64(im),
                        fmt_f64(re.hypot(im)),
                    ]
                })
                .collect();
            emit_csv(&cfg.out.join("bloch.csv"), &["m", "re", "im", "abs"], &rows)?;
            Ok(json!({
                "L": cfg.l,
                "energy": cfg.energy,
                "k": state.k,
                "dE_dk": state.de_dk,
                "phase_fallback": state.phase_fallback,
            }))
        }
        Command::Landauer => {
            let reservoirs = Reservoirs::default();
            let n = cfg.grid_points.max(2);
            let points = crate::parallel::map_collect(
                &(0..n).collect::<Vec<_>>(),
                |&i| -> Result<(f64, f64)> {
                    let e = window.lo() + window.len() * i as f64 / (n - 1) as f64;
                    Ok((
                        e,
                        ebbm::lb_density(v, cfg.l, cfg.kappa, &reservoirs, e)?.density,
                    ))
                },
            )
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|&(e, d)| vec![fmt_f64(e), fmt_f64(d)])
                .collect();
            emit_csv(&cfg.out.join("landauer.csv"), &["E", "density"], &rows)?;
            let current = ebbm::lb_current(v, cfg.l, cfg.kappa, &reservoirs, window, cfg.tol)?;
            Ok(json!({
                "L": cfg.l,
                "kappa": cfg.kappa,
                "current": current.value,
                "quadrature_converged": current.converged,
                "conductance": current.value / window.len(),
            }))
        }
        Command::Thouless => {
            let bands = floquet::band_edges(v, cfg.l)?;
            Ok(json!({
                "L": cfg.l,
                "spectrum_in_window": bands.spectrum_measure(window),
                "conductance": floquet::thouless_conductance(&bands, window),
            }))
        }
        Command::Carmona => {
            let table = experiments::carmona_study(v, cfg.bump, &cfg.l_seq, cfg.tol, cfg.oracle_n)?;
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|r| {
                    vec![
                        r.l.to_string(),
                        fmt_f64(r.probe),
                        fmt_f64(r.oracle),
                        fmt_f64(r.deviation),
                    ]
                })
                .collect();
            emit_csv(
                &cfg.out.join("carmona.csv"),
                &["L", "probe", "oracle", "deviation"],
                &rows,
            )?;
            Ok(json!({ "bump": cfg.bump, "rows": table }))
        }
        Command::Audit => {
            let ledger = experiments::invariant_suite(&cfg.seed_set, &cfg.l_set)?;
            let rows: Vec<Vec<String>> = ledger
                .iter()
                .map(|e| {
                    vec![
                        e.module.to_string(),
                        e.invariant.to_string(),
                        e.pass.to_string(),
                        e.detail.clone(),
                    ]
                })
                .collect();
            emit_csv(
                &cfg.out.join("audit.csv"),
                &["module", "invariant", "pass", "detail"],
                &rows,
            )?;
            let failures = ledger.iter().filter(|e| !e.pass).count();
            Ok(json!({
                "checks": ledger.len(),
                "failures": failures,
                "ledger": ledger,
            }))
        }
        Command::Shrink => {
            let report = experiments::band_shrink_report(v, &cfg.l_seq, window)?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| vec![r.l.to_string(), fmt_f64(r.overlap)])
                .collect();
            emit_csv(&cfg.out.join("shrink.csv"), &["L", "overlap"], &rows)?;
            Ok(json!({
                "oracle_overlap": report.oracle_overlap,
                "bound": report.bound,
                "bound_ok": report.bound_ok,
                "rows": report.rows,
            }))
        }
    }
}

const SWEEP_PLOT_SCRIPT: &str = "# gnuplot script for sweep.csv\n\
set datafile separator ','\n\
set logscale y\n\
set xlabel 'L'\n\
set ylabel 'conductance functionals'\n\
set key outside\n\
plot 'sweep.csv' using 1:2 with linespoints title 'inv norm integral', \\\n\
     'sweep.csv' using 1:3 with linespoints title 'g_{LB}', \\\n\
     'sweep.csv' using 1:4 with linespoints title 'g_{Th}'\n";

/// Deterministic summary: version, command, config echo, result. No wall
/// time here (see module docs); `write_timing` emits the sidecar.
pub fn write_summary(cmd: Command, cfg: &RunConfig, result: &serde_json::Value) -> Result<()> {
    let summary = json!({
        "version": crate::VERSION,
        "command": cmd.name(),
        "config": cfg,
        "result": result,
    });
    let mut text =
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(cfg.out.join("summary.json"), text)?;
    Ok(())
}

pub fn write_timing(cfg: &RunConfig, wall: std::time::Duration) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "wall_time_sec,{:.6}", wall.as_secs_f64());
    std::fs::write(cfg.out.join("timing.txt"), text)?;
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidInput(_) => 1,
        // Refused preconditions: the contract names the violated definition.
        Error::NotTransparent(_, _) | Error::BandEdge(_) | Error::DecoupledResonance(_) => 2,
        _ => 3,
    }
}

fn describe(err: &Error) -> String {
    match err {
        Error::NotTransparent(lo, hi) => format!(
            "window ({lo}, {hi}) refused: reservoirs are transparent only for \
             windows strictly inside the common lead band (-2, 2)"
        ),
        other => other.to_string(),
    }
}

/// Full program: parse, resolve, size the pool, dispatch, write artifacts.
/// Returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("specband {}: {}", cli.command.name(), describe(&err));
            exit_code(&err)
        }
    }
}

fn run_cli(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    #[cfg(feature = "parallel")]
    if cfg.threads > 0 {
        // Ignore the error from configuring the pool twice (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    let start = std::time::Instant::now();
    let result = run(cli.command, &cfg)?;
    write_summary(cli.command, &cfg, &result)?;
    write_timing(&cfg, start.elapsed())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_is_byte_identical() {
        let cfg = RunConfig {
            potential: PotentialSpec::anderson(4.0, 1),
            l_seq: vec![10, 20, 40],
            tol: 1e-9,
            ..RunConfig::default()
        };
        let once = cfg.emit().unwrap();
        let parsed: RunConfig = toml::from_str(&once).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(parsed.emit().unwrap(), once);
    }

    #[test]
    fn empty_config_is_valid() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("no_such_field = 3\n").is_err());
    }

    #[test]
    fn flag_overrides_take_precedence() {
        let cli = Cli::parse_from([
            "specband", "sweep", "--window", "-0.5,0.5", "--kappa", "0.7", "--L", "8,16,32",
        ]);
        let cfg = resolve_config(&cli).unwrap();
        assert_eq!(cfg.window, WindowConfig { lo: -0.5, hi: 0.5 });
        assert_eq!(cfg.kappa, 0.7);
        assert_eq!(cfg.l_seq, vec![8, 16, 32]);
        assert_eq!(cfg.l, 8);
    }

    #[test]
    fn csv_escaping_and_format() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("q\"q"), "\"q\"\"q\"");
        // 17 significant digits round-trip.
        let x = std::f64::consts::PI;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::NotTransparent(-3.0, 1.0)), 2);
        assert_eq!(exit_code(&Error::NumericalFailure("x".into())), 3);
        assert!(describe(&Error::NotTransparent(-3.0, 1.0)).contains("transparent"));
    }

    #[test]
    fn thouless_command_free_case() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            l: 64,
            out: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let result = run(Command::Thouless, &cfg).unwrap();
        let g = result["conductance"].as_f64().unwrap();
        assert!((g - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-10);
    }

    #[test]
    fn bands_csv_schema() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            l: 8,
            potential: PotentialSpec::anderson(1.0, 1),
            out: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        run(Command::Bands, &cfg).unwrap();
        let text = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "ell,E1,E2,E0,width,orientation");
        assert_eq!(lines.count(), 8);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn empty_rows_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        emit_csv(&path, &["a", "b"], &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
    }
}
