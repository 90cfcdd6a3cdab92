//! Command-line front end.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fiber::{fiber_profile, FiberClass, FiberMap, FiberReport};
use crate::io;
use crate::landscape::{LandscapeCoeffs, LandscapeReport};
use crate::params::{GnConstants, ProblemParams, Regime, ThresholdData};
use crate::radial::{RadialField, RadialGrid, StatePair};
use crate::scalar::{normalized_scalar, scalar_level, solve_unit_scalar, SobolevData};
use crate::solver::sweep::{sweep, Axis};
use crate::solver::{evaluate_pair, solve_with, Checks, Context, ResultSummary, SolverConfig};

/// Environment variable that overrides `--out`.
pub const OUT_ENV: &str = "NORMGROUND_OUT";

#[derive(Debug, Parser)]
#[command(name = "normground", version, about = "Normalized ground states of two-component Schrodinger systems")]
pub struct Cli {
    /// Output directory (overridden by NORMGROUND_OUT).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scalar ground state, its normalized rescaling and the GN constant.
    Scalar(ScalarArgs),
    /// Ground state of the coupled system.
    System(SystemArgs),
    /// Fiber map of a stored or Gaussian pair.
    Fiber(FiberArgs),
    /// Landscape function h and its critical structure.
    Hfun(HfunArgs),
    /// Solves along a parameter axis.
    Sweep(SweepArgs),
    /// Re-checks a stored system result from its files.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ScalarArgs {
    #[arg(long = "N")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// JSON with keys N, p and optionally mu, a.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Problem parameters (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Solver settings (JSON); defaults when absent.
    #[arg(long)]
    pub solver: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FiberArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Pair profile CSV (r,u,v); unit-width Gaussians on the default grid when absent.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 601)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct HfunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Right end of the sampled interval; twice the largest zero when absent.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    Beta,
    MassScale,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub solver: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Result JSON written by `system`.
    #[arg(long)]
    pub result: PathBuf,
    /// Profile CSV written by `system`.
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    pub tol_p: f64,
}

/// Summary of one invocation, printed to stdout and stored next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub subcommand: String,
    pub params: Value,
    /// Git blob hash (SHA-256) of the configuration bytes.
    pub config_hash: String,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// `sha256("blob <len>\0" ‖ bytes)` in hex.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarConfig {
    #[serde(rename = "N")]
    dim: usize,
    p: f64,
    #[serde(default = "one")]
    mu: f64,
    #[serde(default = "one")]
    a: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarOutput {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: f64,
    pub mu: f64,
    pub a: f64,
    /// Frequency of the normalized solution; absent at `p = 2*`.
    pub lambda: Option<f64>,
    /// Energy of the normalized solution by quadrature; absent at `p = 2*`.
    pub energy: Option<f64>,
    /// Closed-form level `m_p^μ(a)`.
    pub level: f64,
    #[serde(rename = "C_Np")]
    pub c_np: f64,
    pub w0: Option<f64>,
    pub w_mass: Option<f64>,
    /// `(|∇w|₂² − γ_p|w|_p^p) / |∇w|₂²`.
    pub pohozaev_defect: Option<f64>,
    /// Sobolev constant, present at `p = 2*` only.
    pub sobolev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfunOutput {
    pub gn: GnConstants<f64>,
    pub thresholds: ThresholdData<f64>,
    pub coeffs: LandscapeCoeffs<f64>,
    pub report: LandscapeReport<f64>,
    pub structure_ok: bool,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Checks,
    /// Recomputed energy and multipliers agree with the stored ones.
    pub stored_values: bool,
    pub recomputed: ResultSummary<f64>,
    pub passed: bool,
}

/// Exit status of a subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    CheckFailed = 1,
    InvalidConfig = 2,
}

struct Outcome {
    params: Value,
    hash: String,
    outputs: Vec<PathBuf>,
    failures: Vec<String>,
}

fn out_dir(cli_out: &Path) -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| cli_out.to_path_buf())
}

/// Config problems map to exit code 2.
fn config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParams(_) | Error::Unsupported(_) | Error::Json(_) | Error::Format(_) | Error::InvalidGrid(_)
    )
}

fn read_config<D: serde::de::DeserializeOwned>(path: &Path) -> Result<(D, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Format("config is not UTF-8".into()))?;
    Ok((io::from_json(&text)?, content_hash(&bytes)))
}

fn read_params(path: &Path) -> Result<(ProblemParams<f64>, String)> {
    let (prm, hash): (ProblemParams<f64>, String) = read_config(path)?;
    prm.validate()?;
    Ok((prm, hash))
}

fn read_solver(path: Option<&Path>, seed: Option<u64>) -> Result<(SolverConfig, Option<String>)> {
    let (mut cfg, hash) = match path {
        Some(p) => {
            let (c, h) = read_config::<SolverConfig>(p)?;
            (c, Some(h))
        }
        None => (SolverConfig::default(), None),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok((cfg, hash))
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Status::InvalidConfig as i32 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let start = Instant::now();
    let dir = out_dir(&cli.out);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return Status::CheckFailed as i32;
    }
    let name = match &cli.command {
        Command::Scalar(_) => "scalar",
        Command::System(_) => "system",
        Command::Fiber(_) => "fiber",
        Command::Hfun(_) => "hfun",
        Command::Sweep(_) => "sweep",
        Command::Verify(_) => "verify",
    };
    let result = match &cli.command {
        Command::Scalar(a) => run_scalar(a, &dir),
        Command::System(a) => run_system(a, &dir),
        Command::Fiber(a) => run_fiber(a, &dir),
        Command::Hfun(a) => run_hfun(a, &dir),
        Command::Sweep(a) => run_sweep(a, &dir),
        Command::Verify(a) => run_verify(a, &dir),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return if config_error(&e) { Status::InvalidConfig } else { Status::CheckFailed } as i32;
        }
    };
    let passed = outcome.failures.is_empty();
    let record_path = dir.join(format!("{name}_run.json"));
    let mut outputs: Vec<String> = outcome.outputs.iter().map(|p| p.display().to_string()).collect();
    outputs.push(record_path.display().to_string());
    let record = RunRecord {
        subcommand: name.to_string(),
        params: outcome.params,
        config_hash: outcome.hash,
        outputs,
        wall_time_s: start.elapsed().as_secs_f64(),
        passed,
        failures: outcome.failures,
    };
    match io::write_json(&record_path, &record).and_then(|_| io::to_json(&record)) {
        Ok(text) => println!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            return Status::CheckFailed as i32;
        }
    }
    if passed {
        Status::Pass as i32
    } else {
        Status::CheckFailed as i32
    }
}

fn scalar_config(a: &ScalarArgs) -> Result<(ScalarConfig, String)> {
    match &a.config {
        Some(path) => read_config(path),
        None => {
            let (dim, p) = match (a.dim, a.p) {
                (Some(d), Some(p)) => (d, p),
                _ => return Err(Error::InvalidParams("scalar needs --N and --p, or --config".into())),
            };
            let cfg = ScalarConfig { dim, p, mu: a.mu, a: a.a };
            let hash = content_hash(serde_json::to_string(&cfg)?.as_bytes());
            Ok((cfg, hash))
        }
    }
}

fn run_scalar(a: &ScalarArgs, dir: &Path) -> Result<Outcome> {
    let (cfg, hash) = scalar_config(a)?;
    if cfg.dim < 3 {
        return Err(Error::InvalidParams(format!("N must be at least 3, got {}", cfg.dim)));
    }
    if !(cfg.mu > 0.0 && cfg.a > 0.0) {
        return Err(Error::InvalidParams("mu and a must be positive".into()));
    }
    let crit = crate::params::two_star::<f64>(cfg.dim);
    let at_critical = crate::params::cmp_exponent(cfg.p, crit).is_eq();
    if !(cfg.p > 2.0) || crate::params::cmp_exponent(cfg.p, crit).is_gt() {
        return Err(Error::InvalidParams(format!("p must lie in (2, 2*] with 2* = {crit}")));
    }
    let json_path = dir.join("scalar.json");
    let mut outputs = vec![json_path.clone()];
    let out = if at_critical {
        let sd = SobolevData::<f64>::new(cfg.dim);
        ScalarOutput {
            dim: cfg.dim,
            p: cfg.p,
            mu: cfg.mu,
            a: cfg.a,
            lambda: None,
            energy: None,
            level: sd.critical_level(cfg.mu),
            c_np: sd.gn_constant(),
            w0: None,
            w_mass: None,
            pohozaev_defect: None,
            sobolev: Some(sd.s),
        }
    } else {
        let grid = RadialGrid::default_for(cfg.dim)?;
        let gs = solve_unit_scalar(cfg.dim, cfg.p, &grid)?;
        let sol = normalized_scalar(&gs, cfg.mu, cfg.a)?;
        let g = crate::params::gamma(cfg.dim, cfg.p);
        let profile = dir.join("scalar_profile.csv");
        io::write_field_csv(&profile, &sol.u)?;
        outputs.push(profile);
        ScalarOutput {
            dim: cfg.dim,
            p: cfg.p,
            mu: cfg.mu,
            a: cfg.a,
            lambda: Some(sol.lambda),
            energy: Some(sol.energy),
            level: scalar_level(&gs, cfg.mu, cfg.a),
            c_np: gs.c_np,
            w0: Some(gs.w_center),
            w_mass: Some(gs.w_mass),
            pohozaev_defect: Some((gs.w_kinetic - g * gs.w_lp) / gs.w_kinetic),
            sobolev: None,
        }
    };
    io::write_json(&json_path, &out)?;
    let mut failures = Vec::new();
    if let Some(d) = out.pohozaev_defect {
        if d.abs() >= 1e-4 {
            failures.push(format!("pohozaev defect {d:e}"));
        }
    }
    Ok(Outcome { params: serde_json::to_value(cfg)?, hash, outputs, failures })
}

fn run_system(a: &SystemArgs, dir: &Path) -> Result<Outcome> {
    let (prm, hash) = read_params(&a.config)?;
    let (cfg, _) = read_solver(a.solver.as_deref(), a.seed)?;
    let ctx = Context::new(&prm)?;
    let res = solve_with(&ctx, &cfg)?;
    let json_path = dir.join("system.json");
    let csv_path = dir.join("system_profile.csv");
    io::write_pair_csv(&csv_path, &res.pair)?;
    io::write_json(&json_path, &res.summary)?;
    let mut failures: Vec<String> = res.summary.checks.failures().iter().map(|s| s.to_string()).collect();
    if !res.summary.converged {
        failures.push(format!("not converged (residual {:e})", res.summary.gradient_residual));
    }
    Ok(Outcome { params: serde_json::to_value(prm)?, hash, outputs: vec![json_path, csv_path], failures })
}

fn default_pair(prm: &ProblemParams<f64>) -> Result<StatePair<f64>> {
    let grid = RadialGrid::default_for(prm.dim)?;
    let g = |r: f64| (-r * r / 2.0).exp();
    let u = RadialField::from_fn(grid.clone(), g).normalize_mass(prm.a1)?;
    let v = RadialField::from_fn(grid, g).normalize_mass(prm.a2)?;
    StatePair::new(u, v)
}

fn run_fiber(a: &FiberArgs, dir: &Path) -> Result<Outcome> {
    let (prm, hash) = read_params(&a.config)?;
    if !(a.s_min < a.s_max) {
        return Err(Error::InvalidParams("s_min must be below s_max".into()));
    }
    let pair = match &a.profile {
        Some(p) => io::read_pair_csv::<f64>(p, prm.dim)?,
        None => default_pair(&prm)?,
    };
    let rows = fiber_profile(&pair, &prm, (a.s_min, a.s_max), a.samples)?;
    let csv_path = dir.join("fiber.csv");
    io::write_csv(&csv_path, &["s", "phi", "dphi"], rows.iter().map(|&(s, f, d)| vec![s, f, d]))?;
    let report: Result<FiberReport<f64>> = FiberMap::new(&pair, &prm)?.report();
    let json_path = dir.join("fiber.json");
    let mut failures = Vec::new();
    match &report {
        Ok(r) => {
            io::write_json(&json_path, r)?;
            if r.classification == FiberClass::Degenerate {
                failures.push("degenerate fiber".to_string());
            }
        }
        Err(e) => {
            io::write_json(&json_path, &serde_json::json!({ "error": e.to_string() }))?;
            failures.push(e.to_string());
        }
    }
    Ok(Outcome { params: serde_json::to_value(prm)?, hash, outputs: vec![csv_path, json_path], failures })
}

fn run_hfun(a: &HfunArgs, dir: &Path) -> Result<Outcome> {
    let (prm, hash) = read_params(&a.config)?;
    if prm.regime_data()?.regime != Regime::MixedSubSuper {
        return Err(Error::Unsupported("h is defined for 2 < p < pbar < q <= 2* only".into()));
    }
    let ctx = Context::new(&prm)?;
    let (coeffs, report) = ctx.landscape.clone().expect("mixed regime has a landscape");
    let far = report
        .zeros
        .iter()
        .chain(report.critical_points.iter().map(|c| &c.t))
        .fold(1.0_f64, |m, &t| m.max(t));
    let t_max = a.t_max.unwrap_or(2.0 * far);
    if !(t_max > 0.0) {
        return Err(Error::InvalidParams("t_max must be positive".into()));
    }
    let n = a.samples.max(2);
    let rows = (1..=n).map(|i| {
        let t = t_max * i as f64 / n as f64;
        vec![t, coeffs.eval(t), coeffs.derivative(t)]
    });
    let csv_path = dir.join("hfun.csv");
    io::write_csv(&csv_path, &["t", "h", "dh"], rows)?;
    let out = HfunOutput {
        gn: ctx.gn.expect("mixed regime"),
        thresholds: ctx.thresholds.expect("mixed regime"),
        coeffs,
        structure_ok: report.structure_ok,
        r0: ctx.r0(),
        r1: ctx.r1(),
        report,
    };
    let json_path = dir.join("hfun.json");
    io::write_json(&json_path, &out)?;
    let failures = if out.structure_ok {
        Vec::new()
    } else {
        vec!["h lacks the two-well structure".to_string()]
    };
    Ok(Outcome { params: serde_json::to_value(prm)?, hash, outputs: vec![csv_path, json_path], failures })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn run_sweep(a: &SweepArgs, dir: &Path) -> Result<Outcome> {
    let (prm, hash) = read_params(&a.config)?;
    let (cfg, _) = read_solver(a.solver.as_deref(), a.seed)?;
    let axis = match a.axis {
        AxisArg::Beta => Axis::Beta,
        AxisArg::MassScale => Axis::MassScale,
    };
    if a.values.iter().any(|v| !v.is_finite() || *v < 0.0 || (axis == Axis::MassScale && *v == 0.0)) {
        return Err(Error::InvalidParams("sweep values must be finite and admissible".into()));
    }
    let table = sweep(&prm, axis, &a.values, &cfg);
    let header = [
        "value",
        "energy",
        "lambda1",
        "lambda2",
        "pohozaev_residual",
        "gradient_residual",
        "m_a1_0",
        "m_0_a2",
        "checks_pass",
        "error",
    ];
    let rows = table.rows.iter().map(|r| {
        vec![
            r.value.to_string(),
            opt(r.energy),
            opt(r.lambda1),
            opt(r.lambda2),
            opt(r.pohozaev_residual),
            opt(r.gradient_residual),
            opt(r.m_a1_0),
            opt(r.m_0_a2),
            r.checks_pass.to_string(),
            r.error.clone().unwrap_or_default().replace(',', ";"),
        ]
    });
    let csv_path = dir.join("sweep.csv");
    io::write_csv(&csv_path, &header, rows)?;
    let json_path = dir.join("sweep.json");
    io::write_json(&json_path, &table)?;
    let mut failures: Vec<String> = table
        .rows
        .iter()
        .filter(|r| !r.checks_pass)
        .map(|r| format!("value {}: {}", r.value, r.error.clone().unwrap_or_else(|| "checks failed".into())))
        .collect();
    if table.non_increasing == Some(false) {
        failures.push("energy increases along beta".into());
    }
    Ok(Outcome { params: serde_json::to_value(prm)?, hash, outputs: vec![csv_path, json_path], failures })
}

fn run_verify(a: &VerifyArgs, dir: &Path) -> Result<Outcome> {
    let bytes = std::fs::read(&a.result)?;
    let stored: ResultSummary<f64> = io::from_json(std::str::from_utf8(&bytes).map_err(|_| Error::Format("result is not UTF-8".into()))?)?;
    let prm = stored.params;
    prm.validate()?;
    let pair = io::read_pair_csv::<f64>(&a.profile, prm.dim)?;
    let ctx = Context::new(&prm)?;
    let (checks, recomputed) = evaluate_pair(&pair, &prm, ctx.marginals, a.tol_p)?;
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300);
    let stored_values = close(stored.energy, recomputed.energy)
        && close(stored.lambda1, recomputed.lambda1)
        && close(stored.lambda2, recomputed.lambda2);
    let mut failures: Vec<String> = checks.failures().iter().map(|s| s.to_string()).collect();
    if !stored_values {
        failures.push("stored_values".into());
    }
    let report = VerifyReport { checks, stored_values, recomputed, passed: failures.is_empty() };
    let json_path = dir.join("verify.json");
    io::write_json(&json_path, &report)?;
    Ok(Outcome {
        params: serde_json::to_value(prm)?,
        hash: content_hash(&bytes),
        outputs: vec![json_path],
        failures,
    })
}
