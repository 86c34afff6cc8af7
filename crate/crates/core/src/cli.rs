//! Command implementations behind the `sparse-irls` binary.
//!
//! ```text
//! sparse-irls generate --N 200 --m 80 --k 10 --seed 0 --out inst.json
//! sparse-irls solve --instance inst.json --solver cg-irls-m --trace-out trace.jsonl
//! sparse-irls bench --setting desk-A --trials 5 --solvers iht,cg-irls-m
//! sparse-irls phase --N 100 --grid 4x4 --trials 2
//! ```
//!
//! Every command also reads a flat TOML file (`--config`); flags win over
//! file values, which win over the module defaults. Output files default to
//! the directory named by `SPARSE_IRLS_OUT_DIR`, else the working directory.
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{
    run_phase_transition, run_speed_test, uniform_axis, PhaseConfig, Reference, SettingSpec, SpeedTestConfig,
};
use crate::error::Error;
use crate::functionals::{critical_point_residual_tau, lasso_optimality_residual_with_zero_tol, objective_f};
use crate::linalg::relative_error;
use crate::problems::{generate_instance, generate_setting, InstanceManifest, Msnr, ProblemInstance};
use crate::solvers::{ProblemShape, Solver, SolverKind, SolverParams};

pub const OUT_DIR_ENV: &str = "SPARSE_IRLS_OUT_DIR";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "sparse-irls", version, about = "Sparse recovery with CG-accelerated IRLS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write an instance manifest.
    Generate(GenerateArgs),
    /// Run one solver on an instance and write its trace.
    Solve(SolveArgs),
    /// Timed comparison of several solvers over seeded trials.
    Bench(BenchArgs),
    /// Recovery-rate grid over (m/N, k/m).
    Phase(PhaseArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct DimArgs {
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Named setting (A-E, desk-A..desk-C) instead of N, m, k.
    #[arg(long)]
    pub setting: Option<String>,
    /// Measurement SNR; `inf` for noiseless data.
    #[arg(long)]
    pub msnr: Option<Msnr>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub tau: Option<f64>,
    /// Sparsity index of the smoothing rule (and the IHT sparsity).
    #[arg(long = "K")]
    pub big_k: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub maxiter_outer: Option<usize>,
    #[arg(long)]
    pub maxiter_cg: Option<usize>,
    #[arg(long)]
    pub residual_floor: Option<f64>,
    #[arg(long)]
    pub start_iht: Option<usize>,
    /// IHT / FISTA iteration cap.
    #[arg(long)]
    pub maxiter: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    /// Manifest path; defaults to `instance.json` in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Store x*, e and y in the manifest instead of only the seed.
    #[arg(long)]
    pub embed: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Instance manifest; otherwise the instance is generated from the
    /// dimension flags.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub dims: DimArgs,
    #[arg(long)]
    pub solver: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Trace path; `.csv` selects the CSV layout, anything else JSON lines.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated solver names.
    #[arg(long)]
    pub solvers: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// `planted` or `lasso`.
    #[arg(long)]
    pub reference: Option<String>,
    /// Run the equality solvers with their defaults instead of the
    /// high-accuracy profile.
    #[arg(long)]
    pub no_speed_profile: bool,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// `ROWSxCOLS`: steps along m/N and k/m.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub solvers: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub irls_cap: Option<usize>,
    #[arg(long)]
    pub iht_cap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The flat key-value run configuration. Every key is optional; a command
/// uses the keys that concern it and echoes the whole document into its
/// outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setting: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msnr: Option<Msnr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solvers: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_profile: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irls_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iht_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub big_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maxiter_outer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maxiter_cg: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_iht: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maxiter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> CliResult<Self> {
        toml::from_str(s).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
                Self::from_toml_str(&text)
            }
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    fn apply_dims(&mut self, d: &DimArgs) {
        over(&mut self.n, d.n);
        over(&mut self.m, d.m);
        over(&mut self.k, d.k);
        over(&mut self.setting, d.setting.clone());
        over(&mut self.msnr, d.msnr);
        over(&mut self.seed, d.seed);
    }

    fn apply_params(&mut self, p: &ParamArgs) {
        over(&mut self.tau, p.tau);
        over(&mut self.big_k, p.big_k);
        over(&mut self.beta, p.beta);
        over(&mut self.eps_min, p.eps_min);
        over(&mut self.lambda, p.lambda);
        over(&mut self.phi, p.phi);
        over(&mut self.alpha, p.alpha);
        over(&mut self.maxiter_outer, p.maxiter_outer);
        over(&mut self.maxiter_cg, p.maxiter_cg);
        over(&mut self.residual_floor, p.residual_floor);
        over(&mut self.start_iht, p.start_iht);
        over(&mut self.maxiter, p.maxiter);
        over(&mut self.stop_tol, p.stop_tol);
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            tau: self.tau,
            k: self.big_k,
            beta: self.beta,
            eps_min: self.eps_min,
            lambda: self.lambda,
            phi: self.phi,
            alpha: self.alpha,
            maxiter_outer: self.maxiter_outer,
            maxiter_cg: self.maxiter_cg,
            residual_floor: self.residual_floor,
            start_iht: self.start_iht,
            maxiter: self.maxiter,
            stop_tol: self.stop_tol,
        }
    }

    fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config serializes")
    }
}

fn over<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

/// `SPARSE_IRLS_OUT_DIR`, else the working directory.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
    }
    let f = File::create(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn instance_from_config(cfg: &RunConfig) -> CliResult<ProblemInstance> {
    let msnr = cfg.msnr.unwrap_or(Msnr::Infinite);
    let seed = cfg.seed.unwrap_or(0);
    if let Some(label) = &cfg.setting {
        return Ok(generate_setting(label, msnr, seed)?);
    }
    match (cfg.n, cfg.m, cfg.k) {
        (Some(n), Some(m), Some(k)) => Ok(generate_instance(n, m, k, msnr, seed)?),
        _ => Err(CliError::usage("need --setting or all of --N, --m, --k")),
    }
}

pub fn run_generate(args: &GenerateArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    cfg.apply_dims(&args.dims);
    over(&mut cfg.out, args.out.clone());
    if args.embed {
        cfg.embed = Some(true);
    }
    let inst = instance_from_config(&cfg)?;
    let path = cfg.out.clone().unwrap_or_else(|| default_out_dir().join("instance.json"));
    let mut w = create(&path)?;
    inst.manifest(cfg.embed.unwrap_or(false)).write_json(&mut w)?;
    writeln!(w)?;
    w.flush()?;
    writeln!(out, "wrote {} (N={} m={} k={} msnr={} seed={})", path.display(), inst.n(), inst.m(), inst.k, inst.msnr, inst.seed)?;
    Ok(())
}

/// Everything `solve` reports besides the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub solver: SolverKind,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub stop: crate::trace::OuterStop,
    pub rel_error: Option<f64>,
    pub time_s: f64,
    pub setup_s: f64,
    /// `F_{tau,lambda}` for the regularized solvers.
    pub objective: Option<f64>,
    /// LASSO optimality residual (tau = 1), entries below `1e-6` counted as zero.
    pub lasso_residual: Option<f64>,
    /// Stationarity residual of `F_{tau,lambda}` (tau < 1, upsilon = 2).
    pub critical_point_residual: Option<f64>,
}

impl SolveSummary {
    pub fn line(&self) -> String {
        let mut s = format!(
            "solver={} iterations={} inner={} stop={} time_s={:.6} setup_s={:.6}",
            self.solver,
            self.iterations,
            self.inner_iterations,
            serde_json::to_value(self.stop).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            self.time_s,
            self.setup_s
        );
        let opt = |name: &str, v: Option<f64>| v.map(|v| format!(" {name}={v:e}")).unwrap_or_default();
        s += &opt("rel_err", self.rel_error);
        s += &opt("objective", self.objective);
        s += &opt("lasso_residual", self.lasso_residual);
        s += &opt("critical_point_residual", self.critical_point_residual);
        s
    }
}

pub fn run_solve(args: &SolveArgs, out: &mut dyn Write) -> CliResult<SolveSummary> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    cfg.apply_dims(&args.dims);
    cfg.apply_params(&args.params);
    over(&mut cfg.instance, args.instance.clone());
    over(&mut cfg.solver, args.solver.clone());
    over(&mut cfg.trace_out, args.trace_out.clone());

    let kind: SolverKind = cfg.solver.as_deref().ok_or_else(|| CliError::usage("--solver is required"))?.parse()?;
    let inst = match &cfg.instance {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            InstanceManifest::read_json(std::io::BufReader::new(f))?.instance(p.parent())?
        }
        None => instance_from_config(&cfg)?,
    };
    let solver = Solver::new(kind, &ProblemShape::of(&inst), &cfg.solver_params())?;
    let (x, trace) = solver.solve(&inst.operator, &inst.y, Some(&inst.x_star))?;

    let mut summary = SolveSummary {
        solver: kind,
        iterations: trace.iterations(),
        inner_iterations: trace.total_inner(),
        stop: trace.stop,
        rel_error: Some(relative_error(&x, &inst.x_star)),
        time_s: trace.records.last().map_or(0.0, |r| r.elapsed_s),
        setup_s: trace.setup_seconds,
        objective: None,
        lasso_residual: None,
        critical_point_residual: None,
    };
    if let Some((lambda, tau)) = solver.objective_params() {
        summary.objective = Some(objective_f(&x, &inst.operator, &inst.y, lambda, tau)?);
        if tau < 1.0 {
            summary.critical_point_residual = Some(critical_point_residual_tau(&x, &inst.operator, &inst.y, lambda, tau, 2.0)?);
        } else {
            summary.lasso_residual = Some(lasso_optimality_residual_with_zero_tol(&x, &inst.operator, &inst.y, lambda, 1e-6)?);
        }
    }

    let path = cfg.trace_out.clone().unwrap_or_else(|| default_out_dir().join("trace.jsonl"));
    let echo = serde_json::json!({ "run": cfg.echo(), "solver": solver.config_json(), "instance": inst.manifest(false) });
    let mut w = create(&path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        trace.write_csv(&mut w, &echo)?;
    } else {
        trace.write_jsonl(&mut w, &echo)?;
    }
    w.flush()?;
    writeln!(out, "{}", summary.line())?;
    Ok(summary)
}

fn solver_list(s: Option<&str>, default: &[SolverKind]) -> CliResult<Vec<SolverKind>> {
    match s {
        None => Ok(default.to_vec()),
        Some(s) => {
            let v = SolverKind::parse_list(s)?;
            if v.is_empty() {
                return Err(CliError::usage("empty solver list"));
            }
            Ok(v)
        }
    }
}

fn two_files(dir: &Path, csv_name: &str, json_name: &str) -> (PathBuf, PathBuf) {
    (dir.join(csv_name), dir.join(json_name))
}

pub fn run_bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    cfg.apply_dims(&args.dims);
    cfg.apply_params(&args.params);
    over(&mut cfg.trials, args.trials);
    over(&mut cfg.solvers, args.solvers.clone());
    over(&mut cfg.threshold, args.threshold);
    over(&mut cfg.jobs, args.jobs);
    over(&mut cfg.out_dir, args.out_dir.clone());
    if let Some(r) = &args.reference {
        cfg.reference = Some(serde_json::from_value(serde_json::Value::String(r.clone())).map_err(|_| {
            CliError::usage(format!("unknown reference '{r}', expected planted or lasso"))
        })?);
    }
    if args.no_speed_profile {
        cfg.speed_profile = Some(false);
    }

    let setting = match (&cfg.setting, cfg.n, cfg.m, cfg.k) {
        (Some(label), ..) => SettingSpec::Named(label.clone()),
        (None, Some(n), Some(m), Some(k)) => SettingSpec::Custom { n, m, k },
        _ => return Err(CliError::usage("need --setting or all of --N, --m, --k")),
    };
    let solvers = solver_list(cfg.solvers.as_deref(), &[SolverKind::Iht, SolverKind::CgIrlsM])?;
    let mut sc = SpeedTestConfig::new(solvers, setting, cfg.trials.unwrap_or(10));
    over_val(&mut sc.msnr, cfg.msnr);
    over_val(&mut sc.success_threshold, cfg.threshold);
    over_val(&mut sc.base_seed, cfg.seed);
    over_val(&mut sc.jobs, cfg.jobs);
    over_val(&mut sc.reference, cfg.reference);
    over_val(&mut sc.speed_profile, cfg.speed_profile);
    sc.params = cfg.solver_params();

    let report = run_speed_test(&sc)?;
    let dir = cfg.out_dir.clone().unwrap_or_else(default_out_dir);
    let (csv_path, json_path) = two_files(&dir, "speed.csv", "speed.json");
    let mut w = create(&csv_path)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&json_path)?;
    serde_json::to_writer_pretty(&mut w, &serde_json::json!({ "run": cfg.echo(), "report": report }))
        .map_err(Error::from)?;
    writeln!(w)?;
    w.flush()?;
    write!(out, "{}", report.table())?;
    writeln!(out, "trials where all succeeded: {} / {}  (jobs = {})", report.trials_all_succeeded, sc.trials, sc.jobs)?;
    writeln!(out, "wrote {} and {}", csv_path.display(), json_path.display())?;
    Ok(())
}

fn over_val<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Parses `ROWSxCOLS`.
pub fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("grid '{s}' must look like 8x6"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = a.trim().parse().map_err(|_| bad())?;
    let c: usize = b.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 {
        return Err(bad());
    }
    Ok((r, c))
}

pub fn run_phase(args: &PhaseArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    cfg.apply_params(&args.params);
    over(&mut cfg.n, args.n);
    over(&mut cfg.grid, args.grid.clone());
    over(&mut cfg.trials, args.trials);
    over(&mut cfg.solvers, args.solvers.clone());
    over(&mut cfg.threshold, args.threshold);
    over(&mut cfg.irls_cap, args.irls_cap);
    over(&mut cfg.iht_cap, args.iht_cap);
    over(&mut cfg.seed, args.seed);
    over(&mut cfg.jobs, args.jobs);
    over(&mut cfg.out_dir, args.out_dir.clone());

    let n = cfg.n.ok_or_else(|| CliError::usage("--N is required"))?;
    let (rows, cols) = parse_grid(cfg.grid.as_deref().unwrap_or("8x6"))?;
    let mut pc = PhaseConfig::new(n, rows, cols, cfg.trials.unwrap_or(10));
    pc.m_over_n = uniform_axis(rows);
    pc.k_over_m = uniform_axis(cols);
    pc.solvers = solver_list(cfg.solvers.as_deref(), &pc.solvers)?;
    over_val(&mut pc.success_threshold, cfg.threshold);
    over_val(&mut pc.irls_cap, cfg.irls_cap);
    over_val(&mut pc.iht_cap, cfg.iht_cap);
    over_val(&mut pc.base_seed, cfg.seed);
    over_val(&mut pc.jobs, cfg.jobs);
    pc.params = cfg.solver_params();

    let report = run_phase_transition(&pc)?;
    let dir = cfg.out_dir.clone().unwrap_or_else(default_out_dir);
    for &s in &pc.solvers {
        let path = dir.join(format!("phase_{}.csv", s.name().replace('+', "_")));
        let mut w = create(&path)?;
        report.write_csv(s, &mut w)?;
        w.flush()?;
        writeln!(out, "wrote {}", path.display())?;
    }
    let json_path = dir.join("phase.json");
    let mut w = create(&json_path)?;
    serde_json::to_writer_pretty(&mut w, &serde_json::json!({ "run": cfg.echo(), "report": report }))
        .map_err(Error::from)?;
    writeln!(w)?;
    w.flush()?;
    write!(out, "{}", report.table())?;
    writeln!(out, "wrote {}", json_path.display())?;
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => run_generate(a, out),
        Command::Solve(a) => run_solve(a, out).map(|_| ()),
        Command::Bench(a) => run_bench(a, out),
        Command::Phase(a) => run_phase(a, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
