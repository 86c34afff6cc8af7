//! Experiment harness: timed solver comparisons and phase-transition grids.
//!
//! Trials are independent and may run on a worker pool; results are always
//! gathered in trial order and trial `i` uses seed `base_seed + i`, so every
//! non-timing column is reproducible.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fista, FistaConfig};
use crate::error::{Error, Result};
use crate::linalg::relative_error;
use crate::problems::{generate_instance, preset, InstanceManifest, Msnr, ProblemInstance};
use crate::solvers::{default_big_k, Family, ProblemShape, Solver, SolverKind, SolverParams};
use crate::trace::IterateTrace;

/// Problem dimensions for a sweep: a named setting or explicit sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SettingSpec {
    Named(String),
    Custom {
        #[serde(rename = "N")]
        n: usize,
        m: usize,
        k: usize,
    },
}

impl SettingSpec {
    fn instance(&self, msnr: Msnr, seed: u64) -> Result<ProblemInstance> {
        match self {
            SettingSpec::Named(label) => crate::problems::generate_setting(label, msnr, seed),
            SettingSpec::Custom { n, m, k } => generate_instance(*n, *m, *k, msnr, seed),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SettingSpec::Named(label) => preset(label).map(|_| ()),
            SettingSpec::Custom { n, m, k } if k <= m && m <= n && *m > 0 => Ok(()),
            SettingSpec::Custom { n, m, k } => {
                Err(Error::Dimension(format!("need k <= m <= N and m >= 1, got N = {n}, m = {m}, k = {k}")))
            }
        }
    }
}

/// What relative errors are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// The planted signal `x*`.
    #[default]
    Planted,
    /// A long FISTA run on the LASSO problem of each trial, for comparing
    /// regularized solvers on noisy data.
    Lasso,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedTestConfig {
    pub solvers: Vec<SolverKind>,
    pub setting: SettingSpec,
    pub trials: usize,
    pub msnr: Msnr,
    pub success_threshold: f64,
    pub base_seed: u64,
    /// Worker threads; 1 keeps timings free of contention.
    pub jobs: usize,
    #[serde(default)]
    pub reference: Reference,
    /// Apply [`speed_profile`] to the equality solvers.
    pub speed_profile: bool,
    /// User overrides, applied after the profile.
    #[serde(default)]
    pub params: SolverParams,
}

impl SpeedTestConfig {
    pub fn new(solvers: Vec<SolverKind>, setting: SettingSpec, trials: usize) -> Self {
        Self {
            solvers,
            setting,
            trials,
            msnr: Msnr::Infinite,
            success_threshold: 1e-13,
            base_seed: 0,
            jobs: 1,
            reference: Reference::Planted,
            speed_profile: true,
            params: SolverParams::default(),
        }
    }
}

/// Equality-solver settings able to reach a `1e-13` relative error: under
/// the defaults the smoothing floor `1e-9 / N` and the residual floor `1e-12`
/// saturate the error near `5e-12`.
pub fn speed_profile(n: usize) -> SolverParams {
    SolverParams { beta: Some(0.2), eps_min: Some(1e-13 / n as f64), residual_floor: Some(1e-13), ..Default::default() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub solver: SolverKind,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    /// Solver time to the first iterate below the threshold.
    pub time_to_success: Option<f64>,
    /// Absent when the solver failed.
    pub final_rel_error: Option<f64>,
    pub iterations: usize,
    pub inner_iterations: usize,
    /// Spectral estimates and other one-off work, not part of the timing.
    pub setup_seconds: f64,
    /// Set when the solver failed with an error.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub solver: SolverKind,
    pub successes: usize,
    pub failure_rate: f64,
    /// Mean time over the trials in which every solver succeeded.
    pub mean_time_all_succeeded: Option<f64>,
    /// Trials (among those) in which this solver was fastest.
    pub fastest: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub version: String,
    pub config: SpeedTestConfig,
    pub trials_all_succeeded: usize,
    pub summaries: Vec<SolverSummary>,
    pub results: Vec<TrialResult>,
}

/// Success and timing of one trace against `threshold`.
fn judge(x: &[f64], trace: &IterateTrace, reference: &[f64], threshold: f64) -> (bool, Option<f64>, f64) {
    let final_err = relative_error(x, reference);
    match trace.first_below(threshold) {
        Some(r) => (true, Some(r.elapsed_s), final_err),
        // Solvers that return before recording an iterate (y = 0).
        None if trace.records.is_empty() && final_err <= threshold => (true, Some(0.0), final_err),
        None => (false, None, final_err),
    }
}

fn run_one(kind: SolverKind, inst: &ProblemInstance, params: &SolverParams, reference: &[f64], threshold: f64, trial: usize) -> TrialResult {
    let base = TrialResult {
        solver: kind,
        trial,
        seed: inst.seed,
        success: false,
        time_to_success: None,
        final_rel_error: None,
        iterations: 0,
        inner_iterations: 0,
        setup_seconds: 0.0,
        error: None,
    };
    let outcome = Solver::new(kind, &ProblemShape::of(inst), params)
        .and_then(|s| s.solve(&inst.operator, &inst.y, Some(reference)));
    match outcome {
        Ok((x, trace)) => {
            let (success, time_to_success, final_rel_error) = judge(&x, &trace, reference, threshold);
            TrialResult {
                success,
                time_to_success,
                final_rel_error: Some(final_rel_error),
                iterations: trace.iterations(),
                inner_iterations: trace.total_inner(),
                setup_seconds: trace.setup_seconds,
                ..base
            }
        }
        Err(e) => TrialResult { error: Some(e.to_string()), ..base },
    }
}

fn lasso_reference(inst: &ProblemInstance) -> Result<Vec<f64>> {
    let cfg = FistaConfig { maxiter: 200_000, ..FistaConfig::new(inst.default_lambda()) };
    Ok(fista(&inst.operator, &inst.y, &cfg, None)?.0)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

fn params_for(kind: SolverKind, cfg: &SpeedTestConfig, n: usize) -> SolverParams {
    if cfg.speed_profile && kind.family() == Family::Equality {
        cfg.params.clone().or(&speed_profile(n))
    } else {
        cfg.params.clone()
    }
}

pub fn run_speed_test(cfg: &SpeedTestConfig) -> Result<SpeedReport> {
    if cfg.solvers.is_empty() {
        return Err(Error::InvalidParameter("speed test needs at least one solver".into()));
    }
    if !(cfg.success_threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("success_threshold = {} must be positive", cfg.success_threshold)));
    }
    cfg.setting.validate()?;
    let per_trial: Vec<Vec<TrialResult>> = pool(cfg.jobs)?.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = cfg.base_seed + t as u64;
                let inst = match cfg.setting.instance(cfg.msnr, seed) {
                    Ok(i) => i,
                    Err(e) => return failed_trial(cfg, t, seed, &e),
                };
                let reference = match cfg.reference {
                    Reference::Planted => Ok(inst.x_star.clone()),
                    Reference::Lasso => lasso_reference(&inst),
                };
                let reference = match reference {
                    Ok(r) => r,
                    Err(e) => return failed_trial(cfg, t, seed, &e),
                };
                cfg.solvers
                    .iter()
                    .map(|&k| run_one(k, &inst, &params_for(k, cfg, inst.n()), &reference, cfg.success_threshold, t))
                    .collect()
            })
            .collect()
    });
    Ok(summarize(cfg, per_trial))
}

fn failed_trial(cfg: &SpeedTestConfig, trial: usize, seed: u64, e: &Error) -> Vec<TrialResult> {
    cfg.solvers
        .iter()
        .map(|&solver| TrialResult {
            solver,
            trial,
            seed,
            success: false,
            time_to_success: None,
            final_rel_error: None,
            iterations: 0,
            inner_iterations: 0,
            setup_seconds: 0.0,
            error: Some(e.to_string()),
        })
        .collect()
}

fn summarize(cfg: &SpeedTestConfig, per_trial: Vec<Vec<TrialResult>>) -> SpeedReport {
    let ns = cfg.solvers.len();
    let mut successes = vec![0usize; ns];
    let mut time_sum = vec![0.0; ns];
    let mut fastest = vec![0usize; ns];
    let mut all_ok = 0;
    for row in &per_trial {
        for (i, r) in row.iter().enumerate() {
            successes[i] += r.success as usize;
        }
        if row.iter().all(|r| r.success) {
            all_ok += 1;
            let times: Vec<f64> = row.iter().map(|r| r.time_to_success.unwrap_or(f64::INFINITY)).collect();
            for (i, t) in times.iter().enumerate() {
                time_sum[i] += t;
            }
            let best = (0..ns).min_by(|&a, &b| times[a].total_cmp(&times[b])).unwrap_or(0);
            fastest[best] += 1;
        }
    }
    let trials = per_trial.len();
    let summaries = (0..ns)
        .map(|i| SolverSummary {
            solver: cfg.solvers[i],
            successes: successes[i],
            failure_rate: if trials == 0 { 0.0 } else { 1.0 - successes[i] as f64 / trials as f64 },
            mean_time_all_succeeded: (all_ok > 0).then(|| time_sum[i] / all_ok as f64),
            fastest: fastest[i],
        })
        .collect();
    SpeedReport {
        version: crate::VERSION.to_string(),
        config: cfg.clone(),
        trials_all_succeeded: all_ok,
        summaries,
        results: per_trial.into_iter().flatten().collect(),
    }
}

/// Columns of the speed CSV.
pub const SPEED_CSV_HEADER: [&str; 5] = ["solver", "trial", "success", "time_s", "rel_err"];

impl SpeedReport {
    /// CSV with one row per solver and trial; the config sits in a leading
    /// `#` line.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# {}", serde_json::json!({ "version": self.version, "config": self.config }))?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(SPEED_CSV_HEADER)?;
        for r in &self.results {
            c.write_record([
                r.solver.to_string(),
                r.trial.to_string(),
                r.success.to_string(),
                r.time_to_success.map_or(String::new(), |t| t.to_string()),
                r.final_rel_error.map_or(String::new(), |e| e.to_string()),
            ])?;
        }
        c.flush()?;
        Ok(())
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json(r: impl std::io::Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    /// Aligned text table of the summaries.
    pub fn table(&self) -> String {
        let mut s = format!("{:<18} {:>9} {:>12} {:>14} {:>8}\n", "solver", "successes", "failure_rate", "mean_time_s", "fastest");
        for r in &self.summaries {
            let t = r.mean_time_all_succeeded.map_or("-".to_string(), |t| format!("{t:.6}"));
            s += &format!("{:<18} {:>9} {:>12.3} {:>14} {:>8}\n", r.solver.name(), r.successes, r.failure_rate, t, r.fastest);
        }
        s
    }
}

/// One parsed row of a speed CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedRow {
    pub solver: SolverKind,
    pub trial: usize,
    pub success: bool,
    pub time_s: Option<f64>,
    pub rel_err: Option<f64>,
}

/// Reads a speed CSV back; returns the rows and the embedded config line.
pub fn read_speed_csv(r: impl BufRead) -> Result<(Vec<SpeedRow>, serde_json::Value)> {
    let (meta, body) = split_meta(r)?;
    let rows = csv::Reader::from_reader(body.as_bytes()).deserialize().collect::<std::result::Result<_, _>>()?;
    Ok((rows, meta))
}

fn split_meta(r: impl BufRead) -> Result<(serde_json::Value, String)> {
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| Error::InvalidParameter("empty csv".into()))??;
    let meta = serde_json::from_str(first.strip_prefix('#').unwrap_or(&first).trim())?;
    let rest: Vec<String> = lines.collect::<std::io::Result<_>>()?;
    Ok((meta, rest.join("\n")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    #[serde(rename = "N")]
    pub n: usize,
    /// Undersampling axis, each value in `(0, 1]`.
    pub m_over_n: Vec<f64>,
    /// Sparsity axis, each value in `[0, 1]`.
    pub k_over_m: Vec<f64>,
    pub trials: usize,
    pub solvers: Vec<SolverKind>,
    pub success_threshold: f64,
    /// Outer-iteration cap of the IRLS solvers.
    pub irls_cap: usize,
    /// Iteration cap of IHT and FISTA.
    pub iht_cap: usize,
    pub base_seed: u64,
    pub jobs: usize,
    #[serde(default)]
    pub params: SolverParams,
}

/// `steps` evenly spaced values `i / steps`, `i = 1..=steps`.
pub fn uniform_axis(steps: usize) -> Vec<f64> {
    (1..=steps).map(|i| i as f64 / steps as f64).collect()
}

impl PhaseConfig {
    /// A `rows x cols` grid over `m/N` by `k/m`, comparing CG-IRLS and IHT.
    pub fn new(n: usize, rows: usize, cols: usize, trials: usize) -> Self {
        Self {
            n,
            m_over_n: uniform_axis(rows),
            k_over_m: uniform_axis(cols),
            trials,
            solvers: vec![SolverKind::CgIrls, SolverKind::Iht],
            success_threshold: 1e-4,
            irls_cap: 20,
            iht_cap: 500,
            base_seed: 0,
            jobs: 1,
            params: SolverParams::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.solvers.is_empty() {
            return bad("phase transition needs at least one solver".into());
        }
        if self.m_over_n.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return bad("m/N grid values must lie in (0, 1]".into());
        }
        if self.k_over_m.iter().any(|&r| !(r >= 0.0 && r <= 1.0)) {
            return bad("k/m grid values must lie in [0, 1]".into());
        }
        if self.cell_dims().iter().any(|&(m, _)| m == 0) {
            return bad(format!("N = {} is too small for the m/N grid", self.n));
        }
        Ok(())
    }

    /// `(m, k)` of every cell, row-major over `m_over_n`.
    pub fn cell_dims(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &r in &self.m_over_n {
            let m = ((r * self.n as f64).round() as usize).min(self.n);
            for &s in &self.k_over_m {
                out.push((m, ((s * m as f64).round() as usize).min(m)));
            }
        }
        out
    }

    fn params_for(&self, kind: SolverKind) -> SolverParams {
        let cap = match kind.family() {
            Family::Equality | Family::Lagrangian => SolverParams { maxiter_outer: Some(self.irls_cap), ..Default::default() },
            Family::Iht | Family::Fista => SolverParams { maxiter: Some(self.iht_cap), ..Default::default() },
        };
        self.params.clone().or(&cap)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub m_over_n: f64,
    pub k_over_m: f64,
    pub m: usize,
    pub k: usize,
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub solver: SolverKind,
    pub m_over_n: Vec<f64>,
    pub k_over_m: Vec<f64>,
    pub trials_per_cell: usize,
    pub success_threshold: f64,
    /// Row-major over `m_over_n`.
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn cell(&self, row: usize, col: usize) -> &PhaseCell {
        &self.cells[row * self.k_over_m.len() + col]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub version: String,
    pub config: PhaseConfig,
    pub grids: Vec<PhaseGrid>,
}

/// Recovery-rate grids; every solver sees the same instances. Cell `c`,
/// trial `t` uses seed `base_seed + c * trials + t`.
pub fn run_phase_transition(cfg: &PhaseConfig) -> Result<PhaseReport> {
    cfg.validate()?;
    let dims = cfg.cell_dims();
    let jobs: Vec<(usize, usize)> = (0..dims.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let params: Vec<SolverParams> = cfg.solvers.iter().map(|&k| cfg.params_for(k)).collect();
    let outcomes: Vec<Vec<bool>> = pool(cfg.jobs)?.install(|| {
        jobs.par_iter()
            .map(|&(c, t)| {
                let (m, k) = dims[c];
                let seed = cfg.base_seed + (c * cfg.trials + t) as u64;
                match generate_instance(cfg.n, m, k, Msnr::Infinite, seed) {
                    Ok(inst) => cfg
                        .solvers
                        .iter()
                        .zip(&params)
                        .map(|(&kind, p)| {
                            // The sparsity is treated as unknown: IHT gets the same
                            // K = ceil(1.1 k) as the IRLS solvers.
                            let p = SolverParams { k: p.k.or(Some(default_big_k(k, cfg.n))), ..p.clone() };
                            run_one(kind, &inst, &p, &inst.x_star, cfg.success_threshold, t).success
                        })
                        .collect(),
                    Err(_) => vec![false; cfg.solvers.len()],
                }
            })
            .collect()
    });
    let mut grids = Vec::new();
    for (si, &solver) in cfg.solvers.iter().enumerate() {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for (&(c, _), o) in jobs.iter().zip(&outcomes) {
            *counts.entry(c).or_default() += o[si] as usize;
        }
        let cols = cfg.k_over_m.len();
        let cells = dims
            .iter()
            .enumerate()
            .map(|(c, &(m, k))| {
                let successes = counts.get(&c).copied().unwrap_or(0);
                PhaseCell {
                    m_over_n: cfg.m_over_n[c / cols],
                    k_over_m: cfg.k_over_m[c % cols],
                    m,
                    k,
                    successes,
                    trials: cfg.trials,
                    rate: if cfg.trials == 0 { 0.0 } else { successes as f64 / cfg.trials as f64 },
                }
            })
            .collect();
        grids.push(PhaseGrid {
            solver,
            m_over_n: cfg.m_over_n.clone(),
            k_over_m: cfg.k_over_m.clone(),
            trials_per_cell: cfg.trials,
            success_threshold: cfg.success_threshold,
            cells,
        });
    }
    Ok(PhaseReport { version: crate::VERSION.to_string(), config: cfg.clone(), grids })
}

/// Columns of a phase CSV.
pub const PHASE_CSV_HEADER: [&str; 3] = ["m_over_N", "k_over_m", "rate"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    #[serde(rename = "m_over_N")]
    pub m_over_n: f64,
    pub k_over_m: f64,
    pub rate: f64,
}

impl PhaseReport {
    pub fn grid(&self, solver: SolverKind) -> Option<&PhaseGrid> {
        self.grids.iter().find(|g| g.solver == solver)
    }

    /// CSV of one solver's grid, one row per cell.
    pub fn write_csv(&self, solver: SolverKind, mut w: impl Write) -> Result<()> {
        let g = self.grid(solver).ok_or_else(|| Error::InvalidParameter(format!("no grid for {solver}")))?;
        let meta = serde_json::json!({ "version": self.version, "solver": solver, "config": self.config });
        writeln!(w, "# {meta}")?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(PHASE_CSV_HEADER)?;
        for cell in &g.cells {
            c.write_record([cell.m_over_n.to_string(), cell.k_over_m.to_string(), cell.rate.to_string()])?;
        }
        c.flush()?;
        Ok(())
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json(r: impl std::io::Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    /// One text grid per solver: rows are `m/N`, columns `k/m`.
    pub fn table(&self) -> String {
        let mut s = String::new();
        for g in &self.grids {
            s += &format!("{} (rows m/N, columns k/m)\n{:>7}", g.solver, "");
            for c in &g.k_over_m {
                s += &format!(" {c:>6.3}");
            }
            s.push('\n');
            for (i, r) in g.m_over_n.iter().enumerate() {
                s += &format!("{r:>7.3}");
                for j in 0..g.k_over_m.len() {
                    s += &format!(" {:>6.2}", g.cell(i, j).rate);
                }
                s.push('\n');
            }
        }
        s
    }
}

pub fn read_phase_csv(r: impl BufRead) -> Result<(Vec<PhaseRow>, serde_json::Value)> {
    let (meta, body) = split_meta(r)?;
    let rows = csv::Reader::from_reader(body.as_bytes()).deserialize().collect::<std::result::Result<_, _>>()?;
    Ok((rows, meta))
}

/// Manifest (without vectors) of the instance behind trial `trial`.
pub fn speed_trial_manifest(cfg: &SpeedTestConfig, trial: usize) -> Result<InstanceManifest> {
    Ok(cfg.setting.instance(cfg.msnr, cfg.base_seed + trial as u64)?.manifest(false))
}
