//! Equality-constrained IRLS: find a sparse `x` with `Phi x = y`.
//!
//! [`irls_exact`] solves every weighted least-squares problem with a dense
//! Cholesky factorization. [`cg_irls`] replaces that by warm-started MCG runs
//! whose accuracy is driven by a summable tolerance schedule;
//! [`cg_irls_modified`] adds the practical shortcuts (capped inner
//! iterations, tolerance refreshed only between outer steps, IHT warm start).

use serde::{Deserialize, Serialize};

use crate::baselines::{iht_from, IhtConfig};
use crate::error::{check_len, Error, Result};
use crate::functionals::{f_eps_tau, update_epsilon_rank, weights_unchecked, SummableSequence};
use crate::krylov::{mcg_solve, KrylovReport, ScaledColumns, StopReason, StopRule};
use crate::linalg::{estimate_extremal_singular_values, max_abs, norm, rearrangement_entry, wnorm2, LinearMap};
use crate::trace::{rel_error, Clock, IterateTrace, Observer, OuterStep, OuterStop, TraceRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualityConfig {
    pub tau: f64,
    /// Sparsity index in the smoothing rule `eps <- min(eps, beta r(x)_{K+1})`.
    #[serde(rename = "K")]
    pub k: usize,
    pub beta: f64,
    pub eps_min: f64,
    pub a_sequence: SummableSequence,
    pub maxiter_outer: usize,
    /// Absolute floor on the MCG residual `||rho||`.
    pub residual_floor: f64,
    /// Hard cap on MCG iterations per outer step.
    #[serde(default)]
    pub maxiter_cg: Option<usize>,
    /// IHT iterations run before the first outer step (0 = off).
    #[serde(default)]
    pub start_iht: usize,
    /// Compute the tolerance once per outer step instead of refreshing it
    /// inside the MCG loop.
    #[serde(default)]
    pub explicit_tol: bool,
    /// Relative iterate change treated as "not moving".
    pub stagnation_tol: f64,
    /// Override for `sigma_min(Phi)`; estimated when absent.
    #[serde(default)]
    pub sigma_min: Option<f64>,
    /// Override for `||Phi||`; estimated when absent.
    #[serde(default)]
    pub op_norm: Option<f64>,
}

impl EqualityConfig {
    /// Plain CG-IRLS defaults for an `N`-dimensional problem.
    pub fn new(n: usize, k: usize, tau: f64) -> Self {
        Self {
            tau,
            k,
            beta: 0.5,
            eps_min: 1e-9 / n as f64,
            a_sequence: SummableSequence::Geometric { scale: 100.0, ratio: 0.5 },
            maxiter_outer: 30,
            residual_floor: 1e-12,
            maxiter_cg: None,
            start_iht: 0,
            explicit_tol: false,
            stagnation_tol: 1e-14,
            sigma_min: None,
            op_norm: None,
        }
    }

    /// CG-IRLSm: explicit tolerance and `floor(m/12)` inner iterations.
    ///
    /// `beta` stays at 0.5: with the smoothing rule taken literally,
    /// `beta = 2` lets `eps` freeze well above zero on desk-scale problems.
    pub fn modified(n: usize, m: usize, k: usize, tau: f64) -> Self {
        Self { maxiter_cg: Some((m / 12).max(1)), explicit_tol: true, ..Self::new(n, k, tau) }
    }

    /// IHT+CG-IRLSm: [`modified`](Self::modified) plus 150 IHT warm-up steps.
    pub fn iht_modified(n: usize, m: usize, k: usize, tau: f64) -> Self {
        Self { start_iht: 150, ..Self::modified(n, m, k, tau) }
    }

    /// Exact IRLS, whose smoothing rule divides by `N`.
    pub fn exact(n: usize, k: usize, tau: f64) -> Self {
        Self { beta: 1.0 / n as f64, ..Self::new(n, k, tau) }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau = {} must lie in (0, 1]", self.tau));
        }
        if self.k == 0 || self.k >= n {
            return bad(format!("K = {} must satisfy 1 <= K < N = {n}", self.k));
        }
        for (name, v) in [("beta", self.beta), ("eps_min", self.eps_min), ("stagnation_tol", self.stagnation_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.residual_floor >= 0.0) {
            return bad(format!("residual_floor = {} must be nonnegative", self.residual_floor));
        }
        if self.maxiter_cg == Some(0) {
            return bad("maxiter_cg must be at least 1".into());
        }
        for (name, v) in [("sigma_min", self.sigma_min), ("op_norm", self.op_norm)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} = {v} must be positive"));
                }
            }
        }
        self.a_sequence.validate()
    }
}

/// Largest tolerance allowed by the convergence theorem:
/// `(sqrt((c/2)^2 + 2a/(tau Wbar^2)) - c/2)^2`.
pub fn tol_schedule(c_n: f64, a_next: f64, wbar_next: f64, tau: f64) -> f64 {
    let h = 0.5 * c_n;
    let q = 2.0 * a_next / (tau * wbar_next * wbar_next);
    // Rationalized form of sqrt(h^2 + q) - h, stable when q << h^2.
    let s = q / ((h * h + q).sqrt() + h);
    s * s
}

/// `W_n = max_j sqrt(w^n_j / w^{n-1}_j)`.
pub fn weight_ratio_bound(w_curr: &[f64], w_prev: &[f64]) -> f64 {
    w_curr.iter().zip(w_prev).map(|(a, b)| (a / b).sqrt()).fold(0.0, f64::max)
}

/// `Wbar_n = sqrt((max|x~^{n-1}|^{2-tau} + (eps^{n-1})^{2-tau}) / (eps^n)^{2-tau})`,
/// an a-priori bound on [`weight_ratio_bound`].
pub fn wbar(x_prev: &[f64], eps_prev: f64, eps_curr: f64, tau: f64) -> Result<f64> {
    if !(eps_curr > 0.0) {
        return Err(Error::InvalidParameter(format!("eps_curr = {eps_curr} must be positive")));
    }
    let p = 2.0 - tau;
    Ok(((max_abs(x_prev).powf(p) + eps_prev.powf(p)) / eps_curr.powf(p)).sqrt())
}

/// The quantities feeding [`tol_schedule`] for the step `n -> n+1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceInputs {
    /// `c_n = 2 W_n (||x~^n||_{w^{n-1}} + sqrt(tol_n))`.
    pub c: f64,
    /// `Wbar_n`.
    pub wbar: f64,
    /// `W_n`.
    pub w_ratio: f64,
}

/// `c_n`, `Wbar_n` and `W_n` from the iterates `x~^{n-1}`, `x~^n`, the weights
/// `w^{n-1}`, `w^n`, `tol_n` and `eps^{n-1}`, `eps^n`.
#[allow(clippy::too_many_arguments)]
pub fn cn_wbar(
    x_prev: &[f64],
    x_curr: &[f64],
    tol_curr: f64,
    w_prev: &[f64],
    w_curr: &[f64],
    eps_prev: f64,
    eps_curr: f64,
    tau: f64,
) -> Result<ToleranceInputs> {
    let n = x_curr.len();
    check_len("x_prev", x_prev.len(), n)?;
    check_len("w_prev", w_prev.len(), n)?;
    check_len("w_curr", w_curr.len(), n)?;
    let wb = wbar(x_prev, eps_prev, eps_curr, tau)?;
    let w_ratio = weight_ratio_bound(w_curr, w_prev);
    let c = 2.0 * w_ratio * (wnorm2(x_curr, w_prev).sqrt() + tol_curr.max(0.0).sqrt());
    Ok(ToleranceInputs { c, wbar: wb, w_ratio })
}

/// MCG stops once `||rho||^2` drops below
/// `sigma_min tol / ((1 + max_l(|x~_l|/eps)^2)^{(2-tau)/2} ||Phi||^2)`.
pub fn mcg_residual_threshold(tol: f64, x_prev: &[f64], eps_prev: f64, sigma_min: f64, op_norm: f64, tau: f64) -> f64 {
    let r = max_abs(x_prev) / eps_prev;
    sigma_min * tol / ((1.0 + r * r).powf(0.5 * (2.0 - tau)) * op_norm * op_norm)
}

pub(crate) fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let d: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let s = norm(new);
    if s == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / s
    }
}

/// Stagnation test shared by the IRLS loops: the iterate and `eps` stopped
/// moving for two consecutive outer steps (or reached an exact fixed point).
#[derive(Default)]
pub(crate) struct Stagnation {
    streak: usize,
}

impl Stagnation {
    pub fn update(&mut self, change: f64, eps_settled: bool, tol: f64) -> bool {
        if !eps_settled {
            self.streak = 0;
            return false;
        }
        if change == 0.0 {
            return true;
        }
        if change < tol {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.streak >= 2
    }
}

fn next_epsilon(eps: f64, x: &[f64], cfg: &EqualityConfig) -> Result<f64> {
    let raw = update_epsilon_rank(eps, x, cfg.k, cfg.beta)?;
    Ok(if raw == 0.0 { 0.0 } else { raw.max(cfg.eps_min) })
}

fn check_problem(op: &dyn LinearMap, y: &[f64], cfg: &EqualityConfig) -> Result<()> {
    check_len("y", y.len(), op.rows())?;
    if op.rows() > op.cols() {
        return Err(Error::Dimension(format!("expected m <= N, got {} x {}", op.rows(), op.cols())));
    }
    cfg.validate(op.cols())
}

/// Exact IRLS. Each outer step factors `Phi D_n Phi^*` densely (Cholesky),
/// sets `x^{n+1} = D_n Phi^* theta` and updates `eps` and the weights.
pub fn irls_exact(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &EqualityConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, IterateTrace)> {
    irls_exact_observed(op, y, cfg, reference, None)
}

pub fn irls_exact_observed(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &EqualityConfig,
    reference: Option<&[f64]>,
    mut observer: Option<Observer>,
) -> Result<(Vec<f64>, IterateTrace)> {
    check_problem(op, y, cfg)?;
    let (m, n) = (op.rows(), op.cols());
    let mut trace = IterateTrace::new("irls");
    let setup = Clock::start();
    let phi = op.to_dense().to_nalgebra();
    trace.setup_seconds = setup.elapsed();
    let clock = Clock::start();
    if norm(y) == 0.0 {
        trace.stop = OuterStop::ZeroData;
        return Ok((vec![0.0; n], trace));
    }
    let yv = nalgebra::DVector::from_column_slice(y);
    let mut x = vec![0.0; n];
    let mut w = vec![1.0; n];
    let mut eps = 1.0;
    let mut stag = Stagnation::default();
    trace.stop = OuterStop::MaxIter;
    for it in 1..=cfg.maxiter_outer {
        let d: Vec<f64> = w.iter().map(|v| 1.0 / v).collect();
        let mut phid = phi.clone();
        for (j, mut col) in phid.column_iter_mut().enumerate() {
            col *= d[j];
        }
        let gram = &phid * phi.transpose();
        let chol = gram.cholesky().ok_or_else(|| {
            Error::RankDeficient(format!("Phi D Phi^* is not positive definite at outer iteration {it} (m = {m})"))
        })?;
        let theta = chol.solve(&yv);
        let x_new: Vec<f64> = (phid.transpose() * theta).iter().copied().collect();
        let eps_new = next_epsilon(eps, &x_new, cfg)?;
        let w_new = if eps_new > 0.0 { weights_unchecked(&x_new, eps_new, cfg.tau) } else { w.clone() };
        if let Some(obs) = observer.as_mut() {
            let inner = KrylovReport { iterations: 0, final_residual_norm: 0.0, converged: true, stop_reason: StopReason::ExactZeroResidual };
            obs(&OuterStep { iteration: it, x_prev: &x, x_new: &x_new, w_prev: &w, w_new: &w_new, eps_prev: eps, eps_new, tol: 0.0, inner });
        }
        trace.records.push(TraceRecord {
            iteration: it,
            elapsed_s: clock.elapsed(),
            epsilon: eps_new,
            tol: 0.0,
            inner_iterations: 0,
            rel_error: rel_error(&x_new, reference),
            objective: f_eps_tau(&x_new, eps_new, cfg.tau)?,
        });
        let change = relative_change(&x_new, &x);
        let settled = eps_new == eps;
        x = x_new;
        if eps_new == 0.0 {
            trace.stop = OuterStop::EpsilonZero;
            break;
        }
        w = w_new;
        eps = eps_new;
        if stag.update(change, settled, cfg.stagnation_tol) {
            trace.stop = OuterStop::Stagnation;
            break;
        }
    }
    Ok((x, trace))
}

/// CG-IRLS with the configuration as given. Plain defaults come from
/// [`EqualityConfig::new`].
pub fn cg_irls(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &EqualityConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, IterateTrace)> {
    run(op, y, cfg, reference, None, "cg-irls")
}

/// CG-IRLS with the practical modifications switched on by `cfg`
/// (see [`EqualityConfig::modified`] and [`EqualityConfig::iht_modified`]).
/// With all of them off this is exactly [`cg_irls`].
pub fn cg_irls_modified(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &EqualityConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, IterateTrace)> {
    let name = if cfg.start_iht > 0 { "iht+cg-irls-m" } else { "cg-irls-m" };
    run(op, y, cfg, reference, None, name)
}

/// [`cg_irls`] calling `observer` after every outer step.
pub fn cg_irls_observed(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &EqualityConfig,
    reference: Option<&[f64]>,
    observer: Observer,
) -> Result<(Vec<f64>, IterateTrace)> {
    run(op, y, cfg, reference, Some(observer), "cg-irls")
}

fn run(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &EqualityConfig,
    reference: Option<&[f64]>,
    mut observer: Option<Observer>,
    name: &str,
) -> Result<(Vec<f64>, IterateTrace)> {
    check_problem(op, y, cfg)?;
    let (m, n) = (op.rows(), op.cols());
    let tau = cfg.tau;
    let mut trace = IterateTrace::new(name);

    let setup = Clock::start();
    let (sigma_min, op_norm) = match (cfg.sigma_min, cfg.op_norm) {
        (Some(s), Some(o)) => (s, o),
        (s, o) => {
            let est = estimate_extremal_singular_values(op, 1e-10, 1000);
            (s.unwrap_or(est.sigma_min), o.unwrap_or(est.sigma_max))
        }
    };
    if !(sigma_min > 0.0) {
        return Err(Error::RankDeficient(format!("sigma_min(Phi) estimated as {sigma_min}")));
    }
    trace.setup_seconds = setup.elapsed();

    let clock = Clock::start();
    if norm(y) == 0.0 {
        trace.stop = OuterStop::ZeroData;
        return Ok((vec![0.0; n], trace));
    }

    let mut eps = 1.0;
    let mut w = vec![1.0; n];
    let mut x = vec![0.0; n];
    let mut theta = vec![0.0; m];
    // x~^0 for the base recursion: the IHT output when warm-starting,
    // otherwise the first (floor-exact) iterate itself.
    let mut x_base: Option<Vec<f64>> = None;
    if cfg.start_iht > 0 {
        let icfg = IhtConfig { maxiter: cfg.start_iht, ..IhtConfig::new(cfg.k) };
        let mut scratch = IterateTrace::new("iht");
        let x0 = iht_from(op, y, vec![0.0; n], &icfg, None, &mut scratch, &clock)?;
        w = weights_unchecked(&x0, eps, tau);
        x_base = Some(x0);
    }
    // c_n for the upcoming step; None on the first step.
    let mut c: Option<f64> = None;

    let mut stag = Stagnation::default();
    trace.stop = OuterStop::MaxIter;
    for it in 1..=cfg.maxiter_outer {
        let a = cfg.a_sequence.term(it);
        let scale: Vec<f64> = w.iter().map(|v| v.powf(-0.5)).collect();
        let t = ScaledColumns::new(op, &scale)?;

        let tol_for = |c: f64, eps_next: f64, x: &[f64]| -> f64 {
            let wb = wbar(x, eps, eps_next, tau).expect("positive epsilon");
            tol_schedule(c, a, wb, tau)
        };

        let (sol, tol) = match c {
            None => {
                // First step: solve to the floor. The base values for the
                // recursion are w^{-1} = 1, tol_0 = 0 and x~^0 as above.
                let sol = mcg_solve(&t, y, &theta, &StopRule::floor(cfg.residual_floor), cfg.maxiter_cg)
                    .map_err(|e| e.at_outer(it))?;
                let xh: Vec<f64> = scale.iter().zip(&sol.x_bar).map(|(s, v)| s * v).collect();
                let x0 = x_base.get_or_insert_with(|| xh.clone());
                let ones = vec![1.0; n];
                let c0 = 2.0 * weight_ratio_bound(&w, &ones) * norm(x0);
                let tol = tol_for(c0, eps, x0);
                (sol, tol)
            }
            Some(cn) if cfg.explicit_tol => {
                let tol = tol_for(cn, eps, &x);
                let thr = mcg_residual_threshold(tol, &x, eps, sigma_min, op_norm, tau);
                let pred = |ctx: &crate::krylov::StopContext| ctx.residual_norm * ctx.residual_norm <= thr;
                let sol = mcg_solve(&t, y, &theta, &StopRule::new(cfg.residual_floor, &pred), cfg.maxiter_cg)
                    .map_err(|e| e.at_outer(it))?;
                (sol, tol)
            }
            Some(cn) => {
                let pred = |ctx: &crate::krylov::StopContext| {
                    let xt: Vec<f64> = scale.iter().zip(ctx.iterate).map(|(s, v)| s * v).collect();
                    let raw = (cfg.beta * rearrangement_entry(&xt, cfg.k + 1)).min(eps);
                    if raw == 0.0 {
                        return true;
                    }
                    let tol = tol_for(cn, raw.max(cfg.eps_min), &x);
                    let thr = mcg_residual_threshold(tol, &x, eps, sigma_min, op_norm, tau);
                    ctx.residual_norm * ctx.residual_norm <= thr
                };
                let sol = mcg_solve(&t, y, &theta, &StopRule::new(cfg.residual_floor, &pred), cfg.maxiter_cg)
                    .map_err(|e| e.at_outer(it))?;
                (sol, f64::NAN)
            }
        };

        let x_new: Vec<f64> = scale.iter().zip(&sol.x_bar).map(|(s, v)| s * v).collect();
        let eps_new = next_epsilon(eps, &x_new, cfg)?;
        let tol = if tol.is_nan() {
            if eps_new == 0.0 {
                0.0
            } else {
                tol_for(c.unwrap_or(0.0), eps_new, &x)
            }
        } else {
            tol
        };
        let w_new = if eps_new > 0.0 { weights_unchecked(&x_new, eps_new, tau) } else { w.clone() };
        let x_from = x_base.take().unwrap_or_else(|| x.clone());
        if let Some(obs) = observer.as_mut() {
            obs(&OuterStep {
                iteration: it,
                x_prev: &x_from,
                x_new: &x_new,
                w_prev: &w,
                w_new: &w_new,
                eps_prev: eps,
                eps_new,
                tol,
                inner: sol.report,
            });
        }
        trace.records.push(TraceRecord {
            iteration: it,
            elapsed_s: clock.elapsed(),
            epsilon: eps_new,
            tol,
            inner_iterations: sol.report.iterations,
            rel_error: rel_error(&x_new, reference),
            objective: f_eps_tau(&x_new, eps_new, tau)?,
        });
        let change = relative_change(&x_new, &x);
        let settled = eps_new == eps;
        if eps_new == 0.0 {
            trace.stop = OuterStop::EpsilonZero;
            return Ok((x_new, trace));
        }
        // c_{n+1} = 2 W_{n+1} (||x~^{n+1}||_{w^n} + sqrt(tol_{n+1})).
        c = Some(2.0 * weight_ratio_bound(&w_new, &w) * (wnorm2(&x_new, &w).sqrt() + tol.sqrt()));
        x = x_new;
        w = w_new;
        eps = eps_new;
        theta = sol.theta;
        if stag.update(change, settled, cfg.stagnation_tol) {
            trace.stop = OuterStop::Stagnation;
            break;
        }
    }
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{make_partial_dct, DenseMatrix};
    use crate::rng::Stream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn tol_schedule_examples() {
        assert_relative_eq!(tol_schedule(0.0, 2.0, 1.0, 1.0), 4.0, max_relative = 1e-14);
        assert_relative_eq!(tol_schedule(3.0, 2.0, 1.0, 1.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(tol_schedule(0.0, 1.0, 2.0, 0.5), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn tol_schedule_meets_bound_with_equality() {
        let (c, a, wb, tau) = (1.7, 0.3, 1.9, 0.8);
        let s = tol_schedule(c, a, wb, tau).sqrt();
        // sqrt(tol) solves tol + c sqrt(tol) = 2a/(tau Wbar^2).
        assert_relative_eq!(s * s + c * s, 2.0 * a / (tau * wb * wb), max_relative = 1e-13);
    }

    #[test]
    fn wbar_examples() {
        assert_relative_eq!(wbar(&[0.0; 4], 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(wbar(&[0.5, -3.0], 1.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(wbar(&[1.0], 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_relative_eq!(mcg_residual_threshold(0.3, &[0.0; 3], 1.0, 1.0, 1.0, 1.0), 0.3);
        assert_relative_eq!(mcg_residual_threshold(0.3, &[3f64.sqrt(), 0.0], 1.0, 1.0, 1.0, 1.0), 0.15, max_relative = 1e-14);
    }

    #[test]
    fn weight_ratio_below_wbar_on_random_pairs() {
        let mut s = Stream::new(11);
        for trial in 0..100 {
            let tau = 0.5 + 0.5 * (trial as f64 / 99.0);
            let x0 = s.normal_vec(20);
            let x1 = s.normal_vec(20);
            let e0 = 0.1 + s.index(100) as f64 / 50.0;
            let e1 = e0 * (0.05 + s.index(95) as f64 / 100.0);
            let w0 = weights_unchecked(&x0, e0, tau);
            let w1 = weights_unchecked(&x1, e1, tau);
            let t = cn_wbar(&x0, &x1, 0.0, &w0, &w1, e0, e1, tau).unwrap();
            assert!(t.w_ratio <= t.wbar * (1.0 + 1e-12), "{} > {}", t.w_ratio, t.wbar);
        }
    }

    proptest! {
        #[test]
        fn tol_schedule_monotone(c in 0.0f64..10.0, a in 1e-6f64..10.0, wb in 1.0f64..10.0, tau in 0.1f64..1.0) {
            let t1 = tol_schedule(c, a, wb, tau);
            let t2 = tol_schedule(c, 2.0 * a, wb, tau);
            prop_assert!(t1 >= 0.0 && t2 >= t1);
            prop_assert!(tol_schedule(c + 1.0, a, wb, tau) <= t1);
        }
    }

    #[test]
    fn identity_returns_data() {
        let op = DenseMatrix::identity(6);
        let y = [0.3, -1.0, 0.0, 2.0, 0.5, 0.1];
        let (x, tr) = irls_exact(&op, &y, &EqualityConfig::exact(6, 2, 1.0), Some(&y)).unwrap();
        assert!(relative_change(&x, &y) < 1e-15);
        assert!(tr.records[0].rel_error.unwrap() < 1e-15);
        assert_eq!(tr.stop, OuterStop::Stagnation);
        // The first step is solved to the floor, so it already returns y.
        let (x, tr) = cg_irls(&op, &y, &EqualityConfig::new(6, 2, 1.0), Some(&y)).unwrap();
        assert!(tr.records[0].rel_error.unwrap() < 1e-14);
        assert!(relative_change(&x, &y) < 1e-6);
    }

    #[test]
    fn zero_data_returns_zero() {
        let op = make_partial_dct(16, 6, 1).unwrap();
        let (x, tr) = cg_irls(&op, &[0.0; 6], &EqualityConfig::new(16, 2, 1.0), None).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(tr.stop, OuterStop::ZeroData);
    }

    fn planted(n: usize, m: usize, k: usize, seed: u64) -> (crate::linalg::PartialDct, Vec<f64>, Vec<f64>) {
        let op = make_partial_dct(n, m, seed).unwrap();
        let mut s = Stream::new(seed + 1000);
        let mut x = vec![0.0; n];
        for j in s.partial_permutation(n, k) {
            x[j] = s.standard_normal();
        }
        let y = op.apply(&x);
        (op, x, y)
    }

    #[test]
    fn cg_irls_recovers_sparse_vector() {
        let (op, xs, y) = planted(200, 80, 10, 0);
        let cfg = EqualityConfig { maxiter_outer: 100, ..EqualityConfig::new(200, 11, 1.0) };
        let (x, tr) = cg_irls(&op, &y, &cfg, Some(&xs)).unwrap();
        assert!(crate::linalg::relative_error(&x, &xs) <= 1e-6, "{:?}", tr.records.last());
        for pair in tr.records.windows(2) {
            assert!(pair[1].epsilon <= pair[0].epsilon);
            assert!(pair[1].elapsed_s >= pair[0].elapsed_s);
        }
    }

    #[test]
    fn exact_matches_cg_variant_on_small_instance() {
        let (op, xs, y) = planted(64, 32, 3, 4);
        let (xe, _) = irls_exact(&op, &y, &EqualityConfig::exact(64, 4, 1.0), None).unwrap();
        let (xc, _) = cg_irls(&op, &y, &EqualityConfig::new(64, 4, 1.0), None).unwrap();
        assert!(crate::linalg::relative_error(&xe, &xs) < 1e-8);
        assert!(crate::linalg::relative_error(&xc, &xs) < 1e-8);
    }

    #[test]
    fn modified_respects_inner_cap() {
        let (op, xs, y) = planted(240, 96, 8, 2);
        let cfg = EqualityConfig::modified(240, 96, 9, 1.0);
        let (x, tr) = cg_irls_modified(&op, &y, &cfg, Some(&xs)).unwrap();
        assert!(tr.records.iter().all(|r| r.inner_iterations <= 8));
        assert!(crate::linalg::relative_error(&x, &xs) < 1e-6);
        let cfg = EqualityConfig::iht_modified(240, 96, 9, 1.0);
        let (x, tr) = cg_irls_modified(&op, &y, &cfg, Some(&xs)).unwrap();
        assert_eq!(tr.solver, "iht+cg-irls-m");
        assert!(crate::linalg::relative_error(&x, &xs) < 1e-6);
    }

    #[test]
    fn degenerate_modifications_match_plain() {
        let (op, xs, y) = planted(120, 48, 5, 0);
        let plain = EqualityConfig::new(120, 6, 1.0);
        let (x1, t1) = cg_irls(&op, &y, &plain, Some(&xs)).unwrap();
        let (x2, t2) = cg_irls_modified(&op, &y, &plain, Some(&xs)).unwrap();
        assert_eq!(x1, x2);
        let strip = |t: &IterateTrace| t.records.iter().map(|r| (r.epsilon, r.tol, r.inner_iterations)).collect::<Vec<_>>();
        assert_eq!(strip(&t1), strip(&t2));
    }

    #[test]
    fn rejects_bad_config() {
        let op = make_partial_dct(16, 6, 1).unwrap();
        let y = [1.0; 6];
        for cfg in [
            EqualityConfig { tau: 0.0, ..EqualityConfig::new(16, 2, 1.0) },
            EqualityConfig::new(16, 16, 1.0),
            EqualityConfig { beta: -1.0, ..EqualityConfig::new(16, 2, 1.0) },
        ] {
            assert!(matches!(cg_irls(&op, &y, &cfg, None), Err(Error::InvalidParameter(_))));
        }
    }
}
