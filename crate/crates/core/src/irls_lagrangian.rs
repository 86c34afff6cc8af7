//! Lagrangian IRLS: minimize `||x||_tau^tau + ||Phi x - y||^2 / (2 lambda)`.
//!
//! Every outer step solves `(Phi^* Phi + diag(lambda tau w)) x = Phi^* y`,
//! densely in [`irls_lambda_exact`] and by (optionally Jacobi
//! preconditioned, optionally capped) CG in [`cg_irls_lambda`]. The inner
//! CG starts from the previous iterate, so `J_{tau,lambda}` decreases along
//! the whole run.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::functionals::{f_eps_tau, j_tau_unchecked, residual_sq, update_epsilon_objective, weights_unchecked, SummableSequence};
use crate::irls_equality::{relative_change, Stagnation};
use crate::krylov::{cg_solve, pcg_solve, KrylovReport, NormalEquations, StopContext, StopReason, StopRule};
use crate::linalg::{estimate_operator_norm, max_abs, norm, LinearMap};
use crate::trace::{rel_error, Clock, IterateTrace, Observer, OuterStep, OuterStop, TraceRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianConfig {
    pub tau: f64,
    pub lambda: f64,
    /// Exponent in `eps <- min(eps, |J_prev - J_curr|^phi + alpha^{n+1})`.
    pub phi: f64,
    pub alpha: f64,
    pub eps_min: f64,
    /// Extra cap `eps^{n+1} <= factor^n eps^n`; `None` disables it.
    #[serde(default)]
    pub eps_decay: Option<f64>,
    pub a_sequence: SummableSequence,
    pub maxiter_outer: usize,
    /// Absolute floor on the inner residual `||Phi^* y - A_n x||`.
    pub residual_floor: f64,
    /// Jacobi preconditioning of the inner systems.
    #[serde(default)]
    pub precondition: bool,
    /// Hard cap on inner iterations. When unset the cap is `4 N`, which
    /// leaves finite-precision CG room to reach its threshold.
    #[serde(default)]
    pub maxiter_cg: Option<usize>,
    pub stagnation_tol: f64,
    /// Override for `||Phi||`; estimated when absent.
    #[serde(default)]
    pub op_norm: Option<f64>,
}

/// `0.3` for `tau = 1`, shrunk for smaller `tau` to stay below `1/(4 - tau)`.
pub fn default_phi(tau: f64) -> f64 {
    0.3f64.min(0.9 / (4.0 - tau))
}

/// `lambda = m * 1e-8`, the near-interpolating choice for noiseless data.
pub fn noiseless_lambda(m: usize) -> f64 {
    m as f64 * 1e-8
}

impl LagrangianConfig {
    /// Plain CG-IRLS-lambda for an `m x N` problem.
    pub fn new(n: usize, m: usize, lambda: f64, tau: f64) -> Self {
        let (nf, mf) = (n as f64, m as f64);
        Self {
            tau,
            lambda,
            phi: default_phi(tau),
            alpha: 0.9,
            eps_min: 1e-9,
            eps_decay: Some(0.8),
            a_sequence: SummableSequence::Geometric { scale: (nf * mf).sqrt() * 1e4, ratio: 0.5 },
            maxiter_outer: 25,
            residual_floor: 1e-16 * nf.powf(1.5) * mf,
            precondition: false,
            maxiter_cg: None,
            stagnation_tol: 1e-14,
            op_norm: None,
        }
    }

    /// PCG-IRLS-lambda.
    pub fn preconditioned(n: usize, m: usize, lambda: f64, tau: f64) -> Self {
        Self { precondition: true, ..Self::new(n, m, lambda, tau) }
    }

    /// PCGm-IRLS-lambda: preconditioned with at most 4 inner iterations.
    pub fn pcgm(n: usize, m: usize, lambda: f64, tau: f64) -> Self {
        Self { maxiter_cg: Some(4), ..Self::preconditioned(n, m, lambda, tau) }
    }

    /// PCGm-IRLS-lambda for noiseless data: `lambda = m 1e-8`, 40 inner
    /// iterations.
    pub fn pcgm_noiseless(n: usize, m: usize, tau: f64) -> Self {
        Self { maxiter_cg: Some(40), ..Self::preconditioned(n, m, noiseless_lambda(m), tau) }
    }

    /// Solver label used in traces and on the command line.
    pub fn solver_name(&self) -> &'static str {
        match (self.precondition, self.maxiter_cg.is_some()) {
            (true, true) => "pcgm-irls-lambda",
            (true, false) => "pcg-irls-lambda",
            _ => "cg-irls-lambda",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau = {} must lie in (0, 1]", self.tau));
        }
        let phi_max = 1.0 / (4.0 - self.tau);
        if !(self.phi > 0.0 && self.phi < phi_max) {
            return bad(format!("phi = {} must lie in (0, {phi_max})", self.phi));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        for (name, v) in [("lambda", self.lambda), ("eps_min", self.eps_min), ("stagnation_tol", self.stagnation_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if let Some(f) = self.eps_decay {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("eps_decay = {f} must lie in (0, 1]"));
            }
        }
        if !(self.residual_floor >= 0.0) {
            return bad(format!("residual_floor = {} must be nonnegative", self.residual_floor));
        }
        if self.maxiter_cg == Some(0) {
            return bad("maxiter_cg must be at least 1".into());
        }
        if let Some(v) = self.op_norm {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("op_norm = {v} must be positive"));
            }
        }
        self.a_sequence.validate()
    }
}

/// Largest inner tolerance allowed by the convergence theorem. With
/// `G = ((2-tau)/(tau Jbar))^{-(2-tau)/tau}` it is the minimum of
/// `a (sqrt(2 Jbar tau) C + 2 sqrt(2 Jbar / lambda) sqrt(G) ||Phi||)^{-1}` and
/// `sqrt(a) (tau/2 + ||Phi||^2 G / (2 lambda))^{-1/2}`.
pub fn tol_schedule_lambda(a_n: f64, c_w_prev: f64, jbar: f64, op_norm: f64, tau: f64, lambda: f64) -> f64 {
    let g = ((2.0 - tau) / (tau * jbar)).powf(-(2.0 - tau) / tau);
    let b1 = a_n / ((2.0 * jbar * tau).sqrt() * c_w_prev + 2.0 * (2.0 * jbar / lambda).sqrt() * g.sqrt() * op_norm);
    let b2 = a_n.sqrt() / (0.5 * tau + op_norm * op_norm * g / (2.0 * lambda)).sqrt();
    b1.min(b2)
}

/// `C_{w^{n-1}} = ((max_j (x~^{n-1}_j)^2 + (eps^{n-1})^2) / (eps^n)^2)^{1 - tau/2}`.
pub fn weight_growth_bound(x_prev: &[f64], eps_prev: f64, eps_curr: f64, tau: f64) -> f64 {
    let mx = max_abs(x_prev);
    ((mx * mx + eps_prev * eps_prev) / (eps_curr * eps_curr)).powf(1.0 - 0.5 * tau)
}

/// Inner CG stops once `||r|| <= eps^{(2-tau)/2} lambda tau tol / (max|x~|^2 + eps^2)^{(2-tau)/2}`,
/// which guarantees `||x~ - x^||_{w} <= tol` for the weights built from
/// `x_prev` and `eps_prev`.
pub fn cg_residual_threshold_lambda(tol: f64, x_prev: &[f64], eps_prev: f64, lambda: f64, tau: f64) -> f64 {
    let p = 0.5 * (2.0 - tau);
    let mx = max_abs(x_prev);
    eps_prev.powf(p) * lambda * tau / (mx * mx + eps_prev * eps_prev).powf(p) * tol
}

/// Start of an inner solve: the previous iterate and weights, `eps^n`, and
/// the tolerance for the new iterate.
struct StepInput<'a> {
    x: &'a [f64],
    w: &'a [f64],
    eps: f64,
    tol: f64,
}

type Step<'a> = dyn FnMut(&StepInput) -> Result<(Vec<f64>, KrylovReport)> + 'a;

fn check_problem(op: &dyn LinearMap, y: &[f64], cfg: &LagrangianConfig) -> Result<()> {
    check_len("y", y.len(), op.rows())?;
    cfg.validate()
}

/// IRLS-lambda with a dense Cholesky solve of every normal-equation system.
pub fn irls_lambda_exact(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &LagrangianConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, IterateTrace)> {
    irls_lambda_exact_observed(op, y, cfg, reference, None)
}

pub fn irls_lambda_exact_observed(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &LagrangianConfig,
    reference: Option<&[f64]>,
    observer: Option<Observer>,
) -> Result<(Vec<f64>, IterateTrace)> {
    check_problem(op, y, cfg)?;
    let setup = Clock::start();
    let phi = op.to_dense().to_nalgebra();
    let gram = phi.transpose() * &phi;
    let rhs = nalgebra::DVector::from_vec(op.apply_adjoint(y));
    let setup_s = setup.elapsed();
    let (lambda, tau) = (cfg.lambda, cfg.tau);
    let mut step = |s: &StepInput| -> Result<(Vec<f64>, KrylovReport)> {
        let mut a = gram.clone();
        for (j, wj) in s.w.iter().enumerate() {
            a[(j, j)] += lambda * tau * wj;
        }
        let chol = a.cholesky().ok_or_else(|| Error::RankDeficient("Phi^* Phi + diag(lambda tau w) is not positive definite".into()))?;
        let x = chol.solve(&rhs).iter().copied().collect();
        Ok((x, KrylovReport { iterations: 0, final_residual_norm: 0.0, converged: true, stop_reason: StopReason::ExactZeroResidual }))
    };
    outer_loop(op, y, cfg, reference, observer, "irls-lambda", None, setup_s, &mut step)
}

/// CG-IRLS-lambda, PCG-IRLS-lambda or PCGm-IRLS-lambda depending on
/// `cfg.precondition` and `cfg.maxiter_cg`.
pub fn cg_irls_lambda(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &LagrangianConfig,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, IterateTrace)> {
    cg_irls_lambda_observed(op, y, cfg, reference, None)
}

pub fn cg_irls_lambda_observed(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &LagrangianConfig,
    reference: Option<&[f64]>,
    observer: Option<Observer>,
) -> Result<(Vec<f64>, IterateTrace)> {
    check_problem(op, y, cfg)?;
    let n = op.cols();
    let setup = Clock::start();
    let op_norm = match cfg.op_norm {
        Some(v) => v,
        None => estimate_operator_norm(op, 1e-10, 1000),
    };
    let col_sq = if cfg.precondition { op.column_norms_sq() } else { Vec::new() };
    let rhs = op.apply_adjoint(y);
    let setup_s = setup.elapsed();
    let (lambda, tau) = (cfg.lambda, cfg.tau);
    let maxiter = Some(cfg.maxiter_cg.unwrap_or(4 * n));
    let mut step = |s: &StepInput| -> Result<(Vec<f64>, KrylovReport)> {
        let shift: Vec<f64> = s.w.iter().map(|w| lambda * tau * w).collect();
        let a = NormalEquations::new(op, &shift)?;
        let thr = cg_residual_threshold_lambda(s.tol, s.x, s.eps, lambda, tau);
        let pred = |ctx: &StopContext| ctx.residual_norm <= thr;
        // Early tolerances are loose enough to accept the warm start as is,
        // which would leave x at zero for many outer steps.
        let stop = StopRule::new(cfg.residual_floor, &pred).at_least(1);
        if cfg.precondition {
            let m_inv: Vec<f64> = col_sq.iter().zip(&shift).map(|(c, s)| 1.0 / (c + s)).collect();
            pcg_solve(&a, &m_inv, &rhs, s.x, &stop, maxiter)
        } else {
            cg_solve(&a, &rhs, s.x, &stop, maxiter)
        }
    };
    outer_loop(op, y, cfg, reference, observer, cfg.solver_name(), Some(op_norm), setup_s, &mut step)
}

/// The shared outer iteration. `op_norm` is `None` for exact inner solves,
/// which need no tolerance.
#[allow(clippy::too_many_arguments)]
fn outer_loop(
    op: &dyn LinearMap,
    y: &[f64],
    cfg: &LagrangianConfig,
    reference: Option<&[f64]>,
    mut observer: Option<Observer>,
    name: &str,
    op_norm: Option<f64>,
    setup_s: f64,
    step: &mut Step,
) -> Result<(Vec<f64>, IterateTrace)> {
    let n = op.cols();
    let (lambda, tau) = (cfg.lambda, cfg.tau);
    let mut trace = IterateTrace::new(name);
    trace.setup_seconds = setup_s;
    let clock = Clock::start();
    if norm(y) == 0.0 {
        trace.stop = OuterStop::ZeroData;
        return Ok((vec![0.0; n], trace));
    }

    let mut x = vec![0.0; n];
    let mut w = vec![1.0; n];
    let mut eps = 1.0;
    let mut j_curr = j_tau_unchecked(&x, &w, eps, tau) + residual_sq(op, &x, y) / (2.0 * lambda);
    let mut j_prev: Option<f64> = None;
    let mut jbar: Option<f64> = None;
    let mut stag = Stagnation::default();
    trace.stop = OuterStop::MaxIter;
    for it in 1..=cfg.maxiter_outer {
        // eps^{n+1} depends only on earlier iterates, so it is fixed before
        // the inner solve. The first step has no J difference yet.
        let raw = update_epsilon_objective(eps, j_prev.unwrap_or(j_curr), j_curr, cfg.phi, cfg.alpha, it - 1)?;
        let capped = match cfg.eps_decay {
            Some(f) => raw.min(f.powi(it as i32 - 1) * eps),
            None => raw,
        };
        let eps_new = capped.max(cfg.eps_min).min(eps);

        let a = cfg.a_sequence.term(it);
        let tol = match (op_norm, jbar) {
            (None, _) => 0.0,
            // Jbar needs the first iterate; the first step uses sqrt(a_1).
            (Some(_), None) => a.sqrt(),
            (Some(nrm), Some(jb)) => tol_schedule_lambda(a, weight_growth_bound(&x, eps, eps_new, tau), jb, nrm, tau, lambda),
        };

        let (x_new, report) = step(&StepInput { x: &x, w: &w, eps, tol }).map_err(|e| e.at_outer(it))?;
        let r2 = residual_sq(op, &x_new, y);
        if jbar.is_none() {
            jbar = Some(j_tau_unchecked(&x_new, &w, eps, tau) + r2 / (2.0 * lambda));
        }
        let w_new = weights_unchecked(&x_new, eps_new, tau);
        let j_new = j_tau_unchecked(&x_new, &w_new, eps_new, tau) + r2 / (2.0 * lambda);

        if let Some(obs) = observer.as_mut() {
            obs(&OuterStep { iteration: it, x_prev: &x, x_new: &x_new, w_prev: &w, w_new: &w_new, eps_prev: eps, eps_new, tol, inner: report });
        }
        trace.records.push(TraceRecord {
            iteration: it,
            elapsed_s: clock.elapsed(),
            epsilon: eps_new,
            tol,
            inner_iterations: report.iterations,
            rel_error: rel_error(&x_new, reference),
            objective: f_eps_tau(&x_new, 0.0, tau)? + r2 / (2.0 * lambda),
        });

        let change = relative_change(&x_new, &x);
        let settled = eps_new == eps;
        j_prev = Some(j_curr);
        j_curr = j_new;
        x = x_new;
        w = w_new;
        eps = eps_new;
        if stag.update(change, settled, cfg.stagnation_tol) {
            trace.stop = OuterStop::Stagnation;
            break;
        }
    }
    Ok((x, trace))
}

/// `J_bar = J_{tau,lambda}(x~^1, w^0, eps^0)` for the run whose first
/// iterate is `x1`.
pub fn jbar(x1: &[f64], op: &dyn LinearMap, y: &[f64], tau: f64, lambda: f64) -> Result<f64> {
    check_len("x", x1.len(), op.cols())?;
    check_len("y", y.len(), op.rows())?;
    Ok(j_tau_unchecked(x1, &vec![1.0; x1.len()], 1.0, tau) + residual_sq(op, x1, y) / (2.0 * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{fista, FistaConfig};
    use crate::functionals::{lasso_optimality_residual_with_zero_tol, objective_f};
    use crate::linalg::{make_partial_dct, relative_error, DenseMatrix};
    use crate::rng::Stream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn tol_schedule_regression() {
        // tau = 1, lambda = 1, ||Phi|| = 1, Jbar = 2, C = 1, a = 1:
        // branch 1 = 1/(2 + 4 sqrt 2), branch 2 = sqrt(2/3).
        let b1 = 0.130601937481870721;
        assert_relative_eq!(tol_schedule_lambda(1.0, 1.0, 2.0, 1.0, 1.0, 1.0), b1, max_relative = 1e-15);
        // A huge C turns branch 1 off.
        // At a = 100 branch 2 is the smaller one: 10 sqrt(2/3).
        let b2 = 0.816496580927726032;
        assert_relative_eq!(tol_schedule_lambda(100.0, 1.0, 2.0, 1.0, 1.0, 1.0), 10.0 * b2, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn tol_schedule_monotone_in_a(a in 1e-8f64..1e4, c in 1.0f64..1e3, jb in 1e-2f64..1e3, nrm in 0.1f64..10.0, tau in 0.2f64..1.0, lam in 1e-6f64..10.0) {
            let t1 = tol_schedule_lambda(a, c, jb, nrm, tau, lam);
            let t2 = tol_schedule_lambda(2.0 * a, c, jb, nrm, tau, lam);
            prop_assert!(t1 > 0.0 && t2 >= t1);
        }
    }

    #[test]
    fn tol_schedule_vanishes() {
        let seq = SummableSequence::Geometric { scale: 1e4, ratio: 0.5 };
        let t = tol_schedule_lambda(seq.term(200), 1.0, 2.0, 1.0, 1.0, 1.0);
        assert!(t < 1e-25);
    }

    #[test]
    fn threshold_examples() {
        let (tol, lam, tau, eps) = (0.3, 0.7, 0.6, 0.2);
        assert_relative_eq!(
            cg_residual_threshold_lambda(tol, &[0.0; 4], eps, lam, tau),
            lam * tau * eps.powf(-(2.0 - tau) / 2.0) * tol,
            max_relative = 1e-14
        );
        assert_relative_eq!(cg_residual_threshold_lambda(0.3, &[3f64.sqrt(), -1.0], 1.0, 1.0, 1.0), 0.15, max_relative = 1e-14);
    }

    #[test]
    fn weight_growth_examples() {
        assert_relative_eq!(weight_growth_bound(&[0.0], 1.0, 1.0, 1.0), 1.0);
        assert_relative_eq!(weight_growth_bound(&[3f64.sqrt()], 1.0, 0.5, 1.0), 4.0, max_relative = 1e-14);
        assert_relative_eq!(weight_growth_bound(&[5.0], 1.0, 1.0, 0.0001), 26f64.powf(1.0 - 0.00005), max_relative = 1e-14);
    }

    #[test]
    fn scalar_soft_threshold() {
        let op = DenseMatrix::identity(1);
        let cfg = LagrangianConfig { maxiter_outer: 60, ..LagrangianConfig::new(1, 1, 1.0, 1.0) };
        let (x, _) = irls_lambda_exact(&op, &[3.0], &cfg, None).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-6, "{x:?}");
        let (x, _) = cg_irls_lambda(&op, &[3.0], &cfg, None).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn large_lambda_gives_zero() {
        let op = make_partial_dct(32, 12, 3).unwrap();
        let y: Vec<f64> = (0..12).map(|i| 0.1 * (i as f64).sin()).collect();
        let lam = 2.0 * max_abs(&op.apply_adjoint(&y));
        let (x, tr) = irls_lambda_exact(&op, &y, &LagrangianConfig::new(32, 12, lam, 1.0), None).unwrap();
        assert!(max_abs(&x) < 1e-6, "{}", max_abs(&x));
        let want = norm(&y).powi(2) / (2.0 * lam);
        assert_relative_eq!(tr.records.last().unwrap().objective, want, max_relative = 1e-5);
    }

    fn random_problem(seed: u64) -> (DenseMatrix, Vec<f64>) {
        let mut s = Stream::new(seed);
        let data: Vec<f64> = s.normal_vec(20 * 50).iter().map(|v| v / 20f64.sqrt()).collect();
        let a = DenseMatrix::from_row_major(20, 50, data).unwrap();
        let y = s.normal_vec(20);
        (a, y)
    }

    #[test]
    fn agrees_with_fista_on_random_lasso() {
        let (op, y) = random_problem(0);
        let lam = 0.1 * max_abs(&op.apply_adjoint(&y));
        let (xf, _) = fista(&op, &y, &FistaConfig { maxiter: 200_000, ..FistaConfig::new(lam) }, None).unwrap();
        let ff = objective_f(&xf, &op, &y, lam, 1.0).unwrap();
        // IRLS-lambda converges linearly on LASSO problems, so the solve for
        // full accuracy needs far more than the benchmark's 25 outer steps.
        let base = LagrangianConfig { maxiter_outer: 3000, ..LagrangianConfig::new(50, 20, lam, 1.0) };
        for cfg in [base.clone(), LagrangianConfig { precondition: true, ..base }] {
            for exact in [true, false] {
                let run = if exact { irls_lambda_exact } else { cg_irls_lambda };
                let (x, _) = run(&op, &y, &cfg, None).unwrap();
                let f = objective_f(&x, &op, &y, lam, 1.0).unwrap();
                assert!((f - ff).abs() <= 1e-6 * ff, "{} exact={exact}: {f} vs {ff}", cfg.solver_name());
                let res = lasso_optimality_residual_with_zero_tol(&x, &op, &y, lam, 1e-6).unwrap();
                assert!(res <= 1e-4, "{res}");
            }
        }
    }

    #[test]
    fn noiseless_recovery() {
        let (n, m, k) = (500, 200, 8);
        let op = make_partial_dct(n, m, 0).unwrap();
        let mut s = Stream::new(77);
        let mut xs = vec![0.0; n];
        for j in s.partial_permutation(n, k) {
            xs[j] = s.standard_normal();
        }
        let y = op.apply(&xs);
        let (x, tr) = cg_irls_lambda(&op, &y, &LagrangianConfig::pcgm_noiseless(n, m, 1.0), Some(&xs)).unwrap();
        assert!(relative_error(&x, &xs) <= 1e-4, "{:?}", tr.records.last());
        assert!(tr.records.iter().all(|r| r.inner_iterations <= 40));
        for pair in tr.records.windows(2) {
            assert!(pair[1].epsilon <= pair[0].epsilon);
        }
    }

    #[test]
    fn pcgm_respects_cap() {
        let (op, y) = random_problem(1);
        let cfg = LagrangianConfig::pcgm(50, 20, 0.05, 1.0);
        let (_, tr) = cg_irls_lambda(&op, &y, &cfg, None).unwrap();
        assert_eq!(tr.solver, "pcgm-irls-lambda");
        assert!(tr.records.iter().all(|r| r.inner_iterations <= 4));
    }

    #[test]
    fn rejects_bad_config() {
        let op = DenseMatrix::identity(3);
        for cfg in [
            LagrangianConfig { phi: 0.34, ..LagrangianConfig::new(3, 3, 1.0, 1.0) },
            LagrangianConfig { phi: 0.3, ..LagrangianConfig::new(3, 3, 1.0, 0.2) },
            LagrangianConfig { lambda: 0.0, ..LagrangianConfig::new(3, 3, 1.0, 1.0) },
            LagrangianConfig { alpha: 1.5, ..LagrangianConfig::new(3, 3, 1.0, 1.0) },
        ] {
            assert!(matches!(cg_irls_lambda(&op, &[1.0; 3], &cfg, None), Err(Error::InvalidParameter(_))));
        }
        assert!(default_phi(0.2) < 1.0 / 3.8);
    }
}
