//! Surrogate functionals, weight and smoothing updates, and optimality
//! diagnostics shared by both IRLS families.
//!
//! Conventions: `sign(0) = 0`; none of these functions clamp `epsilon`
//! (floors belong to the solver configs).

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{rearrangement_entry, LinearMap};

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must lie in (0, 1]")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

fn check_weights(w: &[f64]) -> Result<()> {
    match w.iter().position(|&v| !(v > 0.0)) {
        Some(j) => Err(Error::InvalidParameter(format!("weight entry {j} = {} is not positive", w[j]))),
        None => Ok(()),
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `J_tau(x, w, eps) = tau/2 [ sum x_j^2 w_j + sum (eps^2 w_j + (2-tau)/tau w_j^{-tau/(2-tau)}) ]`.
pub fn j_tau(x: &[f64], w: &[f64], eps: f64, tau: f64) -> Result<f64> {
    check_len("weights", w.len(), x.len())?;
    check_tau(tau)?;
    check_positive("epsilon", eps)?;
    check_weights(w)?;
    Ok(j_tau_unchecked(x, w, eps, tau))
}

pub(crate) fn j_tau_unchecked(x: &[f64], w: &[f64], eps: f64, tau: f64) -> f64 {
    let c = (2.0 - tau) / tau;
    let e = -tau / (2.0 - tau);
    let s: f64 = x.iter().zip(w).map(|(xi, wi)| xi * xi * wi + eps * eps * wi + c * wi.powf(e)).sum();
    0.5 * tau * s
}

/// `J_tau(x, w, eps) + ||Phi x - y||^2 / (2 lambda)`.
pub fn j_tau_lambda(
    x: &[f64],
    w: &[f64],
    eps: f64,
    tau: f64,
    lambda: f64,
    op: &dyn LinearMap,
    y: &[f64],
) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_len("x", x.len(), op.cols())?;
    check_len("y", y.len(), op.rows())?;
    Ok(j_tau(x, w, eps, tau)? + residual_sq(op, x, y) / (2.0 * lambda))
}

pub(crate) fn residual_sq(op: &dyn LinearMap, x: &[f64], y: &[f64]) -> f64 {
    op.apply(x).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `F_{tau,lambda}(x) = ||x||_tau^tau + ||Phi x - y||^2 / (2 lambda)`.
pub fn objective_f(x: &[f64], op: &dyn LinearMap, y: &[f64], lambda: f64, tau: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_len("x", x.len(), op.cols())?;
    check_len("y", y.len(), op.rows())?;
    Ok(f_eps_tau(x, 0.0, tau)? + residual_sq(op, x, y) / (2.0 * lambda))
}

/// `f_{eps,tau}(x) = sum (x_j^2 + eps^2)^{tau/2}`.
pub fn f_eps_tau(x: &[f64], eps: f64, tau: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {eps} must be nonnegative")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must be positive")));
    }
    Ok(if eps == 0.0 {
        x.iter().map(|v| v.abs().powf(tau)).sum()
    } else {
        x.iter().map(|v| (v * v + eps * eps).powf(0.5 * tau)).sum()
    })
}

/// `w_j = (x_j^2 + eps^2)^{-(2-tau)/2}`.
pub fn update_weights(x: &[f64], eps: f64, tau: f64) -> Result<Vec<f64>> {
    check_positive("epsilon", eps)?;
    check_tau(tau)?;
    Ok(weights_unchecked(x, eps, tau))
}

pub(crate) fn weights_unchecked(x: &[f64], eps: f64, tau: f64) -> Vec<f64> {
    let e = -(2.0 - tau) / 2.0;
    let e2 = eps * eps;
    if tau == 1.0 {
        x.iter().map(|v| 1.0 / (v * v + e2).sqrt()).collect()
    } else {
        x.iter().map(|v| (v * v + e2).powf(e)).collect()
    }
}

/// `min(eps, beta * r(x)_{K+1})`. With `beta = 1/N` this is the rule of
/// the exact IRLS iteration.
pub fn update_epsilon_rank(eps: f64, x: &[f64], k: usize, beta: f64) -> Result<f64> {
    if k == 0 || k >= x.len() {
        return Err(Error::InvalidParameter(format!("K = {k} must satisfy 1 <= K < N = {}", x.len())));
    }
    check_positive("beta", beta)?;
    Ok(eps.min(beta * rearrangement_entry(x, k + 1)))
}

/// `min(eps, |J_prev - J_curr|^phi + alpha^{n+1})`.
///
/// `phi` must lie in `(0, 1/3)`; the sharper bound `phi < 1/(4 - tau)` is
/// checked by the Lagrangian solver config.
pub fn update_epsilon_objective(eps: f64, j_prev: f64, j_curr: f64, phi: f64, alpha: f64, n: usize) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!("phi = {phi} must lie in (0, 1/3)")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    let d = (j_prev - j_curr).abs();
    let t = if d == 0.0 { 0.0 } else { d.powf(phi) };
    Ok(eps.min(t + alpha.powi(n as i32 + 1)))
}

/// Violation of the LASSO optimality conditions for
/// `||x||_1 + ||Phi x - y||^2 / (2 lambda)`.
///
/// With `g = Phi^*(y - Phi x)`: `|g_j - lambda sign(x_j)|` on the support
/// and `max(0, |g_j| - lambda)` off it. The maximum over `j` is returned.
pub fn lasso_optimality_residual(x: &[f64], op: &dyn LinearMap, y: &[f64], lambda: f64) -> Result<f64> {
    lasso_optimality_residual_with_zero_tol(x, op, y, lambda, 0.0)
}

/// As [`lasso_optimality_residual`], treating `|x_j| <= zero_tol` as zero.
/// Smoothed solvers never produce exact zeros, so a tiny threshold is
/// needed to apply the off-support condition to their output.
pub fn lasso_optimality_residual_with_zero_tol(
    x: &[f64],
    op: &dyn LinearMap,
    y: &[f64],
    lambda: f64,
    zero_tol: f64,
) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_len("x", x.len(), op.cols())?;
    check_len("y", y.len(), op.rows())?;
    let r: Vec<f64> = y.iter().zip(op.apply(x)).map(|(a, b)| a - b).collect();
    let g = op.apply_adjoint(&r);
    Ok(x.iter()
        .zip(&g)
        .map(|(&xj, &gj)| {
            if xj.abs() <= zero_tol {
                (gj.abs() - lambda).max(0.0)
            } else {
                (gj - lambda * sign(xj)).abs()
            }
        })
        .fold(0.0, f64::max))
}

/// `N_zeta(x)_j = sign(x_j) |x_j|^zeta`.
pub fn power_transform(x: &[f64], zeta: f64) -> Vec<f64> {
    x.iter().map(|&v| sign(v) * v.abs().powf(zeta)).collect()
}

/// Inverse of [`power_transform`].
pub fn power_transform_inverse(x: &[f64], zeta: f64) -> Vec<f64> {
    power_transform(x, 1.0 / zeta)
}

/// Stationarity residual of `F_{tau,lambda}` in the variables
/// `x_breve = N_{upsilon/tau}^{-1}(x)`, where the objective is smooth.
///
/// Per component:
/// `(upsilon/tau) |x_b|^{(upsilon-tau)/tau} (Phi^* Phi x - Phi^* y)_j + lambda upsilon sign(x_b) |x_b|^{upsilon-1}`;
/// zero components contribute 0. Returns the maximum magnitude.
pub fn critical_point_residual_tau(
    x: &[f64],
    op: &dyn LinearMap,
    y: &[f64],
    lambda: f64,
    tau: f64,
    upsilon: f64,
) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_tau(tau)?;
    if !(upsilon > 1.0 && upsilon <= 2.0) {
        return Err(Error::InvalidParameter(format!("upsilon = {upsilon} must lie in (1, 2]")));
    }
    check_len("x", x.len(), op.cols())?;
    check_len("y", y.len(), op.rows())?;
    let zeta = upsilon / tau;
    let xb = power_transform_inverse(x, zeta);
    let r: Vec<f64> = op.apply(x).iter().zip(y).map(|(a, b)| a - b).collect();
    let g = op.apply_adjoint(&r);
    Ok(xb
        .iter()
        .zip(&g)
        .map(|(&b, &gj)| {
            if b == 0.0 {
                0.0
            } else {
                let a = b.abs();
                (zeta * a.powf((upsilon - tau) / tau) * gj + lambda * upsilon * sign(b) * a.powf(upsilon - 1.0)).abs()
            }
        })
        .fold(0.0, f64::max))
}

/// A positive summable sequence `(a_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SummableSequence {
    /// `a_n = scale * ratio^n`.
    Geometric { scale: f64, ratio: f64 },
    /// Explicit terms; `a_n = 0` past the end.
    Finite { terms: Vec<f64> },
}

impl SummableSequence {
    pub fn geometric(scale: f64, ratio: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidParameter(format!("ratio = {ratio} must lie in (0, 1)")));
        }
        Ok(SummableSequence::Geometric { scale, ratio })
    }

    pub fn finite(terms: Vec<f64>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(format!("sequence term {t} must be positive")));
        }
        Ok(SummableSequence::Finite { terms })
    }

    pub fn term(&self, n: usize) -> f64 {
        match self {
            SummableSequence::Geometric { scale, ratio } => scale * ratio.powi(n as i32),
            SummableSequence::Finite { terms } => terms.get(n).copied().unwrap_or(0.0),
        }
    }

    pub fn sum(&self) -> f64 {
        match self {
            SummableSequence::Geometric { scale, ratio } => scale / (1.0 - ratio),
            SummableSequence::Finite { terms } => terms.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SummableSequence::Geometric { scale, ratio } => Self::geometric(*scale, *ratio).map(|_| ()),
            SummableSequence::Finite { terms } => Self::finite(terms.clone()).map(|_| ()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn j_tau_examples() {
        assert_relative_eq!(j_tau(&[0.0; 6], &[1.0; 6], 1.0, 1.0).unwrap(), 6.0);
        assert_relative_eq!(j_tau(&[1.0], &[2.0], 1.0, 1.0).unwrap(), 2.25);
        assert!(j_tau(&[1.0], &[0.0], 1.0, 1.0).is_err());
        assert!(j_tau(&[1.0], &[1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn j_tau_lambda_examples() {
        let one = DenseMatrix::identity(1);
        let a = j_tau_lambda(&[2.0], &[1.0], 1.0, 1.0, 1.0, &one, &[2.0]).unwrap();
        assert_relative_eq!(a, j_tau(&[2.0], &[1.0], 1.0, 1.0).unwrap());
        assert_relative_eq!(j_tau_lambda(&[0.0], &[1.0], 1.0, 1.0, 1.0, &one, &[2.0]).unwrap(), 3.0);
    }

    #[test]
    fn objective_examples() {
        let one = DenseMatrix::identity(1);
        assert_relative_eq!(objective_f(&[0.0], &one, &[3.0], 2.0, 1.0).unwrap(), 9.0 / 4.0);
        assert_relative_eq!(objective_f(&[2.0], &one, &[3.0], 1.0, 1.0).unwrap(), 2.5);
        // the scalar LASSO minimizer is the soft threshold
        let f = |x: f64| objective_f(&[x], &one, &[3.0], 1.0, 1.0).unwrap();
        for d in [-1e-3, 1e-3, 0.1, -0.1] {
            assert!(f(2.0 + d) > f(2.0));
        }
    }

    #[test]
    fn f_eps_examples() {
        assert_relative_eq!(f_eps_tau(&[0.0; 4], 1.0, 1.0).unwrap(), 4.0);
        assert_relative_eq!(f_eps_tau(&[3.0, 4.0], 0.0, 1.0).unwrap(), 7.0);
        assert_relative_eq!(f_eps_tau(&[3.0, -4.0, 0.0], 0.0, 0.5).unwrap(), 3f64.sqrt() + 2.0);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(update_weights(&[0.0], 1.0, 0.6).unwrap(), vec![1.0]);
        assert_relative_eq!(update_weights(&[3f64.sqrt()], 1.0, 1.0).unwrap()[0], 0.5, epsilon = 1e-15);
        // 4^{-0.6} evaluated in 50-digit arithmetic
        assert_relative_eq!(update_weights(&[3f64.sqrt()], 1.0, 0.8).unwrap()[0], 0.43527528164806206, max_relative = 1e-14);
        assert!(update_weights(&[1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_rank_examples() {
        assert_eq!(update_epsilon_rank(1.0, &[5.0, 0.0, 0.0, 0.0], 1, 0.5).unwrap(), 0.0);
        assert_eq!(update_epsilon_rank(1.0, &[9.0, 4.0, 1.0], 1, 0.5).unwrap(), 1.0);
        assert_relative_eq!(update_epsilon_rank(1.0, &[9.0, -4.0, 1.0], 1, 0.1).unwrap(), 0.4);
        assert!(update_epsilon_rank(1.0, &[1.0, 2.0], 2, 0.1).is_err());
        assert!(update_epsilon_rank(1.0, &[1.0, 2.0], 0, 0.1).is_err());
    }

    #[test]
    fn epsilon_objective_examples() {
        assert_relative_eq!(update_epsilon_objective(1.0, 3.0, 3.0, 0.3, 0.5, 1).unwrap(), 0.25);
        assert_relative_eq!(update_epsilon_objective(5.0, 3.0, 2.0, 0.2, 0.5, 1).unwrap(), 1.25);
        assert_relative_eq!(update_epsilon_objective(0.7, 3.0, 2.0, 0.2, 0.5, 1).unwrap(), 0.7);
        assert!(update_epsilon_objective(1.0, 0.0, 0.0, 0.4, 0.5, 1).is_err());
        assert!(update_epsilon_objective(1.0, 0.0, 0.0, 0.2, 1.5, 1).is_err());
    }

    #[test]
    fn lasso_residual_examples() {
        let one = DenseMatrix::identity(1);
        assert_eq!(lasso_optimality_residual(&[2.0], &one, &[3.0], 1.0).unwrap(), 0.0);
        assert_relative_eq!(lasso_optimality_residual(&[1.0], &one, &[3.0], 1.0).unwrap(), 1.0);
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(lasso_optimality_residual(&[0.0, 0.0], &a, &[0.3, -0.2], 1.0).unwrap(), 0.0);
        assert_relative_eq!(lasso_optimality_residual(&[0.0, 0.0], &a, &[3.0, 0.0], 1.0).unwrap(), 2.0);
    }

    #[test]
    fn power_transform_examples() {
        assert_relative_eq!(power_transform(&[-4.0], 0.5)[0], -2.0);
        assert_eq!(power_transform(&[-4.0, 0.0, 2.5], 1.0), vec![-4.0, 0.0, 2.5]);
    }

    /// Root of `tau |x|^{tau-1} + (x - y)/lambda = 0` on `x > 0` by bisection.
    fn scalar_stationary_point(y: f64, lambda: f64, tau: f64) -> f64 {
        let g = |x: f64| tau * x.powf(tau - 1.0) + (x - y) / lambda;
        // g is convex on (0, inf); the larger root lies right of its minimizer
        let xmin = (lambda * tau * (1.0 - tau)).powf(1.0 / (2.0 - tau));
        let (mut lo, mut hi) = (xmin, y);
        assert!(g(lo) < 0.0 && g(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn critical_point_examples() {
        let one = DenseMatrix::identity(1);
        assert_eq!(critical_point_residual_tau(&[0.0], &one, &[3.0], 1.0, 0.5, 2.0).unwrap(), 0.0);
        for (y, lambda, tau, ups) in [(3.0, 1.0, 0.5, 2.0), (5.0, 0.3, 0.8, 1.5), (2.0, 0.2, 0.9, 1.2)] {
            let x = scalar_stationary_point(y, lambda, tau);
            let r = critical_point_residual_tau(&[x], &one, &[y], lambda, tau, ups).unwrap();
            assert!(r <= 1e-8, "{r}");
            let off = critical_point_residual_tau(&[x * 1.01], &one, &[y], lambda, tau, ups).unwrap();
            assert!(off > 1e-4);
        }
    }

    #[test]
    fn summable() {
        let a = SummableSequence::geometric(100.0, 0.5).unwrap();
        assert_eq!(a.term(0), 100.0);
        assert_eq!(a.term(3), 12.5);
        assert_eq!(a.sum(), 200.0);
        assert!(SummableSequence::geometric(1.0, 1.0).is_err());
        let f = SummableSequence::finite(vec![1.0, 2.0]).unwrap();
        assert_eq!(f.term(5), 0.0);
        assert_eq!(f.sum(), 3.0);
        assert!(SummableSequence::finite(vec![1.0, -2.0]).is_err());
    }

    proptest! {
        #[test]
        fn j_equals_f_after_weight_update(x in prop::collection::vec(-1e3f64..1e3, 1..20), eps in 1e-6f64..10.0, tau in 0.05f64..=1.0) {
            let w = update_weights(&x, eps, tau).unwrap();
            let j = j_tau(&x, &w, eps, tau).unwrap();
            let f = f_eps_tau(&x, eps, tau).unwrap();
            prop_assert!((j - f).abs() <= 1e-10 * f);
        }

        #[test]
        fn weight_round_trip(x in prop::collection::vec(-1e3f64..1e3, 1..20), eps in 1e-6f64..10.0, tau in 0.05f64..=1.0) {
            let w = update_weights(&x, eps, tau).unwrap();
            for (wj, xj) in w.iter().zip(&x) {
                prop_assert!(*wj > 0.0);
                let back = wj.powf(-2.0 / (2.0 - tau));
                let want = xj * xj + eps * eps;
                prop_assert!((back - want).abs() <= 1e-12 * want);
            }
        }

        #[test]
        fn power_round_trip(x in prop::collection::vec(-100.0f64..100.0, 1..20), zeta in 0.2f64..5.0) {
            let back = power_transform_inverse(&power_transform(&x, zeta), zeta);
            for (a, b) in back.iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }

        #[test]
        fn epsilon_objective_monotone(eps in 0.0f64..10.0, a in -10.0f64..10.0, b in -10.0f64..10.0, n in 0usize..50) {
            prop_assert!(update_epsilon_objective(eps, a, b, 0.3, 0.9, n).unwrap() <= eps);
        }

        /// Weights minimize J over w and the smoothing identity is its value.
        #[test]
        fn weights_minimize_j(x in prop::collection::vec(-5.0f64..5.0, 1..6), eps in 0.01f64..2.0, tau in 0.1f64..=1.0, s in 0.5f64..2.0) {
            let w = update_weights(&x, eps, tau).unwrap();
            let moved: Vec<f64> = w.iter().map(|v| v * s).collect();
            prop_assert!(j_tau(&x, &w, eps, tau).unwrap() <= j_tau(&x, &moved, eps, tau).unwrap() * (1.0 + 1e-12));
        }
    }
}
