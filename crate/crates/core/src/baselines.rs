//! Iterative hard thresholding and FISTA.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{estimate_extremal_singular_values, norm, LinearMap};
use crate::trace::{rel_error, Clock, IterateTrace, OuterStop, TraceRecord};

/// Keep the `k` largest magnitudes; ties go to the lower index.
pub fn hard_threshold(x: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in top_k_indices(x, k) {
        out[i] = x[i];
    }
    out
}

fn top_k_indices(x: &[f64], k: usize) -> Vec<usize> {
    let k = k.min(x.len());
    if k == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    let cmp = |a: &usize, b: &usize| x[*b].abs().total_cmp(&x[*a].abs()).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx
}

/// `sign(x_j) max(|x_j| - theta, 0)`.
pub fn soft_threshold(x: &[f64], theta: f64) -> Vec<f64> {
    x.iter().map(|&v| if v > theta { v - theta } else if v < -theta { v + theta } else { 0.0 }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IhtConfig {
    /// Sparsity level kept by the hard threshold.
    pub k: usize,
    pub maxiter: usize,
    /// Stop when `||x^{n+1} - x^n|| <= stop_tol ||x^{n+1}||`.
    pub stop_tol: f64,
    pub step: f64,
}

impl IhtConfig {
    pub fn new(k: usize) -> Self {
        Self { k, maxiter: 500, stop_tol: 1e-14, step: 1.0 }
    }
}

/// `x^{n+1} = H_k(x^n + step Phi^*(y - Phi x^n))` from `x^0 = 0`.
pub fn iht(op: &dyn LinearMap, y: &[f64], cfg: &IhtConfig, reference: Option<&[f64]>) -> Result<(Vec<f64>, IterateTrace)> {
    let mut trace = IterateTrace::new("iht");
    let x = iht_from(op, y, vec![0.0; op.cols()], cfg, reference, &mut trace, &Clock::start())?;
    Ok((x, trace))
}

pub(crate) fn iht_from(
    op: &dyn LinearMap,
    y: &[f64],
    x0: Vec<f64>,
    cfg: &IhtConfig,
    reference: Option<&[f64]>,
    trace: &mut IterateTrace,
    clock: &Clock,
) -> Result<Vec<f64>> {
    check_len("y", y.len(), op.rows())?;
    if cfg.k == 0 || cfg.k > op.cols() {
        return Err(Error::InvalidParameter(format!("IHT sparsity k = {} must lie in 1..=N", cfg.k)));
    }
    let mut x = x0;
    let mut phix = op.apply(&x);
    let mut g = vec![0.0; op.cols()];
    trace.stop = OuterStop::MaxIter;
    for it in 1..=cfg.maxiter {
        let r: Vec<f64> = y.iter().zip(&phix).map(|(a, b)| a - b).collect();
        op.apply_adjoint_into(&r, &mut g);
        let z: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + cfg.step * b).collect();
        let next = hard_threshold(&z, cfg.k);
        let change = norm(&crate::linalg::sub(&next, &x));
        let size = norm(&next);
        x = next;
        op.apply_into(&x, &mut phix);
        if !phix.iter().all(|v| v.is_finite()) {
            return Err(Error::Breakdown { iteration: it, what: "IHT iterate diverged" });
        }
        let res: f64 = y.iter().zip(&phix).map(|(a, b)| (a - b) * (a - b)).sum();
        trace.records.push(TraceRecord {
            iteration: it,
            elapsed_s: clock.elapsed(),
            epsilon: 0.0,
            tol: 0.0,
            inner_iterations: 0,
            rel_error: rel_error(&x, reference),
            objective: 0.5 * res,
        });
        if change <= cfg.stop_tol * size {
            trace.stop = OuterStop::SmallChange;
            break;
        }
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FistaConfig {
    pub lambda: f64,
    pub maxiter: usize,
    pub stop_tol: f64,
    /// `||Phi||`; estimated when absent.
    #[serde(default)]
    pub op_norm: Option<f64>,
}

impl FistaConfig {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, maxiter: 20_000, stop_tol: 1e-14, op_norm: None }
    }
}

/// FISTA for `||x||_1 + ||Phi x - y||^2 / (2 lambda)`, run in the equivalent
/// scaling `lambda ||x||_1 + ||Phi x - y||^2 / 2` with step `1/||Phi||^2`.
/// The trace objective is `F_{1,lambda}`.
pub fn fista(op: &dyn LinearMap, y: &[f64], cfg: &FistaConfig, reference: Option<&[f64]>) -> Result<(Vec<f64>, IterateTrace)> {
    check_len("y", y.len(), op.rows())?;
    if !(cfg.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {} must be positive", cfg.lambda)));
    }
    let mut trace = IterateTrace::new("fista");
    let setup = Clock::start();
    let l = match cfg.op_norm {
        Some(v) => v * v,
        None => estimate_extremal_singular_values(op, 1e-10, 1000).sigma_max.powi(2),
    };
    trace.setup_seconds = setup.elapsed();
    let clock = Clock::start();
    let n = op.cols();
    let step = 1.0 / l;
    let mut x = vec![0.0; n];
    let mut phix = vec![0.0; op.rows()];
    let mut z = x.clone();
    let mut phiz = phix.clone();
    let mut t = 1.0f64;
    let mut g = vec![0.0; n];
    trace.stop = OuterStop::MaxIter;
    for it in 1..=cfg.maxiter {
        let r: Vec<f64> = phiz.iter().zip(y).map(|(a, b)| a - b).collect();
        op.apply_adjoint_into(&r, &mut g);
        let u: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let next = soft_threshold(&u, cfg.lambda * step);
        let phinext = op.apply(&next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        for j in 0..n {
            z[j] = next[j] + mom * (next[j] - x[j]);
        }
        for i in 0..phiz.len() {
            phiz[i] = phinext[i] + mom * (phinext[i] - phix[i]);
        }
        let change = norm(&crate::linalg::sub(&next, &x));
        let size = norm(&next);
        x = next;
        phix = phinext;
        t = t_next;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Breakdown { iteration: it, what: "FISTA iterate diverged" });
        }
        let res: f64 = phix.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        trace.records.push(TraceRecord {
            iteration: it,
            elapsed_s: clock.elapsed(),
            epsilon: 0.0,
            tol: 0.0,
            inner_iterations: 0,
            rel_error: rel_error(&x, reference),
            objective: l1 + res / (2.0 * cfg.lambda),
        });
        if change <= cfg.stop_tol * size {
            trace.stop = OuterStop::SmallChange;
            break;
        }
    }
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{lasso_optimality_residual, objective_f};
    use crate::linalg::DenseMatrix;
    use crate::rng::Stream;
    use proptest::prelude::*;

    #[test]
    fn thresholds() {
        assert_eq!(hard_threshold(&[3.0, 1.0, 2.0], 2), vec![3.0, 0.0, 2.0]);
        assert_eq!(hard_threshold(&[1.0, -1.0, 1.0], 2), vec![1.0, -1.0, 0.0]);
        assert_eq!(soft_threshold(&[3.0, -0.5, -2.0], 1.0), vec![2.0, 0.0, -1.0]);
    }

    #[test]
    fn iht_identity() {
        let a = DenseMatrix::identity(6);
        let xs = [0.0, 2.0, 0.0, -1.0, 0.0, 0.0];
        let (x, t) = iht(&a, &xs, &IhtConfig::new(2), Some(&xs)).unwrap();
        assert_eq!(x, xs.to_vec());
        assert_eq!(t.records[0].rel_error, Some(0.0));
        assert!(t.records.len() <= 2);
    }

    #[test]
    fn fista_scalar_and_zero() {
        let one = DenseMatrix::identity(1);
        let (x, _) = fista(&one, &[3.0], &FistaConfig::new(1.0), None).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        let mut s = Stream::new(0);
        let a = DenseMatrix::from_row_major(5, 9, s.normal_vec(45)).unwrap();
        let y = s.normal_vec(5);
        let lam = crate::linalg::max_abs(&a.apply_adjoint(&y)) * 1.01;
        let (x, _) = fista(&a, &y, &FistaConfig::new(lam), None).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fista_reaches_lasso_optimality() {
        let mut s = Stream::new(3);
        let a = DenseMatrix::from_row_major(20, 50, s.normal_vec(1000).iter().map(|v| v / 20f64.sqrt()).collect()).unwrap();
        let mut xs = vec![0.0; 50];
        for i in [3, 17, 40] {
            xs[i] = s.standard_normal() * 3.0;
        }
        let y: Vec<f64> = a.apply(&xs).iter().map(|v| v + 0.01 * s.standard_normal()).collect();
        let (x, t) = fista(&a, &y, &FistaConfig::new(0.05), None).unwrap();
        assert!(lasso_optimality_residual(&x, &a, &y, 0.05).unwrap() <= 1e-5);
        let f = objective_f(&x, &a, &y, 0.05, 1.0).unwrap();
        assert!((t.records.last().unwrap().objective - f).abs() <= 1e-10 * f);
        let tail: Vec<f64> = t.records.iter().rev().take(10).map(|r| r.objective).collect();
        for w in tail.windows(2) {
            assert!(w[0] <= w[1] * (1.0 + 1e-10));
        }
    }

    proptest! {
        #[test]
        fn hard_threshold_keeps_top_k(x in prop::collection::vec(-5.0f64..5.0, 1..40), k in 0usize..45) {
            let h = hard_threshold(&x, k);
            let kk = k.min(x.len());
            prop_assert!(h.iter().filter(|v| **v != 0.0).count() <= kk);
            let (sorted, perm) = crate::linalg::nonincreasing_rearrangement(&x);
            for (pos, &i) in perm.iter().enumerate() {
                if pos < kk { prop_assert_eq!(h[i], x[i]); } else { prop_assert_eq!(h[i], 0.0); }
            }
            let _ = sorted;
        }

        #[test]
        fn soft_threshold_nonexpansive(x in prop::collection::vec(-5.0f64..5.0, 1..20), z in prop::collection::vec(-5.0f64..5.0, 20), th in 0.0f64..3.0) {
            let a = soft_threshold(&x, th);
            let b = soft_threshold(&z[..x.len()], th);
            for j in 0..x.len() {
                prop_assert!((a[j] - b[j]).abs() <= (x[j] - z[j]).abs() + 1e-15);
            }
        }
    }
}
