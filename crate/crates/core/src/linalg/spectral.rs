use super::{norm, LinearMap};
use crate::krylov::{cg_solve, GramOperator, SpdOperator, StopRule};

/// Extremal singular values of a full-row-rank operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// False when an iterative estimate hit `maxiter` before `tol`.
    pub converged: bool,
}

/// Singular values via the eigenvalues of `Phi Phi^*`: an exact dense
/// eigensolve when `m <= 64`, otherwise power iteration for `sigma_max` and
/// inverse iteration (with CG solves) for `sigma_min`.
pub fn estimate_extremal_singular_values(op: &dyn LinearMap, tol: f64, maxiter: usize) -> SpectralEstimate {
    let m = op.rows();
    if m <= 64 {
        let mut g = nalgebra::DMatrix::<f64>::zeros(m, m);
        let mut e = vec![0.0; m];
        for i in 0..m {
            e[i] = 1.0;
            let col = op.apply(&op.apply_adjoint(&e));
            e[i] = 0.0;
            g.set_column(i, &nalgebra::DVector::from_vec(col));
        }
        let g = (&g + g.transpose()) * 0.5;
        let ev = g.symmetric_eigenvalues();
        let hi = ev.max().max(0.0);
        let lo = ev.min().max(0.0);
        return SpectralEstimate { sigma_max: hi.sqrt(), sigma_min: lo.sqrt(), converged: true };
    }

    let gram = GramOperator::new(op);
    let start: Vec<f64> = (0..m).map(|i| 1.0 + 0.5 * ((i * 7919) % 13) as f64 / 13.0).collect();

    let (hi, ok_hi) = power_iteration(&start, tol, maxiter, |v| gram.apply_vec(v));
    let (inv, ok_lo) = power_iteration(&start, tol, maxiter, |v| {
        let stop = StopRule::floor(1e-14 * norm(v));
        cg_solve(&gram, v, &vec![0.0; v.len()], &stop, None)
            .map(|(x, _)| x)
            .unwrap_or_else(|_| vec![0.0; v.len()])
    });
    let lo = if inv > 0.0 { 1.0 / inv } else { 0.0 };
    SpectralEstimate { sigma_max: hi.max(0.0).sqrt(), sigma_min: lo.max(0.0).sqrt(), converged: ok_hi && ok_lo }
}

/// `||Phi||` alone (power iteration on `Phi Phi^*`, or the dense
/// eigensolve when `m <= 64`).
pub fn estimate_operator_norm(op: &dyn LinearMap, tol: f64, maxiter: usize) -> f64 {
    let m = op.rows();
    if m <= 64 {
        return estimate_extremal_singular_values(op, tol, maxiter).sigma_max;
    }
    let gram = GramOperator::new(op);
    let start: Vec<f64> = (0..m).map(|i| 1.0 + 0.5 * ((i * 7919) % 13) as f64 / 13.0).collect();
    power_iteration(&start, tol, maxiter, |v| gram.apply_vec(v)).0.max(0.0).sqrt()
}

/// Dominant eigenvalue of an SPD map by power iteration with Rayleigh
/// quotients; returns `(estimate, converged)`.
fn power_iteration(start: &[f64], tol: f64, maxiter: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> (f64, bool) {
    let nv = norm(start);
    let mut v: Vec<f64> = start.iter().map(|a| a / nv).collect();
    let mut est = 0.0;
    for _ in 0..maxiter.max(1) {
        let av = apply(&v);
        let next = super::dot(&v, &av);
        let na = norm(&av);
        if na == 0.0 {
            return (0.0, true);
        }
        v = av.iter().map(|a| a / na).collect();
        if (next - est).abs() <= tol * next.abs() {
            return (next, true);
        }
        est = next;
    }
    (est, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{make_partial_dct, DenseMatrix};
    use crate::rng::Stream;

    #[test]
    fn orthonormal_rows() {
        let p = make_partial_dct(32, 12, 0).unwrap();
        let s = estimate_extremal_singular_values(&p, 1e-10, 100);
        assert!((s.sigma_max - 1.0).abs() < 1e-12 && (s.sigma_min - 1.0).abs() < 1e-12);
        let big = make_partial_dct(1000, 400, 0).unwrap();
        let s = estimate_extremal_singular_values(&big, 1e-10, 100);
        assert!(s.converged);
        assert!((s.sigma_max - 1.0).abs() < 1e-9 && (s.sigma_min - 1.0).abs() < 1e-9);
        assert!((estimate_operator_norm(&big, 1e-10, 100) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal() {
        let d = DenseMatrix::diag(&[1.0, 2.0]);
        let s = estimate_extremal_singular_values(&d, 1e-12, 100);
        assert!((s.sigma_max - 2.0).abs() < 1e-12 && (s.sigma_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_dense_matches_svd() {
        let mut st = Stream::new(5);
        let a = DenseMatrix::from_row_major(5, 12, st.normal_vec(60)).unwrap();
        let sv = a.to_nalgebra().singular_values();
        let s = estimate_extremal_singular_values(&a, 1e-12, 1000);
        assert!((s.sigma_max - sv.max()).abs() <= 1e-6 * sv.max());
        assert!((s.sigma_min - sv.min()).abs() <= 1e-6 * sv.min());
    }

    #[test]
    fn iterative_path_matches_svd() {
        let mut st = Stream::new(9);
        let a = DenseMatrix::from_row_major(70, 120, st.normal_vec(8400)).unwrap();
        let sv = a.to_nalgebra().singular_values();
        let s = estimate_extremal_singular_values(&a, 1e-13, 20000);
        assert!((s.sigma_max - sv.max()).abs() <= 1e-6 * sv.max(), "{} vs {}", s.sigma_max, sv.max());
        assert!((s.sigma_min - sv.min()).abs() <= 1e-6 * sv.min(), "{} vs {}", s.sigma_min, sv.min());
    }
}
