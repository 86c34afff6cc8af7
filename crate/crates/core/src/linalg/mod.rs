//! Vectors, linear maps and small spectral utilities.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; the helpers below are the only
//! BLAS-like kernels the solvers need.

mod dct;
mod operator;
mod spectral;

pub use dct::{dct_full_entry, make_partial_dct, PartialDct};
pub use operator::{DenseMatrix, LinearMap, Operator, OperatorSpec};
pub use spectral::{estimate_extremal_singular_values, estimate_operator_norm, SpectralEstimate};

use crate::error::{check_len, Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `||a - b|| / ||b||`, or `||a||` when `b = 0`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let nb = norm(b);
    let d = norm(&sub(a, b));
    if nb > 0.0 {
        d / nb
    } else {
        d
    }
}

/// `(sum |x_i|^p w_i)^(1/p)`.
pub fn weighted_norm(x: &[f64], w: &[f64], p: f64) -> Result<f64> {
    check_len("weight", w.len(), x.len())?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must lie in (0, inf)")));
    }
    if let Some(j) = w.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(format!("weight entry {j} = {} is not positive", w[j])));
    }
    let s: f64 = if p == 2.0 {
        x.iter().zip(w).map(|(a, b)| a * a * b).sum()
    } else {
        x.iter().zip(w).map(|(a, b)| a.abs().powf(p) * b).sum()
    };
    Ok(s.powf(1.0 / p))
}

/// `||x||_{l2(w)}` without validation; used in hot loops.
pub(crate) fn wnorm2(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(a, b)| a * a * b).sum::<f64>().sqrt()
}

/// Magnitudes sorted descending together with the source indices.
/// Equal magnitudes keep their original order.
pub fn nonincreasing_rearrangement(x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    let mags = perm.iter().map(|&i| x[i].abs()).collect();
    (mags, perm)
}

/// `r(x)_k` with 1-based `k`, or 0 when `k > N`. Linear time.
pub fn rearrangement_entry(x: &[f64], k: usize) -> f64 {
    if k == 0 || k > x.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let (_, v, _) = mags.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    *v
}

/// `sigma_K(x)_tau = sum_{j > K} r_j(x)^tau`.
pub fn best_k_term_error(x: &[f64], k: usize, tau: f64) -> Result<f64> {
    if k > x.len() {
        return Err(Error::InvalidParameter(format!("K = {k} exceeds N = {}", x.len())));
    }
    let (r, _) = nonincreasing_rearrangement(x);
    Ok(r[k..].iter().map(|v| v.powf(tau)).sum())
}
