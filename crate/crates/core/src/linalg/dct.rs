use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use super::operator::{LinearMap, OperatorSpec};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Entry `(i, j)` of the full, non-normalized `N x N` cosine matrix
/// (1-based indices): 1 on the first row, `sqrt(2) cos(pi (2j-1)(i-1) / 2N)`
/// elsewhere.
pub fn dct_full_entry(i: usize, j: usize, n: usize) -> Result<f64> {
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::IndexOutOfRange(format!("({i}, {j}) outside 1..={n}")));
    }
    if i == 1 {
        return Ok(1.0);
    }
    let arg = PI * ((2 * j - 1) * (i - 1)) as f64 / (2 * n) as f64;
    Ok(std::f64::consts::SQRT_2 * arg.cos())
}

/// Rows `S` of the normalized cosine matrix `Phi_full / sqrt(N)`.
///
/// `apply` runs a length-`N` DCT-II and keeps the rows in `S`;
/// `apply_adjoint` zero-fills and runs a DCT-III. Both are `O(N log N)`.
#[derive(Clone)]
pub struct PartialDct {
    n: usize,
    rows: Vec<usize>,
    seed: Option<u64>,
    plan: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for PartialDct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialDct").field("n", &self.n).field("m", &self.rows.len()).field("seed", &self.seed).finish()
    }
}

/// `m` distinct rows drawn uniformly from the `N x N` normalized cosine
/// matrix with the stream seeded by `seed`.
pub fn make_partial_dct(n: usize, m: usize, seed: u64) -> Result<PartialDct> {
    PartialDct::random(n, m, seed)
}

impl PartialDct {
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Dimension(format!("need 1 <= m <= N, got m = {m}, N = {n}")));
        }
        let rows = Stream::new(seed).partial_permutation(n, m);
        let mut p = Self::from_rows(n, rows)?;
        p.seed = Some(seed);
        Ok(p)
    }

    /// Explicit 0-based row indices; they are sorted and must be distinct.
    pub fn from_rows(n: usize, mut rows: Vec<usize>) -> Result<Self> {
        if n == 0 || rows.is_empty() {
            return Err(Error::Dimension("partial DCT needs N >= 1 and at least one row".into()));
        }
        rows.sort_unstable();
        if rows.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate DCT rows".into()));
        }
        if let Some(&r) = rows.last().filter(|&&r| r >= n) {
            return Err(Error::IndexOutOfRange(format!("row {r} >= N = {n}")));
        }
        let plan = DctPlanner::new().plan_dct2(n);
        Ok(Self { n, rows, seed: None, plan })
    }

    /// Sorted 0-based row indices.
    pub fn row_indices(&self) -> &[usize] {
        &self.rows
    }

    pub fn spec(&self) -> OperatorSpec {
        match self.seed {
            Some(s) => OperatorSpec::PartialDct { n: self.n, m: self.rows.len(), seed: Some(s), rows: None },
            None => OperatorSpec::PartialDct {
                n: self.n,
                m: self.rows.len(),
                seed: None,
                rows: Some(self.rows.iter().map(|r| r + 1).collect()),
            },
        }
    }

    fn scale(&self) -> f64 {
        1.0 / (self.n as f64).sqrt()
    }
}

impl LinearMap for PartialDct {
    fn rows(&self) -> usize {
        self.rows.len()
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let mut buf = x.to_vec();
        // X_k = sum_j x_j cos(pi k (2j+1) / 2N)
        self.plan.process_dct2(&mut buf);
        let s = self.scale();
        let s2 = s * std::f64::consts::SQRT_2;
        for (o, &r) in out.iter_mut().zip(&self.rows) {
            *o = buf[r] * if r == 0 { s } else { s2 };
        }
    }

    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows.len());
        out.fill(0.0);
        let s = self.scale();
        let s2 = s * std::f64::consts::SQRT_2;
        for (&v, &r) in y.iter().zip(&self.rows) {
            // The DCT-III halves the k = 0 term.
            out[r] = v * if r == 0 { 2.0 * s } else { s2 };
        }
        self.plan.process_dct3(out);
    }

    /// `diag(Phi^* Phi)_j = (1/N) sum_{i in S} c_i^2 cos^2(pi i (2j+1) / 2N)`.
    /// Using `2 cos^2 t = 1 + cos 2t` the nonconstant part is one DCT-III at
    /// doubled frequencies, folded back into `0..N`.
    fn column_norms_sq(&self) -> Vec<f64> {
        let n = self.n;
        let mut buf = vec![0.0; n];
        for &r in &self.rows {
            if r == 0 {
                continue;
            }
            let f = 2 * r;
            if f < n {
                buf[f] += 1.0;
            } else if f > n {
                buf[2 * n - f] -= 1.0;
            }
        }
        self.plan.process_dct3(&mut buf);
        let base = self.rows.len() as f64;
        buf.iter().map(|v| (base + v) / n as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm, DenseMatrix};
    use proptest::prelude::*;

    fn dense_reference(p: &PartialDct) -> DenseMatrix {
        let n = p.cols();
        let rows: Vec<Vec<f64>> = p
            .row_indices()
            .iter()
            .map(|&r| (1..=n).map(|j| dct_full_entry(r + 1, j, n).unwrap() / (n as f64).sqrt()).collect())
            .collect();
        DenseMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn full_entry_examples() {
        assert_eq!(dct_full_entry(1, 5, 8).unwrap(), 1.0);
        assert!((dct_full_entry(2, 1, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((dct_full_entry(3, 2, 4).unwrap() + 1.0).abs() < 1e-15);
        assert!(dct_full_entry(0, 1, 4).is_err());
        assert!(dct_full_entry(5, 1, 4).is_err());
    }

    #[test]
    fn full_square_is_orthogonal() {
        let p = make_partial_dct(4, 4, 123).unwrap();
        let a = p.to_dense().to_nalgebra();
        let g = &a * a.transpose();
        assert!((g - nalgebra::DMatrix::<f64>::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn deterministic_rows() {
        let a = make_partial_dct(8, 3, 7).unwrap();
        let b = make_partial_dct(8, 3, 7).unwrap();
        assert_eq!(a.row_indices(), b.row_indices());
        let x: Vec<f64> = (0..8).map(|i| i as f64 - 2.5).collect();
        assert_eq!(a.apply(&x), b.apply(&x));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_partial_dct(4, 5, 0).is_err());
        assert!(make_partial_dct(4, 0, 0).is_err());
        assert!(PartialDct::from_rows(4, vec![1, 1]).is_err());
        assert!(PartialDct::from_rows(4, vec![4]).is_err());
    }

    #[test]
    fn closed_form_column_norms() {
        for (n, m, seed) in [(16, 5, 0), (17, 9, 1), (64, 64, 2), (100, 37, 3), (1, 1, 0)] {
            let p = make_partial_dct(n, m, seed).unwrap();
            let fast = p.column_norms_sq();
            let dense = dense_reference(&p).column_norms_sq();
            for (a, b) in fast.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-12, "N={n} m={m}: {a} vs {b}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn fast_matches_dense(n in 1usize..=64, frac in 0.05f64..1.0, seed in any::<u64>()) {
            let m = ((n as f64 * frac).ceil() as usize).clamp(1, n);
            let p = make_partial_dct(n, m, seed).unwrap();
            let d = dense_reference(&p);
            let mut s = Stream::new(seed ^ 1);
            let x = s.normal_vec(n);
            let y = s.normal_vec(m);
            for (a, b) in p.apply(&x).iter().zip(d.apply(&x)) {
                prop_assert!((a - b).abs() <= 1e-12 * norm(&x).max(1.0));
            }
            for (a, b) in p.apply_adjoint(&y).iter().zip(d.apply_adjoint(&y)) {
                prop_assert!((a - b).abs() <= 1e-12 * norm(&y).max(1.0));
            }
            let lhs = dot(&p.apply(&x), &y);
            let rhs = dot(&x, &p.apply_adjoint(&y));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * norm(&x) * norm(&y));
            let back = p.apply(&p.apply_adjoint(&y));
            let err: f64 = back.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-12 * norm(&y));
        }
    }
}
