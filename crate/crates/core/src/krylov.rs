//! Conjugate gradient, the modified CG for minimum-norm solutions of
//! `T T^* theta = y`, and Jacobi-preconditioned CG.
//!
//! All three follow the textbook recursions with the residual recomputed
//! from scratch (`r = y - A x`) every step. Stopping is controlled by a
//! [`StopRule`]: an absolute floor on the residual norm plus an optional
//! caller predicate that sees the current iterate.

use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm, DenseMatrix, LinearMap};

/// Symmetric positive definite operator on `R^n`.
pub trait SpdOperator {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }
}

impl SpdOperator for DenseMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.rows(), self.cols());
        self.rows()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        LinearMap::apply_into(self, x, out)
    }
}

/// `T T^*` on `R^m`.
pub struct GramOperator<'a> {
    op: &'a dyn LinearMap,
}

impl<'a> GramOperator<'a> {
    pub fn new(op: &'a dyn LinearMap) -> Self {
        Self { op }
    }
}

impl SpdOperator for GramOperator<'_> {
    fn dim(&self) -> usize {
        self.op.rows()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let t = self.op.apply_adjoint(x);
        self.op.apply_into(&t, out);
    }
}

/// `Phi^* Phi + diag(shift)` on `R^N`.
pub struct NormalEquations<'a> {
    op: &'a dyn LinearMap,
    shift: &'a [f64],
}

impl<'a> NormalEquations<'a> {
    pub fn new(op: &'a dyn LinearMap, shift: &'a [f64]) -> Result<Self> {
        check_len("diagonal shift", shift.len(), op.cols())?;
        Ok(Self { op, shift })
    }
}

impl SpdOperator for NormalEquations<'_> {
    fn dim(&self) -> usize {
        self.op.cols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let t = self.op.apply(x);
        self.op.apply_adjoint_into(&t, out);
        for ((o, s), xi) in out.iter_mut().zip(self.shift).zip(x) {
            *o += s * xi;
        }
    }
}

/// `Phi diag(scale)`, the map `T = Phi D^{1/2}` used by the weighted
/// least-squares step.
pub struct ScaledColumns<'a> {
    op: &'a dyn LinearMap,
    scale: &'a [f64],
}

impl<'a> ScaledColumns<'a> {
    pub fn new(op: &'a dyn LinearMap, scale: &'a [f64]) -> Result<Self> {
        check_len("column scale", scale.len(), op.cols())?;
        Ok(Self { op, scale })
    }
}

impl LinearMap for ScaledColumns<'_> {
    fn rows(&self) -> usize {
        self.op.rows()
    }
    fn cols(&self) -> usize {
        self.op.cols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let sx: Vec<f64> = x.iter().zip(self.scale).map(|(a, b)| a * b).collect();
        self.op.apply_into(&sx, out);
    }
    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.op.apply_adjoint_into(y, out);
        for (o, s) in out.iter_mut().zip(self.scale) {
            *o *= s;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualBelowDelta,
    CustomPredicate,
    MaxIter,
    ExactZeroResidual,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
}

/// What a stopping predicate gets to see.
pub struct StopContext<'a> {
    pub iteration: usize,
    /// `||y - A x||` (CG/PCG) or `||rho||` (MCG).
    pub residual_norm: f64,
    /// Current `x` for CG/PCG, `x_bar = T^* theta` for MCG.
    pub iterate: &'a [f64],
}

pub type StopPredicate<'a> = &'a dyn Fn(&StopContext) -> bool;

#[derive(Clone, Copy)]
pub struct StopRule<'a> {
    pub floor: f64,
    pub predicate: Option<StopPredicate<'a>>,
    /// The predicate is not consulted before this many iterations.
    pub min_iterations: usize,
}

impl<'a> StopRule<'a> {
    pub fn new(floor: f64, predicate: StopPredicate<'a>) -> Self {
        Self { floor, predicate: Some(predicate), min_iterations: 0 }
    }

    pub fn floor(floor: f64) -> Self {
        Self { floor, predicate: None, min_iterations: 0 }
    }

    /// Stop only on an exactly zero residual or at `maxiter`.
    pub fn never() -> Self {
        Self::floor(0.0)
    }

    pub fn at_least(mut self, iterations: usize) -> Self {
        self.min_iterations = iterations;
        self
    }

    fn check(&self, iteration: usize, residual_norm: f64, iterate: &[f64]) -> Option<StopReason> {
        if residual_norm == 0.0 {
            return Some(StopReason::ExactZeroResidual);
        }
        if residual_norm <= self.floor {
            return Some(StopReason::ResidualBelowDelta);
        }
        if let Some(p) = self.predicate.filter(|_| iteration >= self.min_iterations) {
            if p(&StopContext { iteration, residual_norm, iterate }) {
                return Some(StopReason::CustomPredicate);
            }
        }
        None
    }
}

const CURVATURE_ZERO: f64 = 1e-300;

fn report(iterations: usize, residual: f64, reason: StopReason) -> KrylovReport {
    KrylovReport { iterations, final_residual_norm: residual, converged: reason != StopReason::MaxIter, stop_reason: reason }
}

/// Returns `Ok(true)` when the step must stop because the direction has
/// vanished, or an error for negative / zero curvature.
fn check_curvature(pap: f64, pp: f64, iteration: usize) -> Result<bool> {
    if !pap.is_finite() {
        return Err(Error::Breakdown { iteration, what: "non-finite curvature" });
    }
    if pap < -CURVATURE_ZERO {
        return Err(Error::NotPositiveDefinite { iteration, curvature: pap });
    }
    if pap <= CURVATURE_ZERO {
        if pp <= CURVATURE_ZERO {
            return Ok(true);
        }
        return Err(Error::NotPositiveDefinite { iteration, curvature: pap });
    }
    Ok(false)
}

fn finite(v: &[f64], iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Breakdown { iteration, what: "non-finite iterate" })
    }
}

/// Conjugate gradient for `A x = y` from `x0`.
///
/// `maxiter` defaults to `dim + 2`.
pub fn cg_solve<A: SpdOperator + ?Sized>(
    a: &A,
    y: &[f64],
    x0: &[f64],
    stop: &StopRule,
    maxiter: Option<usize>,
) -> Result<(Vec<f64>, KrylovReport)> {
    krylov_core(a, None, y, x0, stop, maxiter)
}

/// Preconditioned CG with diagonal `M^{-1}` applied to residuals. The
/// reported residual is the unpreconditioned `||y - A x||`. With
/// `M^{-1} = I` the iterates coincide exactly with [`cg_solve`].
pub fn pcg_solve<A: SpdOperator + ?Sized>(
    a: &A,
    m_inv: &[f64],
    y: &[f64],
    x0: &[f64],
    stop: &StopRule,
    maxiter: Option<usize>,
) -> Result<(Vec<f64>, KrylovReport)> {
    check_len("preconditioner", m_inv.len(), a.dim())?;
    if let Some(j) = m_inv.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("preconditioner entry {j} = {} is not positive", m_inv[j])));
    }
    krylov_core(a, Some(m_inv), y, x0, stop, maxiter)
}

fn krylov_core<A: SpdOperator + ?Sized>(
    a: &A,
    m_inv: Option<&[f64]>,
    y: &[f64],
    x0: &[f64],
    stop: &StopRule,
    maxiter: Option<usize>,
) -> Result<(Vec<f64>, KrylovReport)> {
    let n = a.dim();
    check_len("right-hand side", y.len(), n)?;
    check_len("initial vector", x0.len(), n)?;
    let maxiter = maxiter.unwrap_or(n + 2);
    let precondition = |r: &[f64]| -> Vec<f64> {
        match m_inv {
            Some(d) => r.iter().zip(d).map(|(a, b)| a * b).collect(),
            None => r.to_vec(),
        }
    };

    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    a.apply_into(&x, &mut ax);
    let mut r: Vec<f64> = y.iter().zip(&ax).map(|(a, b)| a - b).collect();
    let mut p = precondition(&r);
    let mut ap = vec![0.0; n];
    let mut i = 0;
    loop {
        let rn = norm(&r);
        if !rn.is_finite() {
            return Err(Error::Breakdown { iteration: i, what: "non-finite residual" });
        }
        if let Some(reason) = stop.check(i, rn, &x) {
            return Ok((x, report(i, rn, reason)));
        }
        if i >= maxiter {
            return Ok((x, report(i, rn, StopReason::MaxIter)));
        }
        a.apply_into(&p, &mut ap);
        let pap = dot(&ap, &p);
        if check_curvature(pap, dot(&p, &p), i)? {
            return Ok((x, report(i, rn, StopReason::ExactZeroResidual)));
        }
        let step = dot(&r, &p) / pap;
        axpy(step, &p, &mut x);
        finite(&x, i)?;
        a.apply_into(&x, &mut ax);
        for ((ri, yi), axi) in r.iter_mut().zip(y).zip(&ax) {
            *ri = yi - axi;
        }
        let z = precondition(&r);
        let b = dot(&ap, &z) / pap;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi - b * *pi;
        }
        i += 1;
    }
}

/// Output of [`mcg_solve`].
#[derive(Clone, Debug)]
pub struct McgSolution {
    /// `x_bar = T^* theta`.
    pub x_bar: Vec<f64>,
    pub theta: Vec<f64>,
    pub report: KrylovReport,
}

/// Modified CG: CG on `T T^* theta = y` that also tracks
/// `x_bar = T^* theta`, which converges to the minimum-norm solution of
/// `T x = y`. One forward and one adjoint application per iteration.
///
/// The stop predicate sees `x_bar`; `maxiter` defaults to `m + 2`.
pub fn mcg_solve(
    t: &dyn LinearMap,
    y: &[f64],
    theta0: &[f64],
    stop: &StopRule,
    maxiter: Option<usize>,
) -> Result<McgSolution> {
    let m = t.rows();
    check_len("right-hand side", y.len(), m)?;
    check_len("initial vector", theta0.len(), m)?;
    let maxiter = maxiter.unwrap_or(m + 2);

    let mut theta = theta0.to_vec();
    let mut x_bar = t.apply_adjoint(&theta);
    let mut tx = t.apply(&x_bar);
    let mut rho: Vec<f64> = y.iter().zip(&tx).map(|(a, b)| a - b).collect();
    let mut p = rho.clone();
    let mut tp = t.apply_adjoint(&p);
    let mut t_rho = vec![0.0; t.cols()];
    let mut i = 0;
    loop {
        let rn = norm(&rho);
        if !rn.is_finite() {
            return Err(Error::Breakdown { iteration: i, what: "non-finite residual" });
        }
        let done = stop.check(i, rn, &x_bar).or((i >= maxiter).then_some(StopReason::MaxIter));
        if let Some(reason) = done {
            return Ok(McgSolution { x_bar, theta, report: report(i, rn, reason) });
        }
        let tp2 = dot(&tp, &tp);
        if check_curvature(tp2, dot(&p, &p), i)? {
            return Ok(McgSolution { x_bar, theta, report: report(i, rn, StopReason::ExactZeroResidual) });
        }
        let alpha = dot(&rho, &p) / tp2;
        axpy(alpha, &p, &mut theta);
        axpy(alpha, &tp, &mut x_bar);
        finite(&x_bar, i)?;
        t.apply_into(&x_bar, &mut tx);
        for ((ri, yi), ti) in rho.iter_mut().zip(y).zip(&tx) {
            *ri = yi - ti;
        }
        t.apply_adjoint_into(&rho, &mut t_rho);
        let beta = dot(&tp, &t_rho) / tp2;
        for (pi, ri) in p.iter_mut().zip(&rho) {
            *pi = ri - beta * *pi;
        }
        for (tpi, tri) in tp.iter_mut().zip(&t_rho) {
            *tpi = tri - beta * *tpi;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use std::cell::RefCell;

    fn random_spd(n: usize, seed: u64) -> DenseMatrix {
        let mut s = Stream::new(seed);
        let m = nalgebra::DMatrix::from_row_slice(n, n, &s.normal_vec(n * n));
        let a = m.transpose() * &m + nalgebra::DMatrix::identity(n, n);
        DenseMatrix::from_nalgebra(&a)
    }

    #[test]
    fn identity_one_step() {
        let a = DenseMatrix::identity(5);
        let y = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let (x, r) = cg_solve(&a, &y, &[0.0; 5], &StopRule::never(), None).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.stop_reason, StopReason::ExactZeroResidual);
        assert_eq!(x, y);
    }

    #[test]
    fn diagonal_two_steps() {
        let a = DenseMatrix::diag(&[1.0, 2.0]);
        let (x, r) = cg_solve(&a, &[1.0, 1.0], &[0.0; 2], &StopRule::floor(1e-14), None).unwrap();
        assert!(r.iterations <= 2 && r.converged);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn random_spd_matches_cholesky() {
        let a = random_spd(10, 3);
        let y = Stream::new(4).normal_vec(10);
        let (x, _) = cg_solve(&a, &y, &[0.0; 10], &StopRule::floor(1e-13), None).unwrap();
        let direct = a.to_nalgebra().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(y));
        let err = (nalgebra::DVector::from_vec(x) - &direct).norm() / direct.norm();
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn at_least_skips_satisfied_start() {
        let a = random_spd(6, 2);
        let y = Stream::new(3).normal_vec(6);
        let pred = |_: &StopContext| true;
        let (_, r) = cg_solve(&a, &y, &[0.0; 6], &StopRule::new(0.0, &pred), None).unwrap();
        assert_eq!(r.iterations, 0);
        let (_, r) = cg_solve(&a, &y, &[0.0; 6], &StopRule::new(0.0, &pred).at_least(1), None).unwrap();
        assert_eq!((r.iterations, r.stop_reason), (1, StopReason::CustomPredicate));
    }

    #[test]
    fn objective_decreases() {
        let a = random_spd(20, 8);
        let y = Stream::new(9).normal_vec(20);
        let f = |x: &[f64]| 0.5 * dot(x, &a.apply_vec(x)) - dot(x, &y);
        let seen = RefCell::new(Vec::new());
        let pred = |c: &StopContext| {
            seen.borrow_mut().push(f(c.iterate));
            false
        };
        cg_solve(&a, &y, &[0.0; 20], &StopRule::new(1e-12, &pred), None).unwrap();
        let v = seen.into_inner();
        assert!(v.len() > 3);
        for w in v.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * v[0].abs().max(1.0));
        }
    }

    #[test]
    fn indefinite_is_reported() {
        let a = DenseMatrix::diag(&[1.0, -1.0]);
        let e = cg_solve(&a, &[0.0, 1.0], &[0.0; 2], &StopRule::never(), None).unwrap_err();
        assert!(matches!(e, Error::NotPositiveDefinite { .. }));
        assert!(e.is_numerical());
    }

    #[test]
    fn nan_is_breakdown() {
        let a = DenseMatrix::diag(&[1.0, f64::NAN]);
        assert!(cg_solve(&a, &[1.0, 1.0], &[0.0; 2], &StopRule::never(), None).unwrap_err().is_numerical());
    }

    #[test]
    fn maxiter_respected() {
        let a = random_spd(30, 1);
        let y = Stream::new(2).normal_vec(30);
        let (_, r) = cg_solve(&a, &y, &[0.0; 30], &StopRule::never(), Some(3)).unwrap();
        assert_eq!(r.iterations, 3);
        assert_eq!(r.stop_reason, StopReason::MaxIter);
        assert!(!r.converged);
    }

    #[test]
    fn pcg_exact_preconditioner() {
        let d = [3.0, 0.5, 7.0, 2.0];
        let a = DenseMatrix::diag(&d);
        let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
        let y = [1.0, 2.0, 3.0, 4.0];
        let (x, r) = pcg_solve(&a, &inv, &y, &[0.0; 4], &StopRule::floor(1e-14), None).unwrap();
        assert_eq!(r.iterations, 1);
        for j in 0..4 {
            assert!((x[j] - y[j] / d[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn pcg_identity_equals_cg() {
        let a = random_spd(12, 5);
        let y = Stream::new(6).normal_vec(12);
        let stop = StopRule::floor(1e-11);
        let (x1, r1) = cg_solve(&a, &y, &[0.0; 12], &stop, None).unwrap();
        let (x2, r2) = pcg_solve(&a, &[1.0; 12], &y, &[0.0; 12], &stop, None).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn pcg_rejects_nonpositive() {
        let a = DenseMatrix::identity(2);
        assert!(pcg_solve(&a, &[1.0, 0.0], &[1.0, 1.0], &[0.0; 2], &StopRule::never(), None).is_err());
    }

    #[test]
    fn mcg_orthonormal_rows() {
        let t = crate::linalg::make_partial_dct(16, 6, 2).unwrap();
        let y = Stream::new(1).normal_vec(6);
        let s = mcg_solve(&t, &y, &[0.0; 6], &StopRule::floor(1e-14), None).unwrap();
        assert_eq!(s.report.iterations, 1);
        let expect = t.apply_adjoint(&y);
        for (a, b) in s.x_bar.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in s.theta.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mcg_diagonal_example() {
        let t = DenseMatrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 0.0]]).unwrap();
        let s = mcg_solve(&t, &[4.0, 9.0], &[0.0; 2], &StopRule::floor(1e-14), None).unwrap();
        assert!(s.report.iterations <= 2);
        for (a, b) in s.x_bar.iter().zip(&[2.0, 3.0, 0.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn mcg_warm_start_at_solution_stops_immediately() {
        let t = DenseMatrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 0.0]]).unwrap();
        let s = mcg_solve(&t, &[4.0, 9.0], &[1.0, 1.0], &StopRule::floor(1e-14), None).unwrap();
        assert_eq!(s.report.iterations, 0);
        assert_eq!(s.x_bar, vec![2.0, 3.0, 0.0]);
    }
}
