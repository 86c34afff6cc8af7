//! Conjugate gradient on a small SPD system, the modified CG for a
//! minimum-norm solution, and a custom stopping rule.

use sparse_irls::krylov::{cg_solve, mcg_solve, StopContext, StopRule};
use sparse_irls::linalg::{norm, DenseMatrix, LinearMap};

fn main() -> sparse_irls::Result<()> {
    // A = diag(1, 2, 3, 4) with two off-diagonal couplings.
    let a = DenseMatrix::from_rows(&[
        vec![4.0, 1.0, 0.0, 0.0],
        vec![1.0, 3.0, 0.5, 0.0],
        vec![0.0, 0.5, 2.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ])?;
    let y = [1.0, 2.0, 3.0, 4.0];
    let (x, rep) = cg_solve(&a, &y, &[0.0; 4], &StopRule::floor(1e-14), None)?;
    let r: Vec<f64> = a.apply(&x).iter().zip(&y).map(|(ax, yi)| yi - ax).collect();
    println!("cg: x = {x:.6?}");
    println!("    {} iterations, ||y - Ax|| = {:.1e}, stop = {:?}", rep.iterations, norm(&r), rep.stop_reason);

    // Stop as soon as the first coordinate settles, whatever the residual.
    let settled = |ctx: &StopContext| ctx.iteration > 0 && (ctx.iterate[0] - x[0]).abs() < 1e-3;
    let (x1, rep) = cg_solve(&a, &y, &[0.0; 4], &StopRule::new(0.0, &settled), None)?;
    println!("custom stop after {} iterations: x[0] = {:.6}", rep.iterations, x1[0]);

    // Minimum-norm solution of an underdetermined system T x = y.
    let t = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 2.0, 0.0, -1.0]])?;
    let yt = [1.0, 2.0];
    let sol = mcg_solve(&t, &yt, &[0.0; 2], &StopRule::floor(1e-14), None)?;
    println!("mcg: x_bar = {:.6?}, ||x_bar|| = {:.6}", sol.x_bar, norm(&sol.x_bar));
    println!("     T x_bar = {:.6?}", t.apply(&sol.x_bar));
    Ok(())
}
