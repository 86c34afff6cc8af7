//! CG-IRLS-lambda on noisy data: compare with FISTA on the LASSO objective
//! and look at the optimality conditions. At tau < 1 only a critical point
//! can be certified.

use sparse_irls::baselines::{fista, FistaConfig};
use sparse_irls::functionals::{critical_point_residual_tau, lasso_optimality_residual_with_zero_tol, objective_f};
use sparse_irls::irls_lagrangian::{cg_irls_lambda, LagrangianConfig};
use sparse_irls::problems::{generate_instance, Msnr};

fn main() -> sparse_irls::Result<()> {
    let inst = generate_instance(50, 20, 4, Msnr::finite(10.0)?, 3)?;
    let (op, y) = (&inst.operator, &inst.y);
    let lambda = inst.default_lambda();
    println!("sigma = {:.4}, lambda = {lambda:.4}", inst.sigma());

    let cfg = LagrangianConfig { maxiter_outer: 5000, ..LagrangianConfig::new(50, 20, lambda, 1.0) };
    let (x, trace) = cg_irls_lambda(op, y, &cfg, None)?;
    let (xf, _) = fista(op, y, &FistaConfig { maxiter: 200_000, ..FistaConfig::new(lambda) }, None)?;
    let (fi, ff) = (objective_f(&x, op, y, lambda, 1.0)?, objective_f(&xf, op, y, lambda, 1.0)?);
    println!("cg-irls-lambda: F = {fi:.12} after {} steps ({:?})", trace.iterations(), trace.stop);
    println!("fista:          F = {ff:.12}");
    println!("LASSO residual of the IRLS output: {:.2e}", lasso_optimality_residual_with_zero_tol(&x, op, y, lambda, 1e-6)?);

    let cfg = LagrangianConfig { maxiter_outer: 200, ..LagrangianConfig::new(50, 20, lambda, 0.8) };
    let (x8, _) = cg_irls_lambda(op, y, &cfg, None)?;
    println!(
        "tau = 0.8: F = {:.6}, critical-point residual {:.2e}",
        objective_f(&x8, op, y, lambda, 0.8)?,
        critical_point_residual_tau(&x8, op, y, lambda, 0.8, 2.0)?
    );
    Ok(())
}
