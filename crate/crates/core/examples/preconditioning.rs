//! Inner iteration counts of CG-, PCG- and PCGm-IRLS-lambda on one noisy
//! instance, measured against the LASSO solution.

use sparse_irls::baselines::{fista, FistaConfig};
use sparse_irls::irls_lagrangian::{cg_irls_lambda, LagrangianConfig};
use sparse_irls::problems::{generate_setting, Msnr};

fn main() -> sparse_irls::Result<()> {
    let inst = generate_setting("desk-C", Msnr::finite(10.0)?, 0)?;
    let (n, m) = (inst.n(), inst.m());
    let lambda = inst.default_lambda();
    let (op, y) = (&inst.operator, &inst.y);
    let (reference, _) = fista(op, y, &FistaConfig { maxiter: 200_000, ..FistaConfig::new(lambda) }, None)?;

    for cfg in [
        LagrangianConfig::new(n, m, lambda, 1.0),
        LagrangianConfig::preconditioned(n, m, lambda, 1.0),
        LagrangianConfig::pcgm(n, m, lambda, 1.0),
    ] {
        let (_, trace) = cg_irls_lambda(op, y, &LagrangianConfig { maxiter_outer: 60, ..cfg.clone() }, Some(&reference))?;
        let mut inner = 0;
        let mut reached = None;
        for r in &trace.records {
            inner += r.inner_iterations;
            if reached.is_none() && r.rel_error.is_some_and(|e| e <= 1e-2) {
                reached = Some(inner);
            }
        }
        let last = trace.records.last().and_then(|r| r.rel_error).unwrap_or(f64::NAN);
        println!(
            "{:>16}: inner to 1e-2: {:>6}, total inner {:>6}, final rel err {last:.1e}",
            cfg.solver_name(),
            reached.map_or("-".to_string(), |v| v.to_string()),
            trace.total_inner()
        );
    }
    Ok(())
}
