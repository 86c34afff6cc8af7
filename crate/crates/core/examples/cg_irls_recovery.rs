//! Noiseless recovery with exact IRLS, CG-IRLS and CG-IRLSm, plus an
//! observer that watches the smoothing parameter.

use sparse_irls::irls_equality::{cg_irls, cg_irls_modified, cg_irls_observed, irls_exact, EqualityConfig};
use sparse_irls::linalg::relative_error;
use sparse_irls::problems::{generate_setting, Msnr};
use sparse_irls::trace::OuterStep;

fn main() -> sparse_irls::Result<()> {
    let inst = generate_setting("desk-A", Msnr::Infinite, 0)?;
    let (n, m, k) = (inst.n(), inst.m(), inst.k);
    let big_k = (1.1 * k as f64).ceil() as usize;
    println!("N = {n}, m = {m}, k = {k}, K = {big_k}");

    let runs = [
        ("irls", irls_exact(&inst.operator, &inst.y, &EqualityConfig { maxiter_outer: 60, ..EqualityConfig::exact(n, big_k, 1.0) }, Some(&inst.x_star))?),
        ("cg-irls", cg_irls(&inst.operator, &inst.y, &EqualityConfig { maxiter_outer: 60, ..EqualityConfig::new(n, big_k, 1.0) }, Some(&inst.x_star))?),
        ("cg-irls-m", cg_irls_modified(&inst.operator, &inst.y, &EqualityConfig { maxiter_outer: 60, ..EqualityConfig::modified(n, m, big_k, 1.0) }, Some(&inst.x_star))?),
    ];
    for (name, (x, trace)) in &runs {
        println!(
            "{name:>10}: rel err {:.2e} after {} outer / {} inner iterations ({:?})",
            relative_error(x, &inst.x_star),
            trace.iterations(),
            trace.total_inner(),
            trace.stop
        );
    }

    let mut eps = Vec::new();
    let mut watch = |s: &OuterStep| eps.push(s.eps_new);
    cg_irls_observed(&inst.operator, &inst.y, &EqualityConfig::new(n, big_k, 0.8), None, &mut watch)?;
    let shown: Vec<String> = eps.iter().step_by(5).map(|e| format!("{e:.1e}")).collect();
    println!("tau = 0.8, eps every 5 steps: {}", shown.join(" "));
    Ok(())
}
