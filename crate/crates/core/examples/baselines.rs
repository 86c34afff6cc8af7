//! The first-order baselines: IHT on noiseless data, FISTA on noisy data.

use sparse_irls::baselines::{fista, hard_threshold, iht, soft_threshold, FistaConfig, IhtConfig};
use sparse_irls::linalg::relative_error;
use sparse_irls::problems::{generate_setting, Msnr};

fn main() -> sparse_irls::Result<()> {
    println!("H_2(3, -1, 0.5, -4) = {:?}", hard_threshold(&[3.0, -1.0, 0.5, -4.0], 2));
    println!("S_1(3, -1, 0.5, -4) = {:?}", soft_threshold(&[3.0, -1.0, 0.5, -4.0], 1.0));

    let inst = generate_setting("desk-B", Msnr::Infinite, 4)?;
    let big_k = (1.1 * inst.k as f64).ceil() as usize;
    let (x, trace) = iht(&inst.operator, &inst.y, &IhtConfig::new(big_k), Some(&inst.x_star))?;
    println!("iht (K = {big_k}): rel err {:.2e} in {} iterations", relative_error(&x, &inst.x_star), trace.iterations());

    let noisy = generate_setting("desk-B", Msnr::finite(10.0)?, 4)?;
    let lambda = noisy.default_lambda();
    let (x, trace) = fista(&noisy.operator, &noisy.y, &FistaConfig::new(lambda), Some(&noisy.x_star))?;
    let support = x.iter().filter(|v| **v != 0.0).count();
    println!(
        "fista (lambda = {lambda:.3}): {} iterations, {support} nonzeros, rel err to x* {:.2e}, F = {:.6}",
        trace.iterations(),
        relative_error(&x, &noisy.x_star),
        trace.records.last().map_or(f64::NAN, |r| r.objective)
    );
    Ok(())
}
