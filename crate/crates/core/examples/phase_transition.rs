//! A coarse recovery-rate grid for CG-IRLS and IHT.

use sparse_irls::bench::{run_phase_transition, PhaseConfig};

fn main() -> sparse_irls::Result<()> {
    let mut cfg = PhaseConfig::new(120, 4, 4, 4);
    cfg.params.tau = Some(0.5);
    let report = run_phase_transition(&cfg)?;
    print!("{}", report.table());
    Ok(())
}
