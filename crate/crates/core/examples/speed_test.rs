//! A small timed comparison on a desk-scale setting. Writes the CSV to
//! stdout after the summary table.

use sparse_irls::bench::{run_speed_test, SettingSpec, SpeedTestConfig};
use sparse_irls::solvers::SolverKind;

fn main() -> sparse_irls::Result<()> {
    let solvers = SolverKind::parse_list("iht,cg-irls-m,iht+cg-irls-m")?;
    let cfg = SpeedTestConfig::new(solvers, SettingSpec::Named("desk-A".into()), 5);
    let report = run_speed_test(&cfg)?;
    print!("{}", report.table());
    println!("trials where every solver succeeded: {}", report.trials_all_succeeded);
    report.write_csv(std::io::stdout().lock())?;
    Ok(())
}
