//! Solvers by name, instance manifests and trace files.

use sparse_irls::problems::{generate_setting, InstanceManifest, Msnr};
use sparse_irls::solvers::{ProblemShape, Solver, SolverKind, SolverParams};
use sparse_irls::trace::IterateTrace;

fn main() -> sparse_irls::Result<()> {
    let inst = generate_setting("desk-A", Msnr::finite(20.0)?, 11)?;
    let mut manifest = Vec::new();
    inst.manifest(false).write_json(&mut manifest)?;
    println!("{}", String::from_utf8_lossy(&manifest));

    // The manifest alone is enough to rebuild the instance.
    let again = InstanceManifest::read_json(manifest.as_slice())?.instance(None)?;
    assert_eq!(again.y, inst.y);

    let params = SolverParams { tau: Some(0.9), maxiter_outer: Some(15), ..Default::default() };
    let kind: SolverKind = "pcg-irls-lambda".parse()?;
    let solver = Solver::new(kind, &ProblemShape::of(&inst), &params)?;
    println!("config: {}", solver.config_json());
    let (_, trace) = solver.solve(&inst.operator, &inst.y, Some(&inst.x_star))?;

    let mut jsonl = Vec::new();
    trace.write_jsonl(&mut jsonl, &solver.config_json())?;
    let (back, _) = IterateTrace::read_jsonl(jsonl.as_slice())?;
    assert_eq!(back, trace);
    for line in String::from_utf8_lossy(&jsonl).lines().take(4) {
        println!("{line}");
    }
    println!("... {} records", trace.records.len());
    Ok(())
}
