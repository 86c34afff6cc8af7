//! The subsampled DCT sensing operator: fast apply, its adjoint, and the
//! dense matrix it stands for.

use sparse_irls::linalg::{dct_full_entry, estimate_extremal_singular_values, max_abs, sub, LinearMap, PartialDct};
use sparse_irls::rng::Stream;

fn main() -> sparse_irls::Result<()> {
    let (n, m) = (64, 24);
    let op = PartialDct::random(n, m, 7)?;
    println!("rows kept: {:?}", op.row_indices());

    let x = Stream::new(1).normal_vec(n);
    let fast = op.apply(&x);
    let dense = op.to_dense();
    let slow = dense.apply(&x);
    println!("fast vs dense apply:   max diff {:.1e}", max_abs(&sub(&fast, &slow)));

    let y = Stream::new(2).normal_vec(m);
    let adj = op.apply_adjoint(&y);
    println!("fast vs dense adjoint: max diff {:.1e}", max_abs(&sub(&adj, &dense.apply_adjoint(&y))));

    // The kept rows come from the full cosine matrix (1-based entries),
    // scaled by 1/sqrt(N) so that they are orthonormal.
    let i = op.row_indices()[1];
    let row: Vec<f64> = (1..=n).map(|j| dct_full_entry(i + 1, j, n).unwrap() / (n as f64).sqrt()).collect();
    println!("row {i} from the formula vs dense: max diff {:.1e}", max_abs(&sub(&row, dense.row(1))));
    println!("its norm: {:.15}", row.iter().map(|v| v * v).sum::<f64>().sqrt());

    let s = estimate_extremal_singular_values(&op, 1e-12, 1000);
    println!("singular values in [{:.6}, {:.6}]", s.sigma_min, s.sigma_max);
    println!("manifest entry: {}", serde_json::to_string(&op.spec()).unwrap());
    Ok(())
}
