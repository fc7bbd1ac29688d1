//! Refine, deflate, repeat: two negligible singular values end up in the
//! trailing 2x2 block.

use urv::diagnostics::{generate_test_matrix, TestMatrixSpec, VnnMode};
use urv::{rank_revealing_urv, RefineOptions};

fn main() -> urv::Result<()> {
    let r0 = generate_test_matrix(&TestMatrixSpec {
        n: 4,
        sigma: vec![1.0, 0.5, 1e-10, 1e-11],
        vnn_mode: VnnMode::Nonzero,
        seed: 1,
    })?;
    println!("R0 = {:?}", r0.as_matrix());
    let d = rank_revealing_urv(&r0, 1e-6, &RefineOptions::default())?;
    println!(
        "numerical rank {} (threshold {:.1e})",
        d.numerical_rank, d.threshold
    );
    println!("R  = {:?}", d.r.as_matrix());
    let back = d.u.matmul(d.r.as_matrix())?.matmul(&d.v.transpose())?;
    println!(
        "|U R V^T - R0|_F = {:.1e}",
        back.sub(r0.as_matrix())?.frobenius_norm()
    );
    Ok(())
}
