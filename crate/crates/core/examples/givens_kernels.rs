//! Plane rotations: compute, apply from either side, triangularize.

use urv::matrix::{apply_left, apply_right, givens_compute, qr_decompose};
use urv::Matrix;

fn main() -> urv::Result<()> {
    let g = givens_compute(3.0, 4.0);
    println!("givens(3, 4): c = {}, s = {}, r = {}", g.c, g.s, g.r);

    // zero the (2, 1) entry by rotating rows 1 and 2
    let m = Matrix::from_rows(&[[3.0, 1.0], [4.0, 2.0]])?;
    let left = apply_left(&m, &g.in_plane(0, 1))?;
    println!("left-rotated:  {left:?}");

    // zero the (1, 2) entry of [[1, 2], [0, 3]] by rotating columns 1 and 2
    let t = Matrix::from_rows(&[[1.0, 2.0], [0.0, 3.0]])?;
    let g = givens_compute(t[(0, 0)], t[(0, 1)]);
    let right = apply_right(&t, &g.in_plane(0, 1))?;
    println!("right-rotated: {right:?}");

    let a = Matrix::from_rows(&[[2.0, -1.0, 0.5], [1.0, 3.0, 2.0], [-4.0, 0.0, 1.0]])?;
    let (q, r) = qr_decompose(&a)?;
    let err = q.matmul(&r)?.sub(&a)?.frobenius_norm();
    println!("QR: R = {r:?}\n    |QR - A|_F = {err:.1e}");
    Ok(())
}
