use urv::{svd, Matrix};

fn main() -> urv::Result<()> {
    let a = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 9.0, 1.0], [0.0, 1.0, 10.0]])?;
    let d = svd(&a)?;
    println!("sigma  = {:?}", d.sigma);
    println!("v_nn   = {}", d.v_nn());
    println!("sweeps = {}", d.sweeps);
    let err = d.reconstruct().sub(&a)?.frobenius_norm();
    println!("|U S V^T - A|_F = {err:.1e}");
    Ok(())
}
