use urv::{check_preconditions, Matrix, UpperTriangular};

fn main() -> urv::Result<()> {
    let cases = [
        ("corner already small", Matrix::diag(&[1.0, 2.0, 0.5])),
        (
            "large corner, separated block",
            Matrix::from_rows(&[[1.0, 0.0, 1e-6], [0.0, 2.0, 1e-6], [0.0, 0.0, 10.0]])?,
        ),
        (
            "decoupled smallest value",
            UpperTriangular::from_general(&Matrix::from_rows(&[
                [1.0, 0.0, 0.0],
                [0.0, 9.0, 1.0],
                [0.0, 1.0, 10.0],
            ])?)?
            .1
            .into_matrix(),
        ),
    ];
    for (name, m) in cases {
        let rep = check_preconditions(&UpperTriangular::new(m)?)?;
        println!(
            "{name:<30} rho0 = {:<8.4} v_nn = {:<+10.3e} -> {}",
            rep.rho0,
            rep.v_nn,
            rep.verdict.as_str()
        );
    }
    Ok(())
}
