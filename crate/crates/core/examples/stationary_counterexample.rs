//! When the smallest singular value lives on a decoupled diagonal entry the
//! corner settles on the smallest singular value of the other block instead.

use urv::{check_preconditions, refine, Matrix, RefineOptions, UpperTriangular};

fn main() -> urv::Result<()> {
    let a = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 9.0, 1.0], [0.0, 1.0, 10.0]])?;
    let (_, r0) = UpperTriangular::from_general(&a)?;
    println!("R0 = {:?}", r0.as_matrix());

    let pre = check_preconditions(&r0)?;
    println!(
        "verdict {}  v_nn = {}  sigma = {:?}",
        pre.verdict.as_str(),
        pre.v_nn,
        pre.sigma
    );

    let report = refine(&r0, &RefineOptions::default())?;
    println!(
        "stopped by {} after {} double sweeps, e = {:.12}",
        report.reason.as_str(),
        report.double_sweeps,
        report.final_e
    );
    println!("(19 - sqrt 5) / 2 = {:.12}", (19.0 - 5f64.sqrt()) / 2.0);
    Ok(())
}
