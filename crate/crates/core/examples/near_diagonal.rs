//! Fourteen double sweeps on a matrix whose corner starts ten times too large.

use urv::{refine, svd, RefineOptions, UpperTriangular};

fn main() -> urv::Result<()> {
    let r0 = UpperTriangular::from_rows(&[[1.0, 0.0, 1e-6], [0.0, 2.0, 1e-6], [0.0, 0.0, 10.0]])?;
    let opts = RefineOptions {
        tol_h: 0.0,
        tol_e_stagnation: 0.0,
        max_double_sweeps: 14,
        ..RefineOptions::default()
    };
    let report = refine(&r0, &opts)?;
    for rec in report.final_state.history().iter().step_by(4) {
        println!(
            "l = {:>2}  e = {:.16e}  |h| = {:.3e}",
            rec.l, rec.e, rec.h_norm
        );
    }
    let sigma_min = svd(r0.as_matrix())?.sigma_min();
    println!("e(28)     = {:.16e}", report.final_e);
    println!("sigma_min = {sigma_min:.16e}");
    println!(
        "rel err   = {:.1e}",
        (report.final_e - sigma_min).abs() / sigma_min
    );
    Ok(())
}
