//! Every monitored invariant over a refinement of a generated matrix.

use urv::diagnostics::{
    generate_test_matrix, run_monitors, MonitorTolerances, TestMatrixSpec, VnnMode,
};
use urv::{refine, svd, RefineOptions};

fn main() -> urv::Result<()> {
    let r0 = generate_test_matrix(&TestMatrixSpec {
        n: 6,
        sigma: vec![1.0, 0.7, 0.4, 0.2, 0.05, 0.01],
        vnn_mode: VnnMode::Nonzero,
        seed: 7,
    })?;
    let report = refine(&r0, &RefineOptions::default())?;
    let svd0 = svd(r0.as_matrix())?;
    let mon = run_monitors(&report.final_state, &svd0, &MonitorTolerances::default())?;
    println!(
        "{} half-sweeps, final e = {:.15}, sigma_n = {:.15}",
        mon.half_sweeps,
        mon.final_e,
        svd0.sigma_min()
    );
    for c in &mon.checks {
        println!(
            "{:<26} {:?}  worst {:.2e}",
            c.check_id, c.status, c.worst_violation
        );
    }
    Ok(())
}
