mod common;

use urv::diagnostics::{
    generate_test_matrix_detailed, random_separated_profile, rng_from_seed, run_monitors, CheckId,
    CheckStatus, MonitorTolerances, TestMatrixSpec, VnnMode, TINY_VNN,
};
use urv::{refine, svd, Matrix, RefineOptions, StopReason, UpperTriangular};

use common::{near_diagonal, rel_err, separated_corpus, stationary};

#[test]
fn monitors_hold_on_separated_corpus() {
    let corpus = separated_corpus(220, 9000);
    let mut limit_checked = 0;
    for (k, r0) in corpus.iter().enumerate() {
        let rep = refine(r0, &RefineOptions::default()).unwrap();
        let svd0 = svd(r0.as_matrix()).unwrap();
        let mon = run_monitors(&rep.final_state, &svd0, &MonitorTolerances::default()).unwrap();
        let bad: Vec<_> = mon
            .violations()
            .map(|c| {
                format!(
                    "{} {:.2e} at {:?}",
                    c.check_id, c.worst_violation, c.location
                )
            })
            .collect();
        assert!(bad.is_empty(), "matrix {k} (n = {}): {bad:?}", r0.n());
        if mon.get(CheckId::Thm2LimitE).status == CheckStatus::Holds {
            limit_checked += 1;
        }
    }
    assert!(limit_checked >= 200, "{limit_checked}");
}

#[test]
fn decoupled_matrices_converge_to_the_coupled_block() {
    for seed in 0..40u64 {
        let n = 3 + (seed as usize) % 8;
        let mut sigma = random_separated_profile(n, &mut rng_from_seed(seed + 400));
        // keep the decoupled value clearly the smallest
        sigma[n - 1] = sigma[n - 2] / 4.0;
        let g = generate_test_matrix_detailed(&TestMatrixSpec {
            n,
            sigma: sigma.clone(),
            vnn_mode: VnnMode::Zero,
            seed,
        })
        .unwrap();
        let svd0 = svd(g.r.as_matrix()).unwrap();
        assert!(svd0.v_nn().abs() <= 1e-12);

        let rep = refine(&g.r, &RefineOptions::default()).unwrap();
        assert!(rep.converged);
        let coupled = g.coupled_sigma.unwrap();
        let block_min = *coupled.last().unwrap();
        assert!(
            rel_err(rep.final_e, block_min) <= 1e-9,
            "seed {seed}: e = {}, block min = {block_min}",
            rep.final_e
        );
        assert!(rep.final_e > 2.0 * sigma[n - 1]);

        let mon = run_monitors(&rep.final_state, &svd0, &MonitorTolerances::default()).unwrap();
        assert_eq!(
            mon.get(CheckId::Thm2LimitE).status,
            CheckStatus::NotApplicable
        );
        let bad: Vec<_> = mon
            .violations()
            .map(|c| {
                format!(
                    "{} {:.2e} at {:?}",
                    c.check_id, c.worst_violation, c.location
                )
            })
            .collect();
        assert!(bad.is_empty(), "seed {seed}, n = {n}: {bad:?}");
    }
}

#[test]
fn tiny_vnn_converges_slowly() {
    // descriptive: iteration counts only, nothing asserted about the limit
    let sigma = vec![1.0, 0.5, 0.25, 0.1];
    let mut counts = Vec::new();
    for seed in 0..5 {
        let g = generate_test_matrix_detailed(&TestMatrixSpec {
            n: 4,
            sigma: sigma.clone(),
            vnn_mode: VnnMode::Tiny,
            seed,
        })
        .unwrap();
        let v_nn = svd(g.r.as_matrix()).unwrap().v_nn();
        assert!((v_nn.abs() - TINY_VNN).abs() <= 1e-9, "{v_nn}");
        let rep = refine(&g.r, &RefineOptions::default()).unwrap();
        counts.push((rep.double_sweeps, rep.reason));
    }
    println!("tiny v_nn: (double sweeps, reason) = {counts:?}");
    assert!(counts.iter().all(|&(d, _)| d >= 1));
}

#[test]
fn near_diagonal_after_fourteen_sweeps() {
    let r0 = near_diagonal();
    let opts = RefineOptions {
        tol_h: 0.0,
        tol_e_stagnation: 0.0,
        max_double_sweeps: 14,
        ..RefineOptions::default()
    };
    let rep = refine(&r0, &opts).unwrap();
    assert_eq!(rep.reason, StopReason::MaxIter);
    let svd0 = svd(r0.as_matrix()).unwrap();
    let mon = run_monitors(&rep.final_state, &svd0, &MonitorTolerances::default()).unwrap();
    assert!(mon.all_hold(), "{:?}", mon.violations().collect::<Vec<_>>());
    assert_eq!(mon.get(CheckId::Thm2LimitE).status, CheckStatus::Holds);
}

#[test]
fn stationary_counterexample_monitors() {
    let r0 = stationary();
    let rep = refine(&r0, &RefineOptions::default()).unwrap();
    let svd0 = svd(r0.as_matrix()).unwrap();
    let mon = run_monitors(&rep.final_state, &svd0, &MonitorTolerances::default()).unwrap();
    assert_eq!(mon.get(CheckId::Lemma2MonotoneE).status, CheckStatus::Holds);
    assert_eq!(
        mon.get(CheckId::Thm2LimitE).status,
        CheckStatus::NotApplicable
    );
    assert!((mon.final_e - 8.381_966_011_250_105).abs() <= 1e-9);
}

#[test]
fn generator_examples() {
    let g = generate_test_matrix_detailed(&TestMatrixSpec {
        n: 2,
        sigma: vec![2.0, 1.0],
        vnn_mode: VnnMode::Nonzero,
        seed: 3,
    })
    .unwrap();
    let s = svd(g.r.as_matrix()).unwrap().sigma;
    assert!(rel_err(s[0], 2.0) <= 1e-10 && rel_err(s[1], 1.0) <= 1e-10);

    let g = generate_test_matrix_detailed(&TestMatrixSpec {
        n: 3,
        sigma: vec![1.0; 3],
        vnn_mode: VnnMode::Nonzero,
        seed: 4,
    })
    .unwrap();
    let m = g.r.as_matrix();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((m[(i, j)].abs() - want).abs() <= 1e-12, "{m:?}");
        }
    }

    let root5 = 5f64.sqrt();
    let g = generate_test_matrix_detailed(&TestMatrixSpec {
        n: 3,
        sigma: vec![(21.0 + root5) / 2.0, (21.0 - root5) / 2.0, 1.0],
        vnn_mode: VnnMode::Zero,
        seed: 5,
    })
    .unwrap();
    let d = svd(g.r.as_matrix()).unwrap();
    assert!(d.v_nn().abs() <= 1e-12);
    assert!(rel_err(d.sigma_min(), 1.0) <= 1e-10);
}

#[test]
fn tolerances_are_explicit_and_overridable() {
    let r0 = UpperTriangular::new(
        Matrix::from_rows(&[[0.7, 0.3, -0.2], [0.0, -0.4, 0.9], [0.0, 0.0, 0.5]]).unwrap(),
    )
    .unwrap();
    let rep = refine(&r0, &RefineOptions::default()).unwrap();
    let svd0 = svd(r0.as_matrix()).unwrap();
    let strict = MonitorTolerances {
        factor_reconstruction: 0.0,
        ..MonitorTolerances::default()
    };
    let mon = run_monitors(&rep.final_state, &svd0, &strict).unwrap();
    let c = mon.get(CheckId::FactorReconstruction);
    assert_eq!(c.tolerance, 0.0);
    assert_eq!(c.status == CheckStatus::Holds, c.worst_violation == 0.0);
}
