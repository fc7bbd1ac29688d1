#![allow(dead_code)]

use urv::diagnostics::{
    generate_test_matrix, random_separated_profile, random_triangular, rng_from_seed,
    TestMatrixSpec, VnnMode,
};
use urv::{svd, Matrix, RefinementState, UpperTriangular};

pub fn near_diagonal() -> UpperTriangular {
    UpperTriangular::from_rows(&[[1.0, 0.0, 1e-6], [0.0, 2.0, 1e-6], [0.0, 0.0, 10.0]]).unwrap()
}

pub fn stationary_general() -> Matrix {
    Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 9.0, 1.0], [0.0, 1.0, 10.0]]).unwrap()
}

/// Triangular factor of [`stationary_general`].
pub fn stationary() -> UpperTriangular {
    UpperTriangular::from_general(&stationary_general())
        .unwrap()
        .1
}

/// Orders 2 through 12, cycling; seeds `base, base + 1, ...`.
pub fn triangular_corpus(count: usize, base: u64) -> Vec<UpperTriangular> {
    (0..count)
        .map(|k| random_triangular(2 + k % 11, base + k as u64))
        .collect()
}

/// Matrices with a separated smallest singular value and `|v_nn| > 1e-6`.
pub fn separated_corpus(count: usize, base: u64) -> Vec<UpperTriangular> {
    (0..count)
        .map(|k| {
            let n = 2 + k % 11;
            let seed = base + k as u64;
            let sigma = random_separated_profile(n, &mut rng_from_seed(seed ^ 0x5eed));
            generate_test_matrix(&TestMatrixSpec {
                n,
                sigma,
                vnn_mode: VnnMode::Nonzero,
                seed,
            })
            .unwrap()
        })
        .collect()
}

/// Re-runs `half_sweeps` half-sweeps from `r0`, calling `visit` at every `l`
/// including 0.
pub fn replay(r0: &UpperTriangular, half_sweeps: usize, mut visit: impl FnMut(&RefinementState)) {
    let mut st = RefinementState::init(r0).unwrap();
    visit(&st);
    while st.l() < half_sweeps {
        if st.l().is_multiple_of(2) {
            st.odd_sweep().unwrap();
        } else {
            st.even_sweep().unwrap();
        }
        visit(&st);
    }
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    svd(m).unwrap().sigma
}

pub fn orthogonality_defect(q: &Matrix) -> f64 {
    q.transpose()
        .matmul(q)
        .unwrap()
        .sub(&Matrix::identity(q.rows()))
        .unwrap()
        .frobenius_norm()
}

pub fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}
