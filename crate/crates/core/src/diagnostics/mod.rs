//! Invariant monitoring and test-matrix generation.

mod corpus;
mod monitors;

pub use corpus::{
    generate_test_matrix, generate_test_matrix_detailed, random_orthogonal,
    random_separated_profile, random_triangular, rng_from_seed, GeneratedMatrix, TestMatrixSpec,
    VnnMode, NONZERO_VNN_MIN, TINY_VNN,
};
pub use monitors::{
    run_monitors, CheckId, CheckResult, CheckStatus, MonitorReport, MonitorTolerances,
};
