//! URV refinement for nonsingular upper triangular matrices.
//!
//! The refinement alternates right and left sweeps of plane rotations that
//! drive the trailing corner entry of an upper triangular matrix down to its
//! smallest singular value. Around it the crate provides:
//!
//! - [`matrix`]: dense and triangular matrices, Givens kernels, Givens QR.
//! - [`oracle`]: an independent one-sided Jacobi SVD and a checker for the
//!   hypotheses under which the refinement is known to converge.
//! - [`refinement`]: the sweeps, factor accumulation, the stopping logic and a
//!   refine-and-deflate rank-revealing driver.
//! - [`diagnostics`]: per-iteration invariant monitors and a generator for
//!   test matrices with prescribed singular values.
//! - [`io`] and [`cli`]: CSV / MatrixMarket input, JSON-lines traces and the
//!   `urv` command line.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod refinement;

pub use error::{Error, Result};
pub use matrix::{GivensRotation, Matrix, UpperTriangular};
pub use oracle::{check_preconditions, svd, PreconditionReport, SvdResult, Verdict};
pub use refinement::{
    rank_revealing_urv, refine, ConvergenceReport, IterationRecord, RefineOptions, RefinementState,
    StopReason, UrvDecomposition,
};
