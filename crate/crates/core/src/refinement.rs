//! URV refinement of a nonsingular upper triangular matrix.
//!
//! Writing the iterate as
//!
//! ```text
//!          [ S  h ]                  [ S  0 ]
//! even l:  [ 0  e ]      odd l:      [ h  e ]
//! ```
//!
//! an odd half-sweep multiplies on the right by plane rotations in the planes
//! `(i, n)` that push the last column `h` into the last row, and an even
//! half-sweep multiplies on the left by rotations in the same planes that
//! push it back. The corner `e` never grows, and it converges to the smallest
//! singular value whenever the right singular vector of that value has a
//! nonzero last component.
//!
//! The corner is kept positive: a negative corner is flipped and the flip
//! (`diag(1, ..., 1, -1)`) is folded into the accumulated factor of the
//! half-sweep that produced it. With that convention
//! `G_even R0 G_odd^T = R(l)` holds exactly (up to rounding) at every even
//! `l`, where `G_odd` and `G_even` are the products of all odd and even
//! half-sweep factors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{givens_compute, two_norm_vector, Matrix, UpperTriangular};
use crate::oracle::{sigma_min, SvdResult};

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions {
    /// Stop once `|h| <= tol_h * |R0|_F` after an even half-sweep. Zero disables.
    pub tol_h: f64,
    /// Stop once the corner moved by at most `tol_e_stagnation * e` over a
    /// double sweep. Zero disables.
    pub tol_e_stagnation: f64,
    pub max_double_sweeps: usize,
    /// Compute `rho = e / sigma_min(S)` for every half-sweep (one oracle SVD each).
    pub record_rho: bool,
    pub accumulate_factors: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            tol_h: 1e-14,
            tol_e_stagnation: 1e-15,
            max_double_sweeps: 1000,
            record_rho: false,
            accumulate_factors: true,
        }
    }
}

impl RefineOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [
            ("tol_h", self.tol_h),
            ("tol_e_stagnation", self.tol_e_stagnation),
        ] {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(Error::InvalidOption(format!(
                    "{name} must be finite and nonnegative, got {tol}"
                )));
            }
        }
        if self.max_double_sweeps == 0 {
            return Err(Error::InvalidOption(
                "max_double_sweeps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One entry per half-sweep, `l = 0` included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub l: usize,
    /// Corner entry `r_nn`; always positive.
    pub e: f64,
    /// Norm of the off-diagonal part of the last column (even `l`) or last row (odd `l`).
    pub h_norm: f64,
    pub rho: Option<f64>,
    pub corner_flipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopReason {
    HNormTol,
    EStagnation,
    MaxIter,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::HNormTol => "H_NORM_TOL",
            StopReason::EStagnation => "E_STAGNATION",
            StopReason::MaxIter => "MAX_ITER",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub reason: StopReason,
    pub double_sweeps: usize,
    pub final_e: f64,
    pub final_state: RefinementState,
}

/// Current iterate, accumulated factors and per-half-sweep history.
#[derive(Debug, Clone)]
pub struct RefinementState {
    r0: Matrix,
    r: Matrix,
    l: usize,
    g_odd: Option<Matrix>,
    g_even: Option<Matrix>,
    history: Vec<IterationRecord>,
}

impl RefinementState {
    /// Starts a refinement with factor accumulation on.
    pub fn init(r0: &UpperTriangular) -> Result<Self> {
        Self::init_with(r0, true)
    }

    pub fn init_with(r0: &UpperTriangular, accumulate_factors: bool) -> Result<Self> {
        let n = r0.n();
        if n < 2 {
            return Err(Error::TooSmall { n, min: 2 });
        }
        let mut r = r0.as_matrix().clone();
        let flipped = r[(n - 1, n - 1)] < 0.0;
        let mut g_even = accumulate_factors.then(|| Matrix::identity(n));
        if flipped {
            r[(n - 1, n - 1)] = -r[(n - 1, n - 1)];
            if let Some(g) = g_even.as_mut() {
                g[(n - 1, n - 1)] = -1.0;
            }
        }
        let mut state = Self {
            r0: r0.as_matrix().clone(),
            r,
            l: 0,
            g_odd: accumulate_factors.then(|| Matrix::identity(n)),
            g_even,
            history: Vec::new(),
        };
        state.push_record(flipped);
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.r.rows()
    }

    /// Half-sweep counter.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn double_sweeps(&self) -> usize {
        self.l / 2
    }

    /// Current iterate `R(l)`.
    pub fn r(&self) -> &Matrix {
        &self.r
    }

    /// The matrix the refinement started from, before any corner flip.
    pub fn initial(&self) -> &Matrix {
        &self.r0
    }

    pub fn g_odd(&self) -> Option<&Matrix> {
        self.g_odd.as_ref()
    }

    pub fn g_even(&self) -> Option<&Matrix> {
        self.g_even.as_ref()
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn last_record(&self) -> &IterationRecord {
        self.history.last().expect("history starts at l = 0")
    }

    pub fn e(&self) -> f64 {
        let n = self.n();
        self.r[(n - 1, n - 1)]
    }

    pub fn h(&self) -> Vec<f64> {
        let n = self.n();
        if self.l.is_multiple_of(2) {
            (0..n - 1).map(|i| self.r[(i, n - 1)]).collect()
        } else {
            self.r.row(n - 1)[..n - 1].to_vec()
        }
    }

    pub fn h_norm(&self) -> f64 {
        two_norm_vector(&self.h())
    }

    /// Leading `(n-1) x (n-1)` block `S(l)`; upper triangular at every `l`.
    pub fn leading_block(&self) -> Matrix {
        self.r.leading_block(self.n() - 1)
    }

    /// Right half-sweep: `R <- R Q^T`, zeroing `r_in` against `r_ii` for
    /// `i = n-1, ..., 1`. Requires even `l`.
    pub fn odd_sweep(&mut self) -> Result<()> {
        if !self.l.is_multiple_of(2) {
            return Err(Error::WrongParity {
                op: "odd",
                expected: "an even",
                l: self.l,
            });
        }
        let last = self.n() - 1;
        for i in (0..last).rev() {
            let b = self.r[(i, last)];
            if b == 0.0 {
                continue;
            }
            let g = givens_compute(self.r[(i, i)], b).in_plane(i, last);
            self.r.rotate_cols(&g)?;
            self.r[(i, last)] = 0.0;
            if let Some(go) = self.g_odd.as_mut() {
                go.rotate_rows(&g)?;
            }
        }
        let flipped = self.normalize_corner(Parity::Odd);
        self.l += 1;
        self.push_record(flipped);
        Ok(())
    }

    /// Left half-sweep: `R <- Q R`, zeroing `r_ni` against `r_ii` for
    /// `i = 1, ..., n-1`. Requires odd `l`.
    pub fn even_sweep(&mut self) -> Result<()> {
        if self.l % 2 != 1 {
            return Err(Error::WrongParity {
                op: "even",
                expected: "an odd",
                l: self.l,
            });
        }
        let last = self.n() - 1;
        for i in 0..last {
            let b = self.r[(last, i)];
            if b == 0.0 {
                continue;
            }
            let g = givens_compute(self.r[(i, i)], b).in_plane(i, last);
            self.r.rotate_rows(&g)?;
            self.r[(last, i)] = 0.0;
            if let Some(ge) = self.g_even.as_mut() {
                ge.rotate_rows(&g)?;
            }
        }
        let flipped = self.normalize_corner(Parity::Even);
        self.l += 1;
        self.push_record(flipped);
        Ok(())
    }

    /// Odd half-sweep followed by even half-sweep.
    pub fn double_sweep(&mut self) -> Result<()> {
        self.odd_sweep()?;
        self.even_sweep()
    }

    /// Computes `rho(l) = e / sigma_min(S(l))` with the oracle and stores it
    /// on the latest record.
    pub fn record_rho(&mut self) -> Result<f64> {
        let rho = self.e().abs() / sigma_min(&self.leading_block())?;
        self.history.last_mut().expect("non-empty").rho = Some(rho);
        Ok(rho)
    }

    /// `(<g_odd, v0>, <g_even, u0>)`: inner products of the last rows of the
    /// accumulated factors with the last singular vectors of `R0`.
    pub fn alignment(&self, svd0: &SvdResult) -> Result<(f64, f64)> {
        let (go, ge) = match (&self.g_odd, &self.g_even) {
            (Some(go), Some(ge)) => (go, ge),
            _ => return Err(Error::FactorsNotAccumulated),
        };
        let n = self.n();
        if svd0.n() != n {
            return Err(Error::Dimension(format!(
                "SVD of order {} does not match state of order {n}",
                svd0.n()
            )));
        }
        let last = n - 1;
        let align_v = (0..n).map(|k| go[(last, k)] * svd0.v[(k, last)]).sum();
        let align_u = (0..n).map(|k| ge[(last, k)] * svd0.u[(k, last)]).sum();
        Ok((align_v, align_u))
    }

    fn normalize_corner(&mut self, parity: Parity) -> bool {
        let last = self.n() - 1;
        if self.r[(last, last)] >= 0.0 {
            return false;
        }
        // The rest of the last row (even) or last column (odd) is exactly zero,
        // so negating the corner is the same as applying diag(1, ..., 1, -1).
        self.r[(last, last)] = -self.r[(last, last)];
        let g = match parity {
            Parity::Odd => self.g_odd.as_mut(),
            Parity::Even => self.g_even.as_mut(),
        };
        if let Some(g) = g {
            for k in 0..=last {
                g[(last, k)] = -g[(last, k)];
            }
        }
        true
    }

    fn push_record(&mut self, corner_flipped: bool) {
        let record = IterationRecord {
            l: self.l,
            e: self.e(),
            h_norm: self.h_norm(),
            rho: None,
            corner_flipped,
        };
        self.history.push(record);
    }
}

#[derive(Clone, Copy)]
enum Parity {
    Odd,
    Even,
}

/// Runs double sweeps until one of the stopping rules in `opts` fires.
pub fn refine(r0: &UpperTriangular, opts: &RefineOptions) -> Result<ConvergenceReport> {
    opts.validate()?;
    let mut state = RefinementState::init_with(r0, opts.accumulate_factors)?;
    if opts.record_rho {
        state.record_rho()?;
    }
    let h_floor = opts.tol_h * r0.as_matrix().frobenius_norm();
    let mut reason = StopReason::MaxIter;
    for _ in 0..opts.max_double_sweeps {
        let e_prev = state.e();
        state.odd_sweep()?;
        if opts.record_rho {
            state.record_rho()?;
        }
        state.even_sweep()?;
        if opts.record_rho {
            state.record_rho()?;
        }
        let e = state.e();
        if opts.tol_h > 0.0 && state.h_norm() <= h_floor {
            reason = StopReason::HNormTol;
            break;
        }
        if opts.tol_e_stagnation > 0.0 && (e_prev - e).abs() <= opts.tol_e_stagnation * e {
            reason = StopReason::EStagnation;
            break;
        }
    }
    Ok(ConvergenceReport {
        converged: reason != StopReason::MaxIter,
        reason,
        double_sweeps: state.double_sweeps(),
        final_e: state.e(),
        final_state: state,
    })
}

/// Free-function form of [`RefinementState::alignment`].
pub fn alignment(state: &RefinementState, svd0: &SvdResult) -> Result<(f64, f64)> {
    state.alignment(svd0)
}

/// `R0 = U R V^T` with the small singular values pushed into the trailing
/// corner of `R`.
#[derive(Debug, Clone)]
pub struct UrvDecomposition {
    pub u: Matrix,
    pub r: UpperTriangular,
    pub v: Matrix,
    pub numerical_rank: usize,
    /// `rank_tol * max_i |r0_ii|`.
    pub threshold: f64,
}

/// Refine-and-deflate: refine the whole matrix, and while the converged
/// corner is below the threshold freeze it and continue on the leading block.
pub fn rank_revealing_urv(
    r0: &UpperTriangular,
    rank_tol: f64,
    opts: &RefineOptions,
) -> Result<UrvDecomposition> {
    if !(rank_tol.is_finite() && rank_tol > 0.0) {
        return Err(Error::InvalidOption(format!(
            "rank_tol must be positive, got {rank_tol}"
        )));
    }
    let opts = RefineOptions {
        accumulate_factors: true,
        ..opts.clone()
    };
    let n = r0.n();
    let threshold = rank_tol * (0..n).map(|i| r0[(i, i)].abs()).fold(0.0, f64::max);

    let mut r = r0.as_matrix().clone();
    let mut u = Matrix::identity(n);
    let mut v = Matrix::identity(n);
    let mut m = n;
    while m >= 2 {
        let block = UpperTriangular::new(r.leading_block(m))?;
        let report = refine(&block, &opts)?;
        let st = &report.final_state;
        let gl = st.g_even().expect("accumulated");
        let gr = st.g_odd().expect("accumulated");

        // Rows 0..m pick up G_even on the left; the block itself is replaced
        // by the refined iterate so its exact zeros survive.
        let top_right: Vec<Vec<f64>> = (0..m).map(|i| r.row(i)[m..].to_vec()).collect();
        for i in 0..m {
            for (jj, j) in (m..n).enumerate() {
                r[(i, j)] = (0..m).map(|k| gl[(i, k)] * top_right[k][jj]).sum();
            }
            for j in 0..m {
                r[(i, j)] = st.r()[(i, j)];
            }
        }
        u = mul_leading_cols_by_transpose(&u, gl, m);
        v = mul_leading_cols_by_transpose(&v, gr, m);

        if st.e() >= threshold {
            break;
        }
        m -= 1;
    }
    let r = UpperTriangular::new(r)?;
    let numerical_rank = (0..n).filter(|&i| r[(i, i)].abs() >= threshold).count();
    Ok(UrvDecomposition {
        u,
        r,
        v,
        numerical_rank,
        threshold,
    })
}

/// `A[:, 0..m] <- A[:, 0..m] G^T` for an `m x m` factor `G`.
fn mul_leading_cols_by_transpose(a: &Matrix, g: &Matrix, m: usize) -> Matrix {
    let mut out = a.clone();
    for i in 0..a.rows() {
        for j in 0..m {
            out[(i, j)] = (0..m).map(|k| a[(i, k)] * g[(j, k)]).sum();
        }
    }
    out
}
