use serde::Serialize;

use super::{sigma_min, svd, SvdResult};
use crate::error::{Error, Result};
use crate::matrix::UpperTriangular;

/// `|v_nn| <= VNN_ZERO_THRESHOLD` is reported as numerically zero.
pub const VNN_ZERO_THRESHOLD: f64 = 1e-10;

/// `sigma_{n-1} - sigma_n > SIMPLICITY_GAP_REL * sigma_1` declares `sigma_n`
/// simple.
pub const SIMPLICITY_GAP_REL: f64 = 1e-12;

/// `sigma_min(S) > sigma_min(R)` is accepted once the difference exceeds
/// `LEADING_GAP_ULPS * n * eps * sigma_min(S)`. The Jacobi oracle resolves
/// small singular values to a few ulps relative to themselves, and matrices
/// such as `[[1, 0, 1e-6], [0, 2, 1e-6], [0, 0, 10]]` have a gap of only
/// `5e-15` here.
pub const LEADING_GAP_ULPS: f64 = 2.0;

/// Which convergence guarantee applies to a starting matrix, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// `rho0 = |e| / sigma_min(S) < 1`.
    GuaranteedMs,
    /// `sigma_min(S) > sigma_min(R)`: `sigma_n` is simple and `v_nn != 0`.
    GuaranteedCorollary,
    /// Only `v_nn != 0` is known; the corner converges to `sigma_n`, but the
    /// singular vectors need not.
    Likely,
    /// `v_nn` is numerically zero: the iteration may stall at a stationary
    /// point away from `sigma_n`.
    StationaryRisk,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::GuaranteedMs => "GUARANTEED_MS",
            Verdict::GuaranteedCorollary => "GUARANTEED_COROLLARY",
            Verdict::Likely => "LIKELY",
            Verdict::StationaryRisk => "STATIONARY_RISK",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PreconditionReport {
    pub n: usize,
    /// Singular values of `R`, descending.
    pub sigma: Vec<f64>,
    /// `|e|`, the absolute corner entry.
    pub corner_abs: f64,
    /// `sigma_min(S)` for the leading `(n-1) x (n-1)` block.
    pub sigma_min_leading: f64,
    pub rho0: f64,
    pub rho_lt_one: bool,
    pub v_nn: f64,
    pub u_nn: f64,
    pub vnn_zero_threshold: f64,
    pub vnn_nonzero: bool,
    pub sigma_gap_simple: bool,
    pub smin_s_gt_smin_r: bool,
    pub verdict: Verdict,
}

impl PreconditionReport {
    pub fn sigma_n(&self) -> f64 {
        self.sigma[self.n - 1]
    }
}

/// Evaluates the convergence hypotheses for refining `r`, using the oracle SVD.
pub fn check_preconditions(r: &UpperTriangular) -> Result<PreconditionReport> {
    let n = r.n();
    if n < 2 {
        return Err(Error::TooSmall { n, min: 2 });
    }
    let full = svd(r.as_matrix())?;
    check_with_svd(r, &full)
}

pub(crate) fn check_with_svd(r: &UpperTriangular, full: &SvdResult) -> Result<PreconditionReport> {
    let n = r.n();
    if n < 2 {
        return Err(Error::TooSmall { n, min: 2 });
    }
    let sigma_min_leading = sigma_min(&r.as_matrix().leading_block(n - 1))?;
    let corner_abs = r.corner().abs();
    let rho0 = corner_abs / sigma_min_leading;

    let sigma1 = full.sigma_max();
    let sigma_n = full.sigma_min();
    let gap_floor = SIMPLICITY_GAP_REL * sigma1;
    let v_nn = full.v_nn();

    let rho_lt_one = rho0 < 1.0;
    let vnn_nonzero = v_nn.abs() > VNN_ZERO_THRESHOLD;
    let sigma_gap_simple = full.sigma[n - 2] - sigma_n > gap_floor;
    let leading_floor = LEADING_GAP_ULPS * n as f64 * f64::EPSILON * sigma_min_leading;
    let smin_s_gt_smin_r = sigma_min_leading - sigma_n > leading_floor;

    let verdict = if rho_lt_one {
        Verdict::GuaranteedMs
    } else if smin_s_gt_smin_r {
        Verdict::GuaranteedCorollary
    } else if vnn_nonzero {
        Verdict::Likely
    } else {
        Verdict::StationaryRisk
    };

    Ok(PreconditionReport {
        n,
        sigma: full.sigma.clone(),
        corner_abs,
        sigma_min_leading,
        rho0,
        rho_lt_one,
        v_nn,
        u_nn: full.u_nn(),
        vnn_zero_threshold: VNN_ZERO_THRESHOLD,
        vnn_nonzero,
        sigma_gap_simple,
        smin_s_gt_smin_r,
        verdict,
    })
}
