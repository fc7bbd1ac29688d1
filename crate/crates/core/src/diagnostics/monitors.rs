//! Invariant monitors over a refinement run.
//!
//! [`run_monitors`] replays the refinement from the state's initial matrix
//! (the sweeps are deterministic, so the replay reproduces the history
//! exactly) and evaluates each check at every half-sweep against the oracle.
//!
//! Every check reports a normalized `worst_violation`: the largest amount by
//! which the monitored inequality failed, divided by the scale named in the
//! check's documentation. A check holds when that number is at most its
//! tolerance.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, UpperTriangular};
use crate::oracle::{self, svd, PreconditionReport, SvdResult};
use crate::refinement::RefinementState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckId {
    /// `sigma_min(T) <= min |t_ii|` for the triangular `S(l)` and, at even
    /// `l`, for `R(l)`. Scale: `|R0|_F`.
    Lemma1,
    /// `e(l) <= e(l-1)`. Scale: `e(0)`.
    Lemma2MonotoneE,
    /// `sigma_j(S(l)) >= sigma_j(S(l-1))` for all `j`. Scale: `sigma_1(R0)`.
    Thm1SigmaNondecreasing,
    /// `|h(l)| <= rho(l-1) ... rho(0) |h(0)|`. Scale: the bound itself.
    Thm1HProductBound,
    /// Singular values of `R(l)` equal those of `R0`. Scale: `sigma_1(R0)`.
    OrthogonalInvariance,
    /// `G_even R0 G_odd^T = R(l)`. Scale: `|R0|_F`.
    FactorReconstruction,
    /// `G_odd`, `G_even` orthogonal. Scale: `n`.
    FactorOrthogonality,
    /// `G_even U0 Sigma (G_odd V0)^T = R(l)`. Scale: `|R0|_F`.
    SvdPropagation,
    /// `sign(v_nn(l)) = sign(u_nn(l)) = sign(v_nn(0))`, zero staying zero.
    Lemma3SignPersistence,
    /// `sign(v_nn(0)) * <g_even, u0>` nondecreasing over double sweeps.
    Lemma4MonotoneAlignment,
    /// Final corner equals `sigma_n`. Scale: `sigma_n`.
    Thm2LimitE,
    /// Final `|<g_odd, v0>|` and `|<g_even, u0>|` reach 1.
    Thm2AlignmentLimit,
}

impl CheckId {
    pub const ALL: [CheckId; 12] = [
        CheckId::Lemma1,
        CheckId::Lemma2MonotoneE,
        CheckId::Thm1SigmaNondecreasing,
        CheckId::Thm1HProductBound,
        CheckId::OrthogonalInvariance,
        CheckId::FactorReconstruction,
        CheckId::FactorOrthogonality,
        CheckId::SvdPropagation,
        CheckId::Lemma3SignPersistence,
        CheckId::Lemma4MonotoneAlignment,
        CheckId::Thm2LimitE,
        CheckId::Thm2AlignmentLimit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::Lemma1 => "LEMMA1",
            CheckId::Lemma2MonotoneE => "LEMMA2_MONOTONE_E",
            CheckId::Thm1SigmaNondecreasing => "THM1_SIGMA_NONDECREASING",
            CheckId::Thm1HProductBound => "THM1_H_PRODUCT_BOUND",
            CheckId::OrthogonalInvariance => "ORTHOGONAL_INVARIANCE",
            CheckId::FactorReconstruction => "FACTOR_RECONSTRUCTION",
            CheckId::FactorOrthogonality => "FACTOR_ORTHOGONALITY",
            CheckId::SvdPropagation => "SVD_PROPAGATION",
            CheckId::Lemma3SignPersistence => "LEMMA3_SIGN_PERSISTENCE",
            CheckId::Lemma4MonotoneAlignment => "LEMMA4_MONOTONE_ALIGNMENT",
            CheckId::Thm2LimitE => "THM2_LIMIT_E",
            CheckId::Thm2AlignmentLimit => "THM2_ALIGNMENT_LIMIT",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// Slack allowed by each check, in the units described on [`CheckId`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorTolerances {
    pub lemma1: f64,
    pub lemma2: f64,
    pub sigma_nondecreasing: f64,
    pub h_product_bound: f64,
    pub orthogonal_invariance: f64,
    pub factor_reconstruction: f64,
    /// Multiplied by `n`.
    pub factor_orthogonality: f64,
    pub svd_propagation: f64,
    pub sign_persistence: f64,
    pub lemma4: f64,
    /// The alignment monotonicity check applies only when `|v_nn(0)|` exceeds this.
    pub lemma4_vnn_min: f64,
    pub limit_e: f64,
    pub alignment_limit: f64,
    /// The alignment limit is monitored only when
    /// `sigma_{n-1} - sigma_n > alignment_gap_rel * sigma_1`.
    pub alignment_gap_rel: f64,
}

impl Default for MonitorTolerances {
    fn default() -> Self {
        Self {
            lemma1: 1e-12,
            lemma2: 1e-14,
            sigma_nondecreasing: 1e-12,
            h_product_bound: 1e-12,
            orthogonal_invariance: 1e-12,
            factor_reconstruction: 1e-12,
            factor_orthogonality: 1e-12,
            svd_propagation: 1e-11,
            sign_persistence: 1e-12,
            lemma4: 1e-13,
            lemma4_vnn_min: 1e-6,
            limit_e: 1e-9,
            alignment_limit: 1e-6,
            alignment_gap_rel: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckStatus {
    Holds,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check_id: CheckId,
    pub status: CheckStatus,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Half-sweep index of the worst violation.
    pub location: Option<usize>,
}

impl CheckResult {
    /// True for checks that hold or do not apply.
    pub fn holds(&self) -> bool {
        self.status != CheckStatus::Violated
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorReport {
    pub half_sweeps: usize,
    pub final_e: f64,
    pub preconditions: PreconditionReport,
    pub checks: Vec<CheckResult>,
}

impl MonitorReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(CheckResult::holds)
    }

    pub fn get(&self, id: CheckId) -> &CheckResult {
        self.checks
            .iter()
            .find(|c| c.check_id == id)
            .expect("every check is evaluated")
    }

    pub fn violations(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.holds())
    }
}

/// Running maximum of a normalized violation.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    location: Option<usize>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            location: None,
        }
    }

    fn observe(&mut self, violation: f64, l: usize) {
        let v = if violation.is_nan() {
            f64::INFINITY
        } else {
            violation.max(0.0)
        };
        if self.location.is_none() || v > self.value {
            self.value = v;
            self.location = Some(l);
        }
    }
}

/// Evaluates every monitored property over the run that produced `state`.
///
/// `svd0` must be the oracle SVD of `state.initial()`. The limit checks
/// (`THM2_*`) compare the final iterate against the limit and are marked
/// not-applicable unless their hypotheses hold for `R0`.
pub fn run_monitors(
    state: &RefinementState,
    svd0: &SvdResult,
    tol: &MonitorTolerances,
) -> Result<MonitorReport> {
    let target_l = state.l();
    if target_l < 2 || state.history().len() != target_l + 1 {
        return Err(Error::MissingHistory);
    }
    let r0 = UpperTriangular::new(state.initial().clone())?;
    let n = r0.n();
    if svd0.n() != n {
        return Err(Error::Dimension(format!(
            "SVD of order {} does not match state of order {n}",
            svd0.n()
        )));
    }
    let pre = oracle::preconditions::check_with_svd(&r0, svd0)?;

    let r0_norm = r0.as_matrix().frobenius_norm();
    let sigma1 = svd0.sigma_max();
    let sigma_n = svd0.sigma_min();
    let v_nn = svd0.v_nn();
    let vnn_sign = v_nn.signum();
    let e0 = state.history()[0].e;

    let mut u_sigma = svd0.u.clone();
    for i in 0..n {
        for j in 0..n {
            u_sigma[(i, j)] *= svd0.sigma[j];
        }
    }

    let mut lemma1 = Worst::new();
    let mut lemma2 = Worst::new();
    let mut sigma_nd = Worst::new();
    let mut h_bound = Worst::new();
    let mut invariance = Worst::new();
    let mut recon = Worst::new();
    let mut ortho = Worst::new();
    let mut propagation = Worst::new();
    let mut sign = Worst::new();
    let mut lemma4 = Worst::new();

    let mut replay = RefinementState::init(&r0)?;
    let mut prev_sigma_s: Option<Vec<f64>> = None;
    let mut log_rho_sum = 0.0f64;
    let h0 = replay.h_norm();
    let mut prev_align_u: Option<f64> = None;

    loop {
        let l = replay.l();
        let r = replay.r();
        let e = replay.e();

        // sigma_min below the smallest |diagonal|: S(l) at every l, R(l) at even l.
        let s_block = replay.leading_block();
        let svd_s = svd(&s_block)?;
        let s_diag_min = (0..n - 1)
            .map(|i| s_block[(i, i)].abs())
            .fold(f64::INFINITY, f64::min);
        lemma1.observe((svd_s.sigma_min() - s_diag_min) / r0_norm, l);
        let svd_r = svd(r)?;
        if l % 2 == 0 {
            let r_diag_min = (0..n)
                .map(|i| r[(i, i)].abs())
                .fold(f64::INFINITY, f64::min);
            lemma1.observe((svd_r.sigma_min() - r_diag_min) / r0_norm, l);
        }

        // Corner nonincreasing.
        if l > 0 {
            let prev = replay.history()[l - 1].e;
            lemma2.observe((e - prev) / e0, l);
        }

        // Leading-block growth and the rho-product bound on |h|.
        if let Some(prev) = &prev_sigma_s {
            let drop = prev
                .iter()
                .zip(&svd_s.sigma)
                .map(|(p, c)| p - c)
                .fold(f64::NEG_INFINITY, f64::max);
            sigma_nd.observe(drop / sigma1, l);
        }
        if l > 0 {
            // in logs: the product underflows long before |h| does on slow runs
            let h = replay.h_norm();
            let violation = if h == 0.0 {
                0.0
            } else if h0 == 0.0 || log_rho_sum == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                (h.ln() - h0.ln() - log_rho_sum).exp_m1()
            };
            h_bound.observe(violation, l);
        }
        log_rho_sum += (e / svd_s.sigma_min()).ln();
        prev_sigma_s = Some(svd_s.sigma.clone());

        // Orthogonal invariance.
        let drift = svd_r
            .sigma
            .iter()
            .zip(&svd0.sigma)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        invariance.observe(drift / sigma1, l);

        // Factor relations.
        let go = replay.g_odd().expect("replay accumulates");
        let ge = replay.g_even().expect("replay accumulates");
        let rebuilt = ge.matmul(state.initial())?.matmul(&go.transpose())?;
        recon.observe(rebuilt.sub(r)?.frobenius_norm() / r0_norm, l);
        ortho.observe(
            orthogonality_defect(go).max(orthogonality_defect(ge)) / n as f64,
            l,
        );
        let propagated = ge
            .matmul(&u_sigma)?
            .matmul(&go.matmul(&svd0.v)?.transpose())?;
        propagation.observe(propagated.sub(r)?.frobenius_norm() / r0_norm, l);

        // Alignment signs and monotonicity.
        let (align_v, align_u) = replay.alignment(svd0)?;
        let current = if l % 2 == 1 { align_v } else { align_u };
        if v_nn.abs() <= tol.sign_persistence {
            sign.observe(current.abs(), l);
        } else {
            sign.observe(-vnn_sign * current, l);
        }
        if l % 2 == 0 {
            if let Some(prev) = prev_align_u {
                lemma4.observe(vnn_sign * (prev - align_u), l);
            }
            prev_align_u = Some(align_u);
        }

        if l == target_l {
            break;
        }
        if l % 2 == 0 {
            replay.odd_sweep()?;
        } else {
            replay.even_sweep()?;
        }
    }

    let mut checks = Vec::with_capacity(CheckId::ALL.len());
    let mut push = |id: CheckId, w: Worst, tolerance: f64, applicable: bool| {
        let status = if !applicable {
            CheckStatus::NotApplicable
        } else if w.value <= tolerance {
            CheckStatus::Holds
        } else {
            CheckStatus::Violated
        };
        checks.push(CheckResult {
            check_id: id,
            status,
            worst_violation: w.value,
            tolerance,
            location: w.location,
        });
    };
    push(CheckId::Lemma1, lemma1, tol.lemma1, true);
    push(CheckId::Lemma2MonotoneE, lemma2, tol.lemma2, true);
    push(
        CheckId::Thm1SigmaNondecreasing,
        sigma_nd,
        tol.sigma_nondecreasing,
        true,
    );
    push(
        CheckId::Thm1HProductBound,
        h_bound,
        tol.h_product_bound,
        true,
    );
    push(
        CheckId::OrthogonalInvariance,
        invariance,
        tol.orthogonal_invariance,
        true,
    );
    push(
        CheckId::FactorReconstruction,
        recon,
        tol.factor_reconstruction,
        true,
    );
    push(
        CheckId::FactorOrthogonality,
        ortho,
        tol.factor_orthogonality,
        true,
    );
    push(
        CheckId::SvdPropagation,
        propagation,
        tol.svd_propagation,
        true,
    );
    push(
        CheckId::Lemma3SignPersistence,
        sign,
        tol.sign_persistence,
        true,
    );
    push(
        CheckId::Lemma4MonotoneAlignment,
        lemma4,
        tol.lemma4,
        v_nn.abs() > tol.lemma4_vnn_min,
    );

    let final_e = replay.e();
    let mut limit = Worst::new();
    limit.observe((final_e - sigma_n).abs() / sigma_n, target_l);
    push(CheckId::Thm2LimitE, limit, tol.limit_e, pre.vnn_nonzero);

    let (align_v, align_u) = replay.alignment(svd0)?;
    let mut align = Worst::new();
    align.observe((1.0 - align_v.abs()).max(1.0 - align_u.abs()), target_l);
    let gap_ok = svd0.sigma[n - 2] - sigma_n > tol.alignment_gap_rel * sigma1;
    push(
        CheckId::Thm2AlignmentLimit,
        align,
        tol.alignment_limit,
        pre.vnn_nonzero && gap_ok,
    );

    Ok(MonitorReport {
        half_sweeps: target_l,
        final_e,
        preconditions: pre,
        checks,
    })
}

fn orthogonality_defect(q: &Matrix) -> f64 {
    let n = q.rows();
    q.transpose()
        .matmul(q)
        .and_then(|p| p.sub(&Matrix::identity(n)))
        .map(|d| d.frobenius_norm())
        .unwrap_or(f64::INFINITY)
}
