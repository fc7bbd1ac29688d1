//! Test-matrix generation: random triangular corpora and triangular matrices
//! with prescribed singular values and a prescribed size of `v_nn`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{qr_decompose, Matrix, UpperTriangular};

/// Size of `|v_nn|` produced by [`VnnMode::Tiny`].
pub const TINY_VNN: f64 = 1e-8;

/// Lower bound on `|v_nn|` for [`VnnMode::Nonzero`].
pub const NONZERO_VNN_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnnMode {
    /// Generic right singular vector, `|v_nn| > 1e-6`.
    Nonzero,
    /// `v_nn = 0` exactly: the smallest singular value sits on a decoupled
    /// diagonal entry `d`, and the rest of the matrix is a triangular block `B`.
    Zero,
    /// `|v_nn| = 1e-8`.
    Tiny,
}

#[derive(Debug, Clone)]
pub struct TestMatrixSpec {
    pub n: usize,
    /// Singular values, positive and descending.
    pub sigma: Vec<f64>,
    pub vnn_mode: VnnMode,
    pub seed: u64,
}

/// A generated matrix together with what the generator knows about it.
#[derive(Debug, Clone)]
pub struct GeneratedMatrix {
    pub r: UpperTriangular,
    /// For [`VnnMode::Zero`]: position of the decoupled diagonal entry.
    pub decoupled_index: Option<usize>,
    /// For [`VnnMode::Zero`]: singular values of the coupled block, i.e. all
    /// but the smallest.
    pub coupled_sigma: Option<Vec<f64>>,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Upper triangular matrix whose singular values are `spec.sigma`.
pub fn generate_test_matrix(spec: &TestMatrixSpec) -> Result<UpperTriangular> {
    generate_test_matrix_detailed(spec).map(|g| g.r)
}

pub fn generate_test_matrix_detailed(spec: &TestMatrixSpec) -> Result<GeneratedMatrix> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::InfeasibleSpec(format!(
            "n must be at least 2, got {n}"
        )));
    }
    if spec.sigma.len() != n {
        return Err(Error::InfeasibleSpec(format!(
            "sigma profile has {} values for n = {n}",
            spec.sigma.len()
        )));
    }
    if spec.sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::InfeasibleSpec(
            "singular values must be positive and finite".into(),
        ));
    }
    if spec.sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InfeasibleSpec(
            "sigma profile must be descending".into(),
        ));
    }
    let mut rng = rng_from_seed(spec.seed);
    match spec.vnn_mode {
        VnnMode::Nonzero => {
            let v = loop {
                let v = random_orthogonal(n, &mut rng);
                if v[(n - 1, n - 1)].abs() > NONZERO_VNN_MIN {
                    break v;
                }
            };
            let r = triangular_with(&spec.sigma, &v, &mut rng)?;
            Ok(GeneratedMatrix {
                r,
                decoupled_index: None,
                coupled_sigma: None,
            })
        }
        VnnMode::Tiny => {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let v = orthogonal_with_last_column_tail(n, sign * TINY_VNN, &mut rng);
            let r = triangular_with(&spec.sigma, &v, &mut rng)?;
            Ok(GeneratedMatrix {
                r,
                decoupled_index: None,
                coupled_sigma: None,
            })
        }
        VnnMode::Zero => {
            let coupled = spec.sigma[..n - 1].to_vec();
            let block = if n - 1 == 1 {
                Matrix::diag(&coupled)
            } else {
                let v = random_orthogonal(n - 1, &mut rng);
                triangular_with(&coupled, &v, &mut rng)?.into_matrix()
            };
            let p = rng.random_range(0..n - 1);
            let d = if rng.random::<bool>() {
                spec.sigma[n - 1]
            } else {
                -spec.sigma[n - 1]
            };
            // Embed B on the index set {0..n} \ {p}; order is preserved, so
            // the result stays upper triangular.
            let others: Vec<usize> = (0..n).filter(|&k| k != p).collect();
            let mut m = Matrix::zeros(n, n);
            m[(p, p)] = d;
            for (bi, &i) in others.iter().enumerate() {
                for (bj, &j) in others.iter().enumerate() {
                    m[(i, j)] = block[(bi, bj)];
                }
            }
            Ok(GeneratedMatrix {
                r: UpperTriangular::new(m)?,
                decoupled_index: Some(p),
                coupled_sigma: Some(coupled),
            })
        }
    }
}

/// Haar-distributed orthogonal matrix (Givens QR of a Gaussian matrix with
/// the signs of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    let g = Matrix::new(n, n, data).expect("finite gaussian samples");
    let (mut q, r) = qr_decompose(&g).expect("square");
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Random nonsingular upper triangular matrix: off-diagonal entries uniform
/// in `(-1, 1)`, diagonal magnitudes uniform in `[0.1, 1)` with random sign.
pub fn random_triangular(n: usize, seed: u64) -> UpperTriangular {
    let mut rng = rng_from_seed(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let mag = rng.random_range(0.1..1.0);
        m[(i, i)] = if rng.random::<bool>() { mag } else { -mag };
        for j in (i + 1)..n {
            m[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    UpperTriangular::new(m).expect("diagonal bounded away from zero")
}

/// Descending profile with `sigma_1 = 1`, `sigma_n` in `[1e-3, 0.4]` and
/// `sigma_{n-1} / sigma_n` in `[1.25, 3]`, so that the smallest value is well
/// separated and the condition number stays below `1e3`.
pub fn random_separated_profile<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    assert!(n >= 2);
    let smallest = 10f64.powf(rng.random_range(-3.0..(0.4f64).log10()));
    let next = (smallest * rng.random_range(1.25..3.0)).min(1.0);
    let mut sigma = vec![1.0];
    let mut middle: Vec<f64> = (0..n.saturating_sub(3))
        .map(|_| 10f64.powf(rng.random_range(next.log10()..0.0)))
        .collect();
    middle.sort_by(|a, b| b.total_cmp(a));
    sigma.extend(middle);
    if n >= 3 {
        sigma.push(next);
    }
    sigma.push(smallest);
    sigma
}

fn triangular_with<R: Rng + ?Sized>(
    sigma: &[f64],
    v: &Matrix,
    rng: &mut R,
) -> Result<UpperTriangular> {
    let n = sigma.len();
    let mut us = random_orthogonal(n, rng);
    for i in 0..n {
        for (j, s) in sigma.iter().enumerate() {
            us[(i, j)] *= s;
        }
    }
    let a = us.matmul(&v.transpose())?;
    Ok(UpperTriangular::from_general(&a)?.1)
}

/// Orthogonal matrix whose last column is a random unit vector with last
/// entry `tail`.
fn orthogonal_with_last_column_tail<R: Rng + ?Sized>(n: usize, tail: f64, rng: &mut R) -> Matrix {
    let head: Vec<f64> = (0..n - 1).map(|_| rng.sample(StandardNormal)).collect();
    let norm = crate::matrix::two_norm_vector(&head);
    let scale = (1.0 - tail * tail).sqrt() / norm;
    let mut target: Vec<f64> = head.iter().map(|x| x * scale).collect();
    target.push(tail);

    // Householder reflector swapping e_n and target.
    let mut w = target.iter().map(|x| -x).collect::<Vec<_>>();
    w[n - 1] += 1.0;
    let wn2: f64 = w.iter().map(|x| x * x).sum();
    let mut h = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] -= 2.0 * w[i] * w[j] / wn2;
        }
    }
    let mut inner = Matrix::identity(n);
    if n > 2 {
        let q = random_orthogonal(n - 1, rng);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                inner[(i, j)] = q[(i, j)];
            }
        }
    } else if rng.random::<bool>() {
        inner[(0, 0)] = -1.0;
    }
    h.matmul(&inner).expect("square")
}
