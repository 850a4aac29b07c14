use std::cmp::Ordering;
use std::f64::consts::PI;

use super::jacobi::joint_diagonalize;
use super::{DenseMatrix, Field, C64, I, ZERO};
use crate::error::{Error, Result};
use crate::metrics::NormSpec;

/// Arguments this close to -pi are read as +pi.
pub(crate) const BRANCH_SNAP: f64 = 1e-12;

/// Eigenvalues of an orthogonal matrix within this distance of -1 are
/// treated as one rotation-by-pi cluster by the real logarithm.
const REAL_LOG_CLUSTER: f64 = 0.25;

const DEFAULT_SWEEPS: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct EigOptions {
    /// Tolerance on `||m m* - m* m||_F`, relative to `||m||_F^2`.
    pub normality_tol: f64,
    pub max_sweeps: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            normality_tol: 1e-8,
            max_sweeps: DEFAULT_SWEEPS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Sorted by principal argument in (-pi, pi], then modulus.
    pub eigenvalues: Vec<C64>,
    /// Columns are the matching unit eigenvectors.
    pub eigenvectors: DenseMatrix,
    pub sweeps: usize,
    /// `||V* V - I||_max`
    pub orthonormality_residual: f64,
    /// `||V diag V* - m||_max`
    pub reconstruction_residual: f64,
}

/// Principal argument in (-pi, pi]. Arguments within `1e-12` of -pi map to pi.
pub fn principal_arg(z: C64) -> f64 {
    let t = z.im.atan2(z.re);
    if t <= -PI + BRANCH_SNAP {
        PI
    } else {
        t
    }
}

fn split_normal(m: &DenseMatrix) -> Vec<Vec<C64>> {
    let adj = m.adjoint();
    let h: Vec<C64> = m
        .as_slice()
        .iter()
        .zip(adj.as_slice())
        .map(|(a, b)| (a + b) * 0.5)
        .collect();
    let k: Vec<C64> = m
        .as_slice()
        .iter()
        .zip(adj.as_slice())
        .map(|(a, b)| (a - b) * C64::new(0.0, -0.5))
        .collect();
    let mut mats = vec![h];
    if k.iter().any(|z| *z != ZERO) {
        mats.push(k);
    }
    mats
}

/// Unsorted eigenpairs of a normal matrix; no normality check.
pub(crate) fn normal_eig(m: &DenseMatrix) -> Result<(Vec<C64>, DenseMatrix)> {
    let n = m.n();
    let mut mats = split_normal(m);
    let rot = joint_diagonalize(&mut mats, n, true, DEFAULT_SWEEPS)?;
    let vals = diag_values(&mats, n);
    let v = DenseMatrix::from_raw(n, Field::Complex, rot.vectors.expect("vectors requested"));
    Ok((vals, v))
}

/// Unsorted eigenvalues of a normal matrix; no normality check.
pub(crate) fn normal_eigenvalues(m: &DenseMatrix) -> Result<Vec<C64>> {
    let n = m.n();
    let mut mats = split_normal(m);
    joint_diagonalize(&mut mats, n, false, DEFAULT_SWEEPS)?;
    Ok(diag_values(&mats, n))
}

fn diag_values(mats: &[Vec<C64>], n: usize) -> Vec<C64> {
    (0..n)
        .map(|j| {
            let re = mats[0][j * n + j].re;
            let im = mats.get(1).map_or(0.0, |k| k[j * n + j].re);
            C64::new(re, im)
        })
        .collect()
}

pub fn eig_normal(m: &DenseMatrix) -> Result<SpectralDecomposition> {
    eig_normal_with(m, &EigOptions::default())
}

pub fn eig_normal_with(m: &DenseMatrix, opts: &EigOptions) -> Result<SpectralDecomposition> {
    let n = m.n();
    let adj = m.adjoint();
    let comm = &(m * &adj) - &(&adj * m);
    let scale = m.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
    let residual = comm.frobenius_norm();
    if residual > opts.normality_tol * scale {
        return Err(Error::NotNormal { residual });
    }

    let mut mats = split_normal(m);
    let rot = joint_diagonalize(&mut mats, n, true, opts.max_sweeps)?;
    let vals = diag_values(&mats, n);
    let v = rot.vectors.expect("vectors requested");

    let column = |j: usize| -> Vec<C64> { (0..n).map(|i| v[i * n + j]).collect() };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (za, zb) = (vals[a], vals[b]);
        principal_arg(za)
            .total_cmp(&principal_arg(zb))
            .then(za.norm().total_cmp(&zb.norm()))
            .then_with(|| {
                let (ca, cb) = (column(a), column(b));
                ca.iter()
                    .zip(&cb)
                    .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
    });

    let eigenvalues: Vec<C64> = order.iter().map(|&j| vals[j]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, |i, j| v[i * n + order[j]]);
    let orthonormality_residual =
        (&eigenvectors.adjoint() * &eigenvectors).dist_max(&DenseMatrix::identity(n));
    let rebuilt =
        &(&eigenvectors * &DenseMatrix::diagonal(&eigenvalues)) * &eigenvectors.adjoint();
    let reconstruction_residual = rebuilt.dist_max(m);
    log::debug!(
        "eig_normal n={n} sweeps={} off={:.2e} orth={orthonormality_residual:.2e} recon={reconstruction_residual:.2e}",
        rot.sweeps,
        rot.off_diagonal
    );
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps: rot.sweeps,
        orthonormality_residual,
        reconstruction_residual,
    })
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = m.n();
    let asym = m.dist_max(&m.adjoint());
    if asym > 1e-10 * m.max_abs().max(1.0) {
        return Err(Error::param(format!(
            "matrix is not Hermitian (asymmetry {asym:.3e})"
        )));
    }
    let mut mats = vec![m.hermitian_part().into_raw()];
    let rot = joint_diagonalize(&mut mats, n, true, DEFAULT_SWEEPS)?;
    let v = rot.vectors.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| mats[0][a * n + a].re.total_cmp(&mats[0][b * n + b].re));
    let vals = order.iter().map(|&j| mats[0][j * n + j].re).collect();
    let field = m.field();
    let vecs = DenseMatrix::from_fn(n, |i, j| v[i * n + order[j]]);
    let vecs = if field == Field::Real { vecs.real_part() } else { vecs };
    Ok((vals, vecs))
}

/// Singular values in descending order, from the Hermitian dilation.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    let n = m.n();
    if n == 1 {
        return Ok(vec![m.get(0, 0).norm()]);
    }
    let d = 2 * n;
    let mut dil = vec![ZERO; d * d];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            dil[i * d + n + j] = z;
            dil[(n + j) * d + i] = z.conj();
        }
    }
    let mut mats = vec![dil];
    joint_diagonalize(&mut mats, d, false, DEFAULT_SWEEPS)?;
    let mut vals: Vec<f64> = (0..d).map(|j| mats[0][j * d + j].re).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals.truncate(n);
    Ok(vals.into_iter().map(|s| s.max(0.0)).collect())
}

/// Schatten p-norm: the l_p norm of the singular values.
pub fn schatten_norm(m: &DenseMatrix, p: NormSpec) -> Result<f64> {
    if p.p() == 2.0 {
        return Ok(m.frobenius_norm());
    }
    Ok(p.lp(singular_values(m)?.into_iter()))
}

/// `exp(x)` for skew-Hermitian x. Real input gives a real result.
pub(crate) fn expm_skew_matrix(x: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(SkewExp::new(x)?.exp(1.0))
}

/// Eigendecomposition of a skew-Hermitian generator, reused to evaluate
/// `exp(t x)` for many t.
pub(crate) struct SkewExp {
    vectors: DenseMatrix,
    freqs: Vec<f64>,
    real: bool,
}

impl SkewExp {
    pub(crate) fn new(x: &DenseMatrix) -> Result<Self> {
        let n = x.n();
        let k = x.scale_complex(-I).hermitian_part();
        let mut mats = vec![k.into_raw()];
        let rot = joint_diagonalize(&mut mats, n, true, DEFAULT_SWEEPS)?;
        Ok(SkewExp {
            vectors: DenseMatrix::from_raw(n, Field::Complex, rot.vectors.expect("vectors requested")),
            freqs: (0..n).map(|j| mats[0][j * n + j].re).collect(),
            real: x.is_real(),
        })
    }

    /// Eigenvalues of `-i x`.
    pub(crate) fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub(crate) fn exp(&self, t: f64) -> DenseMatrix {
        let phases: Vec<C64> = self.freqs.iter().map(|f| C64::from_polar(1.0, t * f)).collect();
        let e = &(&self.vectors * &DenseMatrix::diagonal(&phases)) * &self.vectors.adjoint();
        if self.real {
            e.real_part()
        } else {
            e
        }
    }
}

/// Principal logarithm of a unitary (complex) or special orthogonal (real)
/// matrix, without membership checks.
pub(crate) fn logm_matrix(u: &DenseMatrix) -> Result<DenseMatrix> {
    if u.is_real() {
        logm_real(u)
    } else {
        logm_complex(u)
    }
}

fn logm_complex(u: &DenseMatrix) -> Result<DenseMatrix> {
    let (vals, v) = normal_eig(u)?;
    let gen: Vec<C64> = vals.iter().map(|z| I * principal_arg(*z)).collect();
    let x = &(&v * &DenseMatrix::diagonal(&gen)) * &v.adjoint();
    Ok(x.skew_part())
}

fn outer_sum(v: &DenseMatrix, idx: &[usize], coef: impl Fn(usize) -> C64) -> DenseMatrix {
    let n = v.n();
    let mut out = DenseMatrix::from_fn(n, |_, _| ZERO);
    for &j in idx {
        let c = coef(j);
        for a in 0..n {
            let va = v.get(a, j) * c;
            for b in 0..n {
                let z = out.get(a, b) + va * v.get(b, j).conj();
                out.set(a, b, z);
            }
        }
    }
    out
}

/// Real principal logarithm of an orthogonal matrix with determinant one.
///
/// Eigenvalues away from -1 contribute through their eigenprojectors. The
/// eigenvalues near -1 are handled in a real basis of their joint invariant
/// subspace, where the block is minus a rotation close to the identity.
fn logm_real(u: &DenseMatrix) -> Result<DenseMatrix> {
    let n = u.n();
    let (vals, v) = normal_eig(u)?;
    let (cluster, regular): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&j| (vals[j] + 1.0).norm() <= REAL_LOG_CLUSTER);
    if cluster.len() % 2 == 1 {
        return Err(Error::BranchAmbiguity(format!(
            "{} eigenvalues cluster near -1 in an orthogonal matrix",
            cluster.len()
        )));
    }
    let mut x = outer_sum(&v, &regular, |j| I * principal_arg(vals[j])).real_part();
    if !cluster.is_empty() {
        let c = cluster.len();
        let proj = outer_sum(&v, &cluster, |_| C64::new(1.0, 0.0)).real_part();
        let (_, pv) = eigh(&proj)?;
        // top c eigenvectors span the cluster subspace
        let basis: Vec<Vec<f64>> = (n - c..n)
            .map(|j| (0..n).map(|i| pv.get(i, j).re).collect())
            .collect();
        let w = DenseMatrix::from_fn_real(c, |a, b| {
            let mut s = 0.0;
            for i in 0..n {
                for k in 0..n {
                    s += basis[a][i] * u.get(i, k).re * basis[b][k];
                }
            }
            s
        });
        let small = logm_complex(&w.scale(-1.0))?.real_part().skew_part();
        let y = shift_planes_by_pi(&small);
        let block = DenseMatrix::from_fn_real(n, |i, k| {
            let mut s = 0.0;
            for a in 0..c {
                for b in 0..c {
                    s += basis[a][i] * y.get(a, b).re * basis[b][k];
                }
            }
            s
        });
        x = &x + &block;
    }
    Ok(x.skew_part())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(mut q: Vec<f64>, against: &[Vec<f64>]) -> (Vec<f64>, f64) {
    for _ in 0..2 {
        for b in against {
            let d = dot(&q, b);
            for (qi, bi) in q.iter_mut().zip(b) {
                *qi -= d * bi;
            }
        }
    }
    let norm = dot(&q, &q).sqrt();
    (q, norm)
}

/// Given a small real skew matrix `l` of even size, return `y` with
/// `exp(y) = -exp(l)` and `||y||_op <= pi`, by splitting `l` into invariant
/// rotation planes and turning each plane angle `a` into `a - pi`.
fn shift_planes_by_pi(l: &DenseMatrix) -> DenseMatrix {
    let c = l.n();
    let lmul = |q: &[f64]| -> Vec<f64> {
        (0..c)
            .map(|i| (0..c).map(|k| l.get(i, k).re * q[k]).sum())
            .collect()
    };
    let s = &l.transpose() * l;
    let candidates: Vec<Vec<f64>> = match eigh(&s.hermitian_part()) {
        Ok((_, vecs)) => (0..c)
            .rev()
            .map(|j| (0..c).map(|i| vecs.get(i, j).re).collect())
            .chain((0..c).map(|j| (0..c).map(|i| if i == j { 1.0 } else { 0.0 }).collect()))
            .collect(),
        Err(_) => (0..c)
            .map(|j| (0..c).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect(),
    };
    let next_candidate = |chosen: &[Vec<f64>]| -> Vec<f64> {
        for cand in &candidates {
            let (q, norm) = orthogonalize(cand.clone(), chosen);
            if norm > 1e-3 {
                return q.into_iter().map(|x| x / norm).collect();
            }
        }
        unreachable!("candidate set spans the space")
    };

    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(c);
    let mut y = DenseMatrix::zeros(c);
    while chosen.len() < c {
        let q1 = next_candidate(&chosen);
        chosen.push(q1.clone());
        let (lq, norm) = orthogonalize(lmul(&q1), &chosen);
        let q2 = if norm > 1e-13 {
            lq.into_iter().map(|x| x / norm).collect()
        } else {
            next_candidate(&chosen)
        };
        chosen.push(q2.clone());
        let alpha = dot(&q2, &lmul(&q1));
        let shift = alpha - PI;
        for i in 0..c {
            for k in 0..c {
                let g = q2[i] * q1[k] - q1[i] * q2[k];
                if g != 0.0 {
                    let z = y.get(i, k).re + shift * g;
                    y.set(i, k, C64::new(z, 0.0));
                }
            }
        }
    }
    y
}
