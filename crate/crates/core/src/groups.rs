//! The groups U(n) and SO(n), their Lie algebras, and Haar sampling.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{schatten_norm, singular_values, DenseMatrix, Field, MatrixJson, C64, I};
use crate::metrics::NormSpec;

const MEMBERSHIP_TOL: f64 = 1e-10;
const SKEW_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    U,
    SO,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupSpecFields")]
pub struct GroupSpec {
    family: Family,
    n: usize,
}

#[derive(Deserialize)]
struct GroupSpecFields {
    family: Family,
    n: usize,
}

impl TryFrom<GroupSpecFields> for GroupSpec {
    type Error = Error;
    fn try_from(f: GroupSpecFields) -> Result<Self> {
        GroupSpec::new(f.family, f.n)
    }
}

impl GroupSpec {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        match family {
            Family::U if n >= 1 => Ok(GroupSpec { family, n }),
            Family::SO if n >= 2 => Ok(GroupSpec { family, n }),
            Family::U => Err(Error::param("U(n) needs n >= 1")),
            Family::SO => Err(Error::param("SO(n) needs n >= 2")),
        }
    }

    pub fn unitary(n: usize) -> Result<Self> {
        Self::new(Family::U, n)
    }

    pub fn special_orthogonal(n: usize) -> Result<Self> {
        Self::new(Family::SO, n)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        match self.family {
            Family::U => Field::Complex,
            Family::SO => Field::Real,
        }
    }

    pub fn is_real(&self) -> bool {
        self.family == Family::SO
    }

    pub fn lie_dim(&self) -> usize {
        match self.family {
            Family::U => self.n * self.n,
            Family::SO => self.n * (self.n - 1) / 2,
        }
    }

    pub fn identity(&self) -> GroupElement {
        let m = DenseMatrix::identity(self.n);
        let m = if self.is_real() { m } else { m.to_complex() };
        GroupElement::from_unchecked(*self, m)
    }

    /// Orthonormal basis of the Lie algebra under `Re tr(a* b)`.
    pub fn lie_basis(&self) -> Vec<DenseMatrix> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.lie_dim());
        for j in 0..n {
            for l in j + 1..n {
                out.push(DenseMatrix::from_fn_real(n, |a, b| {
                    if (a, b) == (j, l) {
                        FRAC_1_SQRT_2
                    } else if (a, b) == (l, j) {
                        -FRAC_1_SQRT_2
                    } else {
                        0.0
                    }
                }));
                if !self.is_real() {
                    out.push(DenseMatrix::from_fn(n, |a, b| {
                        if (a, b) == (j, l) || (a, b) == (l, j) {
                            I * FRAC_1_SQRT_2
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }));
                }
            }
        }
        if !self.is_real() {
            for j in 0..n {
                out.push(DenseMatrix::from_fn(n, |a, b| {
                    if a == j && b == j {
                        I
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        out
    }

    /// Short label such as `U(3)` or `SO(4)`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::U => write!(f, "U({})", self.n),
            Family::SO => write!(f, "SO({})", self.n),
        }
    }
}

fn unitarity_defect(m: &DenseMatrix) -> f64 {
    let g = &(&m.adjoint() * m) - &DenseMatrix::identity(m.n());
    let fro = g.frobenius_norm();
    if fro <= MEMBERSHIP_TOL {
        return fro;
    }
    singular_values(&g).map(|s| s[0]).unwrap_or(fro)
}

/// A matrix known to lie in its group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    group: GroupSpec,
    matrix: DenseMatrix,
}

impl GroupElement {
    pub fn new(group: GroupSpec, matrix: DenseMatrix) -> Result<Self> {
        if matrix.n() != group.n() {
            return Err(Error::DimensionMismatch {
                expected: group.n(),
                found: matrix.n(),
            });
        }
        let matrix = match group.family() {
            Family::U => matrix.to_complex(),
            Family::SO => {
                if matrix.max_imaginary() > MEMBERSHIP_TOL {
                    return Err(Error::NotInGroup("SO(n) element has imaginary entries".into()));
                }
                matrix.real_part()
            }
        };
        let defect = unitarity_defect(&matrix);
        if defect > MEMBERSHIP_TOL {
            return Err(Error::NotInGroup(format!(
                "||u* u - I|| = {defect:.3e} exceeds {MEMBERSHIP_TOL:e}"
            )));
        }
        if group.is_real() {
            let det = matrix.det().re;
            if (det - 1.0).abs() > MEMBERSHIP_TOL {
                return Err(Error::NotInGroup(format!("determinant {det} is not 1")));
            }
        }
        Ok(GroupElement { group, matrix })
    }

    pub(crate) fn from_unchecked(group: GroupSpec, matrix: DenseMatrix) -> Self {
        debug_assert_eq!(matrix.n(), group.n());
        let matrix = if group.is_real() {
            matrix.real_part()
        } else {
            matrix.to_complex()
        };
        GroupElement { group, matrix }
    }

    pub fn from_json(group: GroupSpec, json: &MatrixJson) -> Result<Self> {
        Self::new(group, DenseMatrix::try_from(json)?)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from(&self.matrix)
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            group: self.group,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * other`
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement::from_unchecked(self.group, &self.matrix * &other.matrix)
    }

    /// `self^{-1} * other`
    pub fn between(&self, other: &GroupElement) -> GroupElement {
        GroupElement::from_unchecked(self.group, &self.matrix.adjoint() * &other.matrix)
    }
}

/// A skew-Hermitian matrix (real skew-symmetric for SO(n)).
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    group: GroupSpec,
    matrix: DenseMatrix,
}

impl TangentVector {
    pub fn new(group: GroupSpec, matrix: DenseMatrix) -> Result<Self> {
        if matrix.n() != group.n() {
            return Err(Error::DimensionMismatch {
                expected: group.n(),
                found: matrix.n(),
            });
        }
        if group.is_real() && matrix.max_imaginary() > SKEW_TOL {
            return Err(Error::NotInAlgebra("so(n) element has imaginary entries".into()));
        }
        let asym = matrix.dist_max(&matrix.adjoint().scale(-1.0));
        if asym > SKEW_TOL * matrix.max_abs().max(1.0) {
            return Err(Error::NotInAlgebra(format!(
                "||x + x*||_max = {asym:.3e} exceeds tolerance"
            )));
        }
        Ok(TangentVector::from_unchecked(group, matrix))
    }

    pub(crate) fn from_unchecked(group: GroupSpec, matrix: DenseMatrix) -> Self {
        let matrix = if group.is_real() {
            matrix.real_part()
        } else {
            matrix.to_complex()
        };
        TangentVector { group, matrix }
    }

    pub fn zero(group: GroupSpec) -> Self {
        TangentVector::from_unchecked(group, DenseMatrix::zeros(group.n()))
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector {
            group: self.group,
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &TangentVector) -> TangentVector {
        TangentVector::from_unchecked(self.group, &self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        TangentVector::from_unchecked(self.group, &self.matrix - &other.matrix)
    }

    pub fn norm(&self, p: NormSpec) -> Result<f64> {
        schatten_norm(&self.matrix, p)
    }
}

/// Orthogonal projection onto the Lie algebra: `(m - m*) / 2`, real part for SO(n).
pub fn project_tangent(group: GroupSpec, m: &DenseMatrix) -> Result<TangentVector> {
    if m.n() != group.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            found: m.n(),
        });
    }
    Ok(TangentVector::from_unchecked(group, m.skew_part()))
}

fn gaussian_matrix<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> DenseMatrix {
    match field {
        Field::Real => DenseMatrix::from_fn_real(n, |_, _| rng.sample(StandardNormal)),
        Field::Complex => DenseMatrix::from_fn(n, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * FRAC_1_SQRT_2
        }),
    }
}

/// Orthonormalise the columns by two passes of Gram-Schmidt. The implied
/// triangular factor has a positive diagonal.
fn orthonormalize_columns(m: &DenseMatrix) -> DenseMatrix {
    let n = m.n();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| m.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[i];
                let c = &mut rest[0];
                let d: C64 = q.iter().zip(c.iter()).map(|(a, b)| a.conj() * b).sum();
                for (ck, qk) in c.iter_mut().zip(q) {
                    *ck -= d * qk;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    let out = DenseMatrix::from_fn(n, |i, j| cols[j][i]);
    if m.is_real() {
        out.real_part()
    } else {
        out
    }
}

/// Haar-distributed group element: Gaussian matrix, QR with positive
/// diagonal, and for SO(n) a column sign flip when the determinant is -1.
pub fn haar_sample<R: Rng + ?Sized>(group: GroupSpec, rng: &mut R) -> GroupElement {
    let n = group.n();
    loop {
        let z = gaussian_matrix(n, group.field(), rng);
        let q = orthonormalize_columns(&z);
        if q.as_slice().iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            continue;
        }
        let q = if group.is_real() && q.det().re < 0.0 {
            DenseMatrix::from_fn_real(n, |i, j| {
                let x = q.get(i, j).re;
                if j == 0 {
                    -x
                } else {
                    x
                }
            })
        } else {
            q
        };
        return GroupElement::from_unchecked(group, q);
    }
}

/// Random algebra element with Gaussian direction and `||x||_p = radius * t`,
/// `t` uniform on (0, 1].
pub fn random_tangent<R: Rng + ?Sized>(
    group: GroupSpec,
    p: NormSpec,
    radius: f64,
    rng: &mut R,
) -> Result<TangentVector> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param(format!("radius must be positive, got {radius}")));
    }
    let t = 1.0 - rng.random::<f64>();
    random_tangent_on_sphere(group, p, radius * t, rng)
}

/// Random algebra element with Gaussian direction and `||x||_p = radius`.
pub fn random_tangent_on_sphere<R: Rng + ?Sized>(
    group: GroupSpec,
    p: NormSpec,
    radius: f64,
    rng: &mut R,
) -> Result<TangentVector> {
    loop {
        let g = gaussian_matrix(group.n(), group.field(), rng).skew_part();
        let norm = schatten_norm(&g, p)?;
        if norm > 1e-300 {
            return Ok(TangentVector::from_unchecked(group, g.scale(radius / norm)));
        }
    }
}

/// `i * sign(-i x)` for skew-Hermitian x: the extreme point of the
/// operator-norm unit ball dual to x. Real part for SO(n).
pub(crate) fn sign_extreme_point(group: GroupSpec, x: &DenseMatrix) -> Result<DenseMatrix> {
    let k = x.scale_complex(-I).hermitian_part();
    let (vals, v) = crate::matcore::eigh(&k.to_complex())?;
    let signs: Vec<C64> = vals
        .iter()
        .map(|&l| if l > 0.0 { I } else if l < 0.0 { -I } else { C64::new(0.0, 0.0) })
        .collect();
    let m = &(&v * &DenseMatrix::diagonal(&signs)) * &v.adjoint();
    let m = m.skew_part();
    Ok(if group.is_real() { m.real_part() } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn special_orthogonal_needs_two_dimensions() {
        assert!(GroupSpec::new(Family::SO, 1).is_err());
        assert!(GroupSpec::new(Family::U, 0).is_err());
        assert_eq!(GroupSpec::new(Family::SO, 4).unwrap().lie_dim(), 6);
        assert_eq!(GroupSpec::new(Family::U, 3).unwrap().lie_dim(), 9);
    }

    #[test]
    fn lie_basis_is_orthonormal() {
        for g in [GroupSpec::unitary(3).unwrap(), GroupSpec::special_orthogonal(4).unwrap()] {
            let b = g.lie_basis();
            assert_eq!(b.len(), g.lie_dim());
            for (i, x) in b.iter().enumerate() {
                assert!(x.dist_max(&x.adjoint().scale(-1.0)) == 0.0);
                for (j, y) in b.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((x.inner(y) - expect).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn haar_samples_are_members() {
        let mut rng = Stream::new(1).rng();
        for g in [GroupSpec::unitary(4).unwrap(), GroupSpec::special_orthogonal(5).unwrap()] {
            for _ in 0..20 {
                let u = haar_sample(g, &mut rng);
                GroupElement::new(g, u.matrix().clone()).unwrap();
            }
        }
    }

    #[test]
    fn membership_rejects_non_unitary() {
        let g = GroupSpec::unitary(2).unwrap();
        assert!(GroupElement::new(g, DenseMatrix::identity(2).scale(1.01)).is_err());
        let s = GroupSpec::special_orthogonal(2).unwrap();
        let refl = DenseMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(GroupElement::new(s, refl), Err(Error::NotInGroup(_))));
    }

    #[test]
    fn random_tangent_respects_radius() {
        let mut rng = Stream::new(2).rng();
        let g = GroupSpec::unitary(3).unwrap();
        for p in [NormSpec::TRACE, NormSpec::FROBENIUS, NormSpec::OPERATOR] {
            for _ in 0..10 {
                let x = random_tangent(g, p, 0.7, &mut rng).unwrap();
                let nx = x.norm(p).unwrap();
                assert!(nx > 0.0 && nx <= 0.7 + 1e-12);
            }
        }
        assert!(random_tangent(g, NormSpec::OPERATOR, 0.0, &mut rng).is_err());
    }
}
