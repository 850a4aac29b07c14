//! Dense complex linear algebra for small square matrices.
//!
//! Everything here is written for n in the single or low double digits:
//! cyclic Jacobi rotations for spectral work, an LU determinant, and
//! singular values through the Hermitian dilation.

mod jacobi;
mod json;
mod ops;
mod spectral;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use json::{FrameJson, MatrixJson};
pub use ops::{commutator, expm_skew, logm_unitary};
pub use spectral::{
    eig_normal, eig_normal_with, eigh, principal_arg, schatten_norm, singular_values,
    EigOptions, SpectralDecomposition,
};

pub(crate) use spectral::{expm_skew_matrix, logm_matrix, normal_eig, normal_eigenvalues, SkewExp};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

/// Square n by n matrix, row-major. A `Real` matrix has every imaginary part
/// exactly zero.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    field: Field,
    data: Vec<C64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix({}, {:?})", self.n, self.field)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            field: Field::Real,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn_real(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(C64::new(f(i, j), 0.0));
            }
        }
        DenseMatrix {
            n,
            field: Field::Real,
            data,
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix {
            n,
            field: Field::Complex,
            data,
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::from_fn(n, |_, _| ZERO);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("matrix rows must all have length n".into()));
        }
        Ok(Self::from_fn_real(n, |i, j| rows[i][j]))
    }

    pub fn from_complex_rows(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im.iter()).any(|r| r.len() != n) {
            return Err(Error::Input("real and imaginary parts must both be n by n".into()));
        }
        Ok(Self::from_fn(n, |i, j| C64::new(re[i][j], im[i][j])))
    }

    pub(crate) fn from_raw(n: usize, field: Field, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        let mut m = DenseMatrix { n, field, data };
        if field == Field::Real {
            m.zero_imaginary();
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_real(&self) -> bool {
        self.field == Field::Real
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.n + j] = z;
        if self.field == Field::Real && z.im != 0.0 {
            self.field = Field::Complex;
        }
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn into_raw(self) -> Vec<C64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Tag the matrix as complex without touching its entries.
    pub fn to_complex(&self) -> Self {
        DenseMatrix {
            field: Field::Complex,
            ..self.clone()
        }
    }

    /// Drop the imaginary parts.
    pub fn real_part(&self) -> Self {
        let mut m = self.clone();
        m.field = Field::Real;
        m.zero_imaginary();
        m
    }

    fn zero_imaginary(&mut self) {
        for z in &mut self.data {
            z.im = 0.0;
        }
    }

    /// Largest imaginary entry in absolute value.
    pub fn max_imaginary(&self) -> f64 {
        self.data.iter().fold(0.0, |a, z| a.max(z.im.abs()))
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        DenseMatrix {
            n,
            field: self.field,
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        DenseMatrix {
            n,
            field: self.field,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseMatrix {
            n: self.n,
            field: self.field,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        let field = if s.im == 0.0 { self.field } else { Field::Complex };
        DenseMatrix::from_raw(self.n, field, self.data.iter().map(|z| z * s).collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Real inner product `Re tr(a* b)`.
    pub fn inner(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `(m - m*) / 2`
    pub fn skew_part(&self) -> Self {
        (self - &self.adjoint()).scale(0.5)
    }

    /// `(m + m*) / 2`
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(0.5)
    }

    pub fn dist_max(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |a, (x, y)| a.max((x - y).norm()))
    }

    /// Determinant by partial-pivoted LU.
    pub fn det(&self) -> C64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = ONE;
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].norm();
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return ZERO;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[k * n + k];
            det *= d;
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
            }
        }
        if self.field == Field::Real {
            C64::new(det.re, 0.0)
        } else {
            det
        }
    }

    fn check_same_n(&self, other: &DenseMatrix) {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.check_same_n(rhs);
        DenseMatrix {
            n: self.n,
            field: self.field.join(rhs.field),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.check_same_n(rhs);
        DenseMatrix {
            n: self.n,
            field: self.field.join(rhs.field),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        self.scale(-1.0)
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.check_same_n(rhs);
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        if self.field == Field::Real && rhs.field == Field::Real {
            for i in 0..n {
                for k in 0..n {
                    let a = self.data[i * n + k].re;
                    if a == 0.0 {
                        continue;
                    }
                    let row = &rhs.data[k * n..k * n + n];
                    let out = &mut data[i * n..i * n + n];
                    for (o, b) in out.iter_mut().zip(row) {
                        o.re += a * b.re;
                    }
                }
            }
        } else {
            for i in 0..n {
                for k in 0..n {
                    let a = self.data[i * n + k];
                    if a == ZERO {
                        continue;
                    }
                    let row = &rhs.data[k * n..k * n + n];
                    let out = &mut data[i * n..i * n + n];
                    for (o, b) in out.iter_mut().zip(row) {
                        *o += a * b;
                    }
                }
            }
        }
        DenseMatrix {
            n,
            field: self.field.join(rhs.field),
            data,
        }
    }
}

/// An n by k matrix with orthonormal columns, the basis of a k-dimensional
/// subspace. Stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    n: usize,
    k: usize,
    field: Field,
    data: Vec<C64>,
}

impl Frame {
    /// First k columns of a square matrix.
    pub fn leading_columns(m: &DenseMatrix, k: usize) -> Self {
        let n = m.n();
        let mut data = Vec::with_capacity(n * k);
        for i in 0..n {
            for j in 0..k {
                data.push(m.get(i, j));
            }
        }
        Frame {
            n,
            k,
            field: m.field(),
            data,
        }
    }

    pub fn from_columns(n: usize, columns: &[Vec<C64>], field: Field) -> Result<Self> {
        let k = columns.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Input("frame columns must have length n".into()));
        }
        let mut data = Vec::with_capacity(n * k);
        for i in 0..n {
            for c in columns {
                let z = c[i];
                data.push(if field == Field::Real { C64::new(z.re, 0.0) } else { z });
            }
        }
        Ok(Frame { n, k, field, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.k + j]
    }

    /// `self* other`, a k by k matrix.
    pub fn cross(&self, other: &Frame) -> DenseMatrix {
        let k = self.k;
        let mut m = DenseMatrix::from_fn(k, |_, _| ZERO);
        for a in 0..k {
            for b in 0..k {
                let mut s = ZERO;
                for i in 0..self.n {
                    s += self.get(i, a).conj() * other.get(i, b);
                }
                m.data[a * k + b] = s;
            }
        }
        if self.field == Field::Real && other.field == Field::Real {
            m.real_part()
        } else {
            m
        }
    }

    /// Largest entry of `|F* F - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.cross(self);
        g.dist_max(&DenseMatrix::identity(self.k))
    }

    /// `other - self (self* other)`, zero-padded to an n by n square matrix.
    pub(crate) fn residual_square(&self, other: &Frame) -> DenseMatrix {
        let n = self.n;
        let c = self.cross(other);
        let mut m = DenseMatrix::from_fn(n, |_, _| ZERO);
        for i in 0..n {
            for b in 0..other.k {
                let mut s = other.get(i, b);
                for a in 0..self.k {
                    s -= self.get(i, a) * c.get(a, b);
                }
                m.data[i * n + b] = s;
            }
        }
        if self.field == Field::Real && other.field == Field::Real {
            m.real_part()
        } else {
            m
        }
    }

    /// Orthogonal projector `F F*` as an n by n matrix.
    pub fn projector(&self) -> DenseMatrix {
        let n = self.n;
        let mut m = DenseMatrix::from_fn(n, |_, _| ZERO);
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for a in 0..self.k {
                    s += self.get(i, a) * self.get(j, a).conj();
                }
                m.data[i * n + j] = s;
            }
        }
        if self.field == Field::Real {
            m.real_part()
        } else {
            m
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn real_times_complex_is_complex() {
        let a = DenseMatrix::identity(2);
        let b = DenseMatrix::diagonal(&[I, ONE]);
        let c = &a * &b;
        assert_eq!(c.field(), Field::Complex);
        assert_eq!(c.get(0, 0), I);
    }

    #[test]
    fn determinant_of_permutation_and_diagonal() {
        let p = DenseMatrix::from_real_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_relative_eq!(p.det().re, -1.0);
        let d = DenseMatrix::diagonal(&[C64::new(2.0, 0.0), I, C64::new(0.0, -3.0)]);
        let det = d.det();
        assert_relative_eq!(det.re, 6.0);
        assert_relative_eq!(det.im, 0.0);
    }

    #[test]
    fn inner_product_matches_frobenius() {
        let a = DenseMatrix::from_fn(3, |i, j| C64::new(i as f64 - 1.0, j as f64 * 0.5));
        assert_relative_eq!(a.inner(&a), a.frobenius_norm().powi(2), epsilon = 1e-14);
    }

    #[test]
    fn frame_cross_and_projector() {
        let m = DenseMatrix::identity(3);
        let f = Frame::leading_columns(&m, 2);
        assert_eq!(f.orthonormality_defect(), 0.0);
        let p = f.projector();
        assert_eq!(p.get(2, 2), ZERO);
        assert_eq!(p.get(1, 1), ONE);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn mismatched_product_panics() {
        let _ = &DenseMatrix::identity(2) * &DenseMatrix::identity(3);
    }
}
