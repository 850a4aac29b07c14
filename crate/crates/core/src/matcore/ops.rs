use super::spectral::{expm_skew_matrix, logm_matrix};
use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::groups::{GroupElement, TangentVector};

const UNITARITY_TOL: f64 = 1e-10;

/// Exponential of a Lie algebra element, by eigendecomposition of `-i x`.
pub fn expm_skew(x: &TangentVector) -> Result<GroupElement> {
    let e = expm_skew_matrix(x.matrix())?;
    let residual = (&e.adjoint() * &e).dist_max(&DenseMatrix::identity(e.n()));
    if residual > UNITARITY_TOL {
        return Err(Error::Numeric {
            stage: "expm",
            iterations: 0,
            residual,
        });
    }
    Ok(GroupElement::from_unchecked(x.group(), e))
}

/// Principal logarithm. Eigenvalues at -1 take argument +pi; for SO(n) a pair
/// at -1 becomes a rotation by pi in a real invariant plane.
pub fn logm_unitary(u: &GroupElement) -> Result<TangentVector> {
    let x = logm_matrix(u.matrix())?;
    Ok(TangentVector::from_unchecked(u.group(), x))
}

/// `[x, y] = xy - yx`
pub fn commutator(x: &TangentVector, y: &TangentVector) -> Result<TangentVector> {
    if x.group() != y.group() {
        return Err(Error::DimensionMismatch {
            expected: x.group().n(),
            found: y.group().n(),
        });
    }
    let (a, b) = (x.matrix(), y.matrix());
    let c = &(a * b) - &(b * a);
    Ok(TangentVector::from_unchecked(x.group(), c.skew_part()))
}
