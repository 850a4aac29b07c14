use std::f64::consts::PI;

use super::{MetricKind, NormSpec};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::matcore::{
    expm_skew_matrix, logm_matrix, normal_eigenvalues, principal_arg, schatten_norm, DenseMatrix,
};

/// Eigenvalues this close to -1 make the minimizing geodesic non-unique.
const ANTIPODAL_TOL: f64 = 1e-8;

/// Largest n for exhaustive eigenvalue matching.
pub const MAX_MATCHING_DIM: usize = 6;

fn same_group(u: &GroupElement, v: &GroupElement) -> Result<()> {
    if u.group() != v.group() {
        return Err(Error::DimensionMismatch {
            expected: u.group().n(),
            found: v.group().n(),
        });
    }
    Ok(())
}

/// Principal arguments of the eigenvalues of a unitary matrix.
pub(crate) fn angles_of(w: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(normal_eigenvalues(w)?.into_iter().map(principal_arg).collect())
}

/// Rotation angles of `w`: principal arguments of its eigenvalues, sorted.
pub fn rotation_angles(w: &GroupElement) -> Result<Vec<f64>> {
    let mut a = angles_of(w.matrix())?;
    a.sort_by(f64::total_cmp);
    Ok(a)
}

/// `||u - v||_p`
pub fn extrinsic_dist(u: &GroupElement, v: &GroupElement, p: NormSpec) -> Result<f64> {
    same_group(u, v)?;
    schatten_norm(&(u.matrix() - v.matrix()), p)
}

/// `||log(u^{-1} v)||_p`, computed from the eigenvalue arguments of `u^{-1} v`.
pub fn intrinsic_dist(u: &GroupElement, v: &GroupElement, p: NormSpec) -> Result<f64> {
    same_group(u, v)?;
    let w = &u.matrix().adjoint() * v.matrix();
    Ok(p.lp(angles_of(&w)?.into_iter()))
}

pub fn distance(kind: MetricKind, u: &GroupElement, v: &GroupElement, p: NormSpec) -> Result<f64> {
    match kind {
        MetricKind::Extrinsic => extrinsic_dist(u, v, p),
        MetricKind::Intrinsic => intrinsic_dist(u, v, p),
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicPoint {
    pub point: GroupElement,
    /// `u^{-1} v` has an eigenvalue at -1, so several minimizing geodesics exist
    /// and the principal one was taken.
    pub nonunique: bool,
}

/// `u exp(t log(u^{-1} v))` on the principal branch.
pub fn geodesic_point(u: &GroupElement, v: &GroupElement, t: f64) -> Result<GeodesicPoint> {
    same_group(u, v)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param(format!("geodesic parameter must be in [0, 1], got {t}")));
    }
    let w = &u.matrix().adjoint() * v.matrix();
    let nonunique = normal_eigenvalues(&w)?
        .iter()
        .any(|z| (z + 1.0).norm() <= ANTIPODAL_TOL);
    let x = logm_matrix(&w)?;
    let step = expm_skew_matrix(&x.scale(t))?;
    let point = GroupElement::from_unchecked(u.group(), u.matrix() * &step);
    Ok(GeodesicPoint { point, nonunique })
}

/// Sum of intrinsic distances between consecutive points.
pub fn discrete_path_length(points: &[GroupElement], p: NormSpec) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::param("a path needs at least two points"));
    }
    points
        .windows(2)
        .map(|w| intrinsic_dist(&w[0], &w[1], p))
        .sum()
}

/// Arc length between two angles on the unit circle, in [0, pi].
pub fn arc_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Minimum over permutations of the l_p norm of arc-length differences
/// between the eigenvalues of u and of v.
pub fn eigenvalue_matching_distance(u: &GroupElement, v: &GroupElement, p: NormSpec) -> Result<f64> {
    same_group(u, v)?;
    let n = u.group().n();
    if n > MAX_MATCHING_DIM {
        return Err(Error::TooLarge {
            what: "matching dimension",
            size: n,
            limit: MAX_MATCHING_DIM,
        });
    }
    let a = angles_of(u.matrix())?;
    let b = angles_of(v.matrix())?;
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|&x| b.iter().map(|&y| arc_distance(x, y)).collect())
        .collect();
    let mut best = f64::INFINITY;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |pi| {
        let val = p.lp((0..n).map(|i| cost[i][pi[i]]));
        if val < best {
            best = val;
        }
    });
    Ok(best)
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupSpec;
    use crate::matcore::C64;
    use approx::assert_relative_eq;

    fn phase(g: GroupSpec, t: &[f64]) -> GroupElement {
        let d: Vec<C64> = t.iter().map(|&x| C64::from_polar(1.0, x)).collect();
        GroupElement::new(g, DenseMatrix::diagonal(&d)).unwrap()
    }

    #[test]
    fn antipodal_points_in_u1() {
        let g = GroupSpec::unitary(1).unwrap();
        let (a, b) = (phase(g, &[0.0]), phase(g, &[PI]));
        assert_relative_eq!(intrinsic_dist(&a, &b, NormSpec::OPERATOR).unwrap(), PI);
        assert_relative_eq!(extrinsic_dist(&a, &b, NormSpec::OPERATOR).unwrap(), 2.0);
        let mid = geodesic_point(&a, &b, 0.5).unwrap();
        assert!(mid.nonunique);
        assert!((mid.point.matrix().get(0, 0) - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn path_needs_two_points() {
        let g = GroupSpec::unitary(2).unwrap();
        assert!(discrete_path_length(&[g.identity()], NormSpec::OPERATOR).is_err());
    }

    #[test]
    fn arc_distance_wraps() {
        assert_relative_eq!(arc_distance(3.0, -3.0), 2.0 * PI - 6.0, epsilon = 1e-15);
        assert_relative_eq!(arc_distance(0.1, 0.4), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn matching_prefers_the_best_permutation() {
        let g = GroupSpec::unitary(2).unwrap();
        let u = phase(g, &[0.0, 1.0]);
        let v = phase(g, &[1.0, 0.0]);
        assert!(eigenvalue_matching_distance(&u, &v, NormSpec::OPERATOR).unwrap() < 1e-14);
        let big = GroupSpec::unitary(7).unwrap();
        assert!(matches!(
            eigenvalue_matching_distance(&big.identity(), &big.identity(), NormSpec::OPERATOR),
            Err(Error::TooLarge { .. })
        ));
    }
}
