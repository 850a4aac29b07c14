use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{Family, GroupElement, GroupSpec};
use crate::matcore::{DenseMatrix, Frame, MatrixJson, C64, I};

const BASIS_TOL: f64 = 1e-8;
const CLOSURE_TOL: f64 = 1e-8;

/// The isotropy subgroup H of a homogeneous space G/H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SubgroupSpec {
    /// H = {I}, so the space is the group itself.
    Trivial,
    /// H = G, a one-point space.
    Full,
    /// Stabiliser of a k-dimensional coordinate subspace.
    Grassmann { k: usize },
    /// Block-diagonal matrices for the given partition of n.
    BlockDiagonal { partition: Vec<usize> },
    /// `I_m (x) y` with y in the k-dimensional group, n = m k.
    TensorFactor { m: usize, k: usize },
    /// SU(n) inside U(n).
    SpecialUnitary,
    /// A closed connected subgroup given by a basis of its Lie algebra. The
    /// optional torus lists integer weights: one row per diagonal entry for
    /// U(n), one row per coordinate plane (0,1), (2,3), ... for SO(n).
    Custom {
        basis: Vec<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        torus: Option<Vec<Vec<i64>>>,
    },
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupSpec::Trivial => write!(f, "Trivial"),
            SubgroupSpec::Full => write!(f, "Full"),
            SubgroupSpec::Grassmann { k } => write!(f, "Gr({k})"),
            SubgroupSpec::BlockDiagonal { partition } => {
                let parts: Vec<String> = partition.iter().map(|b| b.to_string()).collect();
                write!(f, "Block({})", parts.join(","))
            }
            SubgroupSpec::TensorFactor { m, k } => write!(f, "Tensor({m},{k})"),
            SubgroupSpec::SpecialUnitary => write!(f, "SU"),
            SubgroupSpec::Custom { basis, .. } => write!(f, "Custom({})", basis.len()),
        }
    }
}

/// Which closed-form distance, if any, the space admits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    /// H trivial: the quotient is G.
    Group,
    /// Grassmannian of k-planes.
    Grassmann { k: usize },
    /// U(n)/SU(n), a circle.
    Circle,
    /// H = G.
    Point,
    Generic,
}

#[derive(Clone, Debug, PartialEq)]
enum TorusShape {
    /// `diag(exp(i w_j . c))`, one weight row per diagonal entry.
    Diagonal(Vec<Vec<i64>>),
    /// Rotation by `w . c` in each listed coordinate plane.
    Planes(Vec<(usize, usize, Vec<i64>)>),
}

/// A maximal torus of H parameterised by `c in R^rank`, with kernel lattice
/// `2 pi Z^rank`.
#[derive(Clone, Debug, PartialEq)]
pub struct Torus {
    n: usize,
    rank: usize,
    shape: TorusShape,
}

impl Torus {
    fn diagonal(n: usize, rank: usize, rows: Vec<Vec<i64>>) -> Self {
        Torus {
            n,
            rank,
            shape: TorusShape::Diagonal(rows),
        }
    }

    fn planes(n: usize, rank: usize, planes: Vec<(usize, usize, Vec<i64>)>) -> Self {
        Torus {
            n,
            rank,
            shape: TorusShape::Planes(planes),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Eigenvalue angles as integer functionals of c: eigenvalue j of the
    /// torus element at c is `exp(i row_j . c)`.
    pub fn angle_rows(&self) -> Vec<Vec<i64>> {
        match &self.shape {
            TorusShape::Diagonal(rows) => rows.clone(),
            TorusShape::Planes(planes) => {
                let mut rows = Vec::with_capacity(self.n);
                for (_, _, w) in planes {
                    rows.push(w.clone());
                    rows.push(w.iter().map(|x| -x).collect());
                }
                rows.resize(self.n, vec![0; self.rank]);
                rows
            }
        }
    }

    /// The torus element at parameter c.
    pub fn element(&self, c: &[f64]) -> DenseMatrix {
        let dot = |w: &[i64]| -> f64 { w.iter().zip(c).map(|(a, b)| *a as f64 * b).sum() };
        match &self.shape {
            TorusShape::Diagonal(rows) => {
                let d: Vec<C64> = rows.iter().map(|w| C64::from_polar(1.0, dot(w))).collect();
                DenseMatrix::diagonal(&d)
            }
            TorusShape::Planes(planes) => {
                let mut m = DenseMatrix::identity(self.n);
                for (p, q, w) in planes {
                    let (s, co) = dot(w).sin_cos();
                    m.set(*p, *p, C64::new(co, 0.0));
                    m.set(*q, *q, C64::new(co, 0.0));
                    m.set(*p, *q, C64::new(-s, 0.0));
                    m.set(*q, *p, C64::new(s, 0.0));
                }
                m
            }
        }
    }

    /// Derivatives of the parameterisation at c = 0, one per coordinate.
    pub fn generators(&self) -> Vec<DenseMatrix> {
        (0..self.rank)
            .map(|k| match &self.shape {
                TorusShape::Diagonal(rows) => {
                    let d: Vec<C64> = rows.iter().map(|w| I * w[k] as f64).collect();
                    DenseMatrix::diagonal(&d)
                }
                TorusShape::Planes(planes) => {
                    let mut m = DenseMatrix::zeros(self.n);
                    for (p, q, w) in planes {
                        m.set(*p, *q, C64::new(-(w[k] as f64), 0.0));
                        m.set(*q, *p, C64::new(w[k] as f64, 0.0));
                    }
                    m
                }
            })
            .collect()
    }
}

/// A homogeneous space G/H together with its orthogonal tangent split
/// `g = h + x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpecFields", into = "SpaceSpecFields")]
pub struct SpaceSpec {
    group: GroupSpec,
    subgroup: SubgroupSpec,
    h_basis: Vec<DenseMatrix>,
    x_basis: Vec<DenseMatrix>,
    components: Vec<DenseMatrix>,
    torus: Option<Torus>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SpaceSpecFields {
    group: GroupSpec,
    subgroup: SubgroupSpec,
}

impl TryFrom<SpaceSpecFields> for SpaceSpec {
    type Error = Error;
    fn try_from(f: SpaceSpecFields) -> Result<Self> {
        SpaceSpec::new(f.group, f.subgroup)
    }
}

impl From<SpaceSpec> for SpaceSpecFields {
    fn from(s: SpaceSpec) -> Self {
        SpaceSpecFields {
            group: s.group,
            subgroup: s.subgroup,
        }
    }
}

/// Gram-Schmidt step under `Re tr(a* b)`; returns false if `v` is dependent.
fn push_orthonormal(basis: &mut Vec<DenseMatrix>, v: &DenseMatrix, tol: f64) -> bool {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.inner(&r);
            r = &r - &b.scale(c);
        }
    }
    let norm = r.frobenius_norm();
    if norm <= tol {
        return false;
    }
    basis.push(r.scale(1.0 / norm));
    true
}

fn complement(group: GroupSpec, sub: &[DenseMatrix]) -> Vec<DenseMatrix> {
    let mut all = sub.to_vec();
    let mut out = Vec::new();
    for e in group.lie_basis() {
        if push_orthonormal(&mut all, &e, 1e-6) {
            out.push(all.last().expect("just pushed").clone());
        }
    }
    out
}

fn block_index(partition: &[usize]) -> Vec<usize> {
    partition
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect()
}

fn block_offsets(partition: &[usize]) -> Vec<usize> {
    partition
        .iter()
        .scan(0, |acc, &b| {
            let o = *acc;
            *acc += b;
            Some(o)
        })
        .collect()
}

fn unit(rank: usize, k: usize) -> Vec<i64> {
    let mut v = vec![0; rank];
    v[k] = 1;
    v
}

/// Coordinate-plane torus of SO over the given blocks. With `shared`, every
/// block rotates by the same coordinates.
fn plane_torus(n: usize, blocks: &[(usize, usize)], shared: bool) -> Torus {
    let mut planes = Vec::new();
    let rank = if shared {
        blocks.first().map_or(0, |b| b.1 / 2)
    } else {
        blocks.iter().map(|b| b.1 / 2).sum()
    };
    let mut next = 0;
    for &(offset, size) in blocks {
        for t in 0..size / 2 {
            let coord = if shared { t } else { next + t };
            planes.push((offset + 2 * t, offset + 2 * t + 1, unit(rank, coord)));
        }
        if !shared {
            next += size / 2;
        }
    }
    Torus::planes(n, rank, planes)
}

fn full_torus(group: GroupSpec) -> Torus {
    let n = group.n();
    match group.family() {
        Family::U => Torus::diagonal(n, n, (0..n).map(|j| unit(n, j)).collect()),
        Family::SO => plane_torus(n, &[(0, n)], false),
    }
}

impl SpaceSpec {
    pub fn new(group: GroupSpec, subgroup: SubgroupSpec) -> Result<Self> {
        let n = group.n();
        let family = group.family();
        let ident = DenseMatrix::identity(n);
        let mut components = vec![ident];
        let (h_basis, torus) = match &subgroup {
            SubgroupSpec::Trivial => (Vec::new(), Some(Torus::diagonal(n, 0, vec![vec![]; n]))),
            SubgroupSpec::Full => (group.lie_basis(), Some(full_torus(group))),
            SubgroupSpec::Grassmann { k } => {
                if *k == 0 || *k >= n {
                    return Err(Error::InvalidSubgroup(format!(
                        "Grassmann dimension k={k} must lie in 1..{}",
                        n.saturating_sub(1)
                    )));
                }
                Self::block_parts(group, &[*k, n - k], &mut components)
            }
            SubgroupSpec::BlockDiagonal { partition } => {
                if partition.is_empty() || partition.contains(&0) {
                    return Err(Error::InvalidSubgroup("block sizes must be positive".into()));
                }
                if partition.iter().sum::<usize>() != n {
                    return Err(Error::InvalidSubgroup(format!(
                        "partition {partition:?} does not sum to n={n}"
                    )));
                }
                Self::block_parts(group, partition, &mut components)
            }
            SubgroupSpec::TensorFactor { m, k } => {
                if *m == 0 || *k == 0 || m * k != n {
                    return Err(Error::InvalidSubgroup(format!(
                        "tensor factor needs m k = n, got m={m}, k={k}, n={n}"
                    )));
                }
                Self::tensor_parts(group, *m, *k)
            }
            SubgroupSpec::SpecialUnitary => {
                if family != Family::U {
                    return Err(Error::InvalidSubgroup(
                        "the special unitary subgroup needs the unitary family".into(),
                    ));
                }
                let centre =
                    DenseMatrix::diagonal(&vec![I; n]).scale(1.0 / (n as f64).sqrt());
                let h = complement(group, &[centre]);
                let mut rows: Vec<Vec<i64>> = (0..n - 1).map(|j| unit(n - 1, j)).collect();
                rows.push(vec![-1; n - 1]);
                (h, Some(Torus::diagonal(n, n - 1, rows)))
            }
            SubgroupSpec::Custom { basis, torus } => Self::custom_parts(group, basis, torus)?,
        };
        let x_basis = complement(group, &h_basis);
        debug_assert_eq!(h_basis.len() + x_basis.len(), group.lie_dim());
        Ok(SpaceSpec {
            group,
            subgroup,
            h_basis,
            x_basis,
            components,
            torus,
        })
    }

    fn block_parts(
        group: GroupSpec,
        partition: &[usize],
        components: &mut Vec<DenseMatrix>,
    ) -> (Vec<DenseMatrix>, Option<Torus>) {
        let n = group.n();
        let block = block_index(partition);
        let h: Vec<DenseMatrix> = group
            .lie_basis()
            .into_iter()
            .filter(|b| {
                (0..n).all(|i| (0..n).all(|j| b.get(i, j).norm() == 0.0 || block[i] == block[j]))
            })
            .collect();
        let offsets = block_offsets(partition);
        let torus = match group.family() {
            Family::U => full_torus(group),
            Family::SO => {
                // S(O(n_1) x ... x O(n_m)): one representative per even set of
                // blocks carrying a reflection.
                let m = partition.len();
                for mask in 1u32..(1 << m) {
                    if mask.count_ones() % 2 == 0 {
                        let mut d = DenseMatrix::identity(n);
                        for (b, &o) in offsets.iter().enumerate() {
                            if mask & (1 << b) != 0 {
                                d.set(o, o, C64::new(-1.0, 0.0));
                            }
                        }
                        components.push(d);
                    }
                }
                let blocks: Vec<(usize, usize)> =
                    offsets.iter().cloned().zip(partition.iter().cloned()).collect();
                plane_torus(n, &blocks, false)
            }
        };
        (h, Some(torus))
    }

    fn tensor_parts(group: GroupSpec, m: usize, k: usize) -> (Vec<DenseMatrix>, Option<Torus>) {
        let n = group.n();
        let small = match group.family() {
            Family::U => GroupSpec::unitary(k).ok(),
            Family::SO => GroupSpec::special_orthogonal(k).ok(),
        };
        let h: Vec<DenseMatrix> = small
            .map(|g| g.lie_basis())
            .unwrap_or_default()
            .into_iter()
            .map(|b| {
                DenseMatrix::from_fn(n, |i, j| {
                    if i / k == j / k {
                        b.get(i % k, j % k) / (m as f64).sqrt()
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .map(|b| if group.is_real() { b.real_part() } else { b })
            .collect();
        let torus = match group.family() {
            Family::U => Torus::diagonal(n, k, (0..n).map(|i| unit(k, i % k)).collect()),
            Family::SO => {
                let blocks: Vec<(usize, usize)> = (0..m).map(|b| (b * k, k)).collect();
                plane_torus(n, &blocks, true)
            }
        };
        (h, Some(torus))
    }

    fn custom_parts(
        group: GroupSpec,
        basis: &[MatrixJson],
        torus: &Option<Vec<Vec<i64>>>,
    ) -> Result<(Vec<DenseMatrix>, Option<Torus>)> {
        let n = group.n();
        let mut h: Vec<DenseMatrix> = Vec::with_capacity(basis.len());
        for (idx, j) in basis.iter().enumerate() {
            let m = DenseMatrix::try_from(j)?;
            if m.n() != n {
                return Err(Error::InvalidSubgroup(format!(
                    "basis element {idx} is {}x{}, expected {n}x{n}",
                    m.n(),
                    m.n()
                )));
            }
            if group.is_real() && m.max_imaginary() > 0.0 {
                return Err(Error::InvalidSubgroup(format!(
                    "basis element {idx} is not real"
                )));
            }
            if m.dist_max(&m.adjoint().scale(-1.0)) > BASIS_TOL * m.max_abs().max(1.0) {
                return Err(Error::InvalidSubgroup(format!(
                    "basis element {idx} is not skew-Hermitian"
                )));
            }
            let m = m.skew_part();
            let m = if group.is_real() { m.real_part() } else { m.to_complex() };
            if !push_orthonormal(&mut h, &m, BASIS_TOL * m.frobenius_norm().max(1.0)) {
                return Err(Error::InvalidSubgroup(format!(
                    "basis element {idx} is linearly dependent on the previous ones"
                )));
            }
        }
        let project_residual = |c: &DenseMatrix| -> f64 {
            let mut r = c.clone();
            for b in &h {
                r = &r - &b.scale(b.inner(c));
            }
            r.frobenius_norm()
        };
        for a in &h {
            for b in &h {
                let c = &(a * b) - &(b * a);
                let res = project_residual(&c);
                if res > CLOSURE_TOL * c.frobenius_norm().max(1.0) {
                    return Err(Error::InvalidSubgroup(format!(
                        "basis is not closed under commutators (residual {res:.3e})"
                    )));
                }
            }
        }
        let torus = match torus {
            None => None,
            Some(rows) => {
                let rank = rows.first().map_or(0, |r| r.len());
                if rows.iter().any(|r| r.len() != rank) {
                    return Err(Error::InvalidSubgroup("torus rows differ in length".into()));
                }
                let t = match group.family() {
                    Family::U => {
                        if rows.len() != n {
                            return Err(Error::InvalidSubgroup(format!(
                                "unitary torus needs {n} weight rows, got {}",
                                rows.len()
                            )));
                        }
                        Torus::diagonal(n, rank, rows.clone())
                    }
                    Family::SO => {
                        if rows.len() != n / 2 {
                            return Err(Error::InvalidSubgroup(format!(
                                "orthogonal torus needs {} plane rows, got {}",
                                n / 2,
                                rows.len()
                            )));
                        }
                        let planes =
                            rows.iter().enumerate().map(|(t, w)| (2 * t, 2 * t + 1, w.clone())).collect();
                        Torus::planes(n, rank, planes)
                    }
                };
                for g in t.generators() {
                    let res = project_residual(&g);
                    if res > CLOSURE_TOL * g.frobenius_norm().max(1.0) {
                        return Err(Error::InvalidSubgroup(
                            "torus generators do not lie in the subgroup algebra".into(),
                        ));
                    }
                }
                Some(t)
            }
        };
        Ok((h, torus))
    }

    pub fn group_itself(group: GroupSpec) -> Self {
        SpaceSpec::new(group, SubgroupSpec::Trivial).expect("trivial subgroup is always valid")
    }

    pub fn grassmann(family: Family, n: usize, k: usize) -> Result<Self> {
        SpaceSpec::new(GroupSpec::new(family, n)?, SubgroupSpec::Grassmann { k })
    }

    pub fn unitary_mod_special(n: usize) -> Result<Self> {
        SpaceSpec::new(GroupSpec::unitary(n)?, SubgroupSpec::SpecialUnitary)
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn subgroup(&self) -> &SubgroupSpec {
        &self.subgroup
    }

    /// Orthonormal basis of the subgroup algebra h.
    pub fn h_basis(&self) -> &[DenseMatrix] {
        &self.h_basis
    }

    /// Orthonormal basis of the complement x, the tangent space at the base point.
    pub fn x_basis(&self) -> &[DenseMatrix] {
        &self.x_basis
    }

    pub fn dim(&self) -> usize {
        self.x_basis.len()
    }

    /// Representatives of the connected components of H, identity first.
    pub fn components(&self) -> &[DenseMatrix] {
        &self.components
    }

    pub fn torus(&self) -> Option<&Torus> {
        self.torus.as_ref()
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.subgroup, SubgroupSpec::Custom { .. })
    }

    pub fn kind(&self) -> SpaceKind {
        if self.x_basis.is_empty() {
            return SpaceKind::Point;
        }
        if self.h_basis.is_empty() && self.components.len() == 1 {
            return SpaceKind::Group;
        }
        match &self.subgroup {
            SubgroupSpec::Grassmann { k } => SpaceKind::Grassmann { k: *k },
            SubgroupSpec::BlockDiagonal { partition } if partition.len() == 2 => {
                SpaceKind::Grassmann { k: partition[0] }
            }
            SubgroupSpec::SpecialUnitary => SpaceKind::Circle,
            _ => SpaceKind::Generic,
        }
    }

    /// Identifier such as `U(4)/Gr(2)`.
    pub fn id(&self) -> String {
        format!("{}/{}", self.group, self.subgroup)
    }

    pub(crate) fn project_onto(basis: &[DenseMatrix], y: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(y.n());
        for b in basis {
            let c = b.inner(y);
            if c != 0.0 {
                out = &out + &b.scale(c);
            }
        }
        out
    }

    /// Orthogonal projection onto x.
    pub fn project_x(&self, y: &DenseMatrix) -> DenseMatrix {
        let p = Self::project_onto(&self.x_basis, y);
        if self.group.is_real() { p.real_part() } else { p.to_complex() }
    }

    /// Orthogonal projection onto h.
    pub fn project_h(&self, y: &DenseMatrix) -> DenseMatrix {
        let p = Self::project_onto(&self.h_basis, y);
        if self.group.is_real() { p.real_part() } else { p.to_complex() }
    }

    /// Image of a group element under the quotient map.
    pub fn project(&self, u: &GroupElement) -> QuotientPoint {
        match self.kind() {
            SpaceKind::Point => QuotientPoint::Base,
            SpaceKind::Group => QuotientPoint::Element(u.clone()),
            SpaceKind::Grassmann { k } => QuotientPoint::Subspace(Frame::leading_columns(u.matrix(), k)),
            SpaceKind::Circle => {
                let det = u.matrix().det();
                QuotientPoint::Phase(det.im.atan2(det.re))
            }
            SpaceKind::Generic => QuotientPoint::Coset(u.clone()),
        }
    }

    /// Element of x with the given coordinates in the x basis.
    pub(crate) fn x_coordinates(&self, coeffs: &[f64]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.group.n());
        for (c, b) in coeffs.iter().zip(&self.x_basis) {
            out = &out + &b.scale(*c);
        }
        if self.group.is_real() { out.real_part() } else { out.to_complex() }
    }
}

/// A point of G/H in the cheapest faithful representation.
#[derive(Clone, Debug)]
pub enum QuotientPoint {
    Base,
    Element(GroupElement),
    Subspace(Frame),
    /// Argument of the determinant, for U(n)/SU(n).
    Phase(f64),
    Coset(GroupElement),
}
