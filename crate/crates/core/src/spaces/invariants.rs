use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::spec::{SpaceKind, SpaceSpec, SubgroupSpec, Torus};
use crate::error::{Error, Result};
use crate::groups::{haar_sample, sign_extreme_point};
use crate::matcore::{eigh, principal_arg, schatten_norm, DenseMatrix, MatrixJson, C64, I};
use crate::metrics::{quotient_dist, NormSpec, QuotientOptions};
use crate::rng::Stream;

/// Catalog value of theta for block-diagonal and tensor-factor subgroups.
const BLOCK_THETA: f64 = 2.0;
const ASCENT_GAIN_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct InvariantOptions {
    /// Random restarts of the kappa ascent.
    pub kappa_restarts: usize,
    pub kappa_iterations: usize,
    /// Haar samples of the diameter estimate.
    pub diameter_samples: usize,
    /// Torus lattice numerators run over `-lattice_l..=lattice_l`.
    pub lattice_l: i64,
    /// Largest lattice denominator; `None` means n.
    pub max_denominator: Option<usize>,
    /// Lifts `c + 2 pi k` are searched over `|k_j| <= lift_radius`.
    pub lift_radius: i64,
    /// Lattice points examined before the search is cut short.
    pub max_points: usize,
    /// Minimizer settings for the diameter estimate.
    pub quotient: QuotientOptions,
    pub seed: u64,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions {
            kappa_restarts: 32,
            kappa_iterations: 50,
            diameter_samples: 32,
            lattice_l: 3,
            max_denominator: None,
            lift_radius: 1,
            max_points: 50_000,
            quotient: QuotientOptions {
                restarts: 16,
                stability_window: 4,
                lattice_restarts: 8,
                ..QuotientOptions::default()
            },
            seed: 0,
        }
    }
}

impl InvariantOptions {
    pub fn with_seed(seed: u64) -> Self {
        let mut o = InvariantOptions {
            seed,
            ..Self::default()
        };
        o.quotient.seed = seed;
        o
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMethod {
    ClosedForm,
    EstimatedLowerBound,
    /// x = 0, so the projection is the zero map.
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaEstimate {
    /// Exact value, or the best lower bound found by the ascent.
    pub value: f64,
    pub method: KappaMethod,
    /// A-priori upper bound on kappa.
    pub upper: f64,
    /// Where the upper bound comes from.
    pub upper_reason: &'static str,
    /// Unit operator-norm witness with `||P_x witness|| = value`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<MatrixJson>,
    /// Direct re-evaluation of the norm ratio at the witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_value: Option<f64>,
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaMethod {
    Catalog,
    TorusSearch,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusSearch {
    /// Smallest distance to the identity of a torus element with no short
    /// logarithm in h; pi if none was found.
    pub value: f64,
    pub points_examined: usize,
    /// Some denominators were sampled rather than swept because of the point cap.
    pub truncated: bool,
    /// Torus parameter of the minimizing element.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaEstimate {
    pub value: f64,
    pub method: ThetaMethod,
    /// Set when the catalog value is a bare constant whose scale is not
    /// pinned down; the torus search is then reported alongside.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torus_search: Option<TorusSearch>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterMethod {
    Catalog,
    McLowerBound,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiameterEstimate {
    pub value: f64,
    pub method: DiameterMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub space: String,
    pub dim: usize,
    pub kappa: KappaEstimate,
    pub theta: ThetaEstimate,
    pub diameter: DiameterEstimate,
}

/// Orthonormal bases of h and of its complement x.
pub fn tangent_split(space: &SpaceSpec) -> (&[DenseMatrix], &[DenseMatrix]) {
    (space.h_basis(), space.x_basis())
}

/// Whether h is the range of a norm-one conditional expectation, which
/// gives `kappa <= 2`.
fn has_conditional_expectation(space: &SpaceSpec) -> bool {
    !matches!(space.subgroup(), SubgroupSpec::Custom { .. })
}

fn kappa_upper(space: &SpaceSpec) -> (f64, &'static str) {
    let root_n = (space.group().n() as f64).sqrt();
    if has_conditional_expectation(space) && root_n > 2.0 {
        (2.0, "conditional-expectation")
    } else {
        (root_n, "frobenius")
    }
}

/// `||P_x x||_inf / ||x||_inf`.
fn projection_ratio(space: &SpaceSpec, x: &DenseMatrix) -> Result<f64> {
    let num = schatten_norm(&space.project_x(x), NormSpec::OPERATOR)?;
    let den = schatten_norm(x, NormSpec::OPERATOR)?;
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Norm of the projection of `x` and the extreme point of the unit ball
/// that increases it fastest.
fn ascent_direction(space: &SpaceSpec, x: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
    let y = space.project_x(x);
    let (vals, vecs) = eigh(&y.scale_complex(-I).hermitian_part().to_complex())?;
    let n = vals.len();
    let (idx, lam) = if vals[0].abs() > vals[n - 1].abs() {
        (0, vals[0])
    } else {
        (n - 1, vals[n - 1])
    };
    let v = vecs.column(idx);
    let sign = if lam < 0.0 { -1.0 } else { 1.0 };
    let g = DenseMatrix::from_fn(n, |i, j| I * sign * v[i] * v[j].conj());
    let g = if space.group().is_real() { g.real_part() } else { g };
    let d = space.project_x(&g);
    Ok((lam.abs(), sign_extreme_point(space.group(), &d)?))
}

/// `kappa = ||P_x||` on the operator-norm unit ball of g.
pub fn kappa(space: &SpaceSpec, opts: &InvariantOptions) -> Result<KappaEstimate> {
    if opts.kappa_restarts == 0 {
        return Err(Error::param("kappa needs a positive restart budget"));
    }
    let (upper, upper_reason) = kappa_upper(space);
    let exact = |value: f64, method: KappaMethod| KappaEstimate {
        value,
        method,
        upper: value,
        upper_reason: "exact",
        witness: None,
        witness_value: None,
        restarts: 0,
    };
    match space.kind() {
        SpaceKind::Point => return Ok(exact(0.0, KappaMethod::Degenerate)),
        SpaceKind::Group | SpaceKind::Grassmann { .. } | SpaceKind::Circle => {
            return Ok(exact(1.0, KappaMethod::ClosedForm))
        }
        SpaceKind::Generic => {}
    }
    let group = space.group();
    let root = Stream::new(opts.seed).child("kappa");
    let mut best = 0.0;
    let mut best_x: Option<DenseMatrix> = None;
    for r in 0..opts.kappa_restarts {
        let mut rng = root.index(r as u64).rng();
        let start = haar_sample(group, &mut rng);
        let skew = start.matrix().skew_part();
        let skew = if group.is_real() { skew.real_part() } else { skew };
        let mut x = sign_extreme_point(group, &skew)?;
        let (mut value, mut next) = ascent_direction(space, &x)?;
        for _ in 0..opts.kappa_iterations {
            let (val, after) = ascent_direction(space, &next)?;
            if val <= value + ASCENT_GAIN_TOL {
                if val > value {
                    value = val;
                    x = next;
                }
                break;
            }
            value = val;
            x = std::mem::replace(&mut next, after);
        }
        if value > best {
            best = value;
            best_x = Some(x);
        }
    }
    let witness_value = match &best_x {
        Some(x) => Some(projection_ratio(space, x)?),
        None => None,
    };
    Ok(KappaEstimate {
        value: best,
        method: KappaMethod::EstimatedLowerBound,
        upper,
        upper_reason,
        witness: best_x.as_ref().map(MatrixJson::from),
        witness_value,
        restarts: opts.kappa_restarts,
    })
}

fn dot(w: &[i64], c: &[f64]) -> f64 {
    w.iter().zip(c).map(|(a, b)| *a as f64 * b).sum()
}

/// Whether some lift `c + 2 pi k` with `|k_j| <= radius` has all eigenvalue
/// angles strictly inside (-pi, pi).
fn has_short_lift(rows: &[Vec<i64>], c: &[f64], radius: i64) -> bool {
    let short = |cc: &[f64]| rows.iter().all(|w| dot(w, cc).abs() < PI - 1e-12);
    if short(c) {
        return true;
    }
    let r = c.len();
    let mut k = vec![-radius; r];
    let mut cc = vec![0.0; r];
    loop {
        for j in 0..r {
            cc[j] = c[j] + 2.0 * PI * k[j] as f64;
        }
        if short(&cc) {
            return true;
        }
        let mut j = 0;
        loop {
            if j == r {
                return false;
            }
            if k[j] < radius {
                k[j] += 1;
                break;
            }
            k[j] = -radius;
            j += 1;
        }
    }
}

fn reduce_angle(a: f64) -> f64 {
    principal_arg(C64::from_polar(1.0, a))
}

/// Searches the torus lattice for elements of H far from `exp(B_h(pi))`.
pub fn theta_torus_search(torus: &Torus, opts: &InvariantOptions) -> TorusSearch {
    let rows = torus.angle_rows();
    let rank = torus.rank();
    let n = rows.len();
    let max_den = opts.max_denominator.unwrap_or(n).max(1);
    let side = (2 * opts.lattice_l + 1) as usize;
    let mut best = PI;
    let mut witness = None;
    let mut examined = 0usize;
    let mut truncated = false;
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut visit = |num: &[i64], step: f64, examined: &mut usize| {
        let c: Vec<f64> = num.iter().map(|&j| reduce_angle(j as f64 * step)).collect();
        let key: Vec<i64> = c.iter().map(|a| (a * 1e9).round() as i64).collect();
        if seen.insert(key) {
            *examined += 1;
            let rho = rows
                .iter()
                .map(|w| reduce_angle(dot(w, &c)).abs())
                .fold(0.0, f64::max);
            if rho < best - 1e-12 && !has_short_lift(&rows, &c, opts.lift_radius) {
                best = rho;
                witness = Some(c);
            }
        }
    };
    // a full sweep per denominator when it fits, otherwise a seeded sample
    let share = opts.max_points / max_den;
    let root = Stream::new(opts.seed).child("torus");
    for den in 1..=max_den {
        let step = 2.0 * PI / den as f64;
        let count = side.checked_pow(rank as u32).unwrap_or(usize::MAX);
        if examined.saturating_add(count) > opts.max_points {
            truncated = true;
            let mut rng = root.index(den as u64).rng();
            for _ in 0..share {
                let num: Vec<i64> = (0..rank)
                    .map(|_| rng.random_range(-opts.lattice_l..=opts.lattice_l))
                    .collect();
                visit(&num, step, &mut examined);
            }
            continue;
        }
        let mut num = vec![-opts.lattice_l; rank];
        loop {
            visit(&num, step, &mut examined);
            let mut j = 0;
            loop {
                if j == rank {
                    break;
                }
                if num[j] < opts.lattice_l {
                    num[j] += 1;
                    break;
                }
                num[j] = -opts.lattice_l;
                j += 1;
            }
            if j == rank {
                break;
            }
        }
    }
    TorusSearch {
        value: best,
        points_examined: examined,
        truncated,
        witness,
    }
}

pub fn theta(space: &SpaceSpec, opts: &InvariantOptions) -> Result<ThetaEstimate> {
    let search = space.torus().map(|t| theta_torus_search(t, opts));
    let catalog = |value: f64, note: Option<&'static str>, torus_search: Option<TorusSearch>| {
        ThetaEstimate {
            value,
            method: ThetaMethod::Catalog,
            note,
            torus_search,
        }
    };
    Ok(match space.subgroup() {
        SubgroupSpec::Full => ThetaEstimate {
            value: PI,
            method: ThetaMethod::Degenerate,
            note: None,
            torus_search: search,
        },
        SubgroupSpec::Grassmann { .. } => catalog(PI, None, search),
        SubgroupSpec::BlockDiagonal { partition } if partition.len() == 2 => catalog(PI, None, search),
        SubgroupSpec::BlockDiagonal { .. } | SubgroupSpec::TensorFactor { .. } => catalog(
            BLOCK_THETA,
            Some("catalog constant 2 with unstated scale; see torus_search"),
            search,
        ),
        SubgroupSpec::Trivial | SubgroupSpec::SpecialUnitary | SubgroupSpec::Custom { .. } => {
            match search {
                Some(s) => ThetaEstimate {
                    value: s.value,
                    method: ThetaMethod::TorusSearch,
                    note: None,
                    torus_search: Some(s),
                },
                None => {
                    return Err(Error::UnsupportedInvariant(
                        "theta of a custom subgroup needs a torus parameterisation".into(),
                    ))
                }
            }
        }
    })
}

fn catalog_diameter(space: &SpaceSpec) -> Option<(f64, DiameterMethod)> {
    match space.kind() {
        SpaceKind::Point => Some((0.0, DiameterMethod::Degenerate)),
        SpaceKind::Group => Some((PI, DiameterMethod::Catalog)),
        SpaceKind::Grassmann { .. } => Some((PI / 2.0, DiameterMethod::Catalog)),
        SpaceKind::Circle => Some((PI / space.group().n() as f64, DiameterMethod::Catalog)),
        SpaceKind::Generic => None,
    }
}

/// Largest operator-norm quotient distance from the base point over
/// `samples` Haar points, capped at pi.
pub fn diameter_monte_carlo(space: &SpaceSpec, samples: usize, opts: &QuotientOptions) -> Result<f64> {
    let group = space.group();
    let base = group.identity();
    let root = Stream::new(opts.seed).child("diameter");
    let mut best: f64 = 0.0;
    for s in 0..samples {
        let u = haar_sample(group, &mut root.index(s as u64).rng());
        let q = QuotientOptions {
            seed: root.index(s as u64).key(),
            ..opts.clone()
        };
        best = best.max(quotient_dist(space, &base, &u, NormSpec::OPERATOR, &q)?.value);
    }
    Ok(best.min(PI))
}

pub fn diameter(space: &SpaceSpec, opts: &InvariantOptions) -> Result<DiameterEstimate> {
    if let Some((value, method)) = catalog_diameter(space) {
        return Ok(DiameterEstimate {
            value,
            method,
            samples: None,
        });
    }
    let mut q = opts.quotient.clone();
    q.seed = opts.seed;
    Ok(DiameterEstimate {
        value: diameter_monte_carlo(space, opts.diameter_samples, &q)?,
        method: DiameterMethod::McLowerBound,
        samples: Some(opts.diameter_samples),
    })
}

pub fn invariants(space: &SpaceSpec, opts: &InvariantOptions) -> Result<InvariantReport> {
    Ok(InvariantReport {
        space: space.id(),
        dim: space.dim(),
        kappa: kappa(space, opts)?,
        theta: theta(space, opts)?,
        diameter: diameter(space, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{Family, GroupSpec};
    use approx::assert_relative_eq;

    #[test]
    fn grassmann_torus_search_finds_pi() {
        let s = SpaceSpec::grassmann(Family::U, 4, 2).unwrap();
        let t = theta(&s, &InvariantOptions::default()).unwrap();
        assert_eq!(t.method, ThetaMethod::Catalog);
        assert_relative_eq!(t.torus_search.unwrap().value, PI, epsilon = 1e-6);
    }

    #[test]
    fn special_unitary_theta_is_two_pi_over_n() {
        for n in 2..=4 {
            let s = SpaceSpec::unitary_mod_special(n).unwrap();
            let t = theta(&s, &InvariantOptions::default()).unwrap();
            assert_eq!(t.method, ThetaMethod::TorusSearch);
            assert_relative_eq!(t.value, 2.0 * PI / n as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn kappa_of_block_diagonal_exceeds_one() {
        let g = GroupSpec::unitary(3).unwrap();
        let s = SpaceSpec::new(g, SubgroupSpec::BlockDiagonal { partition: vec![1, 1, 1] }).unwrap();
        let k = kappa(&s, &InvariantOptions::with_seed(3)).unwrap();
        assert!(k.value > 1.0 + 1e-3 && k.value <= k.upper + 1e-12, "{k:?}");
        assert_relative_eq!(k.witness_value.unwrap(), k.value, epsilon = 1e-9);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let s = SpaceSpec::grassmann(Family::U, 3, 1).unwrap();
        let opts = InvariantOptions {
            kappa_restarts: 0,
            ..InvariantOptions::default()
        };
        assert!(matches!(kappa(&s, &opts), Err(Error::InvalidParameter(_))));
    }
}
