use std::f64::consts::PI;

use serde::Serialize;

use super::points::{IndexedSet, QuotientMetric};
use crate::error::{Error, Result};
use crate::groups::{haar_sample, GroupElement};
use crate::matcore::SkewExp;
use crate::metrics::{NormSpec, QuotientOptions};
use crate::rng::Stream;
use crate::spaces::{SpaceKind, SpaceSpec};

/// Covering radius slack accepted by the audit.
pub const AUDIT_SLACK: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct NetOptions {
    /// Haar probes used by the covering audit.
    pub probes: usize,
    pub seed: u64,
    /// Refuse grids with more cells than this.
    pub max_cells: usize,
    /// Minimizer settings for spaces without a closed-form distance.
    pub quotient: QuotientOptions,
}

impl Default for NetOptions {
    fn default() -> Self {
        NetOptions {
            probes: 2000,
            seed: 0,
            max_cells: 2_000_000,
            quotient: QuotientOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NetAudit {
    pub probes: usize,
    pub max_distance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NetReport {
    pub space: String,
    pub epsilon: f64,
    pub p: NormSpec,
    pub dim: usize,
    pub diameter: f64,
    /// Radius of the tangent ball that was gridded.
    pub radius: f64,
    pub cardinality: usize,
    pub construction: &'static str,
    /// Coordinate spacing of the grid.
    pub grid_step: f64,
    pub audit: NetAudit,
    /// `C` with `cardinality = (C diam / epsilon)^dim`.
    pub achieved_c: f64,
    #[serde(skip)]
    pub elements: Vec<GroupElement>,
}

/// Catalog diameter, or pi when only a Monte-Carlo estimate exists.
pub(crate) fn covering_diameter(space: &SpaceSpec) -> f64 {
    match space.kind() {
        SpaceKind::Point => 0.0,
        SpaceKind::Group => PI,
        SpaceKind::Grassmann { .. } => PI / 2.0,
        SpaceKind::Circle => PI / space.group().n() as f64,
        SpaceKind::Generic => PI,
    }
}

/// Bound on `||x||_p / ||x||_F` for n by n matrices.
fn norm_factor(p: NormSpec, n: usize) -> f64 {
    if p.p() >= 2.0 {
        1.0
    } else {
        (n as f64).powf(1.0 / p.p() - 0.5)
    }
}

fn unit_ball_volume(d: usize) -> f64 {
    // V_d = pi^{d/2} / Gamma(d/2 + 1), by the two-step recursion.
    let mut v = [1.0, 2.0];
    for k in 2..=d {
        let next = 2.0 * PI / k as f64 * v[0];
        v = [v[1], next];
    }
    if d == 0 {
        1.0
    } else {
        v[1]
    }
}

/// Integer points k in Z^d with `|k|^2 <= r2`.
fn lattice_ball(d: usize, r2: f64, visit: &mut impl FnMut(&[i64]) -> Result<()>) -> Result<()> {
    fn rec(k: &mut Vec<i64>, d: usize, left: f64, visit: &mut impl FnMut(&[i64]) -> Result<()>) -> Result<()> {
        if k.len() == d {
            return visit(k);
        }
        let m = left.max(0.0).sqrt().floor() as i64;
        for j in -m..=m {
            k.push(j);
            rec(k, d, left - (j * j) as f64, visit)?;
            k.pop();
        }
        Ok(())
    }
    rec(&mut Vec::with_capacity(d), d, r2, visit)
}

/// Covering net of G/H: a coordinate grid on the tangent ball of radius
/// diam M in x, pushed through `q o exp` and pruned of near duplicates.
pub fn build_net(space: &SpaceSpec, epsilon: f64, p: NormSpec, opts: &NetOptions) -> Result<NetReport> {
    let diam = covering_diameter(space);
    let d = space.dim();
    if !(epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    if d > 0 && epsilon > diam * (1.0 + 1e-12) {
        return Err(Error::param(format!("epsilon {epsilon} exceeds the diameter {diam}")));
    }
    let group = space.group();
    let n = group.n();
    let metric = QuotientMetric::new(space, p, opts.quotient.clone());

    let mut net = IndexedSet::new(&metric, epsilon / 4.0);
    let step;
    if d == 0 {
        step = 0.0;
        net.push(metric.point(group.identity()));
    } else {
        step = epsilon / ((d as f64).sqrt() * norm_factor(p, n));
        let op_limit = diam + epsilon / 2.0;
        // Frobenius radius enclosing the operator-norm ball of radius op_limit.
        let coord_radius = (n as f64).sqrt() * op_limit / step;
        let cells = unit_ball_volume(d) * (coord_radius + (d as f64).sqrt()).powi(d as i32);
        if !(cells <= opts.max_cells as f64) {
            return Err(Error::TooLarge {
                what: "net grid cells",
                size: cells.min(usize::MAX as f64) as usize,
                limit: opts.max_cells,
            });
        }
        lattice_ball(d, coord_radius * coord_radius, &mut |k| {
            let coeffs: Vec<f64> = k.iter().map(|&j| j as f64 * step).collect();
            let x = space.x_coordinates(&coeffs);
            let e = SkewExp::new(&x)?;
            if e.freqs().iter().fold(0.0f64, |m, f| m.max(f.abs())) > op_limit {
                return Ok(());
            }
            let q = metric.point(GroupElement::from_unchecked(group, e.exp(1.0)));
            if !net.any_within(&q, epsilon / 4.0)? {
                net.push(q);
            }
            Ok(())
        })?;
    }

    let mut audit_set = IndexedSet::new(&metric, epsilon);
    for pt in &net.points {
        audit_set.push(pt.clone());
    }
    let root = Stream::new(opts.seed).child("net-audit");
    let mut max_distance: f64 = 0.0;
    for i in 0..opts.probes {
        let u = haar_sample(group, &mut root.index(i as u64).rng());
        max_distance = max_distance.max(audit_set.nearest(&metric.point(u))?);
    }
    let cardinality = net.points.len();
    let achieved_c = if d == 0 {
        0.0
    } else {
        (cardinality as f64).powf(1.0 / d as f64) * epsilon / diam
    };
    Ok(NetReport {
        space: space.id(),
        epsilon,
        p,
        dim: d,
        diameter: diam,
        radius: diam,
        cardinality,
        construction: "grid-exp",
        grid_step: step,
        audit: NetAudit {
            probes: opts.probes,
            max_distance,
            pass: max_distance <= epsilon * (1.0 + AUDIT_SLACK),
        },
        achieved_c,
        elements: net.points.into_iter().map(|p| p.element).collect(),
    })
}
