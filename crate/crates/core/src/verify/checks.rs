use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{CheckReport, PhiBound, Witness};
use crate::error::{Error, Result};
use crate::groups::{haar_sample, random_tangent, random_tangent_on_sphere, GroupElement, GroupSpec};
use crate::matcore::{expm_skew_matrix, logm_matrix, schatten_norm, DenseMatrix, MatrixJson};
use crate::metrics::{
    arc_distance, discrete_path_length, eigenvalue_matching_distance, intrinsic_dist, quotient_dist,
    quotient_dist_generic, NormSpec, QuotientOptions, MAX_MATCHING_DIM,
};
use crate::rng::{Stream, StreamRng};
use crate::spaces::{SpaceKind, SpaceSpec};

const EXP_TOL: f64 = 1e-9;
const BCH_TOL: f64 = 1e-8;
const GEODESIC_TOL: f64 = 1e-8;
const SU_CIRCLE_TOL: f64 = 1e-6;
const SPECTRAL_TOL: f64 = 1e-8;
/// Ratio floor for radius at most pi / 4.
const QUARTER_PI_RATIO: f64 = 0.4;

/// Running minimum of the margin with its witness; ties keep the earliest trial.
struct Worst {
    margin: f64,
    ratio: Option<f64>,
    witness: Option<Witness>,
    skipped: usize,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            ratio: None,
            witness: None,
            skipped: 0,
        }
    }

    fn record(&mut self, margin: f64, ratio: Option<f64>, witness: impl FnOnce() -> Witness) {
        if let Some(r) = ratio {
            self.ratio = Some(self.ratio.map_or(r, |w| w.min(r)));
        }
        if margin < self.margin {
            self.margin = margin;
            self.witness = Some(witness());
        }
    }
}

struct Context {
    name: &'static str,
    group: Option<GroupSpec>,
    space: Option<SpaceSpec>,
    p: Option<NormSpec>,
    theta: Option<f64>,
    seed: u64,
}

fn finish(ctx: Context, trials: usize, worst: Worst, tolerance: f64, metrics: BTreeMap<String, f64>) -> CheckReport {
    let margin = if worst.margin.is_finite() { worst.margin } else { 0.0 };
    CheckReport {
        name: ctx.name.to_string(),
        group: ctx.group,
        space: ctx.space,
        p: ctx.p,
        theta: ctx.theta,
        trials,
        skipped: worst.skipped,
        worst_margin: margin,
        worst_ratio: worst.ratio,
        tolerance,
        pass: margin >= -tolerance,
        witness: worst.witness,
        seed: ctx.seed,
        metrics,
    }
}

fn need_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::param("a check needs at least one trial"));
    }
    Ok(())
}

fn trial_rng(name: &str, seed: u64, i: usize) -> StreamRng {
    Stream::new(seed).child(name).index(i as u64).rng()
}

fn exp_element(group: GroupSpec, x: &DenseMatrix) -> Result<GroupElement> {
    Ok(GroupElement::from_unchecked(group, expm_skew_matrix(x)?))
}

fn json(m: &DenseMatrix) -> MatrixJson {
    MatrixJson::from(m)
}

fn matrix(j: &MatrixJson) -> Result<DenseMatrix> {
    DenseMatrix::try_from(j)
}

fn tangent(group: GroupSpec, p: NormSpec, radius: f64, rng: &mut StreamRng) -> Result<DenseMatrix> {
    Ok(random_tangent(group, p, radius, rng)?.matrix().clone())
}

// ---------------------------------------------------------------- exp contraction

fn exp_lipschitz_margin(group: GroupSpec, p: NormSpec, x: &DenseMatrix, y: &DenseMatrix) -> Result<(f64, Option<f64>)> {
    let dx = schatten_norm(&(x - y), p)?;
    let (ex, ey) = (exp_element(group, x)?, exp_element(group, y)?);
    let chord = schatten_norm(&(ex.matrix() - ey.matrix()), p)?;
    let arc = intrinsic_dist(&ex, &ey, p)?;
    let lhs = chord.max(arc);
    Ok((dx - lhs, (dx > 0.0).then(|| lhs / dx)))
}

/// `||e^x - e^y||_p` and `rho(e^x, e^y)` are both at most `||x - y||_p`.
pub fn check_exp_lipschitz(group: GroupSpec, p: NormSpec, trials: usize, seed: u64) -> Result<CheckReport> {
    need_trials(trials)?;
    let name = "exp_lipschitz";
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let x = tangent(group, NormSpec::OPERATOR, 2.0 * PI, &mut rng)?;
        // the first trial is the coincident pair
        let y = if i == 0 { x.clone() } else { tangent(group, NormSpec::OPERATOR, 2.0 * PI, &mut rng)? };
        let (m, r) = exp_lipschitz_margin(group, p, &x, &y)?;
        worst.record(m, r, || Witness::Pair { x: json(&x), y: json(&y) });
    }
    let ctx = Context {
        name,
        group: Some(group),
        space: None,
        p: Some(p),
        theta: None,
        seed,
    };
    Ok(finish(ctx, trials, worst, EXP_TOL, BTreeMap::new()))
}

// ---------------------------------------------------------------- exp lower bound

fn phi_margin(group: GroupSpec, p: NormSpec, bound: f64, x: &DenseMatrix, y: &DenseMatrix) -> Result<Option<(f64, f64)>> {
    let dx = schatten_norm(&(x - y), p)?;
    if dx <= 1e-12 {
        return Ok(None);
    }
    let (ex, ey) = (exp_element(group, x)?, exp_element(group, y)?);
    let chord = schatten_norm(&(ex.matrix() - ey.matrix()), p)?;
    Ok(Some((chord - bound * dx, chord / dx)))
}

/// On the operator-norm ball of radius theta, `||e^x - e^y||_p` is at least
/// `PhiBound(theta) ||x - y||_p`; for theta at most pi / 4 the ratio is at
/// least 0.4.
pub fn check_phi_lower_bound(group: GroupSpec, p: NormSpec, theta: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    let bound = PhiBound::new(theta)?.bound;
    need_trials(trials)?;
    let name = "phi_lower_bound";
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let x = tangent(group, NormSpec::OPERATOR, theta, &mut rng)?;
        // alternate far pairs with close ones, where the ratio is smallest
        let y = if i % 2 == 0 {
            tangent(group, NormSpec::OPERATOR, theta, &mut rng)?
        } else {
            let scale = 10f64.powf(-3.0 * rng.random::<f64>());
            let d = tangent(group, NormSpec::OPERATOR, theta * scale, &mut rng)?;
            let y = &x + &d;
            let norm = schatten_norm(&y, NormSpec::OPERATOR)?;
            if norm > theta { y.scale(theta / norm) } else { y }
        };
        match phi_margin(group, p, bound, &x, &y)? {
            None => worst.skipped += 1,
            Some((m, r)) => worst.record(m, Some(r), || Witness::Pair { x: json(&x), y: json(&y) }),
        }
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("phi_bound".into(), bound);
    let min_ratio = worst.ratio.unwrap_or(f64::INFINITY);
    let ratio_ok = theta > PI / 4.0 || min_ratio >= QUARTER_PI_RATIO;
    let ctx = Context {
        name,
        group: Some(group),
        space: None,
        p: Some(p),
        theta: Some(theta),
        seed,
    };
    let mut report = finish(ctx, trials, worst, EXP_TOL, metrics);
    report.pass &= ratio_ok;
    Ok(report)
}

// ---------------------------------------------------------------- BCH defect

fn bch_defect(group: GroupSpec, p: NormSpec, x: &DenseMatrix, y: &DenseMatrix) -> Result<(f64, f64)> {
    let lhs_a = exp_element(group, &(x + y))?;
    let prod = &expm_skew_matrix(x)? * &expm_skew_matrix(y)?;
    let lhs = intrinsic_dist(&lhs_a, &GroupElement::from_unchecked(group, prod), p)?;
    let comm = &(x * y) - &(y * x);
    Ok((lhs, schatten_norm(&comm, p)?))
}

fn bch_margin(group: GroupSpec, p: NormSpec, x: &DenseMatrix, y: &DenseMatrix) -> Result<(f64, Option<f64>)> {
    let (lhs, rhs) = bch_defect(group, p, x, y)?;
    Ok((rhs - lhs, (rhs > 0.0).then(|| lhs / rhs)))
}

/// `rho(e^{x+y}, e^x e^y) <= ||[x, y]||_p`.
pub fn check_bch_defect(group: GroupSpec, p: NormSpec, trials: usize, seed: u64) -> Result<CheckReport> {
    need_trials(trials)?;
    let name = "bch_defect";
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let x = tangent(group, NormSpec::OPERATOR, PI, &mut rng)?;
        // the first trial is a commuting pair
        let y = if i == 0 { x.scale(0.5) } else { tangent(group, NormSpec::OPERATOR, PI, &mut rng)? };
        let (m, r) = bch_margin(group, p, &x, &y)?;
        worst.record(m, r, || Witness::Pair { x: json(&x), y: json(&y) });
    }
    let ctx = Context {
        name,
        group: Some(group),
        space: None,
        p: Some(p),
        theta: None,
        seed,
    };
    Ok(finish(ctx, trials, worst, BCH_TOL, BTreeMap::new()))
}

#[derive(Clone, Debug, Serialize)]
pub struct BchScaling {
    pub commutator_norm: f64,
    pub t: [f64; 2],
    /// `defect(t x, t y) / t^2` at both scales.
    pub scaled_defect: [f64; 2],
    /// First-order extrapolation of the scaled defect to t = 0.
    pub limit: f64,
    /// `limit / ||[x, y]||_p`.
    pub limit_ratio: f64,
    /// `scaled_defect[0] / scaled_defect[1]`, 1 under exact t^2 scaling.
    pub scaling_ratio: f64,
}

/// Small-t behaviour of the BCH defect for one random pair of unit
/// operator-norm generators.
pub fn bch_scaling(group: GroupSpec, p: NormSpec, seed: u64) -> Result<BchScaling> {
    let mut rng = Stream::new(seed).child("bch_scaling").rng();
    let x = random_tangent_on_sphere(group, NormSpec::OPERATOR, 1.0, &mut rng)?.matrix().clone();
    let y = random_tangent_on_sphere(group, NormSpec::OPERATOR, 1.0, &mut rng)?.matrix().clone();
    let t = [1e-2, 1e-3];
    let mut scaled = [0.0; 2];
    let mut comm = 0.0;
    for (k, &tk) in t.iter().enumerate() {
        let (lhs, rhs) = bch_defect(group, p, &x.scale(tk), &y.scale(tk))?;
        scaled[k] = lhs / (tk * tk);
        comm = rhs / (tk * tk);
    }
    // scaled(t) = L + a t + O(t^2)
    let limit = (t[0] * scaled[1] - t[1] * scaled[0]) / (t[0] - t[1]);
    Ok(BchScaling {
        commutator_norm: comm,
        t,
        scaled_defect: scaled,
        limit,
        limit_ratio: limit / comm,
        scaling_ratio: scaled[0] / scaled[1],
    })
}

// ---------------------------------------------------------------- geodesics

fn geodesic_margin(p: NormSpec, x: &DenseMatrix, points: &[GroupElement]) -> Result<f64> {
    Ok(discrete_path_length(points, p)? - schatten_norm(x, p)?)
}

/// Path `exp(t_k x) exp(delta_k)` with `delta` built by Gaussian midpoint
/// displacement over `2^levels` segments, fixed at both ends.
fn competitor_path(group: GroupSpec, x: &DenseMatrix, levels: u32, amplitude: f64, rng: &mut StreamRng) -> Result<Vec<GroupElement>> {
    let segments = 1usize << levels;
    let n = group.n();
    let mut delta = vec![DenseMatrix::zeros(n); segments + 1];
    let mut width = segments;
    let mut amp = amplitude;
    while width > 1 {
        let half = width / 2;
        let mut i = half;
        while i < segments {
            let mid = (&delta[i - half] + &delta[i + half]).scale(0.5);
            let g = gaussian_tangent(group, rng);
            delta[i] = &mid + &g.scale(amp);
            i += width;
        }
        width = half;
        amp *= 0.5;
    }
    let step = crate::matcore::SkewExp::new(x)?;
    (0..=segments)
        .map(|k| {
            let base = step.exp(k as f64 / segments as f64);
            let m = &base * &expm_skew_matrix(&delta[k])?;
            Ok(GroupElement::from_unchecked(group, m))
        })
        .collect()
}

fn gaussian_tangent(group: GroupSpec, rng: &mut StreamRng) -> DenseMatrix {
    let n = group.n();
    let m = if group.is_real() {
        DenseMatrix::from_fn_real(n, |_, _| StandardNormal.sample(rng))
    } else {
        DenseMatrix::from_fn(n, |_, _| {
            crate::matcore::C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        })
    };
    m.skew_part().scale(1.0 / (n as f64).sqrt())
}

/// Every perturbed path from I to `exp(x)` is at least as long as the
/// one-parameter path, whose refinement has length exactly `||x||_p`.
pub fn check_geodesic_minimality(
    group: GroupSpec,
    p: NormSpec,
    trials: usize,
    competitors: usize,
    seed: u64,
) -> Result<CheckReport> {
    need_trials(trials)?;
    let name = "geodesic_minimality";
    let mut worst = Worst::new();
    let mut refinement_error: f64 = 0.0;
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let x = tangent(group, NormSpec::OPERATOR, PI - 0.1, &mut rng)?;
        let norm = schatten_norm(&x, p)?;
        let straight = competitor_path(group, &x, 6, 0.0, &mut rng)?;
        refinement_error = refinement_error.max((discrete_path_length(&straight, p)? - norm).abs());
        for _ in 0..competitors {
            let levels = rng.random_range(3..=6);
            let amplitude = 0.5 * rng.random::<f64>();
            let path = competitor_path(group, &x, levels, amplitude, &mut rng)?;
            let m = geodesic_margin(p, &x, &path)?;
            worst.record(m, Some(1.0 + m / norm.max(f64::MIN_POSITIVE)), || Witness::Path {
                x: json(&x),
                points: path.iter().map(|g| json(g.matrix())).collect(),
            });
        }
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("refinement_error".into(), refinement_error);
    let ctx = Context {
        name,
        group: Some(group),
        space: None,
        p: Some(p),
        theta: None,
        seed,
    };
    let mut report = finish(ctx, trials * competitors, worst, GEODESIC_TOL, metrics);
    report.pass &= refinement_error <= 1e-9;
    Ok(report)
}

// ---------------------------------------------------------------- log ball

const LOG_RESIDUAL_TOL: f64 = 1e-9;
const LOG_NORM_SLACK: f64 = 1e-12;
const LOG_INJECTIVITY_TOL: f64 = 1e-8;

/// Smallest slack among: `exp(log u)` reproduces u, `log u` lies in the
/// closed pi-ball, and `log(exp x)` reproduces x.
fn log_ball_margin(u: &DenseMatrix, x: &DenseMatrix) -> Result<f64> {
    let op = NormSpec::OPERATOR;
    let l = logm_matrix(u)?;
    let residual = schatten_norm(&(&expm_skew_matrix(&l)? - u), op)?;
    let norm = schatten_norm(&l, op)?;
    let back = logm_matrix(&expm_skew_matrix(x)?)?;
    let injectivity = schatten_norm(&(&back - x), op)?;
    Ok((LOG_RESIDUAL_TOL - residual)
        .min(PI + LOG_NORM_SLACK - norm)
        .min(LOG_INJECTIVITY_TOL - injectivity))
}

/// exp maps the closed pi-ball onto G and is injective on its interior.
pub fn check_log_ball(group: GroupSpec, trials: usize, seed: u64) -> Result<CheckReport> {
    need_trials(trials)?;
    let name = "log_ball";
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let u = if i == 0 { group.identity() } else { haar_sample(group, &mut rng) };
        let x = tangent(group, NormSpec::OPERATOR, PI - 0.05, &mut rng)?;
        let m = log_ball_margin(u.matrix(), &x)?;
        worst.record(m, None, || Witness::RoundTrip {
            u: json(u.matrix()),
            x: json(&x),
        });
    }
    let ctx = Context {
        name,
        group: Some(group),
        space: None,
        p: None,
        theta: None,
        seed,
    };
    Ok(finish(ctx, trials, worst, 0.0, BTreeMap::new()))
}

// ---------------------------------------------------------------- quotient lower Lipschitz

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LowerLipschitzParams {
    /// Operator-norm radius of the ball in x.
    pub radius: f64,
    pub lambda: f64,
    /// Allowance for the quotient distance evaluation.
    pub slack: f64,
    /// Fix the second point at 0.
    pub anchored: bool,
}

impl Default for LowerLipschitzParams {
    fn default() -> Self {
        LowerLipschitzParams {
            radius: 0.12,
            lambda: 0.4,
            slack: 1e-3,
            anchored: false,
        }
    }
}

fn random_x(space: &SpaceSpec, radius: f64, rng: &mut StreamRng) -> Result<DenseMatrix> {
    loop {
        let coeffs: Vec<f64> = (0..space.dim()).map(|_| StandardNormal.sample(rng)).collect();
        let z = space.x_coordinates(&coeffs);
        let norm = schatten_norm(&z, NormSpec::OPERATOR)?;
        if norm > 1e-300 {
            let r = radius * (1.0 - rng.random::<f64>());
            return Ok(z.scale(r / norm));
        }
    }
}

fn lower_lipschitz_margin(space: &SpaceSpec, lambda: f64, x: &DenseMatrix, y: &DenseMatrix) -> Result<(f64, Option<f64>)> {
    let group = space.group();
    let (u, v) = (exp_element(group, x)?, exp_element(group, y)?);
    let d = quotient_dist(space, &u, &v, NormSpec::OPERATOR, &QuotientOptions::default())?.value;
    let dx = schatten_norm(&(x - y), NormSpec::OPERATOR)?;
    Ok((d - lambda * dx, (dx > 0.0).then(|| d / dx)))
}

/// Near the base point, `q o exp` restricted to x expands distances by at
/// least lambda: `rho_M(q(e^x), q(e^x')) >= lambda ||x - x'||_inf`.
pub fn check_quotient_lower_lipschitz_with(
    space: &SpaceSpec,
    params: &LowerLipschitzParams,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    if !matches!(space.kind(), SpaceKind::Grassmann { .. }) {
        return Err(Error::UnsupportedCheck(format!(
            "the lower Lipschitz check needs a Grassmannian with kappa = 1, got {}",
            space.id()
        )));
    }
    need_trials(trials)?;
    let name = "quotient_lower_lipschitz";
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let x = random_x(space, params.radius, &mut rng)?;
        let y = if params.anchored || i == 0 {
            if i == 0 { x.clone() } else { DenseMatrix::zeros(space.group().n()) }
        } else {
            random_x(space, params.radius, &mut rng)?
        };
        let (m, r) = lower_lipschitz_margin(space, params.lambda, &x, &y)?;
        worst.record(m, r, || Witness::Pair { x: json(&x), y: json(&y) });
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("radius".into(), params.radius);
    metrics.insert("lambda".into(), params.lambda);
    let ctx = Context {
        name,
        group: Some(space.group()),
        space: Some(space.clone()),
        p: Some(NormSpec::OPERATOR),
        theta: None,
        seed,
    };
    Ok(finish(ctx, trials, worst, params.slack, metrics))
}

pub fn check_quotient_lower_lipschitz(space: &SpaceSpec, trials: usize, seed: u64) -> Result<CheckReport> {
    check_quotient_lower_lipschitz_with(space, &LowerLipschitzParams::default(), trials, seed)
}

// ---------------------------------------------------------------- U(n)/SU(n)

fn su_circle_margin(space: &SpaceSpec, u: &GroupElement, v: &GroupElement, seed: u64) -> Result<(f64, f64)> {
    let n = space.group().n();
    let generic = quotient_dist_generic(space, u, v, NormSpec::OPERATOR, &QuotientOptions::with_seed(seed))?.value;
    let (du, dv) = (u.matrix().det(), v.matrix().det());
    let closed = arc_distance(du.im.atan2(du.re), dv.im.atan2(dv.re)) / n as f64;
    Ok((-(generic - closed).abs(), generic))
}

/// The minimizer's quotient distance on U(n)/SU(n) equals the arc length
/// between determinants divided by n.
pub fn check_su_circle(n: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    if n < 2 {
        return Err(Error::param(format!("the circle check needs n >= 2, got {n}")));
    }
    need_trials(trials)?;
    let space = SpaceSpec::unitary_mod_special(n)?;
    let group = space.group();
    let name = "su_circle";
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let u = haar_sample(group, &mut rng);
        let v = if i == 0 { u.clone() } else { haar_sample(group, &mut rng) };
        let trial_seed = Stream::new(seed).child(name).index(i as u64).key();
        let (m, _) = su_circle_margin(&space, &u, &v, trial_seed)?;
        worst.record(m, None, || Witness::Elements {
            u: json(u.matrix()),
            v: json(v.matrix()),
            seed: Some(trial_seed),
        });
    }
    let ctx = Context {
        name,
        group: Some(group),
        space: Some(space.clone()),
        p: Some(NormSpec::OPERATOR),
        theta: None,
        seed,
    };
    Ok(finish(ctx, trials, worst, SU_CIRCLE_TOL, BTreeMap::new()))
}

// ---------------------------------------------------------------- spectral variation

fn spectral_margin(p: NormSpec, u: &GroupElement, v: &GroupElement) -> Result<(f64, Option<f64>)> {
    let lhs = eigenvalue_matching_distance(u, v, p)?;
    let rhs = intrinsic_dist(u, v, p)?;
    Ok((rhs - lhs, (rhs > 0.0).then(|| lhs / rhs)))
}

/// Optimally matched eigenvalue arcs are no farther apart than the
/// matrices themselves.
pub fn check_spectral_variation(group: GroupSpec, p: NormSpec, trials: usize, seed: u64) -> Result<CheckReport> {
    if group.n() > MAX_MATCHING_DIM {
        return Err(Error::TooLarge {
            what: "matching dimension",
            size: group.n(),
            limit: MAX_MATCHING_DIM,
        });
    }
    need_trials(trials)?;
    let name = "spectral_variation";
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(name, seed, i);
        let u = haar_sample(group, &mut rng);
        let v = if i == 0 { u.clone() } else { haar_sample(group, &mut rng) };
        let (m, r) = spectral_margin(p, &u, &v)?;
        worst.record(m, r, || Witness::Elements {
            u: json(u.matrix()),
            v: json(v.matrix()),
            seed: None,
        });
    }
    let ctx = Context {
        name,
        group: Some(group),
        space: None,
        p: Some(p),
        theta: None,
        seed,
    };
    Ok(finish(ctx, trials, worst, SPECTRAL_TOL, BTreeMap::new()))
}

// ---------------------------------------------------------------- reproduction

fn element(group: GroupSpec, j: &MatrixJson) -> Result<GroupElement> {
    GroupElement::new(group, matrix(j)?)
}

/// Recomputes the margin of a report's witness.
pub fn reproduce_margin(report: &CheckReport) -> Result<f64> {
    let missing = |what: &str| Error::Input(format!("report {} lacks {what}", report.name));
    let witness = report.witness.as_ref().ok_or_else(|| missing("a witness"))?;
    let group = report.group.ok_or_else(|| missing("a group"))?;
    let p = report.p.unwrap_or(NormSpec::OPERATOR);
    let mismatch = || Error::Input(format!("witness kind does not fit check {}", report.name));
    match (report.name.as_str(), witness) {
        ("exp_lipschitz", Witness::Pair { x, y }) => Ok(exp_lipschitz_margin(group, p, &matrix(x)?, &matrix(y)?)?.0),
        ("phi_lower_bound", Witness::Pair { x, y }) => {
            let theta = report.theta.ok_or_else(|| missing("theta"))?;
            let bound = PhiBound::new(theta)?.bound;
            phi_margin(group, p, bound, &matrix(x)?, &matrix(y)?)?
                .map(|(m, _)| m)
                .ok_or_else(|| Error::Input("degenerate witness".into()))
        }
        ("bch_defect", Witness::Pair { x, y }) => Ok(bch_margin(group, p, &matrix(x)?, &matrix(y)?)?.0),
        ("geodesic_minimality", Witness::Path { x, points }) => {
            let pts = points.iter().map(|m| Ok(GroupElement::from_unchecked(group, matrix(m)?))).collect::<Result<Vec<_>>>()?;
            geodesic_margin(p, &matrix(x)?, &pts)
        }
        ("log_ball", Witness::RoundTrip { u, x }) => log_ball_margin(&matrix(u)?, &matrix(x)?),
        ("quotient_lower_lipschitz", Witness::Pair { x, y }) => {
            let space = report.space.as_ref().ok_or_else(|| missing("a space"))?;
            let lambda = report.metrics.get("lambda").copied().ok_or_else(|| missing("lambda"))?;
            Ok(lower_lipschitz_margin(space, lambda, &matrix(x)?, &matrix(y)?)?.0)
        }
        ("su_circle", Witness::Elements { u, v, seed }) => {
            let space = report.space.as_ref().ok_or_else(|| missing("a space"))?;
            let seed = seed.ok_or_else(|| missing("a minimizer seed"))?;
            Ok(su_circle_margin(space, &element(group, u)?, &element(group, v)?, seed)?.0)
        }
        ("spectral_variation", Witness::Elements { u, v, .. }) => {
            Ok(spectral_margin(p, &element(group, u)?, &element(group, v)?)?.0)
        }
        _ => Err(mismatch()),
    }
}
