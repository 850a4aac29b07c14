use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::dist::{angles_of, arc_distance, intrinsic_dist};
use super::NormSpec;
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::matcore::{normal_eig, principal_arg, singular_values, DenseMatrix, Frame, SkewExp, C64, I};
use crate::rng::Stream;
use crate::spaces::{SpaceKind, SpaceSpec};

const FRAME_TOL: f64 = 1e-8;
const DESCENT_GTOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct QuotientOptions {
    /// Total restart budget of the minimizer.
    pub restarts: usize,
    /// Stop once the best value has been unchanged for this many restarts.
    pub stability_window: usize,
    /// Improvements below this do not reset the stability count.
    pub stability_tol: f64,
    /// At most this many torus lattice points seed restarts.
    pub lattice_restarts: usize,
    pub seed: u64,
    /// Also run the minimizer when a closed form exists and record its value.
    pub cross_check: bool,
}

impl Default for QuotientOptions {
    fn default() -> Self {
        QuotientOptions {
            restarts: 64,
            stability_window: 8,
            stability_tol: 1e-9,
            lattice_restarts: 24,
            seed: 0,
            cross_check: false,
        }
    }
}

impl QuotientOptions {
    pub fn with_seed(seed: u64) -> Self {
        QuotientOptions {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientMethod {
    ClosedFormGroup,
    ClosedFormGrassmann,
    ClosedFormCircle,
    Degenerate,
    Minimizer,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizerCertificate {
    pub restarts_run: usize,
    pub restarts_budget: usize,
    pub lattice_restarts: usize,
    /// Restarts since the best value last improved.
    pub stable_for: usize,
    pub stabilized: bool,
    /// No torus was available to seed restarts.
    pub heuristic: bool,
    /// Index of the restart that produced the best value.
    pub best_restart: usize,
}

impl MinimizerCertificate {
    /// Compact flag string for tabular output.
    pub fn flags(&self) -> String {
        let mut f = vec![format!("restarts={}", self.restarts_run)];
        f.push(if self.stabilized { "stable".into() } else { "unstable".into() });
        if self.heuristic {
            f.push("heuristic".into());
        }
        f.join(";")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientDistance {
    pub value: f64,
    pub method: QuotientMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MinimizerCertificate>,
    /// Minimizer value when a closed form was cross-checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
}

impl QuotientDistance {
    pub fn flags(&self) -> String {
        let mut s = match self.method {
            QuotientMethod::ClosedFormGroup => "closed_form_group".to_string(),
            QuotientMethod::ClosedFormGrassmann => "closed_form_grassmann".to_string(),
            QuotientMethod::ClosedFormCircle => "closed_form_circle".to_string(),
            QuotientMethod::Degenerate => "degenerate".to_string(),
            QuotientMethod::Minimizer => "minimizer".to_string(),
        };
        if let Some(c) = &self.certificate {
            s.push(';');
            s.push_str(&c.flags());
        }
        s
    }
}

fn check_frame(f: &Frame) -> Result<()> {
    let d = f.orthonormality_defect();
    if d > FRAME_TOL {
        return Err(Error::param(format!(
            "subspace basis is not orthonormal (defect {d:.3e})"
        )));
    }
    Ok(())
}

/// Principal angles between two subspaces of equal dimension, ascending.
/// Cosines come from `E* F`, sines from the residual `F - E E* F`, so small
/// angles keep full relative precision.
pub fn principal_angles(e: &Frame, f: &Frame) -> Result<Vec<f64>> {
    if e.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: e.n(),
            found: f.n(),
        });
    }
    if e.k() != f.k() {
        return Err(Error::DimensionMismatch {
            expected: e.k(),
            found: f.k(),
        });
    }
    check_frame(e)?;
    check_frame(f)?;
    let k = e.k();
    let cos = singular_values(&e.cross(f))?;
    let mut sin = singular_values(&e.residual_square(f))?;
    sin.truncate(k);
    sin.reverse();
    Ok(cos
        .iter()
        .zip(&sin)
        .map(|(c, s)| s.atan2(c.min(1.0)))
        .collect())
}

/// Largest principal angle between the spans of two orthonormal frames.
pub fn grassmann_dist(e: &Frame, f: &Frame) -> Result<f64> {
    Ok(principal_angles(e, f)?.into_iter().fold(0.0, f64::max))
}

/// Closed-form quotient distance where one exists.
pub(crate) fn closed_form_distance(
    space: &SpaceSpec,
    u: &GroupElement,
    v: &GroupElement,
    p: NormSpec,
) -> Option<Result<(f64, QuotientMethod)>> {
    match space.kind() {
        SpaceKind::Point => Some(Ok((0.0, QuotientMethod::Degenerate))),
        SpaceKind::Group => Some(intrinsic_dist(u, v, p).map(|d| (d, QuotientMethod::ClosedFormGroup))),
        // The minimizing generator lies in x, whose singular values are the
        // principal angles, each twice. Exact for p >= 2.
        SpaceKind::Grassmann { k } if p.p() >= 2.0 => {
            let e = Frame::leading_columns(u.matrix(), k);
            let f = Frame::leading_columns(v.matrix(), k);
            Some(principal_angles(&e, &f).map(|a| {
                let d = p.lp(a.iter().chain(a.iter()).cloned());
                (d, QuotientMethod::ClosedFormGrassmann)
            }))
        }
        SpaceKind::Circle => {
            let n = u.group().n();
            let (du, dv) = (u.matrix().det(), v.matrix().det());
            let arc = arc_distance(du.im.atan2(du.re), dv.im.atan2(dv.re));
            Some(Ok((p.identity_norm(n) * arc / n as f64, QuotientMethod::ClosedFormCircle)))
        }
        _ => None,
    }
}

fn check_pair(space: &SpaceSpec, u: &GroupElement, v: &GroupElement) -> Result<()> {
    for w in [u, v] {
        if w.group() != space.group() {
            return Err(Error::DimensionMismatch {
                expected: space.group().n(),
                found: w.group().n(),
            });
        }
    }
    Ok(())
}

/// `inf_h rho(u, v h)`: the closed form where available, otherwise the
/// multi-start minimizer.
pub fn quotient_dist(
    space: &SpaceSpec,
    u: &GroupElement,
    v: &GroupElement,
    p: NormSpec,
    opts: &QuotientOptions,
) -> Result<QuotientDistance> {
    check_pair(space, u, v)?;
    match closed_form_distance(space, u, v, p) {
        Some(res) => {
            let (value, method) = res?;
            let cross_check = if opts.cross_check && method != QuotientMethod::Degenerate {
                Some(quotient_dist_generic(space, u, v, p, opts)?.value)
            } else {
                None
            };
            Ok(QuotientDistance {
                value,
                method,
                certificate: None,
                cross_check,
            })
        }
        None => quotient_dist_generic(space, u, v, p, opts),
    }
}

/// The multi-start minimizer, regardless of closed forms. Returns an upper
/// bound on the quotient distance with a stability certificate.
pub fn quotient_dist_generic(
    space: &SpaceSpec,
    u: &GroupElement,
    v: &GroupElement,
    p: NormSpec,
    opts: &QuotientOptions,
) -> Result<QuotientDistance> {
    check_pair(space, u, v)?;
    if opts.restarts == 0 {
        return Err(Error::param("minimizer needs at least one restart"));
    }
    let w = &u.matrix().adjoint() * v.matrix();
    let (value, certificate) = Minimizer::new(space, w, p)?.run(opts)?;
    Ok(QuotientDistance {
        value,
        method: QuotientMethod::Minimizer,
        certificate: Some(certificate),
        cross_check: None,
    })
}

/// Torus lattice points ordered by their own distance to the identity.
fn lattice_points(space: &SpaceSpec, cap: usize) -> Vec<DenseMatrix> {
    let Some(torus) = space.torus() else {
        return Vec::new();
    };
    let r = torus.rank();
    if r == 0 || cap == 0 {
        return Vec::new();
    }
    let rows = torus.angle_rows();
    let n = space.group().n();
    let mut seen: BTreeMap<Vec<i64>, (f64, Vec<f64>)> = BTreeMap::new();
    let max_points = 20_000usize;
    'dens: for den in 2..=n.max(2) {
        let steps: Vec<f64> = (0..den).map(|a| 2.0 * PI * a as f64 / den as f64).collect();
        let total = den.checked_pow(r as u32).unwrap_or(usize::MAX);
        if total > max_points {
            break 'dens;
        }
        let mut idx = vec![0usize; r];
        for _ in 0..total {
            let c: Vec<f64> = idx.iter().map(|&a| steps[a]).collect();
            let angles: Vec<f64> = rows
                .iter()
                .map(|w| {
                    let t: f64 = w.iter().zip(&c).map(|(a, b)| *a as f64 * b).sum();
                    principal_arg(C64::from_polar(1.0, t))
                })
                .collect();
            let key: Vec<i64> = angles.iter().map(|a| (a * 1e6).round() as i64).collect();
            if key.iter().any(|&k| k != 0) {
                let rho = angles.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                seen.entry(key).or_insert((rho, c));
            }
            for d in idx.iter_mut() {
                *d += 1;
                if *d < den {
                    break;
                }
                *d = 0;
            }
        }
    }
    let mut pts: Vec<(f64, Vec<i64>, Vec<f64>)> =
        seen.into_iter().map(|(k, (rho, c))| (rho, k, c)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    pts.into_iter()
        .take(cap)
        .map(|(_, _, c)| torus.element(&c))
        .collect()
}

/// Local descent over `h in H` of `F(h) = ||theta(w h)||`, where theta are the
/// eigenvalue arguments of `w h`.
struct Minimizer<'a> {
    space: &'a SpaceSpec,
    w: DenseMatrix,
    p: NormSpec,
    real: bool,
}

#[derive(Clone, Copy)]
enum Objective {
    /// `sum theta^2 / 2`
    Smooth,
    /// `||theta||_q`, q finite
    Power(f64),
}

impl<'a> Minimizer<'a> {
    fn new(space: &'a SpaceSpec, w: DenseMatrix, p: NormSpec) -> Result<Self> {
        Ok(Minimizer {
            space,
            real: space.group().is_real(),
            w,
            p,
        })
    }

    fn angles(&self, h: &DenseMatrix) -> Result<Vec<f64>> {
        angles_of(&(&self.w * h))
    }

    fn value(&self, h: &DenseMatrix) -> Result<f64> {
        Ok(self.p.lp(self.angles(h)?.into_iter()))
    }

    fn objective(obj: Objective, angles: &[f64]) -> f64 {
        match obj {
            Objective::Smooth => 0.5 * angles.iter().map(|a| a * a).sum::<f64>(),
            Objective::Power(q) => NormSpec::new(q).expect("q >= 1").lp(angles.iter().cloned()),
        }
    }

    fn weights(obj: Objective, angles: &[f64]) -> Vec<f64> {
        match obj {
            Objective::Smooth => angles.to_vec(),
            Objective::Power(q) => {
                let max = angles.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                if max == 0.0 {
                    return vec![0.0; angles.len()];
                }
                let s: f64 = angles.iter().map(|a| (a.abs() / max).powf(q)).sum();
                let denom = s.powf((q - 1.0) / q);
                angles
                    .iter()
                    .map(|a| a.signum() * (a.abs() / max).powf(q - 1.0) / denom)
                    .collect()
            }
        }
    }

    /// Coordinates in the h basis of the gradient of the objective at h.
    fn gradient(&self, obj: Objective, h: &DenseMatrix) -> Result<(f64, Vec<f64>)> {
        let m = &self.w * h;
        let (vals, vecs) = normal_eig(&m)?;
        let angles: Vec<f64> = vals.iter().map(|z| principal_arg(*z)).collect();
        let f = Self::objective(obj, &angles);
        let g = Self::weights(obj, &angles);
        let n = m.n();
        let mut grad = DenseMatrix::from_fn(n, |_, _| C64::new(0.0, 0.0));
        for (j, gj) in g.iter().enumerate() {
            if *gj == 0.0 {
                continue;
            }
            for a in 0..n {
                let va = vecs.get(a, j) * I * *gj;
                for b in 0..n {
                    let z = grad.get(a, b) + va * vecs.get(b, j).conj();
                    grad.set(a, b, z);
                }
            }
        }
        let grad = if self.real { grad.real_part() } else { grad };
        let coords = self.space.h_basis().iter().map(|b| b.inner(&grad)).collect();
        Ok((f, coords))
    }

    fn combine(&self, coords: &[f64]) -> DenseMatrix {
        let n = self.w.n();
        let mut x = DenseMatrix::zeros(n);
        for (c, b) in coords.iter().zip(self.space.h_basis()) {
            if *c != 0.0 {
                x = &x + &b.scale(*c);
            }
        }
        x
    }

    /// Gradient descent along `h exp(-t grad)` with Barzilai-Borwein trial
    /// steps, safeguarded by Armijo backtracking.
    fn descend(&self, obj: Objective, mut h: DenseMatrix, max_iter: usize) -> Result<DenseMatrix> {
        if self.space.h_basis().is_empty() {
            return Ok(h);
        }
        let mut t: f64 = 1.0;
        let mut previous: Option<(Vec<f64>, f64)> = None;
        for _ in 0..max_iter {
            let (f, coords) = self.gradient(obj, &h)?;
            let g2: f64 = coords.iter().map(|c| c * c).sum();
            if g2.sqrt() < DESCENT_GTOL {
                break;
            }
            t = match &previous {
                // s = -t_prev g_prev, y = g - g_prev
                Some((g_prev, t_prev)) => {
                    let sy: f64 = g_prev.iter().zip(&coords).map(|(a, b)| -t_prev * a * (b - a)).sum();
                    let ss: f64 = t_prev * t_prev * g_prev.iter().map(|a| a * a).sum::<f64>();
                    if sy > 0.0 { (ss / sy).clamp(1e-6, 1e3) } else { (2.0 * t_prev).min(4.0) }
                }
                None => t,
            };
            let step = SkewExp::new(&self.combine(&coords))?;
            let mut accepted = None;
            while t > 1e-12 {
                let trial = &h * &step.exp(-t);
                let ft = Self::objective(obj, &self.angles(&trial)?);
                if ft <= f - 1e-4 * t * g2 {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, ft)) => {
                    h = trial;
                    previous = Some((coords, t));
                    if f - ft <= 1e-15 * f.max(1.0) {
                        break;
                    }
                }
                None => break,
            }
        }
        Ok(h)
    }

    /// Compass search on the exact objective along +- each h-basis direction.
    fn polish(&self, mut h: DenseMatrix, mut best: f64) -> Result<(DenseMatrix, f64)> {
        let basis = self.space.h_basis();
        if basis.is_empty() {
            return Ok((h, best));
        }
        let gens: Vec<SkewExp> = basis.iter().map(SkewExp::new).collect::<Result<_>>()?;
        let mut step = 1e-2;
        let mut evals = 0;
        while step >= 1e-9 && evals < 4000 {
            let moves: Vec<DenseMatrix> = gens
                .iter()
                .flat_map(|g| [g.exp(step), g.exp(-step)])
                .collect();
            let mut improved = true;
            while improved && evals < 4000 {
                improved = false;
                for mv in &moves {
                    let trial = &h * mv;
                    let f = self.value(&trial)?;
                    evals += 1;
                    if f < best - 1e-15 {
                        h = trial;
                        best = f;
                        improved = true;
                    }
                }
            }
            step *= 0.25;
        }
        Ok((h, best))
    }

    fn continuation(&self) -> Vec<f64> {
        let p = self.p.p();
        if p.is_infinite() {
            vec![8.0, 32.0, 128.0]
        } else if p == 1.0 {
            vec![1.5, 1.2, 1.05]
        } else if p == 2.0 {
            Vec::new()
        } else {
            vec![p]
        }
    }

    fn start(&self, r: usize, lattice: &[DenseMatrix], stream: &Stream) -> Result<DenseMatrix> {
        let comps = self.space.components();
        let rep = &comps[r % comps.len()];
        if r == 0 {
            return Ok(rep.clone());
        }
        if r <= lattice.len() {
            return Ok(rep * &lattice[r - 1]);
        }
        let mut rng = stream.index(r as u64).rng();
        let dim = self.space.h_basis().len();
        let coords: Vec<f64> = (0..dim)
            .map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng))
            .collect();
        let x = self.combine(&coords);
        let e = SkewExp::new(&x)?;
        let scale = coords.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
        let radius = PI * (1.0 - rand::Rng::random::<f64>(&mut rng));
        Ok(rep * &e.exp(radius / scale))
    }

    fn run(&self, opts: &QuotientOptions) -> Result<(f64, MinimizerCertificate)> {
        let lattice = lattice_points(self.space, opts.lattice_restarts.min(opts.restarts.saturating_sub(1)));
        let stream = Stream::new(opts.seed).child("quotient-restart");
        let mut finals: Vec<(f64, usize, DenseMatrix)> = Vec::new();
        let mut best = f64::INFINITY;
        let mut best_restart = 0;
        let mut stable_for = 0;
        let mut run = 0;
        for r in 0..opts.restarts {
            let h0 = self.start(r, &lattice, &stream)?;
            let h = self.descend(Objective::Smooth, h0, 200)?;
            let val = self.value(&h)?;
            run = r + 1;
            if val < best - opts.stability_tol {
                best = val;
                best_restart = r;
                stable_for = 0;
            } else {
                stable_for += 1;
                if val < best {
                    best = val;
                    best_restart = r;
                }
            }
            finals.push((val, r, h));
            if r >= lattice.len() && stable_for >= opts.stability_window {
                break;
            }
        }
        // polish the three best smooth minima on the target norm
        finals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let targets = self.continuation();
        for (val, r, h) in finals.into_iter().take(3) {
            let mut h_best = h.clone();
            let mut v_best = val;
            let mut h_cur = h;
            for &q in &targets {
                h_cur = self.descend(Objective::Power(q), h_cur, 300)?;
                let v = self.value(&h_cur)?;
                if v < v_best {
                    v_best = v;
                    h_best = h_cur.clone();
                }
            }
            if self.p.p() != 2.0 {
                let (_, v) = self.polish(h_best, v_best)?;
                v_best = v;
            }
            if v_best < best || (v_best == best && r < best_restart) {
                best = v_best;
                best_restart = r;
            }
        }
        let certificate = MinimizerCertificate {
            restarts_run: run,
            restarts_budget: opts.restarts,
            lattice_restarts: lattice.len(),
            stable_for,
            stabilized: stable_for >= opts.stability_window,
            heuristic: self.space.torus().is_none(),
            best_restart,
        };
        Ok((best, certificate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{haar_sample, Family, GroupSpec};
    use approx::assert_relative_eq;

    #[test]
    fn principal_angles_of_coordinate_lines() {
        let g = GroupSpec::special_orthogonal(2).unwrap();
        let t = PI / 4.0;
        let r = GroupElement::new(
            g,
            DenseMatrix::from_real_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap(),
        )
        .unwrap();
        let e = Frame::leading_columns(g.identity().matrix(), 1);
        let f = Frame::leading_columns(r.matrix(), 1);
        assert_relative_eq!(grassmann_dist(&e, &f).unwrap(), PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn tiny_angles_keep_relative_precision() {
        let g = GroupSpec::special_orthogonal(2).unwrap();
        let t: f64 = 1e-9;
        let r = DenseMatrix::from_real_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap();
        let e = Frame::leading_columns(g.identity().matrix(), 1);
        let f = Frame::leading_columns(&r, 1);
        assert_relative_eq!(grassmann_dist(&e, &f).unwrap(), t, max_relative = 1e-6);
    }

    #[test]
    fn non_orthonormal_frame_is_rejected() {
        let m = DenseMatrix::identity(3).scale(1.1);
        let e = Frame::leading_columns(&m, 1);
        assert!(grassmann_dist(&e, &e).is_err());
    }

    #[test]
    fn minimizer_matches_circle_closed_form() {
        let space = SpaceSpec::unitary_mod_special(3).unwrap();
        let mut rng = Stream::new(11).rng();
        for i in 0..5 {
            let u = haar_sample(space.group(), &mut rng);
            let v = haar_sample(space.group(), &mut rng);
            let opts = QuotientOptions::with_seed(i);
            let closed = quotient_dist(&space, &u, &v, NormSpec::OPERATOR, &opts).unwrap();
            let generic = quotient_dist_generic(&space, &u, &v, NormSpec::OPERATOR, &opts).unwrap();
            assert_eq!(closed.method, QuotientMethod::ClosedFormCircle);
            assert!((closed.value - generic.value).abs() < 1e-6, "{} vs {}", closed.value, generic.value);
        }
    }

    #[test]
    fn minimizer_matches_grassmann_closed_form() {
        let space = SpaceSpec::grassmann(Family::U, 4, 2).unwrap();
        let mut rng = Stream::new(12).rng();
        for i in 0..5 {
            let u = haar_sample(space.group(), &mut rng);
            let v = haar_sample(space.group(), &mut rng);
            let opts = QuotientOptions::with_seed(i);
            let closed = quotient_dist(&space, &u, &v, NormSpec::OPERATOR, &opts).unwrap();
            let generic = quotient_dist_generic(&space, &u, &v, NormSpec::OPERATOR, &opts).unwrap();
            assert!((closed.value - generic.value).abs() < 1e-6, "{} vs {}", closed.value, generic.value);
        }
    }
}
