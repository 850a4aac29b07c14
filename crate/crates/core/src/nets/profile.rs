use serde::Serialize;

use super::build::covering_diameter;
use super::pack::{greedy_pack, PackOptions};
use super::points::QuotientMetric;
use crate::error::{Error, Result};
use crate::groups::haar_sample;
use crate::metrics::{NormSpec, QuotientOptions};
use crate::rng::Stream;
use crate::spaces::{theta, InvariantOptions, SpaceSpec};

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub epsilon: f64,
    pub cardinality: usize,
    /// `cardinality^{1/d} epsilon / theta`
    pub achieved_c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub space: String,
    pub p: NormSpec,
    pub dim: usize,
    pub theta: f64,
    pub diameter: f64,
    pub budget: usize,
    pub seed: u64,
    pub rows: Vec<ProfileRow>,
    /// Least-squares slope of `log N` against `log(1/epsilon)`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Largest over smallest achieved constant.
    pub c_ratio: f64,
}

/// Greedy packing numbers over a sweep of scales and the fitted growth
/// exponent, which should approach the dimension.
pub fn entropy_profile(space: &SpaceSpec, epsilons: &[f64], p: NormSpec, opts: &PackOptions) -> Result<ProfileReport> {
    if epsilons.len() < 4 {
        return Err(Error::param(format!(
            "an entropy profile needs at least 4 scales, got {}",
            epsilons.len()
        )));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| -e.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::param("entropy profile scales must not all be equal"));
    }
    let th = theta(space, &InvariantOptions::default())?.value;
    let diam = covering_diameter(space);
    let limit = th.min(diam);
    if let Some(bad) = epsilons.iter().find(|&&e| !(e > 0.0 && e <= limit * (1.0 + 1e-12))) {
        return Err(Error::param(format!(
            "scale {bad} outside (0, min(theta, diam)] = (0, {limit}]"
        )));
    }
    let d = space.dim();
    if d == 0 {
        return Err(Error::param("entropy profile of a zero-dimensional space"));
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let r = greedy_pack(space, eps, p, opts)?;
        rows.push(ProfileRow {
            epsilon: eps,
            cardinality: r.cardinality,
            achieved_c: (r.cardinality as f64).powf(1.0 / d as f64) * eps / th,
        });
    }
    let ys: Vec<f64> = rows.iter().map(|r| (r.cardinality as f64).ln()).collect();
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let cs = rows.iter().map(|r| r.achieved_c);
    let (cmin, cmax) = cs.fold((f64::INFINITY, 0.0f64), |(lo, hi), c| (lo.min(c), hi.max(c)));
    Ok(ProfileReport {
        space: space.id(),
        p,
        dim: d,
        theta: th,
        diameter: diam,
        budget: opts.budget,
        seed: opts.seed,
        rows,
        slope,
        intercept,
        residual,
        c_ratio: cmax / cmin,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeReport {
    pub space: String,
    pub epsilon: f64,
    pub p: NormSpec,
    pub dim: usize,
    pub diameter: f64,
    pub samples: usize,
    pub hits: usize,
    pub fraction: f64,
    /// 99% Wilson score interval.
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// `a` with `fraction = (a epsilon / diam)^dim`.
    pub achieved_constant: f64,
    pub seed: u64,
}

pub fn wilson_interval(hits: usize, samples: usize, z: f64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let ph = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = z / denom * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Haar measure of the epsilon-ball around the base point, by Monte Carlo.
pub fn ball_volume_mc(
    space: &SpaceSpec,
    epsilon: f64,
    p: NormSpec,
    samples: usize,
    seed: u64,
) -> Result<VolumeReport> {
    let diam = covering_diameter(space);
    if !(epsilon > 0.0 && epsilon <= diam * (1.0 + 1e-12)) {
        return Err(Error::param(format!("epsilon {epsilon} outside (0, {diam}]")));
    }
    if samples == 0 {
        return Err(Error::param("volume estimate needs at least one sample"));
    }
    let group = space.group();
    let metric = QuotientMetric::new(space, p, QuotientOptions::with_seed(seed));
    let base = metric.point(group.identity());
    let root = Stream::new(seed).child("volume");
    let mut hits = 0;
    for i in 0..samples {
        let u = haar_sample(group, &mut root.index(i as u64).rng());
        if metric.dist(&base, &metric.point(u))? <= epsilon {
            hits += 1;
        }
    }
    let fraction = hits as f64 / samples as f64;
    let (wilson_low, wilson_high) = wilson_interval(hits, samples, Z99);
    let d = space.dim();
    Ok(VolumeReport {
        space: space.id(),
        epsilon,
        p,
        dim: d,
        diameter: diam,
        samples,
        hits,
        fraction,
        wilson_low,
        wilson_high,
        achieved_constant: if d == 0 { 0.0 } else { fraction.powf(1.0 / d as f64) * diam / epsilon },
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_the_estimate() {
        let (lo, hi) = wilson_interval(50, 100, Z99);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(hi - lo < 0.3);
        let (lo, hi) = wilson_interval(100, 100, Z99);
        assert!(lo > 0.9 && hi == 1.0);
    }
}
