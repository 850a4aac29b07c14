use serde::Serialize;

use super::points::{IndexedSet, QuotientMetric};
use crate::error::{Error, Result};
use crate::groups::{haar_sample, GroupElement};
use crate::metrics::{NormSpec, QuotientOptions};
use crate::rng::Stream;
use crate::spaces::{theta, InvariantOptions, SpaceSpec};

/// Packings up to this size are re-verified over all pairs.
const FULL_CHECK_LIMIT: usize = 1500;

#[derive(Clone, Debug)]
pub struct PackOptions {
    /// Stop after this many consecutive rejected candidates.
    pub budget: usize,
    /// Hard cap on candidates drawn.
    pub max_candidates: usize,
    pub seed: u64,
    pub quotient: QuotientOptions,
}

impl Default for PackOptions {
    fn default() -> Self {
        PackOptions {
            budget: 5000,
            max_candidates: 10_000_000,
            seed: 0,
            quotient: QuotientOptions::default(),
        }
    }
}

impl PackOptions {
    pub fn with_seed(seed: u64) -> Self {
        PackOptions {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationCheck {
    /// Every pair was recomputed.
    Full,
    /// Pairs sharing an index neighbourhood were recomputed; all others are
    /// separated by the index construction.
    Neighbourhood,
}

#[derive(Clone, Debug, Serialize)]
pub struct PackReport {
    pub space: String,
    pub epsilon: f64,
    pub p: NormSpec,
    pub dim: usize,
    pub cardinality: usize,
    /// Smallest recomputed pairwise distance; `None` for a single point.
    pub min_pairwise: Option<f64>,
    pub separation_check: SeparationCheck,
    /// All recomputed pairs are strictly farther apart than epsilon.
    pub separated: bool,
    pub candidates: usize,
    pub budget: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// `c` with `cardinality = (c theta / epsilon)^dim`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_c: Option<f64>,
    #[serde(skip)]
    pub elements: Vec<GroupElement>,
}

/// Greedy epsilon-separated set from a Haar candidate stream: a candidate is
/// kept iff it is farther than epsilon from everything kept so far.
pub fn greedy_pack(space: &SpaceSpec, epsilon: f64, p: NormSpec, opts: &PackOptions) -> Result<PackReport> {
    if !(epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    if opts.budget == 0 {
        return Err(Error::param("packing budget must be positive"));
    }
    let group = space.group();
    let metric = QuotientMetric::new(space, p, opts.quotient.clone());
    let mut set = IndexedSet::new(&metric, epsilon);
    let root = Stream::new(opts.seed).child("pack");
    let mut rejections = 0;
    let mut drawn = 0;
    while rejections < opts.budget && drawn < opts.max_candidates {
        let u = haar_sample(group, &mut root.index(drawn as u64).rng());
        drawn += 1;
        let q = metric.point(u);
        if set.any_within(&q, epsilon)? {
            rejections += 1;
        } else {
            set.push(q);
            rejections = 0;
        }
    }

    let (min_pairwise, separation_check) = if set.points.len() <= FULL_CHECK_LIMIT {
        let mut best: Option<f64> = None;
        for i in 0..set.points.len() {
            for j in i + 1..set.points.len() {
                let d = metric.dist(&set.points[i], &set.points[j])?;
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        (best, SeparationCheck::Full)
    } else {
        (set.min_neighbour_distance()?, SeparationCheck::Neighbourhood)
    };
    let separated = min_pairwise.is_none_or(|m| m > epsilon);

    let d = space.dim();
    let theta = theta(space, &InvariantOptions::default()).ok().map(|t| t.value);
    let cardinality = set.points.len();
    let achieved_c = match theta {
        Some(t) if d > 0 => Some((cardinality as f64).powf(1.0 / d as f64) * epsilon / t),
        _ => None,
    };
    Ok(PackReport {
        space: space.id(),
        epsilon,
        p,
        dim: d,
        cardinality,
        min_pairwise,
        separation_check,
        separated,
        candidates: drawn,
        budget: opts.budget,
        seed: opts.seed,
        theta,
        achieved_c,
        elements: set.points.into_iter().map(|p| p.element).collect(),
    })
}
