use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::metrics::{quotient_dist, NormSpec, QuotientOptions};
use crate::spaces::SpaceSpec;

/// Largest member set handled by the exhaustive searches.
pub const MAX_CHAIN_POINTS: usize = 18;

/// A finite metric space given by its distance matrix, with a distinguished
/// subset K. Covering centres for N may be any ambient point.
#[derive(Clone, Debug)]
pub struct FiniteMetric {
    dist: Vec<Vec<f64>>,
    members: Vec<usize>,
}

impl FiniteMetric {
    pub fn new(dist: Vec<Vec<f64>>) -> Result<Self> {
        let m = dist.len();
        for (i, row) in dist.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Input(format!("distance row {i} has length {}, expected {m}", row.len())));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Input(format!("distance ({i}, {j}) = {d} is not a finite non-negative number")));
                }
                if (d - dist[j][i]).abs() > 1e-12 * d.max(1.0) {
                    return Err(Error::Input(format!("distance matrix is not symmetric at ({i}, {j})")));
                }
            }
            if row[i] != 0.0 {
                return Err(Error::Input(format!("distance ({i}, {i}) is not zero")));
            }
        }
        Ok(FiniteMetric {
            dist,
            members: (0..m).collect(),
        })
    }

    /// Points on the real line.
    pub fn on_line(xs: &[f64]) -> Result<Self> {
        FiniteMetric::new(xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect())
    }

    /// Quotient distances between group elements, read as points of G/H.
    pub fn from_space(space: &SpaceSpec, points: &[GroupElement], p: NormSpec, opts: &QuotientOptions) -> Result<Self> {
        let m = points.len();
        let mut dist = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let d = quotient_dist(space, &points[i], &points[j], p, opts)?.value;
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        FiniteMetric::new(dist)
    }

    /// Restricts K to the given ambient indices; the rest stay available as
    /// covering centres.
    pub fn with_members(mut self, members: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|&&i| i >= self.dist.len()) {
            return Err(Error::param(format!("member index {bad} out of range")));
        }
        self.members = members;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub members: usize,
    pub ambient: usize,
    pub epsilon: f64,
    /// Fewest sets of diameter at most 2 epsilon covering K.
    pub n_prime: usize,
    /// Fewest closed epsilon-balls with ambient centres covering K.
    pub n: usize,
    /// Fewest closed epsilon-balls centred in K covering K.
    pub n_double_prime: usize,
    /// Largest subset of K with pairwise distances above epsilon.
    pub n_tilde: usize,
    /// `n_prime` at epsilon / 2.
    pub n_prime_half: usize,
    /// `n_prime <= n <= n_double_prime <= n_tilde <= n_prime_half`.
    pub holds: bool,
}

/// Fewest sets from `sets` whose union is `full`, by breadth-first search
/// over covered masks.
fn min_cover(full: u32, sets: &[u32]) -> Option<usize> {
    if full == 0 {
        return Some(0);
    }
    let mut sets: Vec<u32> = sets.iter().map(|s| s & full).filter(|&s| s != 0).collect();
    sets.sort_unstable();
    sets.dedup();
    let mut depth = vec![u8::MAX; full as usize + 1];
    depth[0] = 0;
    let mut queue = VecDeque::from([0u32]);
    while let Some(s) = queue.pop_front() {
        for &t in &sets {
            let ns = s | t;
            if depth[ns as usize] == u8::MAX {
                depth[ns as usize] = depth[s as usize] + 1;
                if ns == full {
                    return Some(depth[ns as usize] as usize);
                }
                queue.push_back(ns);
            }
        }
    }
    None
}

/// Fewest cliques of the graph `adj` covering all vertices.
fn min_clique_cover(adj: &[u32]) -> usize {
    let k = adj.len();
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    let size = 1usize << k;
    let mut clique = vec![false; size];
    clique[0] = true;
    for mask in 1..size {
        let low = (mask as u32).trailing_zeros() as usize;
        let rest = (mask as u32) & !(1 << low);
        clique[mask] = clique[rest as usize] && (adj[low] & rest) == rest;
    }
    let mut best = vec![u8::MAX; size];
    best[0] = 0;
    for mask in 1..size {
        let m = mask as u32;
        let low = m.trailing_zeros();
        let rest = m & !(1 << low);
        // submasks of `rest`, each joined with the lowest vertex
        let mut sub = rest;
        loop {
            let s = sub | (1 << low);
            if clique[s as usize] {
                let prev = best[(m & !s) as usize];
                if prev != u8::MAX && prev + 1 < best[mask] {
                    best[mask] = prev + 1;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full as usize] as usize
}

fn max_independent(adj: &[u32]) -> usize {
    let k = adj.len();
    let size = 1usize << k;
    let mut indep = vec![false; size];
    indep[0] = true;
    let mut best = 0;
    for mask in 1..size {
        let m = mask as u32;
        let low = m.trailing_zeros() as usize;
        let rest = m & !(1 << low);
        indep[mask] = indep[rest as usize] && (adj[low] & rest) == 0;
        if indep[mask] {
            best = best.max(m.count_ones() as usize);
        }
    }
    best
}

/// Exact N', N, N'' and the packing number of K at scale epsilon, plus N' at
/// epsilon / 2, by exhaustive search.
pub fn audit_chain(metric: &FiniteMetric, epsilon: f64) -> Result<ChainReport> {
    let k = metric.members.len();
    if k > MAX_CHAIN_POINTS {
        return Err(Error::TooLarge {
            what: "finite metric space",
            size: k,
            limit: MAX_CHAIN_POINTS,
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    let mem = &metric.members;
    let d = |a: usize, b: usize| metric.dist[mem[a]][mem[b]];
    let graph = |r: f64| -> Vec<u32> {
        (0..k)
            .map(|a| (0..k).filter(|&b| b != a && d(a, b) <= r).fold(0u32, |m, b| m | (1 << b)))
            .collect()
    };
    let full: u32 = (1u32 << k) - 1;
    let ball = |c: usize| -> u32 {
        (0..k)
            .filter(|&b| metric.dist[c][mem[b]] <= epsilon)
            .fold(0u32, |m, b| m | (1 << b))
    };
    let ambient_balls: Vec<u32> = (0..metric.len()).map(ball).collect();
    let member_balls: Vec<u32> = mem.iter().map(|&c| ball(c)).collect();

    let n_prime = min_clique_cover(&graph(2.0 * epsilon));
    let n = min_cover(full, &ambient_balls).expect("members cover themselves");
    let n_double_prime = min_cover(full, &member_balls).expect("members cover themselves");
    let n_tilde = max_independent(&graph(epsilon));
    let n_prime_half = min_clique_cover(&graph(epsilon));
    let holds = n_prime <= n && n <= n_double_prime && n_double_prime <= n_tilde && n_tilde <= n_prime_half;
    Ok(ChainReport {
        members: k,
        ambient: metric.len(),
        epsilon,
        n_prime,
        n,
        n_double_prime,
        n_tilde,
        n_prime_half,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points_on_a_line() {
        let m = FiniteMetric::on_line(&[0.0, 1.0, 2.0]).unwrap();
        let r = audit_chain(&m, 1.0).unwrap();
        assert_eq!((r.n_prime, r.n, r.n_double_prime, r.n_tilde), (1, 1, 1, 2));
        assert_eq!(r.n_prime_half, 2);
        assert!(r.holds);
    }

    #[test]
    fn ambient_centres_can_beat_member_centres() {
        // K = {0, 2}; the ambient midpoint 1 covers both at epsilon = 1.
        let m = FiniteMetric::on_line(&[0.0, 2.0, 1.0])
            .unwrap()
            .with_members(vec![0, 1])
            .unwrap();
        let r = audit_chain(&m, 1.0).unwrap();
        assert_eq!((r.n, r.n_double_prime), (1, 2));
        assert!(r.holds);
    }

    #[test]
    fn nineteen_points_are_too_many() {
        let xs: Vec<f64> = (0..19).map(|i| i as f64).collect();
        let m = FiniteMetric::on_line(&xs).unwrap();
        assert!(matches!(audit_chain(&m, 1.0), Err(Error::TooLarge { .. })));
    }
}
