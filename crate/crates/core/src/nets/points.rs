use std::collections::HashMap;

use crate::error::Result;
use crate::groups::GroupElement;
use crate::matcore::Frame;
use crate::metrics::{angles_of, arc_distance, principal_angles, quotient_dist_generic, NormSpec, QuotientOptions};
use crate::spaces::{SpaceKind, SpaceSpec};

/// How distances on a space are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Mode {
    Point,
    Group,
    Grassmann { k: usize },
    Circle,
    Coset,
}

/// A point of G/H with a cached fast representation and its index keys.
#[derive(Clone, Debug)]
pub(crate) struct NetPoint {
    pub element: GroupElement,
    frame: Option<Frame>,
    phase: f64,
    pub keys: Vec<f64>,
}

/// The quotient metric on one space together with Lipschitz index keys:
/// `|key_i(a) - key_i(b)| <= lipschitz * dist(a, b)`.
pub(crate) struct QuotientMetric<'a> {
    space: &'a SpaceSpec,
    p: NormSpec,
    mode: Mode,
    qopts: QuotientOptions,
    pub lipschitz: f64,
}

impl<'a> QuotientMetric<'a> {
    pub fn new(space: &'a SpaceSpec, p: NormSpec, qopts: QuotientOptions) -> Self {
        let n = space.group().n() as f64;
        let mode = match space.kind() {
            SpaceKind::Point => Mode::Point,
            SpaceKind::Group => Mode::Group,
            SpaceKind::Grassmann { k } if p.p() >= 2.0 => Mode::Grassmann { k },
            SpaceKind::Circle => Mode::Circle,
            _ => Mode::Coset,
        };
        let lipschitz = match mode {
            Mode::Circle => n / p.identity_norm(space.group().n()),
            _ => 1.0,
        };
        QuotientMetric {
            space,
            p,
            mode,
            qopts,
            lipschitz,
        }
    }

    pub fn point(&self, u: GroupElement) -> NetPoint {
        let m = u.matrix();
        let real = self.space.group().is_real();
        let (frame, phase, keys) = match self.mode {
            Mode::Point | Mode::Coset => (None, 0.0, Vec::new()),
            Mode::Group => {
                let keys = if m.n() == 1 {
                    vec![m.get(0, 0).re, m.get(0, 0).im]
                } else if real {
                    vec![m.get(0, 0).re, m.get(1, 1).re, m.get(0, 1).re]
                } else {
                    vec![m.get(0, 0).re, m.get(0, 0).im, m.get(0, 1).re]
                };
                (None, 0.0, keys)
            }
            Mode::Grassmann { k } => {
                let f = Frame::leading_columns(m, k);
                let pr = f.projector();
                let keys = vec![pr.get(0, 0).re, pr.get(1, 1).re, pr.get(0, 1).re];
                (Some(f), 0.0, keys)
            }
            Mode::Circle => {
                let d = m.det();
                let phase = d.im.atan2(d.re);
                (None, phase, vec![phase.cos(), phase.sin()])
            }
        };
        NetPoint {
            element: u,
            frame,
            phase,
            keys,
        }
    }

    pub fn dist(&self, a: &NetPoint, b: &NetPoint) -> Result<f64> {
        match self.mode {
            Mode::Point => Ok(0.0),
            Mode::Group => {
                let w = &a.element.matrix().adjoint() * b.element.matrix();
                Ok(self.p.lp(angles_of(&w)?.into_iter()))
            }
            Mode::Grassmann { .. } => {
                let (e, f) = (a.frame.as_ref().expect("frame"), b.frame.as_ref().expect("frame"));
                let ang = principal_angles(e, f)?;
                Ok(self.p.lp(ang.iter().chain(ang.iter()).cloned()))
            }
            Mode::Circle => {
                let n = self.space.group().n();
                Ok(self.p.identity_norm(n) * arc_distance(a.phase, b.phase) / n as f64)
            }
            Mode::Coset => Ok(quotient_dist_generic(self.space, &a.element, &b.element, self.p, &self.qopts)?.value),
        }
    }

    /// Lower bound on the distance from the index keys alone.
    pub fn key_bound(&self, a: &NetPoint, b: &NetPoint) -> f64 {
        a.keys
            .iter()
            .zip(&b.keys)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / self.lipschitz
    }
}

/// Uniform grid over the index keys. Points within `radius` of each other
/// land in neighbouring cells.
pub(crate) struct GridIndex {
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl GridIndex {
    pub fn new(radius: f64, lipschitz: f64) -> Self {
        GridIndex {
            cell: radius * lipschitz,
            cells: HashMap::new(),
        }
    }

    fn cell_of(&self, keys: &[f64]) -> Vec<i64> {
        keys.iter().map(|k| (k / self.cell).floor() as i64).collect()
    }

    pub fn insert(&mut self, keys: &[f64], id: usize) {
        let c = self.cell_of(keys);
        self.cells.entry(c).or_default().push(id);
    }

    /// Ids in the 3^k cells around `keys`, ascending.
    pub fn near(&self, keys: &[f64]) -> Vec<usize> {
        let centre = self.cell_of(keys);
        let k = centre.len();
        let mut out = Vec::new();
        let mut offset = vec![-1i64; k];
        loop {
            let c: Vec<i64> = centre.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if let Some(ids) = self.cells.get(&c) {
                out.extend_from_slice(ids);
            }
            let mut j = 0;
            while j < k {
                if offset[j] < 1 {
                    offset[j] += 1;
                    break;
                }
                offset[j] = -1;
                j += 1;
            }
            if j == k {
                break;
            }
        }
        out.sort_unstable();
        out
    }
}

/// Points with a neighbour index at a fixed radius.
pub(crate) struct IndexedSet<'m, 'a> {
    metric: &'m QuotientMetric<'a>,
    radius: f64,
    pub points: Vec<NetPoint>,
    index: GridIndex,
}

impl<'m, 'a> IndexedSet<'m, 'a> {
    pub fn new(metric: &'m QuotientMetric<'a>, radius: f64) -> Self {
        IndexedSet {
            metric,
            radius,
            points: Vec::new(),
            index: GridIndex::new(radius, metric.lipschitz),
        }
    }

    pub fn push(&mut self, p: NetPoint) {
        self.index.insert(&p.keys, self.points.len());
        self.points.push(p);
    }

    /// Whether some stored point lies within distance `r <= radius` of `q`.
    pub fn any_within(&self, q: &NetPoint, r: f64) -> Result<bool> {
        debug_assert!(r <= self.radius * (1.0 + 1e-12));
        for id in self.index.near(&q.keys) {
            let p = &self.points[id];
            if self.metric.key_bound(p, q) > r {
                continue;
            }
            if self.metric.dist(p, q)? <= r {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Distance from `q` to the nearest stored point. Exact: falls back to a
    /// full scan when nothing lies within the index radius.
    pub fn nearest(&self, q: &NetPoint) -> Result<f64> {
        let mut best = f64::INFINITY;
        for id in self.index.near(&q.keys) {
            best = best.min(self.metric.dist(&self.points[id], q)?);
        }
        if best <= self.radius {
            return Ok(best);
        }
        for p in &self.points {
            if self.metric.key_bound(p, q) < best {
                best = best.min(self.metric.dist(p, q)?);
            }
        }
        Ok(best)
    }

    /// Smallest distance over pairs that share a neighbourhood; every other
    /// pair is farther apart than the index radius.
    pub fn min_neighbour_distance(&self) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        for (i, p) in self.points.iter().enumerate() {
            for j in self.index.near(&p.keys) {
                if j <= i {
                    continue;
                }
                let d = self.metric.dist(p, &self.points[j])?;
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        Ok(best)
    }
}
