use serde::Serialize;

use super::invariants::{diameter, kappa, theta, InvariantOptions};
use super::spec::{SpaceKind, SpaceSpec, SubgroupSpec};
use crate::error::{Error, Result};
use crate::groups::Family;

/// Which structural condition on H makes two-sided entropy bounds with
/// constants depending only on alpha available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `dim H <= (1 - alpha) dim G`.
    A,
    /// A reducing subspace E with `alpha n <= dim E <= (1 - alpha) n`.
    B,
    /// A reducing subspace E with `dim E >= alpha n` on which H acts as the
    /// full group, as a direct factor.
    C,
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct Hypothesis {
    pub theta: f64,
    pub diameter: f64,
    /// Reciprocal of the upper bound on kappa.
    pub inverse_kappa: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub space: String,
    pub alpha: f64,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<Hypothesis>,
    /// Dimension of the witnessing subspace (B, C) or of H (A).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_dim: Option<usize>,
    pub diagnostics: Vec<String>,
}

/// Dimensions of the proper reducing subspaces of the identity component of
/// H, and those on which H contains the full group as a direct factor.
/// `None` when the structure is not known.
fn reducing_dims(space: &SpaceSpec) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = space.group().n();
    let subset_sums = |blocks: &[usize]| -> Vec<usize> {
        let m = blocks.len();
        let mut sums: Vec<usize> = (1u32..(1 << m) - 1)
            .map(|mask| (0..m).filter(|b| mask & (1 << b) != 0).map(|b| blocks[b]).sum())
            .collect();
        sums.sort_unstable();
        sums.dedup();
        sums
    };
    match space.subgroup() {
        SubgroupSpec::Trivial => {
            let full = match space.group().family() {
                Family::SO if n > 1 => vec![1],
                _ => Vec::new(),
            };
            Some(((1..n).collect(), full))
        }
        SubgroupSpec::Full => Some((Vec::new(), Vec::new())),
        SubgroupSpec::Grassmann { k } => Some((vec![*k, n - k], vec![*k, n - k])),
        SubgroupSpec::BlockDiagonal { partition } if partition.len() > 1 => {
            Some((subset_sums(partition), partition.clone()))
        }
        SubgroupSpec::BlockDiagonal { .. } => Some((Vec::new(), Vec::new())),
        SubgroupSpec::TensorFactor { m, k } => Some(((1..*m).map(|j| j * k).collect(), Vec::new())),
        SubgroupSpec::SpecialUnitary => Some((Vec::new(), Vec::new())),
        SubgroupSpec::Custom { .. } => None,
    }
}

/// Checks the invariant hypothesis `min(theta, diam, 1/kappa) >= alpha` and
/// the structural conditions in the order C, B, A, returning the first that
/// holds.
pub fn classify_regime(space: &SpaceSpec, alpha: f64, opts: &InvariantOptions) -> Result<RegimeReport> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::param(format!("alpha must lie in (0, 1/2], got {alpha}")));
    }
    let mut report = RegimeReport {
        space: space.id(),
        alpha,
        regime: Regime::None,
        hypothesis: None,
        witness_dim: None,
        diagnostics: Vec::new(),
    };
    if space.kind() == SpaceKind::Point {
        report.diagnostics.push("zero-dimensional quotient".into());
        return Ok(report);
    }
    let th = match theta(space, opts) {
        Ok(t) => t.value,
        Err(Error::UnsupportedInvariant(msg)) => {
            report.diagnostics.push(format!("theta unavailable: {msg}"));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let diam = diameter(space, opts)?.value;
    let inverse_kappa = 1.0 / kappa(space, opts)?.upper;
    let holds = th.min(diam).min(inverse_kappa) >= alpha;
    report.hypothesis = Some(Hypothesis {
        theta: th,
        diameter: diam,
        inverse_kappa,
        holds,
    });
    if !holds {
        report
            .diagnostics
            .push(format!("min(theta, diam, 1/kappa) = {:.6} < alpha", th.min(diam).min(inverse_kappa)));
        return Ok(report);
    }

    let n = space.group().n() as f64;
    match reducing_dims(space) {
        Some((reducing, full)) => {
            if let Some(&d) = full.iter().filter(|&&d| d as f64 >= alpha * n).max() {
                report.regime = Regime::C;
                report.witness_dim = Some(d);
                return Ok(report);
            }
            if let Some(&d) = reducing
                .iter()
                .find(|&&d| alpha * n <= d as f64 && d as f64 <= (1.0 - alpha) * n)
            {
                report.regime = Regime::B;
                report.witness_dim = Some(d);
                return Ok(report);
            }
        }
        None => report
            .diagnostics
            .push("reducing subspaces of a custom subgroup are not analysed".into()),
    }
    let dim_h = space.h_basis().len();
    if dim_h as f64 <= (1.0 - alpha) * space.group().lie_dim() as f64 {
        report.regime = Regime::A;
        report.witness_dim = Some(dim_h);
    } else {
        report.diagnostics.push("no structural condition holds".into());
    }
    Ok(report)
}
