//! Randomized checks of the quantitative inequalities, each returning a
//! report with its worst case and a witness that reproduces it.

mod checks;
mod phi;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use checks::{
    bch_scaling, check_bch_defect, check_exp_lipschitz, check_geodesic_minimality, check_log_ball,
    check_phi_lower_bound, check_quotient_lower_lipschitz, check_quotient_lower_lipschitz_with,
    check_spectral_variation, check_su_circle, reproduce_margin, BchScaling, LowerLipschitzParams,
};
pub use phi::PhiBound;

use crate::groups::GroupSpec;
use crate::matcore::MatrixJson;
use crate::metrics::NormSpec;
use crate::spaces::SpaceSpec;

/// Inputs of the worst trial, enough to recompute its margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Two algebra elements.
    Pair { x: MatrixJson, y: MatrixJson },
    /// Two group elements, with the minimizer seed when one was used.
    Elements {
        u: MatrixJson,
        v: MatrixJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// A generator and a competing path from I to `exp(x)`.
    Path { x: MatrixJson, points: Vec<MatrixJson> },
    /// A group element and an algebra element probed together.
    RoundTrip { u: MatrixJson, x: MatrixJson },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<NormSpec>,
    /// Radius parameter of the checks that take one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub trials: usize,
    /// Trials dropped as degenerate.
    pub skipped: usize,
    /// Smallest `rhs - lhs` over all trials.
    pub worst_margin: f64,
    /// Smallest `lhs / rhs` where a ratio is meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
    /// The check passes iff `worst_margin >= -tolerance`.
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
}
