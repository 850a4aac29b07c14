//! Homogeneous spaces G/H and their invariants.

mod classify;
mod invariants;
mod spec;

pub use classify::{classify_regime, Hypothesis, Regime, RegimeReport};
pub use invariants::{
    diameter, diameter_monte_carlo, invariants, kappa, tangent_split, theta, theta_torus_search,
    DiameterEstimate, DiameterMethod, InvariantOptions, InvariantReport, KappaEstimate, KappaMethod,
    ThetaEstimate, ThetaMethod, TorusSearch,
};
pub use spec::{QuotientPoint, SpaceKind, SpaceSpec, SubgroupSpec, Torus};
