//! Metric entropy of the unitary and special orthogonal groups and of their
//! homogeneous quotients.
//!
//! The crate is organised bottom-up: [`matcore`] holds the dense complex
//! linear algebra, [`groups`] the matrix groups and Haar sampling,
//! [`metrics`] the extrinsic, intrinsic and quotient distances, [`spaces`]
//! the homogeneous spaces and their invariants, [`nets`] the covering and
//! packing constructions, and [`verify`] the randomized inequality checks.

pub mod error;
pub mod groups;
pub mod matcore;
pub mod metrics;
pub mod nets;
pub mod rng;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use groups::{Family, GroupElement, GroupSpec, TangentVector};
pub use matcore::{DenseMatrix, Field};
pub use metrics::{MetricKind, NormSpec};
pub use rng::Stream;
pub use spaces::{SpaceSpec, SubgroupSpec};
