//! Distances on the groups and on their quotients.

mod dist;
mod norm;
mod quotient;

pub use dist::{
    arc_distance, discrete_path_length, distance, eigenvalue_matching_distance, extrinsic_dist,
    geodesic_point, intrinsic_dist, rotation_angles, GeodesicPoint, MAX_MATCHING_DIM,
};
pub use norm::{MetricKind, NormSpec};
pub use quotient::{
    grassmann_dist, principal_angles, quotient_dist, quotient_dist_generic, MinimizerCertificate,
    QuotientDistance, QuotientMethod, QuotientOptions,
};


pub(crate) use dist::angles_of;
