//! Covering nets, greedy packings, exact audits on finite spaces, entropy
//! profiles and ball volumes.

mod build;
mod chain;
mod pack;
mod points;
mod profile;

pub use build::{build_net, NetAudit, NetOptions, NetReport, AUDIT_SLACK};
pub use chain::{audit_chain, ChainReport, FiniteMetric, MAX_CHAIN_POINTS};
pub use pack::{greedy_pack, PackOptions, PackReport, SeparationCheck};
pub use profile::{ball_volume_mc, entropy_profile, wilson_interval, ProfileReport, ProfileRow, VolumeReport};
