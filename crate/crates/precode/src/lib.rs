//! Decentralized precoding for coherent joint transmission (CJT).
//!
//! A cluster of base stations jointly serves overlapping sets of single-antenna
//! users. Minimizing transmit power under per-user SINR targets couples all
//! base stations through inter-cell interference. This crate implements the
//! decoupling pipeline:
//!
//! * [`model`]: network topology, synthetic channel statistics, channel draws,
//!   and all performance metrics (true/approximate SINR, sum rate, power).
//! * [`udd`]: the centralized oracle based on uplink-downlink duality. It
//!   computes optimal multipliers, beamforming directions, power scalings, and
//!   the exact inter-cell interference bounds from instantaneous channels.
//! * [`de`]: deterministic equivalents of the same quantities computed from
//!   channel covariance matrices only. No channel realization enters this
//!   module; that is the point of it.
//! * [`admm`]: the per-BS solver. Given scalar interference bounds, each BS
//!   solves its local power-minimization problem with a CCCP outer loop and
//!   closed-form ADMM updates inside.
//! * [`baselines`]: local/centralized zero forcing and the WMMSE target
//!   generator.
//! * [`bench`]: experiment orchestration, CSV/JSON emission, and the
//!   decentralization audit.
//!
//! The `precode` binary exposes the benchmark pipeline on the command line;
//! the `examples/` directory demonstrates each capability in isolation.

// Guards of the form `!(x > 0.0)` are deliberate: they send NaN into the
// error branch, where the suggested `x <= 0.0` would wave it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod baselines;
pub mod bench;
pub mod de;
pub mod linalg;
pub mod udd;
pub mod model;
pub mod rng;

pub use linalg::{CMat, CVec};
