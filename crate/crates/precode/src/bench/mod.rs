//! Experiment orchestration: declarative manifests, the sweep runner,
//! machine-readable output, and the decentralization audit.
//!
//! A benchmark run is described by a TOML manifest ([`ExperimentSpec`]),
//! executed by [`run_experiment`] into one [`ResultRow`] per
//! `(scheme, n_tx, seed, α, β)` grid cell, and emitted as CSV or JSON.
//! Failed cells become [`RowError`] records and never abort the run. Every
//! decentralized solve also leaves an [`AuditRecord`] listing exactly which
//! channel coordinates it consumed, so the no-foreign-channels claim is
//! checkable after the fact rather than taken on faith.

mod formats;
mod run;
mod spec;

pub use formats::{
    bounds_to_file, emit_csv, emit_json, load_covariance, load_rows_json, load_targets,
    write_bounds, write_covariance, write_targets, BoundsFile, PairValue,
};
pub use run::{audit_violations, run_experiment, RunOutcome};
pub use spec::{ExperimentSpec, NoiseMode, Normalization, TargetsSpec};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("invalid data file: {0}")]
    Format(String),
}

/// Precoding schemes runnable from a manifest, named as on the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "zf-local")]
    ZfLocal,
    #[serde(rename = "zf-central")]
    ZfCentral,
    #[serde(rename = "udd")]
    Udd,
    #[serde(rename = "de-admm")]
    DeAdmm,
    /// Long-run CCCP-ADMM (Q₁ = Q₂ = 500) on the same bounds as `de-admm`,
    /// standing in for an interior-point reference solver.
    #[serde(rename = "reference")]
    Reference,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::ZfLocal,
        Scheme::ZfCentral,
        Scheme::Udd,
        Scheme::DeAdmm,
        Scheme::Reference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ZfLocal => "zf-local",
            Scheme::ZfCentral => "zf-central",
            Scheme::Udd => "udd",
            Scheme::DeAdmm => "de-admm",
            Scheme::Reference => "reference",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Whether the scheme consumes deterministic-equivalent bounds.
    pub fn needs_de(self) -> bool {
        matches!(self, Scheme::DeAdmm | Scheme::Reference)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub n_tx: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    /// True sum rate (bits per channel use) after normalization.
    pub sum_rate: f64,
    /// Total transmit power (Watt) after normalization.
    pub total_power: f64,
    /// Per-user true SINRs after normalization (JSON output only).
    pub per_ue_sinr: Vec<f64>,
    /// Wall time of the bound computation stage; 0 unless timing recording
    /// is enabled in the manifest.
    pub time_bounds_ms: f64,
    /// Wall time of the solve stage, summed over BSs for decentralized
    /// schemes; 0 unless timing recording is enabled.
    pub time_solve_ms: f64,
}

/// A grid cell that failed; the run continues past it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub scheme: Scheme,
    pub n_tx: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub message: String,
}

/// Input consumption of a single decentralized per-BS solve: the `(ue, bs)`
/// coordinates of every channel vector handed to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub scheme: Scheme,
    pub n_tx: usize,
    pub seed: u64,
    pub bs: usize,
    pub channel_coords: Vec<(usize, usize)>,
}
