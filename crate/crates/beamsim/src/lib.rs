//! Seeded Monte Carlo experiments for the matrix-free maximum-entropy
//! beamformer: SINR versus SNR and versus snapshot count, for the
//! no-mismatch, accumulated-phase and incoherent-scattering scenes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

pub mod config;
pub mod output;
pub mod runner;
pub mod validate;

pub use config::{Method, ScenarioConfig};
pub use runner::{run_single, sweep_snapshots, sweep_snr, SinrRecord};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] beamform_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}
