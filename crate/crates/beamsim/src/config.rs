//! Scenario description loaded from JSON. Every field is optional and falls
//! back to the default two-interferer scene.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use beamform_core::array::{ArrayGeometry, MismatchModel, SourceSpec};
use beamform_core::covariance::{MepsSolver, SolverFlavor};
use beamform_core::npic::{AngularSector, MepsNpicCg};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Beamformers the harness knows how to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// The matrix-free maximum-entropy reconstruction beamformer.
    #[serde(rename = "meps-npic-cg")]
    MepsNpicCg,
    /// Max-SINR weights computed from the true covariances.
    #[serde(rename = "optimal")]
    Optimal,
    /// Sample matrix inversion toward the nominal steering vector.
    #[serde(rename = "smi")]
    Smi,
    /// Sample matrix inversion with diagonal loading.
    #[serde(rename = "smi-loaded")]
    SmiLoaded,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::MepsNpicCg,
        Method::Optimal,
        Method::Smi,
        Method::SmiLoaded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MepsNpicCg => "meps-npic-cg",
            Method::Optimal => "optimal",
            Method::Smi => "smi",
            Method::SmiLoaded => "smi-loaded",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Label written to the `scenario` CSV column; defaults to the mismatch kind.
    pub name: Option<String>,
    pub geometry: ArrayGeometry,
    /// DoA of the desired signal; `power_db` is the SNR used by the snapshot
    /// sweep and the spectrum dump.
    pub desired: SourceSpec,
    pub interferers: Vec<SourceSpec>,
    pub mismatch: MismatchModel,
    pub signal_sector: AngularSector,
    pub complement_sector: AngularSector,
    /// Snapshot count used by the SNR sweep.
    pub snapshots: usize,
    pub snr_sweep: Vec<f64>,
    pub snapshot_sweep: Vec<usize>,
    pub runs: usize,
    /// Relative residual target of the weight solve.
    pub tol: f64,
    /// Iteration cap of the weight solve.
    pub max_iter: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    /// Relative residual target of the `R v = u1` solve.
    pub meps_tol: f64,
    pub meps_max_iter: usize,
    /// Diagonal loading of the `smi-loaded` baseline (noise power is 1).
    pub smi_loading: f64,
    /// Use the fixed-step recursions for both solves instead of CG.
    pub paper_faithful: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: None,
            geometry: ArrayGeometry::default(),
            desired: SourceSpec {
                doa_deg: 5.0,
                power_db: 20.0,
            },
            interferers: vec![
                SourceSpec {
                    doa_deg: 20.0,
                    power_db: 30.0,
                },
                SourceSpec {
                    doa_deg: 50.0,
                    power_db: 30.0,
                },
            ],
            mismatch: MismatchModel::None,
            signal_sector: AngularSector::default_signal(),
            complement_sector: AngularSector::default_complement(),
            snapshots: 30,
            snr_sweep: (-2..=6).map(|i| f64::from(i * 5)).collect(),
            snapshot_sweep: vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 100],
            runs: 100,
            tol: 1e-3,
            max_iter: 7,
            base_seed: 0x5eed,
            methods: Method::ALL.to_vec(),
            meps_tol: beamform_core::covariance::DEFAULT_TOL,
            meps_max_iter: beamform_core::covariance::DEFAULT_MAX_ITER,
            smi_loading: 10.0,
            paper_faithful: false,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Hard errors only; see [`warnings`](Self::warnings) for soft checks.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.geometry.validate()?;
        SourceSpec::new(self.desired.doa_deg, self.desired.power_db)?;
        for i in &self.interferers {
            SourceSpec::new(i.doa_deg, i.power_db)?;
        }
        self.mismatch.validate()?;
        self.signal_sector.validate()?;
        self.complement_sector.validate()?;
        if self.snapshots == 0 || self.snapshot_sweep.contains(&0) {
            return Err(HarnessError::Config("snapshot counts must be >= 1".into()));
        }
        if self.runs == 0 {
            return Err(HarnessError::Config("runs must be >= 1".into()));
        }
        if !(self.tol >= 0.0) || !(self.meps_tol > 0.0) {
            return Err(HarnessError::Config("tolerances must be positive".into()));
        }
        if !(self.smi_loading >= 0.0) {
            return Err(HarnessError::Config(
                "smi_loading must be non-negative".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::Config(
                "at least one method is required".into(),
            ));
        }
        Ok(())
    }

    /// Geometric inconsistencies worth a warning but not a failure.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.signal_sector.overlaps(&self.complement_sector) {
            out.push("signal and complement sectors overlap".to_string());
        }
        if !self.signal_sector.contains(self.desired.doa_deg) {
            out.push(format!(
                "desired DoA {} deg lies outside the signal sector",
                self.desired.doa_deg
            ));
        }
        let m = self.geometry.num_sensors;
        if self.snapshots < m || self.snapshot_sweep.iter().any(|&k| k < m) {
            out.push(format!(
                "snapshot counts below {m} sensors run with safety diagonal loading"
            ));
        }
        for i in &self.interferers {
            if !self.complement_sector.contains(i.doa_deg) {
                out.push(format!(
                    "interferer DoA {} deg lies outside the complement sector",
                    i.doa_deg
                ));
            }
        }
        out
    }

    pub fn scenario_label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.mismatch.label().to_string())
    }

    pub fn solver_flavor(&self) -> SolverFlavor {
        if self.paper_faithful {
            SolverFlavor::FixedStep
        } else {
            SolverFlavor::ConjugateGradient
        }
    }

    /// Beamformer settings derived from this scenario.
    pub fn beamformer(&self) -> MepsNpicCg {
        let flavor = self.solver_flavor();
        MepsNpicCg {
            geometry: self.geometry,
            signal_sector: self.signal_sector.clone(),
            complement_sector: self.complement_sector.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
            meps_solver: MepsSolver::new(self.meps_tol, self.meps_max_iter, flavor),
            weight_flavor: flavor,
            safety_loading: false,
        }
    }
}
