//! Ground truth of a simulated scene and the output-SINR metric.

use alloc::vec::Vec;

use crate::dense::{mvdr_weights, power_iteration, DenseHermitian};
use crate::linalg::{dot, norm_sqr};
use crate::{ComplexVector, Error, Result, C64};

/// The desired-signal component of the truth.
#[derive(Debug, Clone, PartialEq)]
pub enum DesiredTruth {
    /// Point source with a fixed (possibly perturbed) steering vector.
    Deterministic { steering: ComplexVector, power: f64 },
    /// Incoherent scatter paths of equal power; the signal covariance is
    /// `path_power * sum a_p a_p^H`.
    Scattered {
        steering: Vec<ComplexVector>,
        path_power: f64,
    },
}

/// What a beamformer is scored against.
#[derive(Debug, Clone)]
pub struct TruthModel {
    desired: DesiredTruth,
    npic: DenseHermitian,
}

impl TruthModel {
    pub fn new(desired: DesiredTruth, npic: DenseHermitian) -> Result<Self> {
        let m = npic.dim();
        let svs: &[ComplexVector] = match &desired {
            DesiredTruth::Deterministic { steering, .. } => core::slice::from_ref(steering),
            DesiredTruth::Scattered { steering, .. } => steering,
        };
        if svs.is_empty() {
            return Err(Error::InvalidParameter(
                "desired truth needs a steering vector",
            ));
        }
        for sv in svs {
            if sv.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: sv.len(),
                });
            }
        }
        npic.cholesky()?;
        Ok(Self { desired, npic })
    }

    pub fn desired(&self) -> &DesiredTruth {
        &self.desired
    }

    /// True interference-plus-noise covariance `R_{i+n}`.
    pub fn npic(&self) -> &DenseHermitian {
        &self.npic
    }

    pub fn num_sensors(&self) -> usize {
        self.npic.dim()
    }

    /// Total desired-signal power `sigma_0^2`.
    pub fn desired_power(&self) -> f64 {
        match &self.desired {
            DesiredTruth::Deterministic { power, .. } => *power,
            DesiredTruth::Scattered {
                steering,
                path_power,
            } => path_power * steering.len() as f64,
        }
    }

    /// Desired power at the beamformer output, `w^H R_s w`.
    pub fn signal_power(&self, w: &[C64]) -> f64 {
        match &self.desired {
            DesiredTruth::Deterministic { steering, power } => power * dot(w, steering).norm_sqr(),
            DesiredTruth::Scattered {
                steering,
                path_power,
            } => steering
                .iter()
                .map(|a| path_power * dot(w, a).norm_sqr())
                .sum(),
        }
    }

    /// Max-SINR weights for this truth.
    ///
    /// For a point source this is MVDR on the true covariance. For scattered
    /// paths it is the principal generalized eigenvector of `(R_s, R_{i+n})`.
    pub fn optimal_weights(&self) -> Result<ComplexVector> {
        match &self.desired {
            DesiredTruth::Deterministic { steering, .. } => mvdr_weights(&self.npic, steering),
            DesiredTruth::Scattered {
                steering,
                path_power,
            } => {
                // Whitened signal covariance C = L^-1 R_s L^-H.
                let chol = self.npic.cholesky()?;
                let mut c = DenseHermitian::zeros(self.npic.dim());
                for a in steering {
                    c.add_outer(*path_power, &chol.forward(a));
                }
                let (_, u) = power_iteration(&c, 20_000);
                Ok(chol.backward(&u))
            }
        }
    }

    /// Highest achievable output SINR in dB.
    pub fn optimal_sinr_db(&self) -> Result<f64> {
        let w = self.optimal_weights()?;
        output_sinr(&w, self)
    }
}

/// Output SINR `w^H R_s w / w^H R_{i+n} w` in dB.
pub fn output_sinr(w: &[C64], truth: &TruthModel) -> Result<f64> {
    if w.len() != truth.num_sensors() {
        return Err(Error::DimensionMismatch {
            expected: truth.num_sensors(),
            found: w.len(),
        });
    }
    if norm_sqr(w) == 0.0 {
        return Err(Error::DegenerateInput("zero weight vector"));
    }
    let noise = truth.npic.quadratic_form(w)?;
    Ok(10.0 * libm::log10(truth.signal_power(w) / noise))
}
