//! Uniform linear array model: steering vectors, steering mismatch and
//! snapshot synthesis.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::dense::DenseHermitian;
use crate::metrics::{DesiredTruth, TruthModel};
use crate::{ComplexVector, Error, Result, C64};

/// Geometry of a uniform linear array.
///
/// `spacing_ratio` is the element spacing normalized by half a wavelength
/// (`2d/lambda`), so `1.0` is the usual half-wavelength array.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ArrayGeometry {
    pub num_sensors: usize,
    pub spacing_ratio: f64,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self {
            num_sensors: 10,
            spacing_ratio: 1.0,
        }
    }
}

impl ArrayGeometry {
    pub fn new(num_sensors: usize, spacing_ratio: f64) -> Result<Self> {
        let geom = Self {
            num_sensors,
            spacing_ratio,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Half-wavelength array with `num_sensors` elements.
    pub fn half_wavelength(num_sensors: usize) -> Result<Self> {
        Self::new(num_sensors, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sensors < 2 {
            return Err(Error::InvalidParameter("array needs at least two sensors"));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio.is_finite()) {
            return Err(Error::InvalidParameter("spacing ratio must be positive"));
        }
        Ok(())
    }
}

/// A narrowband far-field source. `power_db` is the per-sensor power relative
/// to the unit noise floor (SNR for the desired signal, INR for interferers).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SourceSpec {
    pub doa_deg: f64,
    pub power_db: f64,
}

impl SourceSpec {
    pub fn new(doa_deg: f64, power_db: f64) -> Result<Self> {
        check_angle(doa_deg)?;
        Ok(Self { doa_deg, power_db })
    }

    /// Linear power `10^(power_db / 10)`.
    pub fn power(&self) -> f64 {
        db_to_linear(self.power_db)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// How the scatter path DoAs are drawn around their mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScatterDoaDistribution {
    /// Uniform on `mean ± sqrt(3) * std`, which has exactly the given moments.
    #[default]
    Uniform,
    Gaussian,
}

/// Mismatch between the nominal and the actual desired-signal signature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MismatchModel {
    #[default]
    None,
    /// Each element accumulates an extra Gaussian phase increment (radians)
    /// along the array; the increments are drawn once per run.
    AccumulatedPhase { std_rad: f64 },
    /// The desired signal arrives over `num_paths + 1` incoherent paths with
    /// DoAs drawn once per run and complex gains redrawn every snapshot.
    IncoherentScattering {
        num_paths: usize,
        doa_mean_deg: f64,
        doa_std_deg: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        doa_distribution: ScatterDoaDistribution,
    },
}

impl MismatchModel {
    pub const DEFAULT_PHASE_STD_RAD: f64 = 0.07;

    pub fn accumulated_phase() -> Self {
        Self::AccumulatedPhase {
            std_rad: Self::DEFAULT_PHASE_STD_RAD,
        }
    }

    pub fn incoherent_scattering() -> Self {
        Self::IncoherentScattering {
            num_paths: 4,
            doa_mean_deg: 5.0,
            doa_std_deg: 2.0,
            doa_distribution: ScatterDoaDistribution::Uniform,
        }
    }

    /// Short identifier used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::AccumulatedPhase { .. } => "accumulated_phase",
            Self::IncoherentScattering { .. } => "incoherent_scattering",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::None => Ok(()),
            Self::AccumulatedPhase { std_rad } => {
                if std_rad >= 0.0 && std_rad.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("phase std must be non-negative"))
                }
            }
            Self::IncoherentScattering {
                doa_mean_deg,
                doa_std_deg,
                ..
            } => {
                check_angle(doa_mean_deg)?;
                if doa_std_deg >= 0.0 && doa_std_deg.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "scatter DoA std must be non-negative",
                    ))
                }
            }
        }
    }
}

/// The actual desired-signal signature for one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub enum DesiredSignature {
    /// A fixed steering vector held across all snapshots.
    Fixed(ComplexVector),
    /// Incoherent paths: per-snapshot gains are redrawn for every path.
    Scattered {
        doas_deg: Vec<f64>,
        steering: Vec<ComplexVector>,
    },
}

/// `M x K` block of array observations, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBatch {
    num_sensors: usize,
    data: Vec<C64>,
}

impl SnapshotBatch {
    /// Builds a batch from column-major data (`data.len() = M * K`, `K >= 1`).
    pub fn from_column_major(num_sensors: usize, data: Vec<C64>) -> Result<Self> {
        if num_sensors == 0 {
            return Err(Error::InvalidParameter(
                "snapshots need at least one sensor",
            ));
        }
        if data.is_empty() {
            return Err(Error::InvalidParameter("snapshot batch needs K >= 1"));
        }
        if !data.len().is_multiple_of(num_sensors) {
            return Err(Error::DimensionMismatch {
                expected: num_sensors * (data.len() / num_sensors + 1),
                found: data.len(),
            });
        }
        Ok(Self { num_sensors, data })
    }

    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let m = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * columns.len());
        for col in columns {
            if col.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Self::from_column_major(m, data)
    }

    /// A batch with no snapshots. Only meaningful as the carrier of a purely
    /// diagonally loaded covariance.
    pub fn empty(num_sensors: usize) -> Self {
        Self {
            num_sensors,
            data: Vec::new(),
        }
    }

    pub fn num_sensors(&self) -> usize {
        self.num_sensors
    }

    pub fn num_snapshots(&self) -> usize {
        self.data.len() / self.num_sensors
    }

    pub fn column(&self, t: usize) -> &[C64] {
        &self.data[t * self.num_sensors..(t + 1) * self.num_sensors]
    }

    pub fn columns(&self) -> core::slice::ChunksExact<'_, C64> {
        self.data.chunks_exact(self.num_sensors)
    }

    pub fn as_column_major(&self) -> &[C64] {
        &self.data
    }
}

/// One synthesized run: the observations plus what the metrics need to know
/// about the scene that produced them.
#[derive(Debug, Clone)]
pub struct Scene {
    pub snapshots: SnapshotBatch,
    pub signature: DesiredSignature,
    pub truth: TruthModel,
}

fn check_angle(theta_deg: f64) -> Result<()> {
    if (-90.0..=90.0).contains(&theta_deg) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(theta_deg))
    }
}

/// Writes `a(theta)` into `out` (length `M`) without allocating.
pub fn steering_vector_into(geom: &ArrayGeometry, theta_deg: f64, out: &mut [C64]) -> Result<()> {
    check_angle(theta_deg)?;
    if out.len() != geom.num_sensors {
        return Err(Error::DimensionMismatch {
            expected: geom.num_sensors,
            found: out.len(),
        });
    }
    let phase_step = -PI * geom.spacing_ratio * libm::sin(theta_deg.to_radians());
    for (m, a) in out.iter_mut().enumerate() {
        let phase = phase_step * m as f64;
        *a = C64::new(libm::cos(phase), libm::sin(phase));
    }
    Ok(())
}

/// Steering vector `a(theta)`, element `m` equal to `exp(-j pi m dbar sin theta)`.
pub fn steering_vector(geom: &ArrayGeometry, theta_deg: f64) -> Result<ComplexVector> {
    let mut a = crate::linalg::zeros(geom.num_sensors);
    steering_vector_into(geom, theta_deg, &mut a)?;
    Ok(a)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Circular complex Gaussian with `E|z|^2 = power`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, power: f64) -> C64 {
    let s = libm::sqrt(power / 2.0);
    let re = gaussian(rng);
    let im = gaussian(rng);
    C64::new(s * re, s * im)
}

/// Draws the actual desired signature for one run.
pub fn effective_desired_sv<R: Rng + ?Sized>(
    geom: &ArrayGeometry,
    nominal_doa_deg: f64,
    mismatch: &MismatchModel,
    rng: &mut R,
) -> Result<DesiredSignature> {
    mismatch.validate()?;
    match *mismatch {
        MismatchModel::None => Ok(DesiredSignature::Fixed(steering_vector(
            geom,
            nominal_doa_deg,
        )?)),
        MismatchModel::AccumulatedPhase { std_rad } => {
            let mut a = steering_vector(geom, nominal_doa_deg)?;
            let mut phase = 0.0;
            for am in a.iter_mut().skip(1) {
                phase += std_rad * gaussian(rng);
                *am *= C64::new(libm::cos(phase), libm::sin(phase));
            }
            Ok(DesiredSignature::Fixed(a))
        }
        MismatchModel::IncoherentScattering {
            num_paths,
            doa_mean_deg,
            doa_std_deg,
            doa_distribution,
        } => {
            let mut doas_deg = Vec::with_capacity(num_paths + 1);
            match doa_distribution {
                ScatterDoaDistribution::Uniform => {
                    let half_width = libm::sqrt(3.0) * doa_std_deg;
                    if half_width > 0.0 {
                        let u = Uniform::new(doa_mean_deg - half_width, doa_mean_deg + half_width)
                            .map_err(|_| Error::InvalidParameter("bad scatter DoA range"))?;
                        doas_deg.extend((0..=num_paths).map(|_| u.sample(rng)));
                    } else {
                        doas_deg.resize(num_paths + 1, doa_mean_deg);
                    }
                }
                ScatterDoaDistribution::Gaussian => {
                    doas_deg.extend(
                        (0..=num_paths).map(|_| doa_mean_deg + doa_std_deg * gaussian(rng)),
                    );
                }
            }
            for d in doas_deg.iter_mut() {
                *d = d.clamp(-90.0, 90.0);
            }
            let steering = doas_deg
                .iter()
                .map(|&d| steering_vector(geom, d))
                .collect::<Result<Vec<_>>>()?;
            Ok(DesiredSignature::Scattered { doas_deg, steering })
        }
    }
}

/// Synthesizes `K` snapshots of desired signal, interferers and unit-power
/// white noise, together with the ground truth needed to score beamformers.
///
/// The desired signal power is split equally across scatter paths.
pub fn generate_snapshots<R: Rng + ?Sized>(
    geom: &ArrayGeometry,
    desired: &SourceSpec,
    interferers: &[SourceSpec],
    mismatch: &MismatchModel,
    num_snapshots: usize,
    rng: &mut R,
) -> Result<Scene> {
    geom.validate()?;
    if num_snapshots < 1 {
        return Err(Error::InvalidParameter("snapshot count K must be >= 1"));
    }
    check_angle(desired.doa_deg)?;
    for src in interferers {
        check_angle(src.doa_deg)?;
    }
    let m = geom.num_sensors;
    let signature = effective_desired_sv(geom, desired.doa_deg, mismatch, rng)?;
    let interferer_svs = interferers
        .iter()
        .map(|s| steering_vector(geom, s.doa_deg))
        .collect::<Result<Vec<_>>>()?;
    let desired_power = desired.power();
    let interferer_powers: Vec<f64> = interferers.iter().map(SourceSpec::power).collect();

    let mut data = Vec::with_capacity(m * num_snapshots);
    let mut column = crate::linalg::zeros(m);
    for _ in 0..num_snapshots {
        column.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        match &signature {
            DesiredSignature::Fixed(a) => {
                let s = complex_gaussian(rng, desired_power);
                crate::linalg::axpy(s, a, &mut column);
            }
            DesiredSignature::Scattered { steering, .. } => {
                let path_power = desired_power / steering.len() as f64;
                for a in steering {
                    let s = complex_gaussian(rng, path_power);
                    crate::linalg::axpy(s, a, &mut column);
                }
            }
        }
        for (a, &p) in interferer_svs.iter().zip(&interferer_powers) {
            let s = complex_gaussian(rng, p);
            crate::linalg::axpy(s, a, &mut column);
        }
        for c in column.iter_mut() {
            *c += complex_gaussian(rng, 1.0);
        }
        data.extend_from_slice(&column);
    }

    let mut npic = DenseHermitian::identity(m);
    for (a, &p) in interferer_svs.iter().zip(&interferer_powers) {
        npic.add_outer(p, a);
    }
    let desired_truth = match &signature {
        DesiredSignature::Fixed(a) => DesiredTruth::Deterministic {
            steering: a.clone(),
            power: desired_power,
        },
        DesiredSignature::Scattered { steering, .. } => DesiredTruth::Scattered {
            steering: steering.clone(),
            path_power: desired_power / steering.len() as f64,
        },
    };
    Ok(Scene {
        snapshots: SnapshotBatch::from_column_major(m, data)?,
        signature,
        truth: TruthModel::new(desired_truth, npic)?,
    })
}
