//! Desired-signal steering estimation and conjugate-gradient MVDR weights on
//! covariances reconstructed from the maximum entropy spectrum.
//!
//! A reconstructed covariance `sum P_i a(theta_i) a(theta_i)^H dtheta` is
//! represented only by its [`SpectrumSamples`]; applying it to a vector costs
//! `O(MQ)` and no `M x M` array is ever formed here.

use alloc::vec::Vec;

use crate::array::{steering_vector, ArrayGeometry, SnapshotBatch};
use crate::covariance::{
    meps_power, ImplicitSampleCovariance, MepsSolution, MepsSolver, SolverFlavor,
};
use crate::linalg::{axpy, dot, norm, norm_sqr, zeros};
use crate::{ComplexVector, Error, Result, C64};

/// A union of disjoint angular intervals (degrees) sampled at `num_samples`
/// points.
///
/// Unless `counts` fixes the number of samples per interval, samples are split
/// across intervals in proportion to their width (largest remainder, ties to
/// the lower interval). Within an interval they sit at cell centres, so the
/// interval endpoints themselves are never sampled.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AngularSector {
    pub intervals: Vec<[f64; 2]>,
    pub num_samples: usize,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub counts: Option<Vec<usize>>,
}

impl AngularSector {
    pub fn new(intervals: Vec<[f64; 2]>, num_samples: usize) -> Result<Self> {
        let s = Self {
            intervals,
            num_samples,
            counts: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Sector with an explicit sample count per interval.
    pub fn with_counts(intervals: Vec<[f64; 2]>, counts: Vec<usize>) -> Result<Self> {
        let s = Self {
            intervals,
            num_samples: counts.iter().sum(),
            counts: Some(counts),
        };
        s.validate()?;
        Ok(s)
    }

    /// Desired-signal sector `[-1, 11]` deg with 10 samples.
    pub fn default_signal() -> Self {
        Self {
            intervals: alloc::vec![[-1.0, 11.0]],
            num_samples: 10,
            counts: None,
        }
    }

    /// Its complement `[-90, -1) U (11, 90]` deg with 90 samples, 50 below
    /// the signal sector and 40 above it.
    pub fn default_complement() -> Self {
        Self {
            intervals: alloc::vec![[-90.0, -1.0], [11.0, 90.0]],
            num_samples: 90,
            counts: Some(alloc::vec![50, 40]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::InvalidParameter("sector needs at least one sample"));
        }
        if self.intervals.is_empty() {
            return Err(Error::InvalidParameter(
                "sector needs at least one interval",
            ));
        }
        for &[lo, hi] in &self.intervals {
            if !(-90.0..=90.0).contains(&lo) {
                return Err(Error::AngleOutOfRange(lo));
            }
            if !(-90.0..=90.0).contains(&hi) {
                return Err(Error::AngleOutOfRange(hi));
            }
            if !(lo < hi) {
                return Err(Error::InvalidParameter(
                    "interval bounds must satisfy lo < hi",
                ));
            }
        }
        let mut sorted = self.intervals.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
        if sorted.windows(2).any(|w| w[1][0] < w[0][1]) {
            return Err(Error::InvalidParameter("sector intervals overlap"));
        }
        if let Some(counts) = &self.counts {
            if counts.len() != self.intervals.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.intervals.len(),
                    found: counts.len(),
                });
            }
            if counts.iter().sum::<usize>() != self.num_samples {
                return Err(Error::InvalidParameter(
                    "per-interval counts must add up to num_samples",
                ));
            }
        }
        Ok(())
    }

    pub fn total_width_deg(&self) -> f64 {
        self.intervals.iter().map(|[lo, hi]| hi - lo).sum()
    }

    /// Whether `theta_deg` lies in the closed hull of any interval.
    pub fn contains(&self, theta_deg: f64) -> bool {
        self.intervals
            .iter()
            .any(|&[lo, hi]| (lo..=hi).contains(&theta_deg))
    }

    /// Whether any two intervals of `self` and `other` share interior points.
    pub fn overlaps(&self, other: &AngularSector) -> bool {
        self.intervals.iter().any(|&[a0, a1]| {
            other
                .intervals
                .iter()
                .any(|&[b0, b1]| a0.max(b0) < a1.min(b1))
        })
    }

    /// Number of samples assigned to each interval.
    pub fn allocation(&self) -> Vec<usize> {
        if let Some(counts) = &self.counts {
            return counts.clone();
        }
        let total = self.total_width_deg();
        let n = self.num_samples;
        let quotas: Vec<f64> = self
            .intervals
            .iter()
            .map(|[lo, hi]| n as f64 * (hi - lo) / total)
            .collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| libm::floor(*q) as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        // Stable sort keeps the lower interval first on ties.
        order.sort_by(|&a, &b| {
            let fa = quotas[a] - libm::floor(quotas[a]);
            let fb = quotas[b] - libm::floor(quotas[b]);
            fb.total_cmp(&fa)
        });
        for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }

    /// Sample angles in degrees, interval by interval.
    pub fn sample_angles(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_samples);
        for (&[lo, hi], count) in self.intervals.iter().zip(self.allocation()) {
            if count == 0 {
                continue;
            }
            let step = (hi - lo) / count as f64;
            out.extend((0..count).map(|j| lo + (j as f64 + 0.5) * step));
        }
        out
    }

    /// Quadrature weight `total width / num_samples`, in radians.
    pub fn delta_theta_rad(&self) -> f64 {
        (self.total_width_deg() / self.num_samples as f64).to_radians()
    }
}

/// Spectrum powers and steering vectors on a sector grid: the implicit form
/// of `sum P_i a_i a_i^H dtheta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSamples {
    angles_deg: Vec<f64>,
    powers: Vec<f64>,
    steering: Vec<ComplexVector>,
    delta_theta: f64,
}

impl SpectrumSamples {
    pub fn new(
        angles_deg: Vec<f64>,
        powers: Vec<f64>,
        steering: Vec<ComplexVector>,
        delta_theta: f64,
    ) -> Result<Self> {
        if steering.is_empty() {
            return Err(Error::InvalidParameter(
                "spectrum needs at least one sample",
            ));
        }
        if angles_deg.len() != steering.len() {
            return Err(Error::DimensionMismatch {
                expected: steering.len(),
                found: angles_deg.len(),
            });
        }
        if powers.len() != steering.len() {
            return Err(Error::DimensionMismatch {
                expected: steering.len(),
                found: powers.len(),
            });
        }
        let m = steering[0].len();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "steering vectors must be non-empty",
            ));
        }
        if let Some(bad) = steering.iter().find(|a| a.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        if powers.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter("spectrum powers must be positive"));
        }
        if !(delta_theta > 0.0 && delta_theta.is_finite()) {
            return Err(Error::InvalidParameter("grid spacing must be positive"));
        }
        Ok(Self {
            angles_deg,
            powers,
            steering,
            delta_theta,
        })
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn steering(&self) -> &[ComplexVector] {
        &self.steering
    }

    /// Grid spacing in radians.
    pub fn delta_theta(&self) -> f64 {
        self.delta_theta
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn num_sensors(&self) -> usize {
        self.steering[0].len()
    }

    /// Same grid with every power multiplied by `factor > 0`.
    pub fn scaled_powers(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.angles_deg.clone(),
            self.powers.iter().map(|p| p * factor).collect(),
            self.steering.clone(),
            self.delta_theta,
        )
    }

    /// `trace = dtheta * sum P_i ‖a_i‖^2`, an upper bound on the largest
    /// eigenvalue of the implied matrix.
    pub fn trace(&self) -> f64 {
        self.powers
            .iter()
            .zip(&self.steering)
            .map(|(p, a)| p * norm_sqr(a))
            .sum::<f64>()
            * self.delta_theta
    }

    /// Writes `sum P_i (a_i^H w) a_i dtheta` into `out`.
    pub fn apply_into(&self, w: &[C64], out: &mut [C64]) -> Result<()> {
        let m = self.num_sensors();
        if w.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: w.len(),
            });
        }
        if out.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: out.len(),
            });
        }
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for (p, a) in self.powers.iter().zip(&self.steering) {
            axpy(dot(a, w) * (p * self.delta_theta), a, out);
        }
        Ok(())
    }
}

/// Evaluates the maximum entropy spectrum on the sector grid.
pub fn sample_spectrum(
    sector: &AngularSector,
    sol: &MepsSolution,
    geom: &ArrayGeometry,
) -> Result<SpectrumSamples> {
    sector.validate()?;
    if sol.num_sensors() != geom.num_sensors {
        return Err(Error::DimensionMismatch {
            expected: geom.num_sensors,
            found: sol.num_sensors(),
        });
    }
    let angles = sector.sample_angles();
    let mut powers = Vec::with_capacity(angles.len());
    let mut steering = Vec::with_capacity(angles.len());
    for &theta in &angles {
        let a = steering_vector(geom, theta)?;
        powers.push(meps_power(sol, &a)?);
        steering.push(a);
    }
    SpectrumSamples::new(angles, powers, steering, sector.delta_theta_rad())
}

/// Refined desired steering `R_s a_bar = sum P_i (a_i^H a_bar) a_i dtheta`,
/// rescaled to `‖a‖^2 = M`.
pub fn reconstruct_sv(
    signal_samples: &SpectrumSamples,
    nominal_sv: &[C64],
) -> Result<ComplexVector> {
    let m = signal_samples.num_sensors();
    if nominal_sv.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: nominal_sv.len(),
        });
    }
    let nominal_norm = norm(nominal_sv);
    if nominal_norm == 0.0 {
        return Err(Error::DegenerateInput("zero nominal steering vector"));
    }
    let mut a_hat = zeros(m);
    signal_samples.apply_into(nominal_sv, &mut a_hat)?;
    // Largest possible ‖a_hat‖ for this grid, so the test is scale-free.
    let bound = signal_samples.trace() * nominal_norm;
    let len = norm(&a_hat);
    if !(len > 1e-12 * bound) {
        return Err(Error::OrthogonalSteering);
    }
    let scale = libm::sqrt(m as f64) / len;
    a_hat.iter_mut().for_each(|x| *x *= scale);
    Ok(a_hat)
}

/// `R_{i+n} w` for the reconstructed interference-plus-noise covariance.
pub fn npic_matvec(npic_samples: &SpectrumSamples, w: &[C64]) -> Result<ComplexVector> {
    let mut out = zeros(npic_samples.num_sensors());
    npic_samples.apply_into(w, &mut out)?;
    Ok(out)
}

/// Gradient `2 R_{i+n} w + alpha a_hat` of the Lagrangian
/// `w^H R_{i+n} w + alpha Re(w^H a_hat - 1)`, taken as
/// `dJ/dRe(w) + j dJ/dIm(w)`.
pub fn gradient(
    npic_samples: &SpectrumSamples,
    w: &[C64],
    alpha: f64,
    a_hat: &[C64],
) -> Result<ComplexVector> {
    if a_hat.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: a_hat.len(),
        });
    }
    let mut g = npic_matvec(npic_samples, w)?;
    for (gi, ai) in g.iter_mut().zip(a_hat) {
        *gi = *gi * 2.0 + ai * alpha;
    }
    Ok(g)
}

/// Weights computed by [`solve_beamformer`].
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerResult {
    /// Weights normalized so that `w^H a_hat = 1`.
    pub weights: ComplexVector,
    pub estimated_sv: ComplexVector,
    pub iterations_used: usize,
    /// Relative residual `‖R w - a_hat‖ / ‖a_hat‖` of the returned iterate,
    /// before normalization.
    pub final_gradient_norm: f64,
    pub converged: bool,
}

/// Iteration used for the weight solve.
pub type WeightFlavor = SolverFlavor;

pub const DEFAULT_BEAMFORMER_TOL: f64 = 1e-3;
pub const DEFAULT_BEAMFORMER_MAX_ITER: usize = 7;

/// Conjugate-gradient solve of `R_{i+n} w = a_hat` using only
/// [`SpectrumSamples::apply_into`], followed by the distortionless
/// normalization.
///
/// At least one iteration is always run. If `tol` is not reached within
/// `max_iter` iterations the iterate with the smallest residual is returned.
pub fn solve_beamformer(
    npic_samples: &SpectrumSamples,
    a_hat: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<BeamformerResult> {
    solve_beamformer_with(
        npic_samples,
        a_hat,
        tol,
        max_iter,
        SolverFlavor::ConjugateGradient,
    )
}

pub fn solve_beamformer_with(
    npic_samples: &SpectrumSamples,
    a_hat: &[C64],
    tol: f64,
    max_iter: usize,
    flavor: WeightFlavor,
) -> Result<BeamformerResult> {
    let m = npic_samples.num_sensors();
    if a_hat.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: a_hat.len(),
        });
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter("tolerance must be non-negative"));
    }
    let a_norm = norm(a_hat);
    if a_norm == 0.0 {
        return Err(Error::DegenerateInput("zero steering estimate"));
    }
    let (w, iterations, residual, converged) = match flavor {
        SolverFlavor::ConjugateGradient => cg_weights(npic_samples, a_hat, a_norm, tol, max_iter)?,
        SolverFlavor::FixedStep => fixed_step_weights(npic_samples, a_hat, a_norm, tol, max_iter)?,
    };
    let gain = dot(a_hat, &w);
    if gain.norm() == 0.0 {
        return Err(Error::DegenerateInput(
            "weights are orthogonal to the steering estimate",
        ));
    }
    let inv = C64::new(1.0, 0.0) / gain;
    let weights = w.iter().map(|x| x * inv).collect();
    Ok(BeamformerResult {
        weights,
        estimated_sv: a_hat.to_vec(),
        iterations_used: iterations,
        final_gradient_norm: residual,
        converged,
    })
}

type WeightSolve = (ComplexVector, usize, f64, bool);

fn cg_weights(
    samples: &SpectrumSamples,
    a_hat: &[C64],
    a_norm: f64,
    tol: f64,
    max_iter: usize,
) -> Result<WeightSolve> {
    let m = a_hat.len();
    let mut w = zeros(m);
    // g = R w - a_hat is the Lagrangian gradient up to a factor of two.
    let mut g: ComplexVector = a_hat.iter().map(|a| -a).collect();
    let mut e: ComplexVector = a_hat.to_vec();
    let mut re = zeros(m);
    let mut gg = norm_sqr(&g);
    // w = 0 cannot be normalized, so at least one step is always taken.
    let mut best_w = w.clone();
    let mut best_res = f64::INFINITY;
    let mut t = 0;
    while t == 0 || (t < max_iter && libm::sqrt(gg) > tol * a_norm) {
        samples.apply_into(&e, &mut re)?;
        let curvature = dot(&e, &re).re;
        if !(curvature > 0.0) {
            return Err(Error::Indefinite { curvature });
        }
        let mu = -dot(&e, &g).re / curvature;
        axpy(C64::new(mu, 0.0), &e, &mut w);
        let mut diff_dot = 0.0;
        let mut gg_next = 0.0;
        for (gi, ri) in g.iter_mut().zip(&re) {
            let next = *gi + ri * mu;
            diff_dot += (next.conj() * (next - *gi)).re;
            gg_next += next.norm_sqr();
            *gi = next;
        }
        let beta = diff_dot / gg;
        for (ei, gi) in e.iter_mut().zip(&g) {
            *ei = -gi + *ei * beta;
        }
        gg = gg_next;
        t += 1;
        let res = libm::sqrt(gg) / a_norm;
        if res < best_res {
            best_res = res;
            best_w.copy_from_slice(&w);
        }
    }
    let res = libm::sqrt(gg) / a_norm;
    if res <= tol {
        Ok((w, t, res, true))
    } else {
        Ok((best_w, t, best_res, false))
    }
}

fn fixed_step_weights(
    samples: &SpectrumSamples,
    a_hat: &[C64],
    a_norm: f64,
    tol: f64,
    max_iter: usize,
) -> Result<WeightSolve> {
    let m = a_hat.len();
    let step = 1.0 / samples.trace();
    let mut w = zeros(m);
    let mut rw = zeros(m);
    let mut t = 0;
    loop {
        samples.apply_into(&w, &mut rw)?;
        // rw <- a_hat - R w
        for (r, a) in rw.iter_mut().zip(a_hat) {
            *r = a - *r;
        }
        let res = norm(&rw) / a_norm;
        if res <= tol {
            return Ok((w, t, res, true));
        }
        if t == max_iter {
            // The first pass starts from w = 0, which cannot be normalized.
            if t == 0 {
                axpy(C64::new(step, 0.0), &rw, &mut w);
            }
            return Ok((w, t, res, false));
        }
        axpy(C64::new(step, 0.0), &rw, &mut w);
        t += 1;
    }
}

/// Settings for the complete matrix-free beamformer.
#[derive(Debug, Clone, PartialEq)]
pub struct MepsNpicCg {
    pub geometry: ArrayGeometry,
    pub signal_sector: AngularSector,
    pub complement_sector: AngularSector,
    /// Relative residual target of the weight solve.
    pub tol: f64,
    /// Iteration cap of the weight solve.
    pub max_iter: usize,
    pub meps_solver: MepsSolver,
    pub weight_flavor: WeightFlavor,
    /// Apply the small safety loading to the sample covariance.
    pub safety_loading: bool,
}

impl MepsNpicCg {
    pub fn new(geometry: ArrayGeometry) -> Self {
        Self {
            geometry,
            signal_sector: AngularSector::default_signal(),
            complement_sector: AngularSector::default_complement(),
            tol: DEFAULT_BEAMFORMER_TOL,
            max_iter: DEFAULT_BEAMFORMER_MAX_ITER,
            meps_solver: MepsSolver::default(),
            weight_flavor: SolverFlavor::ConjugateGradient,
            safety_loading: false,
        }
    }

    /// Runs the full chain on one batch: solve for `v`, sample the spectrum
    /// over both sectors, refine the steering vector and solve for weights.
    ///
    /// An iteration budget exhausted in the `v` solve is reported through
    /// `meps_converged` rather than as an error.
    pub fn beamform(
        &self,
        snapshots: &SnapshotBatch,
        nominal_sv: &[C64],
    ) -> Result<MepsNpicOutput> {
        let cov = if self.safety_loading {
            ImplicitSampleCovariance::with_safety_loading(snapshots)
        } else {
            ImplicitSampleCovariance::new(snapshots)
        };
        let report = self.meps_solver.solve_best_effort(&cov)?;
        let signal = sample_spectrum(&self.signal_sector, &report.solution, &self.geometry)?;
        let a_hat = reconstruct_sv(&signal, nominal_sv)?;
        let npic = sample_spectrum(&self.complement_sector, &report.solution, &self.geometry)?;
        let result =
            solve_beamformer_with(&npic, &a_hat, self.tol, self.max_iter, self.weight_flavor)?;
        Ok(MepsNpicOutput {
            beamformer: result,
            meps_converged: report.converged,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MepsNpicOutput {
    pub beamformer: BeamformerResult,
    pub meps_converged: bool,
}

impl MepsNpicOutput {
    pub fn converged(&self) -> bool {
        self.meps_converged && self.beamformer.converged
    }
}
