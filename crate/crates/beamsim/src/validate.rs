//! Oracle-equivalence checks: the matrix-free path against dense
//! references. Backs `beamsim validate` and the acceptance suite.

use std::time::{Duration, Instant};

use beamform_core::array::{
    generate_snapshots, steering_vector, ArrayGeometry, MismatchModel, SnapshotBatch, SourceSpec,
};
use beamform_core::covariance::{
    meps_power, solve_v, step_size_xi, ImplicitSampleCovariance, MepsSolver, SolverFlavor,
};
use beamform_core::dense::{mvdr_weights, power_iteration, solve_dense, DenseHermitian};
use beamform_core::linalg::{dot, relative_error, unit_first};
use beamform_core::metrics::{output_sinr, DesiredTruth, TruthModel};
use beamform_core::npic::{gradient, solve_beamformer, SpectrumSamples};
use beamform_core::{ComplexVector, C64};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::HarnessError;

/// Result of one oracle check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub threshold: f64,
    pub elapsed: Duration,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {}: worst {:.3e} (limit {:.1e}) in {:.2?}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.threshold,
            self.elapsed,
            if self.detail.is_empty() {
                String::new()
            } else {
                format!("; {}", self.detail)
            }
        )
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    use rand_chacha::rand_core::RngCore;
    lo + (hi - lo) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// A two-interferer batch with randomized DoAs and powers.
pub fn random_batch(
    seed: u64,
    geom: &ArrayGeometry,
    snapshots: usize,
) -> Result<SnapshotBatch, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let desired = SourceSpec::new(uniform(&mut rng, -1.0, 11.0), uniform(&mut rng, 0.0, 30.0))?;
    let interferers = [
        SourceSpec::new(
            uniform(&mut rng, -89.0, -2.0),
            uniform(&mut rng, 10.0, 40.0),
        )?,
        SourceSpec::new(uniform(&mut rng, 12.0, 89.0), uniform(&mut rng, 10.0, 40.0))?,
    ];
    Ok(generate_snapshots(
        geom,
        &desired,
        &interferers,
        &MismatchModel::None,
        snapshots,
        &mut rng,
    )?
    .snapshots)
}

/// Random positive spectrum on `q` random angles.
pub fn random_spectrum(
    seed: u64,
    geom: &ArrayGeometry,
    q: usize,
) -> Result<SpectrumSamples, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<f64> = (0..q).map(|_| uniform(&mut rng, -90.0, 90.0)).collect();
    let powers: Vec<f64> = (0..q)
        .map(|_| 10f64.powf(uniform(&mut rng, -1.0, 4.0)))
        .collect();
    let steering = angles
        .iter()
        .map(|&t| steering_vector(geom, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpectrumSamples::new(
        angles,
        powers,
        steering,
        (180.0 / q as f64).to_radians(),
    )?)
}

/// Spectrum from the iterative `v` against `Re(v0)/|a^H v|^2` with `v` from
/// a dense Cholesky solve, at every integer degree.
pub fn check_spectrum(count: usize, seed: u64) -> Result<Check, HarnessError> {
    let start = Instant::now();
    let geom = ArrayGeometry::default();
    let grid: Vec<ComplexVector> = (-90..=90)
        .map(|d| steering_vector(&geom, f64::from(d)))
        .collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let batch = random_batch(seed.wrapping_add(i as u64), &geom, 30)?;
        let sol = solve_v(&ImplicitSampleCovariance::new(&batch), 1e-10, 500)?;
        let v_dense = solve_dense(&DenseHermitian::sample_covariance(&batch), &unit_first(10))?;
        for a in &grid {
            let p = meps_power(&sol, a)?;
            let p_dense = v_dense[0].re / dot(a, &v_dense).norm_sqr();
            worst = worst.max((p - p_dense).abs() / p_dense);
        }
    }
    Ok(Check {
        name: "spectrum matches dense inverse",
        passed: worst < 1e-6,
        worst,
        threshold: 1e-6,
        elapsed: start.elapsed(),
        detail: format!("{count} batches x 181 angles"),
    })
}

/// CG weights against dense MVDR on the materialized reconstruction.
/// `worst` is the relative weight error; SINR gaps go into `detail`.
pub fn check_beamformer(count: usize, seed: u64) -> Result<(Check, f64), HarnessError> {
    let start = Instant::now();
    let geom = ArrayGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_w: f64 = 0.0;
    let mut worst_sinr: f64 = 0.0;
    for i in 0..count {
        let samples = random_spectrum(seed.wrapping_add(1000 + i as u64), &geom, 90)?;
        let a_hat = steering_vector(&geom, uniform(&mut rng, -1.0, 11.0))?;
        let cg = solve_beamformer(&samples, &a_hat, 1e-6, 20)?;
        let dense_r = DenseHermitian::from_spectrum(&samples);
        let w_dense = mvdr_weights(&dense_r, &a_hat)?;
        worst_w = worst_w.max(relative_error(&cg.weights, &w_dense));
        let truth = TruthModel::new(
            DesiredTruth::Deterministic {
                steering: a_hat.clone(),
                power: 1.0,
            },
            dense_r,
        )?;
        let gap = (output_sinr(&cg.weights, &truth)? - output_sinr(&w_dense, &truth)?).abs();
        worst_sinr = worst_sinr.max(gap);
    }
    let check = Check {
        name: "CG weights match dense MVDR",
        passed: worst_w < 1e-4 && worst_sinr < 0.01,
        worst: worst_w,
        threshold: 1e-4,
        elapsed: start.elapsed(),
        detail: format!("worst SINR gap {worst_sinr:.3e} dB (limit 1e-2)"),
    };
    Ok((check, worst_sinr))
}

/// Analytic Lagrangian gradient against central differences over the real
/// and imaginary parts of every weight.
pub fn check_gradient(points: usize, seed: u64) -> Result<Check, HarnessError> {
    let start = Instant::now();
    let geom = ArrayGeometry::default();
    let m = geom.num_sensors;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let samples = random_spectrum(seed.wrapping_add(2000 + i as u64), &geom, 90)?;
        let dense = DenseHermitian::from_spectrum(&samples);
        let a_hat = steering_vector(&geom, uniform(&mut rng, -1.0, 11.0))?;
        let alpha = uniform(&mut rng, -5.0, 5.0);
        let w: ComplexVector = (0..m)
            .map(|_| C64::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)))
            .collect();
        let cost = |x: &[C64]| -> Result<f64, HarnessError> {
            Ok(dense.quadratic_form(x)? + alpha * (dot(x, &a_hat).re - 1.0))
        };
        let mut fd = vec![C64::new(0.0, 0.0); m];
        for k in 0..m {
            for step in [C64::new(h, 0.0), C64::new(0.0, h)] {
                let mut plus = w.clone();
                let mut minus = w.clone();
                plus[k] += step;
                minus[k] -= step;
                let d = (cost(&plus)? - cost(&minus)?) / (2.0 * h);
                if step.re != 0.0 {
                    fd[k].re = d;
                } else {
                    fd[k].im = d;
                }
            }
        }
        let g = gradient(&samples, &w, alpha, &a_hat)?;
        worst = worst.max(relative_error(&g, &fd));
    }
    Ok(Check {
        name: "gradient matches finite differences",
        passed: worst < 1e-5,
        worst,
        threshold: 1e-5,
        elapsed: start.elapsed(),
        detail: format!("{points} points, 2M = {} real coordinates", 2 * m),
    })
}

/// `xi * lambda_max <= 1` and a non-increasing residual for the fixed-step
/// recursion over `iterations` steps.
pub fn check_step_size(count: usize, iterations: usize, seed: u64) -> Result<Check, HarnessError> {
    let start = Instant::now();
    let geom = ArrayGeometry::default();
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    for i in 0..count {
        let batch = random_batch(seed.wrapping_add(3000 + i as u64), &geom, 30)?;
        let xi = step_size_xi(&batch)?;
        let (lambda_max, _) = power_iteration(&DenseHermitian::sample_covariance(&batch), 100_000);
        worst_ratio = worst_ratio.max(xi * lambda_max);
        let solver = MepsSolver {
            tol: f64::MIN_POSITIVE,
            max_iter: iterations,
            flavor: SolverFlavor::FixedStep,
            track_history: true,
        };
        let report = solver.solve_best_effort(&ImplicitSampleCovariance::new(&batch))?;
        violations += report
            .residual_history
            .windows(2)
            .filter(|w| w[1] > w[0])
            .count();
    }
    Ok(Check {
        name: "step size bound and monotone fixed-step residual",
        passed: worst_ratio <= 1.0 && violations == 0,
        worst: worst_ratio,
        threshold: 1.0,
        elapsed: start.elapsed(),
        detail: format!("{violations} residual increases over {iterations} iterations"),
    })
}

/// The full suite at the sizes used by `beamsim validate`.
pub fn run_all(seed: u64) -> Result<Vec<Check>, HarnessError> {
    Ok(vec![
        check_spectrum(100, seed)?,
        check_beamformer(100, seed)?.0,
        check_gradient(20, seed)?,
        check_step_size(100, 200, seed)?,
    ])
}
