//! Sample covariance as an implicit operator and the maximum entropy power
//! spectrum built on `v = R^-1 u1`.
//!
//! `R = (1/K) sum x(t) x(t)^H + loading * I` is only ever applied to vectors
//! through the snapshots, at `O(MK)` per product.

use alloc::vec::Vec;

use crate::array::SnapshotBatch;
use crate::linalg::{axpy, dot, norm, norm_sqr, unit_first, zeros};
use crate::{ComplexVector, Error, Result, C64};

/// Relative loading used by [`ImplicitSampleCovariance::with_safety_loading`].
pub const SAFETY_LOADING: f64 = 1e-8;

/// Default relative residual for [`solve_v`].
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;

/// `R v` where `R` is the (optionally loaded) sample covariance of a batch.
#[derive(Debug, Clone, Copy)]
pub struct ImplicitSampleCovariance<'a> {
    snapshots: &'a SnapshotBatch,
    loading: f64,
}

impl<'a> ImplicitSampleCovariance<'a> {
    pub fn new(snapshots: &'a SnapshotBatch) -> Self {
        Self {
            snapshots,
            loading: 0.0,
        }
    }

    pub fn with_loading(snapshots: &'a SnapshotBatch, loading: f64) -> Result<Self> {
        if !(loading >= 0.0 && loading.is_finite()) {
            return Err(Error::InvalidParameter(
                "diagonal loading must be non-negative",
            ));
        }
        Ok(Self { snapshots, loading })
    }

    /// Loads the diagonal with `1e-8 * trace(R) / M`, for batches with
    /// fewer snapshots than sensors.
    pub fn with_safety_loading(snapshots: &'a SnapshotBatch) -> Self {
        let unloaded = Self::new(snapshots);
        let loading = SAFETY_LOADING * unloaded.trace() / snapshots.num_sensors() as f64;
        Self { snapshots, loading }
    }

    pub fn snapshots(&self) -> &SnapshotBatch {
        self.snapshots
    }

    pub fn loading(&self) -> f64 {
        self.loading
    }

    pub fn num_sensors(&self) -> usize {
        self.snapshots.num_sensors()
    }

    /// `trace(R) = (1/K) sum ‖x(t)‖^2 + M * loading`.
    pub fn trace(&self) -> f64 {
        let k = self.snapshots.num_snapshots();
        let data = if k == 0 {
            0.0
        } else {
            norm_sqr(self.snapshots.as_column_major()) / k as f64
        };
        data + self.loading * self.num_sensors() as f64
    }

    /// Writes `R z` into `out` without allocating.
    pub fn matvec_into(&self, z: &[C64], out: &mut [C64]) -> Result<()> {
        let m = self.num_sensors();
        if z.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: z.len(),
            });
        }
        if out.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: out.len(),
            });
        }
        for (o, zi) in out.iter_mut().zip(z) {
            *o = zi * self.loading;
        }
        let k = self.snapshots.num_snapshots();
        if k == 0 {
            return Ok(());
        }
        let inv_k = 1.0 / k as f64;
        for x in self.snapshots.columns() {
            axpy(dot(x, z) * inv_k, x, out);
        }
        Ok(())
    }

    /// `R z`.
    pub fn scm_matvec(&self, z: &[C64]) -> Result<ComplexVector> {
        let mut out = zeros(self.num_sensors());
        self.matvec_into(z, &mut out)?;
        Ok(out)
    }
}

/// Step size `K / sum ‖x(t)‖^2`, i.e. one over the trace of the sample
/// covariance. Since every eigenvalue is bounded by the trace, this never
/// exceeds `1 / lambda_max`.
pub fn step_size_xi(snapshots: &SnapshotBatch) -> Result<f64> {
    let energy = norm_sqr(snapshots.as_column_major());
    if snapshots.num_snapshots() == 0 || energy == 0.0 {
        return Err(Error::DegenerateInput("all snapshots are zero"));
    }
    Ok(snapshots.num_snapshots() as f64 / energy)
}

/// Iteration used to solve `R v = u1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolverFlavor {
    /// Conjugate gradient on the Hermitian positive definite system.
    #[default]
    ConjugateGradient,
    /// `v <- v + xi (u1 - R v)` with a fixed step `xi = 1 / trace(R)`.
    FixedStep,
}

/// `v = R^-1 u1` together with `epsilon_p = 1 / (u1^T R^-1 u1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MepsSolution {
    v: ComplexVector,
    epsilon_p: f64,
    iterations_used: usize,
    residual_norm: f64,
}

impl MepsSolution {
    /// Wraps an (approximate) solution `v`, deriving `epsilon_p` from `v[0]`.
    pub fn from_v(v: ComplexVector, iterations_used: usize, residual_norm: f64) -> Result<Self> {
        let v0 = *v
            .first()
            .ok_or(Error::InvalidParameter("empty solution vector"))?;
        if !(v0.re > 0.0) || v0.im.abs() >= 1e-6 * v0.norm() {
            return Err(Error::NonRealPivot {
                re: v0.re,
                im: v0.im,
            });
        }
        Ok(Self {
            epsilon_p: 1.0 / v0.re,
            v,
            iterations_used,
            residual_norm,
        })
    }

    pub fn v(&self) -> &[C64] {
        &self.v
    }

    pub fn epsilon_p(&self) -> f64 {
        self.epsilon_p
    }

    pub fn iterations_used(&self) -> usize {
        self.iterations_used
    }

    /// Relative residual `‖u1 - R v‖ / ‖u1‖`.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn num_sensors(&self) -> usize {
        self.v.len()
    }
}

/// Outcome of [`MepsSolver::solve_best_effort`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: MepsSolution,
    pub converged: bool,
    /// Relative residual before each update, when requested.
    pub residual_history: Vec<f64>,
}

/// Configurable solver for `R v = u1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MepsSolver {
    pub tol: f64,
    pub max_iter: usize,
    pub flavor: SolverFlavor,
    pub track_history: bool,
}

impl Default for MepsSolver {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            flavor: SolverFlavor::ConjugateGradient,
            track_history: false,
        }
    }
}

struct RawSolve {
    v: ComplexVector,
    iterations: usize,
    residual: f64,
    converged: bool,
    history: Vec<f64>,
}

impl MepsSolver {
    pub fn new(tol: f64, max_iter: usize, flavor: SolverFlavor) -> Self {
        Self {
            tol,
            max_iter,
            flavor,
            track_history: false,
        }
    }

    /// Solves to tolerance, failing with [`Error::NotConverged`] otherwise.
    pub fn solve(&self, cov: &ImplicitSampleCovariance<'_>) -> Result<MepsSolution> {
        let raw = self.run(cov)?;
        if !raw.converged {
            return Err(Error::NotConverged {
                iterations: raw.iterations,
                residual_norm: raw.residual,
            });
        }
        MepsSolution::from_v(raw.v, raw.iterations, raw.residual)
    }

    /// Like [`solve`](Self::solve) but hands back the last iterate when the
    /// iteration budget runs out. Singular systems still fail.
    pub fn solve_best_effort(&self, cov: &ImplicitSampleCovariance<'_>) -> Result<SolveReport> {
        let raw = self.run(cov)?;
        Ok(SolveReport {
            solution: MepsSolution::from_v(raw.v, raw.iterations, raw.residual)?,
            converged: raw.converged,
            residual_history: raw.history,
        })
    }

    fn run(&self, cov: &ImplicitSampleCovariance<'_>) -> Result<RawSolve> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
        if cov.trace() == 0.0 {
            return Err(Error::DegenerateInput("covariance is identically zero"));
        }
        match self.flavor {
            SolverFlavor::ConjugateGradient => self.run_cg(cov),
            SolverFlavor::FixedStep => self.run_fixed_step(cov),
        }
    }

    fn run_fixed_step(&self, cov: &ImplicitSampleCovariance<'_>) -> Result<RawSolve> {
        let m = cov.num_sensors();
        let xi = 1.0 / cov.trace();
        let u1 = unit_first(m);
        let mut v = zeros(m);
        let mut rv = zeros(m);
        let mut history = Vec::new();
        let mut residual = 1.0;
        for it in 0..=self.max_iter {
            cov.matvec_into(&v, &mut rv)?;
            // rv <- u1 - R v
            for (r, u) in rv.iter_mut().zip(&u1) {
                *r = u - *r;
            }
            residual = norm(&rv);
            if self.track_history {
                history.push(residual);
            }
            if residual <= self.tol {
                return Ok(RawSolve {
                    v,
                    iterations: it,
                    residual,
                    converged: true,
                    history,
                });
            }
            if it == self.max_iter {
                break;
            }
            axpy(C64::new(xi, 0.0), &rv, &mut v);
        }
        Ok(RawSolve {
            v,
            iterations: self.max_iter,
            residual,
            converged: false,
            history,
        })
    }

    fn run_cg(&self, cov: &ImplicitSampleCovariance<'_>) -> Result<RawSolve> {
        let m = cov.num_sensors();
        let trace = cov.trace();
        let window = (2 * m).max(10);
        let mut v = zeros(m);
        let mut r = unit_first(m);
        let mut p = r.clone();
        let mut ap = zeros(m);
        let mut rr = norm_sqr(&r);
        let mut history = Vec::new();
        let mut best = libm::sqrt(rr);
        let mut since_best = 0;
        let mut iterations = 0;
        while iterations < self.max_iter {
            let residual = libm::sqrt(rr);
            if self.track_history {
                history.push(residual);
            }
            cov.matvec_into(&p, &mut ap)?;
            iterations += 1;
            let curvature = dot(&p, &ap).re;
            if !(curvature > 1e-14 * trace * norm_sqr(&p)) {
                return Err(Error::Singular {
                    residual_norm: residual,
                });
            }
            let alpha = rr / curvature;
            axpy(C64::new(alpha, 0.0), &p, &mut v);
            axpy(C64::new(-alpha, 0.0), &ap, &mut r);
            let rr_next = norm_sqr(&r);
            let res_next = libm::sqrt(rr_next);
            if res_next <= self.tol {
                // Guard against drift of the recursive residual.
                cov.matvec_into(&v, &mut ap)?;
                for (i, (ri, a)) in r.iter_mut().zip(&ap).enumerate() {
                    *ri = if i == 0 {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    } - a;
                }
                let true_res = norm(&r);
                if true_res <= self.tol {
                    return Ok(RawSolve {
                        v,
                        iterations,
                        residual: true_res,
                        converged: true,
                        history,
                    });
                }
                // Restart from the true residual.
                p.copy_from_slice(&r);
                rr = true_res * true_res;
                continue;
            }
            if res_next < best {
                best = res_next;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= window {
                    return Err(Error::Singular {
                        residual_norm: res_next,
                    });
                }
            }
            let beta = rr_next / rr;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + *pi * beta;
            }
            rr = rr_next;
        }
        Ok(RawSolve {
            v,
            iterations,
            residual: libm::sqrt(rr),
            converged: false,
            history,
        })
    }
}

/// Solves `R v = u1` with conjugate gradient to relative residual `tol`.
pub fn solve_v(
    cov: &ImplicitSampleCovariance<'_>,
    tol: f64,
    max_iter: usize,
) -> Result<MepsSolution> {
    MepsSolver::new(tol, max_iter, SolverFlavor::ConjugateGradient).solve(cov)
}

/// Maximum entropy power `1 / (epsilon_p |a^H v|^2)` toward steering `a`.
pub fn meps_power(sol: &MepsSolution, a_theta: &[C64]) -> Result<f64> {
    if a_theta.len() != sol.v.len() {
        return Err(Error::DimensionMismatch {
            expected: sol.v.len(),
            found: a_theta.len(),
        });
    }
    let response = dot(a_theta, &sol.v).norm_sqr();
    let floor = 1e-28 * norm_sqr(a_theta) * norm_sqr(&sol.v);
    if !(response > floor) || !response.is_finite() {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(1.0 / (sol.epsilon_p * response))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{
        generate_snapshots, steering_vector, ArrayGeometry, MismatchModel, SourceSpec,
    };
    use crate::dense::{power_iteration, solve_dense, DenseHermitian};
    use crate::linalg::relative_error;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn noise_batch(seed: u64, m: usize, k: usize) -> SnapshotBatch {
        let g = ArrayGeometry::new(m, 1.0).unwrap();
        let d = SourceSpec::new(5.0, -300.0).unwrap();
        generate_snapshots(
            &g,
            &d,
            &[],
            &MismatchModel::None,
            k,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap()
        .snapshots
    }

    fn scene_batch(seed: u64, k: usize) -> SnapshotBatch {
        let g = ArrayGeometry::default();
        let d = SourceSpec::new(5.0, 20.0).unwrap();
        let i = [
            SourceSpec::new(20.0, 30.0).unwrap(),
            SourceSpec::new(50.0, 30.0).unwrap(),
        ];
        generate_snapshots(
            &g,
            &d,
            &i,
            &MismatchModel::None,
            k,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap()
        .snapshots
    }

    #[test]
    fn matvec_rank_one_batch() {
        let u1 = unit_first(4);
        let batch = SnapshotBatch::from_columns(&[u1.clone(), u1.clone(), u1.clone()]).unwrap();
        let cov = ImplicitSampleCovariance::new(&batch);
        assert_eq!(cov.scm_matvec(&u1).unwrap(), u1);
        assert_eq!(cov.scm_matvec(&zeros(4)).unwrap(), zeros(4));
    }

    #[test]
    fn matvec_matches_dense_scm() {
        let batch = noise_batch(1, 10, 40);
        let cov = ImplicitSampleCovariance::new(&batch);
        let dense = DenseHermitian::sample_covariance(&batch);
        let z: ComplexVector = (0..10).map(|i| c(i as f64 - 3.0, 0.5 * i as f64)).collect();
        let got = cov.scm_matvec(&z).unwrap();
        let want = dense.matvec(&z).unwrap();
        assert!(relative_error(&got, &want) < 1e-12);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let batch = noise_batch(1, 4, 4);
        let cov = ImplicitSampleCovariance::new(&batch);
        assert!(matches!(
            cov.scm_matvec(&zeros(3)),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn xi_formula() {
        let batch = SnapshotBatch::from_columns(&[alloc::vec![c(2.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(step_size_xi(&batch).unwrap(), 0.25);
        let unit = SnapshotBatch::from_columns(&[
            alloc::vec![c(0.0, 1.0), c(0.0, 0.0)],
            alloc::vec![c(0.6, 0.0), c(0.0, 0.8)],
        ])
        .unwrap();
        assert!((step_size_xi(&unit).unwrap() - 1.0).abs() < 1e-15);
        let zero = SnapshotBatch::from_columns(&[zeros(3)]).unwrap();
        assert!(matches!(
            step_size_xi(&zero),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn xi_is_below_inverse_lambda_max() {
        for seed in 0..20 {
            let batch = scene_batch(seed, 30);
            let xi = step_size_xi(&batch).unwrap();
            let (lmax, _) = power_iteration(&DenseHermitian::sample_covariance(&batch), 10_000);
            assert!(xi * lmax <= 1.0, "seed {seed}: {}", xi * lmax);
        }
    }

    #[test]
    fn identity_system_takes_one_iteration() {
        let empty = SnapshotBatch::empty(6);
        let cov = ImplicitSampleCovariance::with_loading(&empty, 1.0).unwrap();
        let sol = solve_v(&cov, 1e-12, 10).unwrap();
        assert_eq!(sol.v(), unit_first(6).as_slice());
        assert_eq!(sol.iterations_used(), 1);
        assert_eq!(sol.epsilon_p(), 1.0);
    }

    #[test]
    fn solve_matches_dense_inverse() {
        for seed in 0..10 {
            let batch = scene_batch(seed, 30);
            let sol = solve_v(
                &ImplicitSampleCovariance::new(&batch),
                DEFAULT_TOL,
                DEFAULT_MAX_ITER,
            )
            .unwrap();
            let dense =
                solve_dense(&DenseHermitian::sample_covariance(&batch), &unit_first(10)).unwrap();
            assert!(relative_error(sol.v(), &dense) < 1e-6);
            assert!(sol.residual_norm() <= DEFAULT_TOL);
            assert!((sol.epsilon_p() * sol.v()[0].re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_deficient_batch_is_not_silently_solved() {
        let batch = noise_batch(3, 10, 5);
        let cov = ImplicitSampleCovariance::new(&batch);
        match solve_v(&cov, DEFAULT_TOL, DEFAULT_MAX_ITER) {
            Err(Error::Singular { .. }) | Err(Error::NotConverged { .. }) => {}
            other => panic!("expected a failure, got {other:?}"),
        }
        // The safety loading makes it solvable.
        let loaded = ImplicitSampleCovariance::with_safety_loading(&batch);
        assert!(loaded.loading() > 0.0);
        let sol =
            MepsSolver::new(DEFAULT_TOL, 10_000, SolverFlavor::ConjugateGradient).solve(&loaded);
        assert!(sol.is_ok(), "{sol:?}");
    }

    #[test]
    fn fixed_step_reaches_dense_solution_on_benign_batch() {
        let batch = noise_batch(4, 6, 200);
        let cov = ImplicitSampleCovariance::new(&batch);
        let solver = MepsSolver::new(1e-10, 20_000, SolverFlavor::FixedStep);
        let sol = solver.solve(&cov).unwrap();
        let cg = solve_v(&cov, 1e-10, 100).unwrap();
        assert!(relative_error(sol.v(), cg.v()) < 1e-8);
    }

    #[test]
    fn fixed_step_residual_is_monotone() {
        let batch = scene_batch(5, 30);
        let cov = ImplicitSampleCovariance::new(&batch);
        let solver = MepsSolver {
            tol: 1e-300,
            max_iter: 200,
            flavor: SolverFlavor::FixedStep,
            track_history: true,
        };
        let report = solver.solve_best_effort(&cov).unwrap();
        assert!(!report.converged);
        assert_eq!(report.residual_history.len(), 201);
        for w in report.residual_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn invalid_tolerance() {
        let batch = noise_batch(4, 4, 8);
        let cov = ImplicitSampleCovariance::new(&batch);
        assert!(matches!(
            solve_v(&cov, 0.0, 10),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn flat_spectrum_for_scaled_identity() {
        let g = ArrayGeometry::default();
        let empty = SnapshotBatch::empty(10);
        for (load, expect) in [(1.0, 1.0), (4.0, 4.0)] {
            let cov = ImplicitSampleCovariance::with_loading(&empty, load).unwrap();
            let sol = solve_v(&cov, 1e-12, 10).unwrap();
            for theta in [-90.0, -33.0, 0.0, 12.5, 90.0] {
                let p = meps_power(&sol, &steering_vector(&g, theta).unwrap()).unwrap();
                assert!((p - expect).abs() < 1e-12, "{p}");
            }
        }
    }

    #[test]
    fn degenerate_spectrum_is_an_error() {
        let sol = MepsSolution::from_v(alloc::vec![c(1.0, 0.0), c(1.0, 0.0)], 1, 0.0).unwrap();
        let a = [c(1.0, 0.0), c(-1.0, 0.0)];
        assert_eq!(meps_power(&sol, &a), Err(Error::DegenerateSpectrum));
    }

    #[test]
    fn complex_pivot_rejected() {
        assert!(matches!(
            MepsSolution::from_v(alloc::vec![c(1.0, 0.1)], 1, 0.0),
            Err(Error::NonRealPivot { .. })
        ));
        assert!(MepsSolution::from_v(alloc::vec![c(-1.0, 0.0)], 1, 0.0).is_err());
    }

    /// Capon spectrum `1 / (a^H R^-1 a)` from a dense inverse.
    fn capon(r: &DenseHermitian, a: &[C64]) -> f64 {
        let x = solve_dense(r, a).unwrap();
        1.0 / dot(a, &x).re
    }

    #[test]
    fn spectrum_peaks_at_strong_source() {
        let g = ArrayGeometry::default();
        let d = SourceSpec::new(20.0, 30.0).unwrap();
        let scene = generate_snapshots(
            &g,
            &d,
            &[],
            &MismatchModel::None,
            1000,
            &mut ChaCha8Rng::seed_from_u64(8),
        )
        .unwrap();
        let sol = solve_v(
            &ImplicitSampleCovariance::new(&scene.snapshots),
            DEFAULT_TOL,
            DEFAULT_MAX_ITER,
        )
        .unwrap();
        let dense = DenseHermitian::sample_covariance(&scene.snapshots);
        let grid: Vec<f64> = (-90..=90).map(f64::from).collect();
        let argmax = |f: &dyn Fn(f64) -> f64| {
            grid.iter()
                .copied()
                .max_by(|a, b| f(*a).total_cmp(&f(*b)))
                .unwrap()
        };
        let meps_peak = argmax(&|t| meps_power(&sol, &steering_vector(&g, t).unwrap()).unwrap());
        let capon_peak = argmax(&|t| capon(&dense, &steering_vector(&g, t).unwrap()));
        assert!((meps_peak - 20.0).abs() <= 1.0, "{meps_peak}");
        assert!((capon_peak - 20.0).abs() <= 1.0, "{capon_peak}");
    }

    proptest! {
        #[test]
        fn matvec_is_linear_and_psd(seed in any::<u64>(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
            let batch = noise_batch(seed, 6, 9);
            let cov = ImplicitSampleCovariance::with_loading(&batch, 0.5).unwrap();
            let z1: ComplexVector = (0..6).map(|i| c(i as f64, 1.0 - i as f64)).collect();
            let z2: ComplexVector = (0..6).map(|i| c((i * i) as f64 * 0.1, 2.0)).collect();
            let alpha = c(re, im);
            let combo: ComplexVector = z1.iter().zip(&z2).map(|(a, b)| alpha * a + b).collect();
            let lhs = cov.scm_matvec(&combo).unwrap();
            let r1 = cov.scm_matvec(&z1).unwrap();
            let r2 = cov.scm_matvec(&z2).unwrap();
            let rhs: ComplexVector = r1.iter().zip(&r2).map(|(a, b)| alpha * a + b).collect();
            prop_assert!(relative_error(&lhs, &rhs) < 1e-12);
            let q = dot(&combo, &lhs);
            prop_assert!(q.im.abs() <= 1e-10 * q.re.abs().max(1.0));
            prop_assert!(q.re >= 0.5 * norm_sqr(&combo) * (1.0 - 1e-12));
        }

        #[test]
        fn power_is_phase_invariant(seed in 0u64..200, theta in -90.0..90.0f64, phi in 0.0..core::f64::consts::TAU) {
            let batch = scene_batch(seed, 30);
            let sol = solve_v(&ImplicitSampleCovariance::new(&batch), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            let a = steering_vector(&ArrayGeometry::default(), theta).unwrap();
            let rot = c(libm::cos(phi), libm::sin(phi));
            let ar: ComplexVector = a.iter().map(|x| x * rot).collect();
            let p1 = meps_power(&sol, &a).unwrap();
            let p2 = meps_power(&sol, &ar).unwrap();
            prop_assert!((p1 - p2).abs() <= 1e-12 * p1);
        }
    }
}
