//! Dense Hermitian matrices for the small-`M` reference path.
//!
//! Nothing on the matrix-free solve path touches this module. It exists to
//! materialize the implicit operators for cross-checks, to evaluate the true
//! interference-plus-noise covariance in the metrics, and to back the
//! sample-matrix-inversion baselines.

use alloc::vec::Vec;

use crate::array::SnapshotBatch;
use crate::linalg::{dot, norm, norm_sqr, zeros};
use crate::npic::SpectrumSamples;
use crate::{ComplexVector, Error, Result, C64};

/// Relative pivot floor below which a Cholesky factorization is declared
/// singular.
const PIVOT_FLOOR: f64 = 1e-13;

/// Residual bound every [`solve_dense`] result is checked against.
pub const SOLVE_RESIDUAL_BOUND: f64 = 1e-10;

/// Row-major `M x M` Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    dim: usize,
    data: Vec<C64>,
}

impl DenseHermitian {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: zeros(dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = Self::zeros(dim);
        a.add_diagonal(1.0);
        a
    }

    /// Wraps row-major entries, checking the Hermitian symmetry to a relative
    /// tolerance of `1e-12`.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let a = Self { dim, data };
        let scale = a.data.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for r in 0..dim {
            for c in r..dim {
                if (a.get(r, c) - a.get(c, r).conj()).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE)
                {
                    return Err(Error::InvalidParameter("matrix is not Hermitian"));
                }
            }
        }
        Ok(a)
    }

    /// Dense sample covariance `(1/K) sum x(t) x(t)^H`.
    pub fn sample_covariance(batch: &SnapshotBatch) -> Self {
        let mut a = Self::zeros(batch.num_sensors());
        let k = batch.num_snapshots();
        if k == 0 {
            return a;
        }
        let w = 1.0 / k as f64;
        for x in batch.columns() {
            a.add_outer(w, x);
        }
        a
    }

    /// Materializes `sum P_i a_i a_i^H dtheta` from spectrum samples.
    pub fn from_spectrum(samples: &SpectrumSamples) -> Self {
        let mut a = Self::zeros(samples.num_sensors());
        for (p, sv) in samples.powers().iter().zip(samples.steering()) {
            a.add_outer(p * samples.delta_theta(), sv);
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn as_row_major(&self) -> &[C64] {
        &self.data
    }

    /// `A += weight * v v^H`
    pub fn add_outer(&mut self, weight: f64, v: &[C64]) {
        debug_assert_eq!(v.len(), self.dim);
        for r in 0..self.dim {
            let vr = v[r] * weight;
            let row = &mut self.data[r * self.dim..(r + 1) * self.dim];
            for (entry, vc) in row.iter_mut().zip(v) {
                *entry += vr * vc.conj();
            }
        }
    }

    pub fn add_diagonal(&mut self, value: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += value;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn matvec(&self, x: &[C64]) -> Result<ComplexVector> {
        self.check_len(x.len())?;
        Ok(self
            .data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Real part of `x^H A x`.
    pub fn quadratic_form(&self, x: &[C64]) -> Result<f64> {
        let ax = self.matvec(x)?;
        Ok(dot(x, &ax).re)
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.dim;
        let max_diag = (0..n).map(|i| self.get(i, i).re).fold(0.0, f64::max);
        let floor = PIVOT_FLOOR * max_diag;
        let mut l = zeros(n * n);
        for j in 0..n {
            let mut d = self.get(j, j).re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > floor) {
                return Err(Error::NotPositiveDefinite { index: j });
            }
            let ljj = libm::sqrt(d);
            l[j * n + j] = C64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { dim: n, lower: l })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            })
        }
    }
}

/// Lower-triangular factor `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<C64>,
}

impl Cholesky {
    /// Solves `L y = b`.
    pub fn forward(&self, b: &[C64]) -> ComplexVector {
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s = y[i] - row.iter().zip(&y[..i]).map(|(l, yk)| l * yk).sum::<C64>();
            y[i] = s / self.lower[i * n + i].re;
        }
        y
    }

    /// Solves `L^H x = y`.
    pub fn backward(&self, y: &[C64]) -> ComplexVector {
        let n = self.dim;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let s = x[i]
                - x[i + 1..]
                    .iter()
                    .enumerate()
                    .map(|(j, xk)| self.lower[(i + 1 + j) * n + i].conj() * xk)
                    .sum::<C64>();
            x[i] = s / self.lower[i * n + i].re;
        }
        x
    }

    pub fn solve(&self, b: &[C64]) -> ComplexVector {
        self.backward(&self.forward(b))
    }
}

/// Solves `A x = b` for Hermitian positive definite `A` by Cholesky with one
/// step of iterative refinement. Fails unless `‖b - A x‖ <= 1e-10 ‖b‖`.
pub fn solve_dense(a: &DenseHermitian, b: &[C64]) -> Result<ComplexVector> {
    a.check_len(b.len())?;
    let chol = a.cholesky()?;
    let mut x = chol.solve(b);
    let ax = a.matvec(&x)?;
    let r: ComplexVector = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let dx = chol.solve(&r);
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi += di;
    }
    let ax = a.matvec(&x)?;
    let res = libm::sqrt(b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).norm_sqr()).sum());
    let bn = norm(b);
    if res > SOLVE_RESIDUAL_BOUND * bn {
        return Err(Error::Singular {
            residual_norm: if bn > 0.0 { res / bn } else { res },
        });
    }
    Ok(x)
}

/// MVDR weights `R^-1 a / (a^H R^-1 a)`.
pub fn mvdr_weights(npic: &DenseHermitian, sv: &[C64]) -> Result<ComplexVector> {
    if norm_sqr(sv) == 0.0 {
        return Err(Error::DegenerateInput("zero steering vector"));
    }
    let mut x = solve_dense(npic, sv)?;
    let gain = dot(sv, &x);
    let inv = C64::new(1.0, 0.0) / gain;
    for xi in x.iter_mut() {
        *xi *= inv;
    }
    Ok(x)
}

/// Sample-matrix-inversion MVDR on the dense SCM plus `loading * I`.
pub fn smi_weights(batch: &SnapshotBatch, sv: &[C64], loading: f64) -> Result<ComplexVector> {
    if !(loading >= 0.0) {
        return Err(Error::InvalidParameter(
            "diagonal loading must be non-negative",
        ));
    }
    let mut r = DenseHermitian::sample_covariance(batch);
    r.add_diagonal(loading);
    mvdr_weights(&r, sv)
}

/// Largest eigenvalue and its eigenvector by power iteration.
///
/// Intended for positive semidefinite matrices; returns the Rayleigh
/// quotient once it stops changing at `1e-15` relative precision.
pub fn power_iteration(a: &DenseHermitian, max_iter: usize) -> (f64, ComplexVector) {
    let n = a.dim;
    let mut x: ComplexVector = (0..n)
        .map(|i| C64::new(1.0, 0.1 * i as f64 + 0.05))
        .collect();
    let scale = 1.0 / norm(&x);
    x.iter_mut().for_each(|v| *v *= scale);
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let mut y = a.matvec(&x).expect("square by construction");
        let next = dot(&x, &y).re;
        let ny = norm(&y);
        if ny == 0.0 {
            return (0.0, x);
        }
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
        if (next - lambda).abs() <= 1e-15 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    let ax = a.matvec(&x).expect("square by construction");
    (dot(&x, &ax).re.max(lambda), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{relative_error, unit_first};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_pd(seed: u64, n: usize) -> DenseHermitian {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseHermitian::zeros(n);
        for _ in 0..2 * n {
            let v: ComplexVector = (0..n)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            a.add_outer(1.0, &v);
        }
        a.add_diagonal(0.01);
        a
    }

    #[test]
    fn identity_solve() {
        let b = [c(1.0, 2.0), c(-3.0, 0.5)];
        let x = solve_dense(&DenseHermitian::identity(2), &b).unwrap();
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn diagonal_solve() {
        let a = DenseHermitian::from_row_major(
            2,
            alloc::vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let x = solve_dense(&a, &unit_first(2)).unwrap();
        assert_eq!(x, alloc::vec![c(0.5, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let data = alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)];
        assert!(DenseHermitian::from_row_major(2, data).is_err());
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = DenseHermitian::zeros(3);
        a.add_outer(1.0, &[c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]);
        assert!(matches!(
            a.cholesky(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn mvdr_under_white_noise_is_matched_filter() {
        let g = crate::array::ArrayGeometry::default();
        let a0 = crate::array::steering_vector(&g, 5.0).unwrap();
        let w = mvdr_weights(&DenseHermitian::identity(10), &a0).unwrap();
        let expect: ComplexVector = a0.iter().map(|x| x / 10.0).collect();
        assert!(relative_error(&w, &expect) < 1e-14);
        let gain = dot(&w, &a0);
        assert!((gain - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mvdr_scales_inversely_with_sv() {
        let r = random_pd(11, 6);
        let sv: ComplexVector = (0..6).map(|i| c(1.0, i as f64 * 0.3)).collect();
        let w1 = mvdr_weights(&r, &sv).unwrap();
        let sv3: ComplexVector = sv.iter().map(|x| x * 3.0).collect();
        let w3 = mvdr_weights(&r, &sv3).unwrap();
        let w1_over3: ComplexVector = w1.iter().map(|x| x / 3.0).collect();
        assert!(relative_error(&w3, &w1_over3) < 1e-12);
    }

    #[test]
    fn smi_singular_when_k_below_m() {
        let cols: Vec<ComplexVector> = (0..3)
            .map(|t| (0..6).map(|i| c((i * t) as f64, 1.0)).collect())
            .collect();
        let batch = SnapshotBatch::from_columns(&cols).unwrap();
        let sv = unit_first(6);
        assert!(smi_weights(&batch, &sv, 0.0).is_err());
        assert!(smi_weights(&batch, &sv, 1.0).is_ok());
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let mut a = DenseHermitian::zeros(3);
        a.add_outer(5.0, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        a.add_outer(2.0, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        a.add_diagonal(1.0);
        let (l, _) = power_iteration(&a, 1000);
        assert!((l - 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn solve_meets_residual_contract(seed in any::<u64>(), n in 2usize..12) {
            let a = random_pd(seed, n);
            let b: ComplexVector = (0..n).map(|i| c(i as f64 + 1.0, -(i as f64))).collect();
            let x = solve_dense(&a, &b).unwrap();
            let ax = a.matvec(&x).unwrap();
            prop_assert!(relative_error(&ax, &b) <= SOLVE_RESIDUAL_BOUND);
        }
    }
}
