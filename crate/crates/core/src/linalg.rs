//! Small vector kernels on complex slices.
//!
//! Everything here is `O(M)` and allocation-free except [`scaled`].

use crate::{ComplexVector, C64};

/// Hermitian inner product `a^H b`.
#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    libm::sqrt(norm_sqr(a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: C64, x: &mut [C64]) {
    for xi in x {
        *xi *= alpha;
    }
}

pub fn scaled(alpha: C64, x: &[C64]) -> ComplexVector {
    x.iter().map(|xi| alpha * xi).collect()
}

pub fn zeros(n: usize) -> ComplexVector {
    alloc::vec![C64::new(0.0, 0.0); n]
}

/// First canonical basis vector `u1 = [1, 0, ..., 0]^T`.
pub fn unit_first(n: usize) -> ComplexVector {
    let mut u = zeros(n);
    if let Some(first) = u.first_mut() {
        *first = C64::new(1.0, 0.0);
    }
    u
}

/// `‖a - b‖ / ‖b‖`, or `‖a‖` when `b` is zero.
pub fn relative_error(a: &[C64], b: &[C64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let denom = norm_sqr(b);
    if denom == 0.0 {
        libm::sqrt(diff)
    } else {
        libm::sqrt(diff / denom)
    }
}
