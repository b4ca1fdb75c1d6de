//! Small vector helpers shared across modules.

use num_complex::Complex64;

use crate::sparse::LinearOperator;

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugated inner product `x^H y`.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `y += alpha x`
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `||x - y|| / ||y||`, or the absolute difference when `y` vanishes.
pub fn rel_diff(x: &[Complex64], y: &[Complex64]) -> f64 {
    let d = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let n = norm2(y);
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

/// `||f - A u|| / ||f||`.
pub fn rel_residual<A: LinearOperator + ?Sized>(a: &A, u: &[Complex64], f: &[Complex64]) -> f64 {
    let mut au = vec![Complex64::new(0.0, 0.0); u.len()];
    a.apply(u, &mut au);
    rel_diff(&au, f)
}
