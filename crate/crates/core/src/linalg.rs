//! Small dense complex linear algebra shared by the models.

use nalgebra::{DMatrix, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

pub type C64 = Complex64;
pub type Mat2 = SMatrix<C64, 2, 2>;
pub type Mat3 = SMatrix<C64, 3, 3>;
pub type Mat9 = SMatrix<C64, 9, 9>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `exp(-i H t)` for a Hermitian `H`, through its eigendecomposition.
///
/// The result is unitary to rounding for any `t`, which is what makes the
/// piecewise-constant propagators exact up to the sampling of the drive.
pub fn expm_hermitian<const N: usize>(h: &SMatrix<C64, N, N>, t: f64) -> SMatrix<C64, N, N> {
    let (vals, v) = eigh(h);
    let mut vd = v;
    for (j, &lambda) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * t);
        for i in 0..N {
            vd[(i, j)] *= phase;
        }
    }
    vd * v.adjoint()
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
pub fn eigh<const N: usize>(h: &SMatrix<C64, N, N>) -> (Vec<f64>, SMatrix<C64, N, N>) {
    let eig = SymmetricEigen::new(DMatrix::from_column_slice(N, N, h.as_slice()));
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vecs = SMatrix::<C64, N, N>::zeros();
    let mut vals = Vec::with_capacity(N);
    for (k, &j) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[j]);
        for i in 0..N {
            vecs[(i, k)] = eig.eigenvectors[(i, j)];
        }
    }
    (vals, vecs)
}

/// `max |U†U - I|` over all entries.
pub fn unitarity_deviation<const N: usize>(u: &SMatrix<C64, N, N>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

/// Wraps an angle into `(-π, π]`.
#[inline]
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Absolute angular distance on the circle, in `[0, π]`.
#[inline]
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Exactly rounded floating-point sum (Shewchuk partials).
pub fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Final pass: add partials from the top, watching for half-way rounding.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_phase(TAU + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fsum_is_exact() {
        assert_eq!(fsum([1e16, 1.0, -1e16]), 1.0);
        assert_eq!(fsum([0.1; 10]), 1.0);
        let v = [0.97, 0.97, 0.31, -0.31, -0.97, -0.97];
        assert_eq!(fsum(v), 0.0);
        assert_eq!(fsum(std::iter::empty()), 0.0);
    }

    #[test]
    fn expm_of_pauli_x() {
        let mut h = Mat2::zeros();
        h[(0, 1)] = c(1.0, 0.0);
        h[(1, 0)] = c(1.0, 0.0);
        let u = expm_hermitian(&h, PI / 2.0);
        // exp(-i σx π/2) = -i σx
        assert!(u[(0, 0)].norm() < 1e-14);
        assert!((u[(0, 1)] - c(0.0, -1.0)).norm() < 1e-14);
        assert!(unitarity_deviation(&u) < 1e-14);
    }

    #[test]
    fn eigh_sorted() {
        let mut h = Mat2::zeros();
        h[(0, 0)] = c(3.0, 0.0);
        h[(1, 1)] = c(-1.0, 0.0);
        let (vals, vecs) = eigh(&h);
        assert_eq!(vals, vec![-1.0, 3.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }
}
