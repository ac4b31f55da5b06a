//! One-dimensional root finding and minimization, and small weighted linear
//! least squares, shared by the calibration and fitting routines.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Brent's method for a root of `f` on `[a, b]`; `f(a)` and `f(b)` must
/// differ in sign.
pub fn brent_root(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed(format!(
            "f({a:e}) = {fa:e}, f({b:e}) = {fb:e}"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::RootNotBracketed("no convergence in 200 iterations".into()))
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
/// Returns `(x, f(x))`.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > xtol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid scan followed by golden refinement around the best grid point.
pub fn scan_min(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, n: usize, xtol: f64) -> (f64, f64) {
    let n = n.max(3);
    let step = (b - a) / (n - 1) as f64;
    let mut best = (a, f(a));
    for k in 1..n {
        let x = a + step * k as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - step).max(a);
    let hi = (best.0 + step).min(b);
    let refined = golden_min(&mut f, lo, hi, xtol);
    if refined.1 <= best.1 {
        refined
    } else {
        best
    }
}

/// Solution of a weighted linear least-squares problem.
#[derive(Debug, Clone)]
pub struct LinearFit {
    pub coeffs: DVector<f64>,
    /// Weighted residual sum of squares.
    pub chi2: f64,
}

/// Minimizes `Σ w_i (y_i − (X c)_i)²` through an SVD of the weighted design.
pub fn weighted_lstsq(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> Result<LinearFit> {
    let (n, k) = x.shape();
    if n < k || y.len() != n || w.len() != n {
        return Err(Error::FitFailed(format!(
            "{n} observations for {k} linear parameters"
        )));
    }
    let mut xw = x.clone();
    let mut yw = y.clone();
    for i in 0..n {
        let s = w[i].max(0.0).sqrt();
        for j in 0..k {
            xw[(i, j)] *= s;
        }
        yw[i] *= s;
    }
    let svd = xw.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= smax * 1e-13 {
        return Err(Error::IllConditioned {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let coeffs = svd
        .solve(&yw, 0.0)
        .map_err(|e| Error::FitFailed(e.to_string()))?;
    let r = &yw - &xw * &coeffs;
    Ok(LinearFit {
        chi2: r.norm_squared(),
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent_root(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(matches!(
            brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::RootNotBracketed(_))
        ));
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scan_escapes_local_minimum() {
        let f = |x: f64| (3.0 * x).cos() + 0.1 * x;
        let (x, _) = scan_min(f, -4.0, 4.0, 200, 1e-10);
        // dense brute-force scan as reference
        let brute = (0..80001)
            .map(|k| -4.0 + k as f64 * 1e-4)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        assert!((x - brute).abs() < 2e-4);
    }

    #[test]
    fn lstsq_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let x = DMatrix::from_fn(10, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let y = DVector::from_fn(10, |i, _| 2.0 - 0.5 * xs[i]);
        let w = DVector::from_element(10, 3.0);
        let fit = weighted_lstsq(&x, &y, &w).unwrap();
        assert!((fit.coeffs[0] - 2.0).abs() < 1e-12);
        assert!((fit.coeffs[1] + 0.5).abs() < 1e-12);
        assert!(fit.chi2 < 1e-20);
    }

    #[test]
    fn lstsq_flags_collinear_design() {
        let x = DMatrix::from_fn(5, 2, |i, _| i as f64);
        let y = DVector::from_element(5, 1.0);
        let w = DVector::from_element(5, 1.0);
        assert!(matches!(
            weighted_lstsq(&x, &y, &w),
            Err(Error::IllConditioned { .. })
        ));
    }
}
