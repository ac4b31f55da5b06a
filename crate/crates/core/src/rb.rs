//! Leakage-aware interleaved randomized benchmarking at the decay-model
//! level.
//!
//! A sequence of `N` Cliffords is summarised by two observables: the return
//! probability `M₀` to `|00>` and the computational-subspace population
//! `χ₁`. With a per-Clifford depolarizing parameter `p` and leakage decay
//! `λ₁`,
//!
//! ```text
//! χ₁(N) = A₁ + B₁ λ₁ᴺ
//! M₀(N) = A + B pᴺ + C λ₁ᴺ
//! ```
//!
//! The fidelity of a channel with depolarizing parameter `p` and leakage
//! `L₁` on a `d = 4` dimensional subspace is `F = ((d−1)p + 1 − L₁)/d`.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Dimension of the two-qubit computational subspace.
pub const DIM: f64 = 4.0;

/// Sequence lengths and measured populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub n_cliffords: Vec<u32>,
    pub m0: Vec<f64>,
    pub chi1: Vec<f64>,
    /// Shots per point; 0 marks noiseless (model) values.
    pub shots: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct CurveRow {
    n_cliffords: u32,
    m0: f64,
    chi1: f64,
    shots: u32,
}

impl DecayCurve {
    pub fn new(n_cliffords: Vec<u32>, m0: Vec<f64>, chi1: Vec<f64>, shots: Vec<u32>) -> Result<Self> {
        let n = n_cliffords.len();
        if m0.len() != n || chi1.len() != n || shots.len() != n {
            return Err(Error::InvalidParameter(format!(
                "decay curve columns differ in length ({n}, {}, {}, {})",
                m0.len(),
                chi1.len(),
                shots.len()
            )));
        }
        if n_cliffords.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "n_cliffords must be strictly increasing".into(),
            ));
        }
        for (&v, what) in m0.iter().map(|v| (v, "m0")).chain(chi1.iter().map(|v| (v, "chi1"))) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    range: "[0, 1]".into(),
                });
            }
        }
        Ok(Self {
            n_cliffords,
            m0,
            chi1,
            shots,
        })
    }

    pub fn len(&self) -> usize {
        self.n_cliffords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_cliffords.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.len() {
            w.serialize(CurveRow {
                n_cliffords: self.n_cliffords[i],
                m0: self.m0[i],
                chi1: self.chi1[i],
                shots: self.shots[i],
            })
            .map_err(|e| Error::Config(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let (mut n, mut m0, mut chi1, mut shots) = (vec![], vec![], vec![], vec![]);
        for row in r.deserialize::<CurveRow>() {
            let row = row.map_err(|e| Error::Config(format!("decay curve csv: {e}")))?;
            n.push(row.n_cliffords);
            m0.push(row.m0);
            chi1.push(row.chi1);
            shots.push(row.shots);
        }
        Self::new(n, m0, chi1, shots)
    }

    fn noiseless(&self) -> bool {
        self.shots.iter().all(|&s| s == 0)
    }

    /// Inverse binomial variances, floored so that points at 0 or 1 keep a
    /// finite weight. Noiseless curves get unit weights.
    fn weights(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.shots)
            .map(|(&v, &s)| {
                if s == 0 {
                    1.0
                } else {
                    let s = s as f64;
                    s / (v * (1.0 - v)).max(1.0 / s)
                }
            })
            .collect()
    }
}

/// Per-Clifford error channel used for synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordError {
    pub fidelity: f64,
    pub leakage: f64,
}

impl CliffordError {
    /// Depolarizing parameter within the computational subspace.
    pub fn depolarizing(&self) -> f64 {
        (DIM * self.fidelity - 1.0 + self.leakage) / (DIM - 1.0)
    }

    pub fn leakage_decay(&self) -> f64 {
        1.0 - self.leakage
    }

    /// Reference Clifford whose infidelity and leakage are `ratio` times
    /// those of the gate.
    pub fn scaled(&self, ratio: f64) -> Self {
        Self {
            fidelity: 1.0 - ratio * (1.0 - self.fidelity),
            leakage: ratio * self.leakage,
        }
    }
}

/// Average number of CZ gates in a two-qubit Clifford; the default ratio
/// between reference-Clifford and gate error in synthesis.
pub const DEFAULT_CLIFFORD_RATIO: f64 = 1.5;

fn model_curve(p: f64, lambda: f64, n: &[u32]) -> (Vec<f64>, Vec<f64>) {
    let chi: Vec<f64> = n.iter().map(|&k| lambda.powi(k as i32)).collect();
    let m0 = n
        .iter()
        .zip(&chi)
        .map(|(&k, &c)| c / DIM + (1.0 - 1.0 / DIM) * p.powi(k as i32))
        .collect();
    (m0, chi)
}

/// Reference and gate-interleaved decay curves. Leakage is irreversible in
/// the synthetic model, so `χ₁ = λ₁ᴺ` and the depolarized computational
/// population is `χ₁/d`. A negative gate leakage models seepage during
/// the interleaved operation. `shots = 0` returns the exact model.
pub fn synth_decays(
    gate: CliffordError,
    reference: CliffordError,
    n_list: &[u32],
    shots: u32,
    seed: u64,
) -> Result<(DecayCurve, DecayCurve)> {
    let (p_ref, l_ref) = (reference.depolarizing(), reference.leakage_decay());
    let (p_int, l_int) = (p_ref * gate.depolarizing(), l_ref * gate.leakage_decay());
    for (what, v) in [
        ("reference depolarizing parameter", p_ref),
        ("reference leakage decay", l_ref),
        ("interleaved depolarizing parameter", p_int),
        ("interleaved leakage decay", l_int),
    ] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::OutOfRange {
                what,
                value: v,
                range: "(0, 1]".into(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = |v: f64| -> Result<f64> {
        if shots == 0 {
            return Ok(v);
        }
        let b = Binomial::new(shots as u64, v.clamp(0.0, 1.0))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(b.sample(&mut rng) as f64 / shots as f64)
    };
    let mut curve = |p: f64, l: f64| -> Result<DecayCurve> {
        let (m0, chi) = model_curve(p, l, n_list);
        let m0 = m0.into_iter().map(&mut sample).collect::<Result<Vec<_>>>()?;
        let chi = chi.into_iter().map(&mut sample).collect::<Result<Vec<_>>>()?;
        DecayCurve::new(n_list.to_vec(), m0, chi, vec![shots; n_list.len()])
    };
    Ok((curve(p_ref, l_ref)?, curve(p_int, l_int)?))
}

/// How the `M₀` amplitudes are treated by [`fit_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    /// The depolarized computational population follows the `χ₁` fit:
    /// `A = A₁/d`, `C = B₁/d`; only `B` and `p` are fitted on `M₀`.
    Constrained,
    /// `A`, `B` and `C` free.
    Free,
}

/// Result of fitting one decay curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RBFit {
    pub model: DecayModel,
    pub p: f64,
    pub lambda1: f64,
    /// Per-Clifford leakage `(1 − A₁)(1 − λ₁)`.
    pub leakage: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub chi_offset: f64,
    pub chi_amplitude: f64,
    /// Covariance of `[p, lambda1, leakage]`.
    pub covariance: [[f64; 3]; 3],
    pub stderr: [f64; 3],
    /// Weighted residual sum of squares of both curves.
    pub chi2: f64,
    /// `p` or `λ₁` sits at the upper boundary 1 (flat data).
    pub at_boundary: bool,
}

/// Parameterization of `χ₁` that stays regular at `λ = 1`:
/// `χ₁(N) = c0 − s·g(N)` with `g(N) = Σ_{k<N} λᵏ`, so `c0 = χ₁(0)` and
/// `s = B₁(1 − λ)`.
fn geometric(lambda: f64, n: u32) -> (f64, f64) {
    let (mut g, mut dg, mut pow) = (0.0, 0.0, 1.0);
    for k in 0..n {
        g += pow;
        if k + 1 < n {
            dg += (k + 1) as f64 * pow;
        }
        pow *= lambda;
    }
    (g, dg)
}

fn powd(x: f64, n: u32) -> (f64, f64) {
    let v = x.powi(n as i32);
    let d = if n == 0 { 0.0 } else { n as f64 * x.powi(n as i32 - 1) };
    (v, d)
}

const MIN_DECAY: f64 = 0.5;

/// Decay parameter grid: logarithmic in `1 − x` down to 1e-7, plus 1.
fn decay_grid() -> Vec<f64> {
    let lo = (1.0 - MIN_DECAY).log10();
    let mut g: Vec<f64> = (0..240)
        .map(|k| 1.0 - 10f64.powf(lo + (-7.0 - lo) * k as f64 / 239.0))
        .collect();
    g.push(1.0);
    g
}

/// Variable projection over one nonlinear decay parameter: `basis(x)`
/// builds the linear design at `x`. Returns the best `x`.
fn varpro<B>(y: &[f64], w: &[f64], basis: B) -> Result<f64>
where
    B: Fn(f64) -> DMatrix<f64>,
{
    let yv = DVector::from_column_slice(y);
    let wv = DVector::from_column_slice(w);
    let cost = |x: f64| match crate::fit::weighted_lstsq(&basis(x), &yv, &wv) {
        Ok(f) => f.chi2,
        Err(_) => f64::INFINITY,
    };
    let grid = decay_grid();
    let costs: Vec<f64> = grid.iter().map(|&x| cost(x)).collect();
    let (k, best) = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, &c)| (k, c))
        .unwrap();
    if !best.is_finite() {
        return Err(Error::FitFailed("no decay parameter gives a solvable linear fit".into()));
    }
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (x, c) = crate::fit::golden_min(cost, lo, hi, 1e-13);
    Ok(if c <= best { x } else { grid[k] })
}

/// Residuals and Jacobian of both curves for the parameter vector
/// `θ = [λ, c0, s, p, B]` (constrained) or `[λ, c0, s, p, A, B, C]` (free).
fn residuals(model: DecayModel, theta: &[f64], curve: &DecayCurve) -> (Vec<f64>, DMatrix<f64>) {
    let n = curve.len();
    let k = theta.len();
    let mut r = vec![0.0; 2 * n];
    let mut j = DMatrix::zeros(2 * n, k);
    let (lam, c0, s, p) = (theta[0], theta[1], theta[2], theta[3]);
    for (i, &nc) in curve.n_cliffords.iter().enumerate() {
        let (g, dg) = geometric(lam, nc);
        let chi = c0 - s * g;
        r[i] = curve.chi1[i] - chi;
        j[(i, 0)] = s * dg;
        j[(i, 1)] = -1.0;
        j[(i, 2)] = g;
        let (pn, dpn) = powd(p, nc);
        let row = n + i;
        match model {
            DecayModel::Constrained => {
                let b = theta[4];
                r[row] = curve.m0[i] - (chi / DIM + b * pn);
                j[(row, 0)] = s * dg / DIM;
                j[(row, 1)] = -1.0 / DIM;
                j[(row, 2)] = g / DIM;
                j[(row, 3)] = -b * dpn;
                j[(row, 4)] = -pn;
            }
            DecayModel::Free => {
                let (a, b, c) = (theta[4], theta[5], theta[6]);
                let (ln, dln) = powd(lam, nc);
                r[row] = curve.m0[i] - (a + b * pn + c * ln);
                j[(row, 0)] = -c * dln;
                j[(row, 3)] = -b * dpn;
                j[(row, 4)] = -1.0;
                j[(row, 5)] = -pn;
                j[(row, 6)] = -ln;
            }
        }
    }
    (r, j)
}

/// Damped Gauss-Newton polish of a starting point, keeping both decay
/// parameters inside `(0, 1]`.
fn polish(model: DecayModel, theta: &mut [f64], curve: &DecayCurve, w: &[f64]) -> f64 {
    let cost = |t: &[f64]| -> f64 {
        let (r, _) = residuals(model, t, curve);
        r.iter().zip(w).map(|(r, w)| w * r * r).sum()
    };
    let mut current = cost(theta);
    let mut mu: f64 = 1e-6;
    for _ in 0..50 {
        let (r, j) = residuals(model, theta, curve);
        let k = theta.len();
        let mut jtj = DMatrix::<f64>::zeros(k, k);
        let mut jtr = DVector::<f64>::zeros(k);
        for i in 0..r.len() {
            for a in 0..k {
                jtr[a] += w[i] * j[(i, a)] * r[i];
                for b in 0..k {
                    jtj[(a, b)] += w[i] * j[(i, a)] * j[(i, b)];
                }
            }
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for a in 0..k {
                damped[(a, a)] += mu * jtj[(a, a)].max(1e-300);
            }
            let Some(step) = damped.lu().solve(&(-&jtr)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t + d).collect();
            let valid = [trial[0], trial[3]].iter().all(|&x| x > 0.0 && x <= 1.0);
            let c = if valid { cost(&trial) } else { f64::INFINITY };
            if c <= current {
                let done = current - c <= 1e-15 * current.max(1e-300);
                theta.copy_from_slice(&trial);
                current = c;
                mu = (mu * 0.3).max(1e-12);
                improved = !done;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    current
}

/// Fits a decay curve: `χ₁` first (fixing `λ₁`, `A₁`, `B₁`), then `M₀` with
/// `λ₁` held, both by variable projection followed by a joint Gauss-Newton
/// polish. Covariances come from the joint Jacobian; for noiseless curves
/// they are scaled by the residual variance.
pub fn fit_decay(curve: &DecayCurve, model: DecayModel) -> Result<RBFit> {
    let n = curve.len();
    if n < 5 {
        return Err(Error::FitFailed(format!("{n} sequence lengths, need at least 5")));
    }
    let wc = curve.weights(&curve.chi1);
    let wm = curve.weights(&curve.m0);
    let nl = &curve.n_cliffords;

    let chi_design = |lam: f64| DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { -geometric(lam, nl[i]).0 });
    let lam = varpro(&curve.chi1, &wc, chi_design)?;
    let lin = crate::fit::weighted_lstsq(
        &chi_design(lam),
        &DVector::from_column_slice(&curve.chi1),
        &DVector::from_column_slice(&wc),
    )?;
    let (c0, s) = (lin.coeffs[0], lin.coeffs[1]);
    let chi_fit: Vec<f64> = nl.iter().map(|&k| c0 - s * geometric(lam, k).0).collect();

    let mut theta = match model {
        DecayModel::Constrained => {
            let y: Vec<f64> = curve.m0.iter().zip(&chi_fit).map(|(m, c)| m - c / DIM).collect();
            let design = |p: f64| DMatrix::from_fn(n, 1, |i, _| p.powi(nl[i] as i32));
            let p = varpro(&y, &wm, design)?;
            let b = crate::fit::weighted_lstsq(&design(p), &DVector::from_column_slice(&y), &DVector::from_column_slice(&wm))?
                .coeffs[0];
            vec![lam, c0, s, p, b]
        }
        DecayModel::Free => {
            let design = |p: f64| {
                DMatrix::from_fn(n, 3, |i, j| match j {
                    0 => 1.0,
                    1 => p.powi(nl[i] as i32),
                    _ => lam.powi(nl[i] as i32),
                })
            };
            let p = varpro(&curve.m0, &wm, design)?;
            let c = crate::fit::weighted_lstsq(
                &design(p),
                &DVector::from_column_slice(&curve.m0),
                &DVector::from_column_slice(&wm),
            )?
            .coeffs;
            vec![lam, c0, s, p, c[0], c[1], c[2]]
        }
    };
    let w: Vec<f64> = wc.iter().chain(&wm).copied().collect();
    let chi2 = polish(model, &mut theta, curve, &w);

    let (_, mut j) = residuals(model, &theta, curve);
    let k = theta.len();
    for i in 0..2 * n {
        let sw = w[i].sqrt();
        for a in 0..k {
            j[(i, a)] *= sw;
        }
    }
    let edge = 1.0 - 1e-9;
    let n_max = *curve.n_cliffords.last().unwrap() as f64;
    let flat_chi = theta[2].abs() * n_max < 1e-9;
    let at_boundary = theta[3] >= edge || theta[0] >= edge || flat_chi;
    let svd = j.svd(false, true);
    let smax = svd.singular_values.max();
    let cut = smax * 1e-10;
    let smin = svd.singular_values.min();
    // a flat curve leaves its decay parameter undetermined; that direction
    // is dropped rather than reported as ill-conditioning
    if !(smin > cut) && !at_boundary {
        return Err(Error::IllConditioned {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for (r, &sv) in svd.singular_values.iter().enumerate() {
        if sv > cut {
            let row = v_t.row(r);
            cov += row.transpose() * row / (sv * sv);
        }
    }
    if curve.noiseless() {
        let dof = (2 * n).saturating_sub(k).max(1) as f64;
        cov *= chi2 / dof;
    }

    let (lam, c0, s, p) = (theta[0], theta[1], theta[2], theta[3]);
    let leakage = (1.0 - c0) * (1.0 - lam) + s;
    // reported [p, λ, L] as functions of θ
    let mut g = DMatrix::zeros(3, k);
    g[(0, 3)] = 1.0;
    g[(1, 0)] = 1.0;
    g[(2, 0)] = -(1.0 - c0);
    g[(2, 1)] = -(1.0 - lam);
    g[(2, 2)] = 1.0;
    let rc = &g * &cov * g.transpose();
    let mut covariance = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            covariance[a][b] = rc[(a, b)];
        }
    }
    let stderr = [0, 1, 2].map(|a| covariance[a][a].max(0.0).sqrt());

    let b1 = if 1.0 - lam > 1e-12 { s / (1.0 - lam) } else { 0.0 };
    let a1 = c0 - b1;
    let (a, b, c) = match model {
        DecayModel::Constrained => (a1 / DIM, theta[4], b1 / DIM),
        DecayModel::Free => (theta[4], theta[5], theta[6]),
    };
    Ok(RBFit {
        model,
        p,
        lambda1: lam,
        leakage,
        a,
        b,
        c,
        chi_offset: a1,
        chi_amplitude: b1,
        covariance,
        stderr,
        chi2,
        at_boundary,
    })
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IRBResult {
    pub fidelity: Estimate,
    pub leakage: Estimate,
    /// The interleaved curve decays slower than the reference beyond the
    /// combined error bars.
    pub invalid_ratio: bool,
}

/// Gate fidelity and leakage from reference and interleaved fits.
/// `p_gate = p_int/p_ref`, `L₁ = 1 − (1 − L_int)/(1 − L_ref)` (negative for
/// a gate that seeps), `F = ((d−1)p_gate + 1 − L₁)/d`. Errors are
/// propagated to first order treating the two fits as independent.
pub fn interleaved_extract(reference: &RBFit, interleaved: &RBFit) -> IRBResult {
    let (pr, pi) = (reference.p, interleaved.p);
    let (lr, li) = (reference.leakage, interleaved.leakage);
    let p_gate = pi / pr;
    let l_gate = 1.0 - (1.0 - li) / (1.0 - lr);
    let fidelity = ((DIM - 1.0) * p_gate + 1.0 - l_gate) / DIM;

    // gradients with respect to (p, L) of each fit
    let dl_dli = 1.0 / (1.0 - lr);
    let dl_dlr = -(1.0 - li) / (1.0 - lr).powi(2);
    let dp_dpi = 1.0 / pr;
    let dp_dpr = -pi / (pr * pr);
    let k = (DIM - 1.0) / DIM;
    let var = |fit: &RBFit, gp: f64, gl: f64| {
        let c = &fit.covariance;
        gp * gp * c[0][0] + 2.0 * gp * gl * c[0][2] + gl * gl * c[2][2]
    };
    let var_l = var(reference, 0.0, dl_dlr) + var(interleaved, 0.0, dl_dli);
    let var_f = var(reference, k * dp_dpr, -dl_dlr / DIM) + var(interleaved, k * dp_dpi, -dl_dli / DIM);
    let sp = reference.stderr[0].hypot(interleaved.stderr[0]);
    IRBResult {
        fidelity: Estimate {
            value: fidelity,
            stderr: var_f.max(0.0).sqrt(),
        },
        leakage: Estimate {
            value: l_gate,
            stderr: var_l.max(0.0).sqrt(),
        },
        invalid_ratio: pi - pr > sp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sum_and_derivative() {
        let (g, dg) = geometric(0.9, 5);
        let exact: f64 = (0..5).map(|k| 0.9f64.powi(k)).sum();
        assert!((g - exact).abs() < 1e-14);
        let h = 1e-6;
        let fd = (geometric(0.9 + h, 5).0 - geometric(0.9 - h, 5).0) / (2.0 * h);
        assert!((dg - fd).abs() < 1e-8);
        assert_eq!(geometric(1.0, 7).0, 7.0);
    }

    #[test]
    fn depolarizing_conversion_round_trips() {
        let e = CliffordError {
            fidelity: 0.995,
            leakage: 0.002,
        };
        let p = e.depolarizing();
        let f = ((DIM - 1.0) * p + 1.0 - e.leakage) / DIM;
        assert!((f - e.fidelity).abs() < 1e-15);
    }

    #[test]
    fn curve_validation() {
        assert!(DecayCurve::new(vec![1, 1], vec![0.5; 2], vec![0.5; 2], vec![0; 2]).is_err());
        assert!(DecayCurve::new(vec![1, 2], vec![1.5, 0.5], vec![0.5; 2], vec![0; 2]).is_err());
        assert!(DecayCurve::new(vec![1, 2], vec![0.5; 2], vec![0.5], vec![0; 2]).is_err());
    }
}
