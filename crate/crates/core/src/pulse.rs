//! Flux waveforms on the AWG grid and linear-dynamical distortion.

use crate::linalg::fsum;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples of normalized flux amplitude at period `ts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    samples: Vec<f64>,
    ts: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, ts: f64) -> Result<Self> {
        if !(ts > 0.0) || !ts.is_finite() {
            return Err(Error::out_of_range("ts", ts, "(0, inf)"));
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::out_of_range("sample", *bad, "finite"));
        }
        Ok(Self { samples, ts })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.ts
    }

    /// Exactly rounded sum of the samples.
    pub fn area(&self) -> f64 {
        fsum(self.samples.iter().copied())
    }

    /// `self` followed by `other` (sample periods must agree).
    pub fn concat(&self, other: &Waveform) -> Result<Waveform> {
        if self.ts != other.ts {
            return Err(Error::InvalidParameter(format!(
                "sample periods differ: {} vs {}",
                self.ts, other.ts
            )));
        }
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        Ok(Waveform {
            samples,
            ts: self.ts,
        })
    }

    /// Zero-pads (or truncates) to `n` samples.
    pub fn resized(&self, n: usize) -> Waveform {
        let mut samples = self.samples.clone();
        samples.resize(n, 0.0);
        Waveform {
            samples,
            ts: self.ts,
        }
    }

    /// Adds a constant offset to every sample.
    pub fn offset(&self, delta: f64) -> Waveform {
        Waveform {
            samples: self.samples.iter().map(|x| x + delta).collect(),
            ts: self.ts,
        }
    }

    /// CSV with columns `index,time_ns,amplitude`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            index: usize,
            time_ns: f64,
            amplitude: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (index, &amplitude) in self.samples.iter().enumerate() {
            w.serialize(Row {
                index,
                time_ns: index as f64 * self.ts * 1e9,
                amplitude,
            })
            .map_err(|e| Error::Config(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Number of whole samples in `duration`, if it lies on the grid.
pub fn grid_samples(what: &'static str, duration: f64, ts: f64) -> Result<usize> {
    if !(ts > 0.0) || !ts.is_finite() {
        return Err(Error::out_of_range("ts", ts, "(0, inf)"));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::out_of_range(what, duration, "[0, inf)"));
    }
    let x = duration / ts;
    let k = x.round();
    if (x - k).abs() > 1e-9 * k.max(1.0) {
        return Err(Error::GridViolation {
            what,
            value: duration,
            ts,
        });
    }
    Ok(k as usize)
}

/// Number of samples `2n` of the shortest bipolar pulse with `2n·ts ≥ t_lim`.
pub fn choose_tp_samples(t_lim: f64, ts: f64) -> Result<usize> {
    if !(t_lim > 0.0) || !(ts > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_lim = {t_lim:e} and ts = {ts:e} must be positive"
        )));
    }
    let n = (t_lim / (2.0 * ts) - 1e-9).ceil().max(1.0) as usize;
    Ok(2 * n)
}

/// Shortest on-grid bipolar duration not below `t_lim`.
pub fn choose_tp(t_lim: f64, ts: f64) -> Result<f64> {
    Ok(choose_tp_samples(t_lim, ts)? as f64 * ts)
}

/// Sudden net-zero pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnzParams {
    pub a: f64,
    pub b: f64,
    /// Total strong-pulse duration (both halves).
    pub tp: f64,
    /// Idle between the halves, including the fine-amplitude samples.
    pub t_mid: f64,
    pub n_fine: usize,
}

impl SnzParams {
    pub fn new(a: f64, b: f64, tp: f64, t_mid: f64) -> Self {
        Self {
            a,
            b,
            tp,
            t_mid,
            n_fine: 1,
        }
    }

    /// Parameters from sample counts: `tp_samples` (even) and `mid_samples`.
    pub fn from_samples(a: f64, b: f64, tp_samples: usize, mid_samples: usize, ts: f64) -> Self {
        Self::new(a, b, tp_samples as f64 * ts, mid_samples as f64 * ts)
    }
}

pub fn make_snz(p: &SnzParams, ts: f64) -> Result<Waveform> {
    let tp = grid_samples("tp", p.tp, ts)?;
    if tp == 0 || tp % 2 != 0 {
        return Err(Error::GridViolation {
            what: "tp",
            value: p.tp,
            ts,
        });
    }
    let m = grid_samples("t_mid", p.t_mid, ts)?;
    if !(0.0 <= p.b && p.b <= p.a) {
        return Err(Error::InvalidParameter(format!(
            "SNZ amplitudes must satisfy 0 <= b <= a (a = {}, b = {})",
            p.a, p.b
        )));
    }
    let n_fine = if m > 0 { p.n_fine } else { 0 };
    if 2 * n_fine > m {
        return Err(Error::InvalidParameter(format!(
            "{} fine samples per side do not fit in {m} idle samples",
            p.n_fine
        )));
    }
    let n = tp / 2;
    let mut s = Vec::with_capacity(tp + m);
    s.extend(std::iter::repeat_n(p.a, n));
    s.extend(std::iter::repeat_n(p.b, n_fine));
    s.extend(std::iter::repeat_n(0.0, m - 2 * n_fine));
    s.extend(std::iter::repeat_n(-p.b, n_fine));
    s.extend(std::iter::repeat_n(-p.a, n));
    Waveform::new(s, ts)
}

/// Conventional net-zero pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NzParams {
    pub a: f64,
    /// 0 gives square halves, 1 gives half-sine halves.
    pub a_curve: f64,
    pub tp: f64,
}

/// Bipolar pulse whose halves interpolate between a square and a half sine,
/// `(1 − a_curve) + a_curve·sin(π t / (tp/2))`, scaled to peak `a`.
pub fn make_nz(p: &NzParams, ts: f64) -> Result<Waveform> {
    let tp = grid_samples("tp", p.tp, ts)?;
    if tp == 0 || tp % 2 != 0 {
        return Err(Error::GridViolation {
            what: "tp",
            value: p.tp,
            ts,
        });
    }
    if !(0.0..=1.0).contains(&p.a_curve) {
        return Err(Error::out_of_range("a_curve", p.a_curve, "[0, 1]"));
    }
    let n = tp / 2;
    let shape: Vec<f64> = (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n as f64;
            (1.0 - p.a_curve) + p.a_curve * (PI * t).sin()
        })
        .collect();
    let peak = shape.iter().cloned().fold(f64::MIN, f64::max);
    let first: Vec<f64> = shape.iter().map(|g| p.a * (g / peak)).collect();
    let mut s = first.clone();
    s.extend(first.iter().rev().map(|x| -x));
    Waveform::new(s, ts)
}

/// `duration/ts` samples of amplitude `a`.
pub fn make_square(a: f64, duration: f64, ts: f64) -> Result<Waveform> {
    let k = grid_samples("duration", duration, ts)?;
    Waveform::new(vec![a; k], ts)
}

/// Weak bipolar square pulse `[+c]×k, [−c]×k` of total duration `t1q`.
pub fn make_weak_correction(c: f64, t1q: f64, ts: f64) -> Result<Waveform> {
    let k = grid_samples("t1q", t1q, ts)?;
    if k % 2 != 0 {
        return Err(Error::GridViolation {
            what: "t1q",
            value: t1q,
            ts,
        });
    }
    let mut s = vec![c; k / 2];
    s.extend(std::iter::repeat_n(-c, k / 2));
    Waveform::new(s, ts)
}

/// Bipolar square parking pulse for a spectator, each half `duration / 2`.
pub fn make_parking(amplitude: f64, duration: f64, ts: f64) -> Result<Waveform> {
    make_weak_correction(amplitude, duration, ts)
}

/// One settling exponential of the step response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionTerm {
    pub amplitude: f64,
    /// Time constant (s).
    pub tau: f64,
}

/// Linear flux-line response with step response `1 + Σ aᵢ e^{−t/τᵢ}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistortionModel {
    pub terms: Vec<DistortionTerm>,
}

impl DistortionModel {
    pub fn new(terms: Vec<DistortionTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.tau > 0.0) || !t.tau.is_finite() {
                return Err(Error::out_of_range("tau", t.tau, "(0, inf)"));
            }
            if !t.amplitude.is_finite() {
                return Err(Error::out_of_range("amplitude", t.amplitude, "finite"));
            }
        }
        Ok(Self { terms })
    }

    /// Continuous step response at time `t ≥ 0`.
    pub fn step_response(&self, t: f64) -> f64 {
        1.0 + self
            .terms
            .iter()
            .map(|d| d.amplitude * (-t / d.tau).exp())
            .sum::<f64>()
    }

    /// Settling-tail length in samples, `ceil(5·max τ / ts)`.
    pub fn tail_samples(&self, ts: f64) -> usize {
        let tau = self.terms.iter().map(|d| d.tau).fold(0.0, f64::max);
        (5.0 * tau / ts).ceil() as usize
    }
}

/// Passes `w` through the distortion, appending the settling tail. The
/// output reproduces the step response exactly at the sample instants.
pub fn apply_distortion(w: &Waveform, d: &DistortionModel) -> Waveform {
    let n = w.len() + d.tail_samples(w.ts);
    let x = w.resized(n);
    let mut y = x.samples.clone();
    for term in &d.terms {
        let r = (-w.ts / term.tau).exp();
        let mut u = 0.0;
        let mut prev = 0.0;
        for k in 0..n {
            u = r * u + prev;
            prev = x.samples[k];
            y[k] += term.amplitude * (x.samples[k] + (r - 1.0) * u);
        }
    }
    Waveform { samples: y, ts: w.ts }
}

/// Exact inverse of [`apply_distortion`]: each output sample is solved
/// for from the target sample and the settling state of every term.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionFilter {
    /// `(amplitude, e^{−ts/τ})` per term.
    terms: Vec<(f64, f64)>,
    tail: usize,
    ts: f64,
}

pub fn correction_filter(d: &DistortionModel, ts: f64) -> Result<CorrectionFilter> {
    let mut terms = Vec::with_capacity(d.terms.len());
    for t in &d.terms {
        if t.amplitude.abs() >= 1.0 {
            return Err(Error::Unstable(format!(
                "settling amplitude {} has magnitude >= 1",
                t.amplitude
            )));
        }
        let r = (-ts / t.tau).exp();
        let pole = (r + t.amplitude) / (1.0 + t.amplitude);
        if pole.abs() >= 1.0 {
            return Err(Error::Unstable(format!(
                "inverse pole {pole} for amplitude {} and tau {:e}",
                t.amplitude, t.tau
            )));
        }
        terms.push((t.amplitude, r));
    }
    let gain = 1.0 + terms.iter().map(|t| t.0).sum::<f64>();
    if !(gain > 0.0) {
        return Err(Error::Unstable(format!("instantaneous gain {gain} is not positive")));
    }
    Ok(CorrectionFilter {
        terms,
        tail: d.tail_samples(ts),
        ts,
    })
}

impl CorrectionFilter {
    /// Pre-distorts `w`, appending the settling tail.
    pub fn apply(&self, w: &Waveform) -> Result<Waveform> {
        if w.ts != self.ts {
            return Err(Error::InvalidParameter(format!(
                "filter designed for ts = {:e}, waveform has {:e}",
                self.ts, w.ts
            )));
        }
        let target = w.resized(w.len() + self.tail).samples;
        let gain = 1.0 + self.terms.iter().map(|t| t.0).sum::<f64>();
        let mut state = vec![(0.0, 0.0); self.terms.len()];
        let mut out = Vec::with_capacity(target.len());
        for &y in &target {
            let mut past = 0.0;
            for (&(a, r), (u, prev)) in self.terms.iter().zip(state.iter_mut()) {
                *u = r * *u + *prev;
                past += a * (r - 1.0) * *u;
            }
            let x = (y - past) / gain;
            for (_, prev) in state.iter_mut() {
                *prev = x;
            }
            out.push(x);
        }
        Waveform::new(out, w.ts)
    }
}
