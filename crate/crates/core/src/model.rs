//! Hamiltonians and time-ordered propagators.
//!
//! Two models are provided. The reduced model keeps only `{|11>, |02>}` (or
//! `{|11>, |20>}`) and is what the interferometer picture is phrased in. The
//! full model keeps three levels per transmon and the exchange coupling
//! between them.
//!
//! Two-qutrit kets are written `|partner, fluxed>` and indexed `3·p + f`, so
//! the basis order is `00, 01, 02, 10, 11, 12, 20, 21, 22`.

use crate::device::{Interaction, PairSpec};
use crate::linalg::{c, eigh, expm_hermitian, unitarity_deviation, Mat2, Mat9, C64};
use crate::{Error, Result};
use std::collections::HashMap;

pub const IDX_00: usize = 0;
pub const IDX_01: usize = 1;
pub const IDX_02: usize = 2;
pub const IDX_10: usize = 3;
pub const IDX_11: usize = 4;
pub const IDX_20: usize = 6;
/// Computational states in basis order.
pub const COMPUTATIONAL: [usize; 4] = [IDX_00, IDX_01, IDX_10, IDX_11];

pub const LABELS: [&str; 9] = ["00", "01", "02", "10", "11", "12", "20", "21", "22"];

/// `Δ|02><02| + J₂(|02><11| + |11><02|)` in the `(|11>, |02>)` basis.
pub fn reduced_hamiltonian(delta: f64, j2: f64) -> Mat2 {
    let mut h = Mat2::zeros();
    h[(1, 1)] = c(delta, 0.0);
    h[(0, 1)] = c(j2, 0.0);
    h[(1, 0)] = c(j2, 0.0);
    h
}

/// Unitary on `(|11>, target)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedUnitary {
    matrix: Mat2,
}

/// Parameters of a beamsplitter
/// `[[α e^{iφa}, β e^{iφb}], [β e^{iφc}, α e^{iφd}]]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Beamsplitter {
    pub alpha: f64,
    pub beta: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_c: f64,
    pub phi_d: f64,
}

impl ReducedUnitary {
    pub fn new(matrix: Mat2) -> Result<Self> {
        let deviation = unitarity_deviation(&matrix).max((matrix.determinant().norm() - 1.0).abs());
        if deviation > 1e-10 {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self {
            matrix: Mat2::identity(),
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// `self` followed by `later`.
    pub fn then(&self, later: &ReducedUnitary) -> ReducedUnitary {
        ReducedUnitary {
            matrix: later.matrix * self.matrix,
        }
    }

    /// Magnitudes and phases of the four entries. Phases of vanishing
    /// entries are reported as 0.
    pub fn beamsplitter(&self) -> Beamsplitter {
        let m = &self.matrix;
        let arg = |z: C64| if z.norm() > 1e-300 { z.arg() } else { 0.0 };
        let alpha = (0.5 * (m[(0, 0)].norm_sqr() + m[(1, 1)].norm_sqr())).sqrt();
        let beta = (0.5 * (m[(0, 1)].norm_sqr() + m[(1, 0)].norm_sqr())).sqrt();
        Beamsplitter {
            alpha,
            beta,
            phi_a: arg(m[(0, 0)]),
            phi_b: arg(m[(0, 1)]),
            phi_c: arg(m[(1, 0)]),
            phi_d: arg(m[(1, 1)]),
        }
    }

    /// Embeds into the two-qutrit space, identity on every other state.
    pub fn embed(&self, interaction: Interaction) -> PairUnitary {
        let t = interaction.target_index();
        let idx = [IDX_11, t];
        let mut u = Mat9::identity();
        for i in 0..2 {
            for j in 0..2 {
                u[(idx[i], idx[j])] = self.matrix[(i, j)];
            }
        }
        PairUnitary {
            matrix: u,
            interaction,
        }
    }
}

/// Time-ordered product of `exp(−i H(Δ_k, J₂) τ_k)`.
pub fn reduced_propagate(delta: &[f64], durations: &[f64], j2: f64) -> Result<ReducedUnitary> {
    if delta.is_empty() {
        return Err(Error::EmptyPulse);
    }
    if delta.len() != durations.len() {
        return Err(Error::InvalidParameter(format!(
            "{} detunings but {} durations",
            delta.len(),
            durations.len()
        )));
    }
    let mut u = Mat2::identity();
    for (&d, &tau) in delta.iter().zip(durations) {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::out_of_range("duration", tau, "[0, inf)"));
        }
        u = expm_hermitian(&reduced_hamiltonian(d, j2), tau) * u;
    }
    ReducedUnitary::new(u)
}

/// `diag(1, e^{−iΔ t})`: free evolution of the target relative to `|11>`.
pub fn idle_unitary(delta_bias: f64, t_mid: f64) -> ReducedUnitary {
    let mut m = Mat2::identity();
    m[(1, 1)] = C64::from_polar(1.0, -delta_bias * t_mid);
    ReducedUnitary { matrix: m }
}

/// Square half pulses at `+a` and `−a` around a phase-only idle at the bias
/// point. The coupling is off during the idle.
pub fn ideal_snz_unitary(pair: &PairSpec, a: f64, t_half: f64, t_mid: f64) -> Result<ReducedUnitary> {
    if !(t_mid >= 0.0) || !t_mid.is_finite() {
        return Err(Error::out_of_range("t_mid", t_mid, "[0, inf)"));
    }
    let first = reduced_pulse_unitary(pair, &[(a, t_half)])?;
    let second = reduced_pulse_unitary(pair, &[(-a, t_half)])?;
    Ok(first.then(&idle_unitary(pair.target_energy(0.0)?, t_mid)).then(&second))
}

impl PairSpec {
    /// Reduced-model energy of the target state relative to `|11>` at
    /// flux amplitude `a`.
    pub fn target_energy(&self, a: f64) -> Result<f64> {
        self.check_amplitude(a)?;
        let d = self.detuning_at(a);
        Ok(match self.interaction {
            Interaction::Avoided11_02 => d,
            Interaction::Avoided11_20 => -d,
        })
    }
}

/// Reduced-model propagator for piecewise-constant flux `(amplitude, duration)`.
pub fn reduced_pulse_unitary(pair: &PairSpec, segments: &[(f64, f64)]) -> Result<ReducedUnitary> {
    let mut delta = Vec::with_capacity(segments.len());
    let mut dur = Vec::with_capacity(segments.len());
    for &(a, t) in segments {
        delta.push(pair.target_energy(a)?);
        dur.push(t);
    }
    reduced_propagate(&delta, &dur, pair.j2)
}

/// Unitary on the two-qutrit space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairUnitary {
    matrix: Mat9,
    interaction: Interaction,
}

impl PairUnitary {
    pub fn new(matrix: Mat9, interaction: Interaction) -> Result<Self> {
        let deviation = unitarity_deviation(&matrix);
        if deviation > 1e-9 {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Self {
            matrix,
            interaction,
        })
    }

    pub fn matrix(&self) -> &Mat9 {
        &self.matrix
    }

    pub fn interaction(&self) -> Interaction {
        self.interaction
    }

    /// `self` followed by `later`.
    pub fn then(&self, later: &PairUnitary) -> PairUnitary {
        PairUnitary {
            matrix: later.matrix * self.matrix,
            interaction: self.interaction,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }
}

/// Density matrix on the two-qutrit space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: Mat9,
}

impl DensityMatrix {
    pub fn new(matrix: Mat9) -> Result<Self> {
        let herm = (matrix - matrix.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if herm > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - c(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr}")));
        }
        let (vals, _) = eigh(&matrix);
        if vals[0] < -1e-9 {
            return Err(Error::InvalidParameter(format!(
                "density matrix eigenvalue {:e}",
                vals[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Projector onto basis state `k`.
    pub fn basis(k: usize) -> Self {
        let mut m = Mat9::zeros();
        m[(k, k)] = c(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &Mat9 {
        &self.matrix
    }

    pub fn evolve(&self, u: &PairUnitary) -> DensityMatrix {
        DensityMatrix {
            matrix: u.matrix * self.matrix * u.matrix.adjoint(),
        }
    }

    pub fn population(&self, k: usize) -> f64 {
        self.matrix[(k, k)].re
    }
}

fn excitations(index: usize) -> (usize, usize) {
    (index / 3, index % 3)
}

/// Two-qutrit Hamiltonian with the fluxed transmon at amplitude `a_fluxed`
/// and the partner at `a_partner`, in the frame rotating at the partner's
/// sweetspot frequency for every excitation.
pub fn full_hamiltonian(pair: &PairSpec, a_fluxed: f64, a_partner: f64) -> Result<Mat9> {
    pair.check_amplitude(a_fluxed)?;
    pair.check_amplitude(a_partner)?;
    let shift_f = pair.fluxed.frequency_shift(pair.flux(a_fluxed.abs()));
    let shift_p = pair.static_partner.frequency_shift(pair.flux(a_partner.abs()));
    Ok(hamiltonian_with_shifts(pair, shift_f, shift_p))
}

pub(crate) fn hamiltonian_with_shifts(pair: &PairSpec, shift_f: f64, shift_p: f64) -> Mat9 {
    let (af, ap) = (pair.fluxed.anharm, pair.static_partner.anharm);
    let dq = pair.qubit_detuning();
    let mut h = Mat9::zeros();
    for i in 0..9 {
        let (j, k) = excitations(i);
        let (jf, kf) = (j as f64, k as f64);
        let e = jf * shift_p
            + ap * jf * (jf - 1.0) / 2.0
            + kf * (dq + shift_f)
            + af * kf * (kf - 1.0) / 2.0;
        h[(i, i)] = c(e, 0.0);
    }
    // g (a_p† a_f + a_p a_f†)
    for i in 0..9 {
        let (j, k) = excitations(i);
        if j < 2 && k > 0 {
            let target = 3 * (j + 1) + (k - 1);
            let amp = pair.exchange * ((j + 1) as f64).sqrt() * (k as f64).sqrt();
            h[(target, i)] += c(amp, 0.0);
            h[(i, target)] += c(amp, 0.0);
        }
    }
    h
}

/// Dressed eigenbasis of the static Hamiltonian at the bias point.
#[derive(Debug, Clone, Copy)]
pub struct DressedBasis {
    /// Column `k` is the eigenvector labelled by bare state `k`, phased so its
    /// overlap with that bare state is real and positive.
    pub vectors: Mat9,
    /// Dressed energy of each labelled state (rad/s, partner frame).
    pub energies: [f64; 9],
}

/// Diagonalizes the bias-point Hamiltonian and labels eigenstates by their
/// largest bare-state overlap.
pub fn dressed_basis(pair: &PairSpec) -> Result<DressedBasis> {
    let h = hamiltonian_with_shifts(pair, 0.0, 0.0);
    let (vals, vecs) = eigh(&h);
    let mut vectors = Mat9::zeros();
    let mut energies = [0.0; 9];
    let mut used = [false; 9];
    for bare in 0..9 {
        let mut best = (0.0, usize::MAX);
        for k in 0..9 {
            let w = vecs[(bare, k)].norm_sqr();
            if w > best.0 {
                best = (w, k);
            }
        }
        if best.0 < 0.5 || used[best.1] {
            return Err(Error::DegenerateLevels { overlap: best.0 });
        }
        used[best.1] = true;
        let col = vecs.column(best.1);
        let phase = col[bare].conj() / col[bare].norm();
        vectors.set_column(bare, &(col * phase));
        energies[bare] = vals[best.1];
    }
    Ok(DressedBasis { vectors, energies })
}

/// A constant stretch of both flux lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSegment {
    pub fluxed: f64,
    pub partner: f64,
    pub duration: f64,
}

/// Propagates piecewise-constant flux segments in the full model.
///
/// The result is expressed in the dressed basis at the bias point, in the
/// frame rotating at both bare sweetspot frequencies.
pub fn full_propagate_segments(pair: &PairSpec, segments: &[FluxSegment]) -> Result<PairUnitary> {
    if segments.is_empty() {
        return Err(Error::EmptyPulse);
    }
    let mut cache: HashMap<(u64, u64), (Vec<f64>, Mat9)> = HashMap::new();
    let mut u = Mat9::identity();
    let mut total = 0.0;
    for s in segments {
        if !(s.duration >= 0.0) || !s.duration.is_finite() {
            return Err(Error::out_of_range("duration", s.duration, "[0, inf)"));
        }
        let key = (s.fluxed.abs().to_bits(), s.partner.abs().to_bits());
        if !cache.contains_key(&key) {
            let h = full_hamiltonian(pair, s.fluxed, s.partner)?;
            let (vals, vecs) = eigh(&h);
            cache.insert(key, (vals, vecs));
        }
        let (vals, vecs) = &cache[&key];
        u = step_from_eigen(vals, vecs, s.duration) * u;
        total += s.duration;
    }
    to_dressed_frame(pair, &u, total)
}

pub(crate) fn step_from_eigen(vals: &[f64], vecs: &Mat9, t: f64) -> Mat9 {
    let mut vd = *vecs;
    for (j, &lambda) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * t);
        for i in 0..9 {
            vd[(i, j)] *= phase;
        }
    }
    vd * vecs.adjoint()
}

/// Rotation taking a dressed-basis operator from the partner frame into the
/// frame of both bare qubit frequencies after total time `t`.
pub(crate) fn frame_phases(pair: &PairSpec, t: f64) -> [C64; 9] {
    let dq = pair.qubit_detuning();
    let mut r = [c(1.0, 0.0); 9];
    for (i, ri) in r.iter_mut().enumerate() {
        let (_, k) = excitations(i);
        *ri = C64::from_polar(1.0, dq * k as f64 * t);
    }
    r
}

fn to_dressed_frame(pair: &PairSpec, u: &Mat9, t: f64) -> Result<PairUnitary> {
    let basis = dressed_basis(pair)?;
    let mut w = basis.vectors.adjoint() * u * basis.vectors;
    let r = frame_phases(pair, t);
    for i in 0..9 {
        for j in 0..9 {
            w[(i, j)] *= r[i];
        }
    }
    PairUnitary::new(w, pair.interaction)
}

/// Runs of identical consecutive samples, as `(value, count)`.
pub fn runs(samples: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &x in samples {
        match out.last_mut() {
            Some((v, n)) if v.to_bits() == x.to_bits() => *n += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Full-model propagator of sampled flux on the fluxed line (`partner` is
/// an optional waveform on the partner line, zero-padded to equal length).
pub fn full_propagate_lines(
    pair: &PairSpec,
    fluxed: &[f64],
    partner: Option<&[f64]>,
    ts: f64,
) -> Result<PairUnitary> {
    let n = fluxed.len().max(partner.map_or(0, |p| p.len()));
    if n == 0 {
        return Err(Error::EmptyPulse);
    }
    let mut segments: Vec<FluxSegment> = Vec::new();
    for k in 0..n {
        let f = fluxed.get(k).copied().unwrap_or(0.0);
        let p = partner.and_then(|p| p.get(k).copied()).unwrap_or(0.0);
        match segments.last_mut() {
            Some(s) if s.fluxed.to_bits() == f.to_bits() && s.partner.to_bits() == p.to_bits() => {
                s.duration += ts
            }
            _ => segments.push(FluxSegment {
                fluxed: f,
                partner: p,
                duration: ts,
            }),
        }
    }
    full_propagate_segments(pair, &segments)
}

/// Full-model propagator of a waveform on the fluxed transmon.
pub fn full_propagate(pair: &PairSpec, waveform: &crate::pulse::Waveform) -> Result<PairUnitary> {
    full_propagate_lines(pair, waveform.samples(), None, waveform.ts())
}
