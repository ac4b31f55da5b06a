//! Static device parameters: transmons, their flux arcs, and coupled pairs.
//!
//! All angular quantities are in rad/s, times in seconds and flux in units
//! of the flux quantum.

use crate::fit::{brent_root, golden_min};
use crate::linalg::{c, eigh, Mat3};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Frequency-vs-flux map of a symmetric transmon,
/// `ω(Φ) = (ω_sweet + |α|)·sqrt|cos(πΦ/Φ₀)| − |α|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxArc {
    /// Flux period in units of the flux quantum (1 for a single-junction-pair SQUID).
    pub period: f64,
}

impl Default for FluxArc {
    fn default() -> Self {
        Self { period: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec {
    /// Qubit transition at the sweetspot (rad/s).
    pub omega_sweet: f64,
    /// Anharmonicity (rad/s, negative).
    pub anharm: f64,
    pub flux_arc: FluxArc,
}

impl TransmonSpec {
    pub fn new(omega_sweet: f64, anharm: f64) -> Result<Self> {
        if !(omega_sweet > 0.0) || !omega_sweet.is_finite() {
            return Err(Error::out_of_range("omega_sweet", omega_sweet, "(0, inf)"));
        }
        if !(anharm < 0.0) || !anharm.is_finite() {
            return Err(Error::out_of_range("anharm", anharm, "(-inf, 0)"));
        }
        Ok(Self {
            omega_sweet,
            anharm,
            flux_arc: FluxArc::default(),
        })
    }

    /// Qubit frequency at static flux `flux`. Even in `flux`, maximal at zero.
    pub fn frequency(&self, flux: f64) -> f64 {
        let top = self.omega_sweet + self.anharm.abs();
        let cosine = (PI * flux / self.flux_arc.period).cos().abs();
        top * cosine.sqrt() - self.anharm.abs()
    }

    /// `dω/dΦ` at `flux` (zero at the sweetspot).
    pub fn frequency_slope(&self, flux: f64) -> f64 {
        let top = self.omega_sweet + self.anharm.abs();
        let x = PI * flux / self.flux_arc.period;
        let cosine = x.cos();
        if cosine.abs() < 1e-300 {
            return f64::NEG_INFINITY;
        }
        -top * PI / self.flux_arc.period * x.sin() * cosine.signum() / (2.0 * cosine.abs().sqrt())
    }

    /// Frequency shift `ω(Φ) − ω(0)`.
    pub fn frequency_shift(&self, flux: f64) -> f64 {
        self.frequency(flux) - self.omega_sweet
    }
}

/// Which non-computational state `|11>` is brought into resonance with.
/// Kets are written `|partner, fluxed>`: the rightmost index is the
/// excitation of the fluxed transmon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interaction {
    #[serde(rename = "11-02")]
    Avoided11_02,
    #[serde(rename = "11-20")]
    Avoided11_20,
}

impl Interaction {
    /// Index of the non-computational partner of `|11>` in the 9-level basis.
    pub fn target_index(self) -> usize {
        match self {
            Interaction::Avoided11_02 => 2,
            Interaction::Avoided11_20 => 6,
        }
    }
}

/// A fluxed transmon, its static partner, and their `|11>` avoided crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub fluxed: TransmonSpec,
    pub static_partner: TransmonSpec,
    /// Transverse coupling between `|11>` and the target state (rad/s).
    pub j2: f64,
    pub interaction: Interaction,
    /// Detuning of the target state above `|11>` at the bias point (rad/s).
    pub delta_bias: f64,
    /// Flux of the fluxed transmon that brings `|11>` onto resonance (Φ₀).
    /// Amplitude 1 on either flux line corresponds to this flux.
    pub flux_resonance: f64,
    /// Bare exchange coupling `g` of the two-qutrit model, calibrated so the
    /// avoided-crossing gap is `2·j2`.
    pub exchange: f64,
}

/// Largest normalized amplitude accepted on a flux line.
pub const MAX_AMPLITUDE: f64 = 1.5;

impl PairSpec {
    pub fn new(
        fluxed: TransmonSpec,
        static_partner: TransmonSpec,
        j2: f64,
        interaction: Interaction,
        delta_bias: f64,
    ) -> Result<Self> {
        if !(j2 > 0.0) || !j2.is_finite() {
            return Err(Error::out_of_range("j2", j2, "(0, inf)"));
        }
        if !(delta_bias > 0.0) || !delta_bias.is_finite() {
            return Err(Error::out_of_range("delta_bias", delta_bias, "(0, inf)"));
        }
        // Maximum downshift reachable before the arc turns over.
        let reach = fluxed.omega_sweet;
        if delta_bias >= reach {
            return Err(Error::out_of_range(
                "delta_bias",
                delta_bias,
                "below the tunable range of the fluxed transmon",
            ));
        }
        let half_period = 0.5 * fluxed.flux_arc.period;
        let flux_resonance = brent_root(
            |phi| fluxed.frequency_shift(phi) + delta_bias,
            0.0,
            half_period * (1.0 - 1e-12),
            1e-15,
        )?;
        let mut pair = Self {
            fluxed,
            static_partner,
            j2,
            interaction,
            delta_bias,
            flux_resonance,
            exchange: j2 / std::f64::consts::SQRT_2,
        };
        pair.exchange = pair.calibrate_exchange()?;
        Ok(pair)
    }

    /// Speed limit `π / J₂`.
    pub fn t_lim(&self) -> f64 {
        PI / self.j2
    }

    /// Replaces the exchange coupling of the two-qutrit model (e.g. `0` to
    /// decouple the transmons) without touching `j2`.
    pub fn with_exchange(mut self, g: f64) -> Self {
        self.exchange = g;
        self
    }

    /// Bare qubit-qubit detuning `ω_fluxed − ω_partner` at the sweetspot,
    /// implied by `delta_bias` and the anharmonicities.
    pub fn qubit_detuning(&self) -> f64 {
        match self.interaction {
            // E02 - E11 = ω_f + α_f - ω_p
            Interaction::Avoided11_02 => self.delta_bias - self.fluxed.anharm,
            // E11 - E20 = ω_f - ω_p - α_p
            Interaction::Avoided11_20 => self.delta_bias + self.static_partner.anharm,
        }
    }

    /// Flux (Φ₀) on a line driven at normalized amplitude `a`.
    pub fn flux(&self, a: f64) -> f64 {
        a * self.flux_resonance
    }

    pub(crate) fn check_amplitude(&self, a: f64) -> Result<()> {
        if !a.is_finite() || a.abs() > MAX_AMPLITUDE {
            return Err(Error::out_of_range(
                "amplitude",
                a,
                format!("[-{MAX_AMPLITUDE}, {MAX_AMPLITUDE}]"),
            ));
        }
        if self.flux(a.abs()) >= 0.5 * self.fluxed.flux_arc.period {
            return Err(Error::out_of_range("amplitude", a, "below the arc turnover"));
        }
        Ok(())
    }

    /// Target-state detuning at signed amplitude `a`; the arc is even so only
    /// `|a|` matters. Callers validate `a`.
    pub(crate) fn detuning_at(&self, a: f64) -> f64 {
        self.delta_bias + self.fluxed.frequency_shift(self.flux(a.abs()))
    }

    /// Energies of `(|02>, |11>, |20>)` relative to the frame and the 3×3
    /// two-excitation block at fluxed-transmon shift `shift` (rad/s).
    fn two_excitation_block(&self, shift: f64, g: f64) -> Mat3 {
        let dq = self.qubit_detuning() + shift;
        let (af, ap) = (self.fluxed.anharm, self.static_partner.anharm);
        // frame rotating at ω_partner on every excitation
        let e02 = 2.0 * dq + af;
        let e11 = dq;
        let e20 = ap;
        let k = std::f64::consts::SQRT_2 * g;
        let mut h = Mat3::zeros();
        h[(0, 0)] = c(e02, 0.0);
        h[(1, 1)] = c(e11, 0.0);
        h[(2, 2)] = c(e20, 0.0);
        h[(0, 1)] = c(k, 0.0);
        h[(1, 0)] = c(k, 0.0);
        h[(1, 2)] = c(k, 0.0);
        h[(2, 1)] = c(k, 0.0);
        h
    }

    /// Splitting of the two dressed levels built from `|11>` and the target
    /// state at fluxed-transmon shift `shift`.
    fn crossing_gap(&self, shift: f64, g: f64) -> f64 {
        let h = self.two_excitation_block(shift, g);
        let (vals, vecs) = eigh(&h);
        let t = match self.interaction {
            Interaction::Avoided11_02 => 0,
            Interaction::Avoided11_20 => 2,
        };
        let mut weight: Vec<(f64, usize)> = (0..3)
            .map(|k| (vecs[(1, k)].norm_sqr() + vecs[(t, k)].norm_sqr(), k))
            .collect();
        weight.sort_by(|a, b| b.0.total_cmp(&a.0));
        (vals[weight[0].1] - vals[weight[1].1]).abs()
    }

    /// Minimum avoided-crossing gap for exchange `g`.
    pub fn minimum_gap(&self, g: f64) -> f64 {
        let centre = -self.delta_bias;
        let span = 20.0 * self.j2.max(g);
        let (_, gap) = golden_min(
            |s| self.crossing_gap(s, g),
            centre - span,
            centre + span,
            1e-9 * self.j2,
        );
        gap
    }

    fn calibrate_exchange(&self) -> Result<f64> {
        let target = 2.0 * self.j2;
        let guess = self.j2 / std::f64::consts::SQRT_2;
        brent_root(
            |g| self.minimum_gap(g) - target,
            0.5 * guess,
            2.0 * guess,
            1e-12 * guess,
        )
    }
}

/// Target-state detuning `Δ(A)` on the flux arc, normalized so that
/// `Δ(0) = delta_bias` and `Δ(1) = 0`.
pub fn flux_arc_detuning(pair: &PairSpec, amplitude: f64) -> Result<f64> {
    if !(0.0..=MAX_AMPLITUDE).contains(&amplitude) {
        return Err(Error::out_of_range(
            "amplitude",
            amplitude,
            format!("[0, {MAX_AMPLITUDE}]"),
        ));
    }
    pair.check_amplitude(amplitude)?;
    Ok(pair.detuning_at(amplitude))
}
