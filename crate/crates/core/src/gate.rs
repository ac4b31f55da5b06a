//! Gate quantities: controlled-phase parameters, interferometer conditions,
//! average fidelity, leakage and residual ZZ.

use crate::channel::{vec_index, Superoperator};
use crate::device::{Interaction, PairSpec};
use crate::linalg::{c, phase_distance, unitarity_deviation, wrap_phase, Mat9, C64};
use crate::model::{dressed_basis, PairUnitary, ReducedUnitary, COMPUTATIONAL, IDX_00, IDX_01, IDX_10, IDX_11};
use crate::{Error, Result};
use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Phases (rad, in `(−π, π]`, referenced to `<00|U|00>`) and leakage of a
/// controlled-phase unitary.
///
/// `phi01` belongs to the fluxed transmon (rightmost label), `phi10` to the
/// static partner. `phi02` and `phi_offdiag` refer to the interaction's
/// target state (`|02>` or `|20>`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpGateParams {
    pub phi01: f64,
    pub phi10: f64,
    pub phi11: f64,
    pub phi2q: f64,
    pub phi02: f64,
    /// Phase of `<target|U|11>`.
    pub phi_offdiag: f64,
    /// `|<target|U|11>|² / 4`.
    pub leak_l1: f64,
}

pub fn extract_cp_params(u: &PairUnitary) -> Result<CpGateParams> {
    let deviation = unitarity_deviation(u.matrix());
    if deviation > 1e-9 {
        return Err(Error::NonUnitary { deviation });
    }
    let t = u.interaction().target_index();
    let reference = u.entry(IDX_00, IDX_00).arg();
    let rel = |z: C64| wrap_phase(z.arg() - reference);
    let phi01 = rel(u.entry(IDX_01, IDX_01));
    let phi10 = rel(u.entry(IDX_10, IDX_10));
    let phi11 = rel(u.entry(IDX_11, IDX_11));
    let off = u.entry(t, IDX_11);
    Ok(CpGateParams {
        phi01,
        phi10,
        phi11,
        phi2q: wrap_phase(phi11 - phi01 - phi10),
        phi02: rel(u.entry(t, t)),
        phi_offdiag: rel(off),
        leak_l1: off.norm_sqr() / 4.0,
    })
}

/// Builds the ideal controlled-phase unitary with the given parameters
/// (identity on the remaining levels). `phi11` is taken as
/// `phi01 + phi10 + phi2q`; the `<11|U|target>` phase follows from unitarity.
pub fn construct_cp(p: &CpGateParams, interaction: Interaction) -> Result<PairUnitary> {
    if !(0.0..=0.25).contains(&p.leak_l1) {
        return Err(Error::out_of_range("leak_l1", p.leak_l1, "[0, 0.25]"));
    }
    let t = interaction.target_index();
    let phi11 = p.phi01 + p.phi10 + p.phi2q;
    let s = (4.0 * p.leak_l1).sqrt();
    let cth = (1.0 - 4.0 * p.leak_l1).sqrt();
    let upper = phi11 + p.phi02 - p.phi_offdiag - PI;
    let mut m = Mat9::identity();
    m[(IDX_01, IDX_01)] = C64::from_polar(1.0, p.phi01);
    m[(IDX_10, IDX_10)] = C64::from_polar(1.0, p.phi10);
    m[(IDX_11, IDX_11)] = C64::from_polar(cth, phi11);
    m[(IDX_11, t)] = C64::from_polar(s, upper);
    m[(t, IDX_11)] = C64::from_polar(s, p.phi_offdiag);
    m[(t, t)] = C64::from_polar(cth, p.phi02);
    PairUnitary::new(m, interaction)
}

/// Distances of a half pulse from the phase and leakage conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `|α² e^{2iφa} + β² e^{i(φb+φc+φ)} + 1|`, in `[0, 2]`.
    pub pc_residual: f64,
    /// Phase distance (rad) of the resulting `|11>` amplitude from `−1`.
    pub pc_phase_error: f64,
    /// `β`.
    pub lc1_residual: f64,
    /// `|wrap(φa − φd − φ − π)|`.
    pub lc2_residual: f64,
    /// `α`.
    pub lc3_residual: f64,
    /// Labels of the conditions met within the tolerance.
    pub satisfied: Vec<String>,
}

pub const DEFAULT_CONDITION_TOL: f64 = 1e-6;

pub fn check_conditions(u_half: &ReducedUnitary, phi: f64) -> Result<ConditionReport> {
    check_conditions_tol(u_half, phi, DEFAULT_CONDITION_TOL)
}

pub fn check_conditions_tol(u_half: &ReducedUnitary, phi: f64, tol: f64) -> Result<ConditionReport> {
    let deviation = unitarity_deviation(u_half.matrix());
    if deviation > 1e-9 {
        return Err(Error::NonUnitary { deviation });
    }
    let bs = u_half.beamsplitter();
    let z = C64::from_polar(bs.alpha * bs.alpha, 2.0 * bs.phi_a)
        + C64::from_polar(bs.beta * bs.beta, bs.phi_b + bs.phi_c + phi);
    let pc_residual = (z + c(1.0, 0.0)).norm();
    let pc_phase_error = if z.norm() > 1e-300 {
        phase_distance(z.arg(), PI)
    } else {
        PI
    };
    let lc1 = bs.beta;
    let lc2 = wrap_phase(bs.phi_a - bs.phi_d - phi - PI).abs();
    let lc3 = bs.alpha;
    let mut satisfied = Vec::new();
    for (label, r) in [("PC", pc_residual), ("LC1", lc1), ("LC2", lc2), ("LC3", lc3)] {
        if r <= tol {
            satisfied.push(label.to_string());
        }
    }
    Ok(ConditionReport {
        pc_residual,
        pc_phase_error,
        lc1_residual: lc1,
        lc2_residual: lc2,
        lc3_residual: lc3,
        satisfied,
    })
}

/// Target on the computational subspace, in the order `00, 01, 10, 11`.
pub type TargetGate = Matrix4<C64>;

/// `diag(1, e^{iθ01}, e^{iθ10}, −e^{i(θ01+θ10)})`: CZ up to single-qubit Z
/// rotations.
pub fn cz_target(phi01: f64, phi10: f64) -> TargetGate {
    TargetGate::from_diagonal(&nalgebra::Vector4::new(
        c(1.0, 0.0),
        C64::from_polar(1.0, phi01),
        C64::from_polar(1.0, phi10),
        C64::from_polar(1.0, phi01 + phi10 + PI),
    ))
}

pub fn ideal_cz() -> TargetGate {
    cz_target(0.0, 0.0)
}

/// Average gate fidelity of a channel on the computational subspace, with
/// population leaving the subspace counted as error:
/// `F = (d(1 − L) + Tr(S_V† S_E)) / (d(d + 1))`, `d = 4`.
pub fn avg_gate_fidelity(channel: &Superoperator, target: &TargetGate) -> Result<f64> {
    check_target(target)?;
    let s = channel.matrix();
    let leak = channel_leakage(channel)?;
    // Tr(S_V† S_E) = Σ_{ab,ij} conj(V_ai conj(V_bj)) E[(ab),(ij)]
    let mut overlap = c(0.0, 0.0);
    for (ci, &i) in COMPUTATIONAL.iter().enumerate() {
        for (cj, &j) in COMPUTATIONAL.iter().enumerate() {
            let col = vec_index(i, j);
            for (ca, &a) in COMPUTATIONAL.iter().enumerate() {
                for (cb, &b) in COMPUTATIONAL.iter().enumerate() {
                    let sv = target[(ca, ci)] * target[(cb, cj)].conj();
                    overlap += sv.conj() * s[(vec_index(a, b), col)];
                }
            }
        }
    }
    let d = 4.0;
    let f = (d * (1.0 - leak) + overlap.re) / (d * (d + 1.0));
    if !(-1e-9..=1.0 + 1e-9).contains(&f) {
        return Err(Error::InvalidChannel(format!("fidelity {f} outside [0, 1]")));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Average fidelity of a unitary, through the same formula.
pub fn unitary_fidelity(u: &PairUnitary, target: &TargetGate) -> Result<f64> {
    check_target(target)?;
    let mut m = Matrix4::<C64>::zeros();
    for (a, &ia) in COMPUTATIONAL.iter().enumerate() {
        for (b, &ib) in COMPUTATIONAL.iter().enumerate() {
            m[(a, b)] = u.entry(ia, ib);
        }
    }
    let mv = target.adjoint() * m;
    let d = 4.0;
    Ok(((mv.trace().norm_sqr()) + (m.adjoint() * m).trace().re) / (d * (d + 1.0)))
}

fn check_target(target: &TargetGate) -> Result<()> {
    let dev = (target.adjoint() * target - TargetGate::identity())
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if dev > 1e-9 {
        return Err(Error::NonUnitary { deviation: dev });
    }
    Ok(())
}

/// Average population leaving the computational subspace,
/// `L = 1 − Tr(P E(P/4))`.
pub fn channel_leakage(channel: &Superoperator) -> Result<f64> {
    let s = channel.matrix();
    let mut kept = 0.0;
    for &i in &COMPUTATIONAL {
        for &a in &COMPUTATIONAL {
            kept += s[(vec_index(a, a), vec_index(i, i))].re;
        }
    }
    let l = 1.0 - kept / 4.0;
    if !(-1e-9..=1.0 + 1e-9).contains(&l) {
        return Err(Error::InvalidChannel(format!("leakage {l} outside [0, 1]")));
    }
    Ok(l)
}

/// Leakage of a unitary, `1 − Σ |<a|U|i>|² / 4` over computational `a, i`.
pub fn unitary_leakage(u: &PairUnitary) -> f64 {
    let mut kept = 0.0;
    for &i in &COMPUTATIONAL {
        for &a in &COMPUTATIONAL {
            kept += u.entry(a, i).norm_sqr();
        }
    }
    1.0 - kept / 4.0
}

/// `ζ = E11 − E10 − E01 + E00` of the dressed levels at the bias point (rad/s).
pub fn residual_zz(pair: &PairSpec) -> Result<f64> {
    let b = dressed_basis(pair)?;
    let e = &b.energies;
    Ok(e[IDX_11] - e[IDX_10] - e[IDX_01] + e[IDX_00])
}
