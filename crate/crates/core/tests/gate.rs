mod common;

use nalgebra::{Matrix2, Vector4};
use proptest::prelude::*;
use snz_core::channel::Superoperator;
use snz_core::device::Interaction;
use snz_core::gate::*;
use snz_core::linalg::{c, wrap_phase, Mat9, C64};
use snz_core::model::*;
use snz_core::noise::{simulate_waveform, NoiseLevel};
use snz_core::pulse::{make_snz, SnzParams};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

type M2 = Matrix2<C64>;

fn same_up_to_phase(a: &M2, b: &M2) -> bool {
    let t = (a.adjoint() * b).trace();
    (t.norm() - 2.0).abs() < 1e-9
}

// the 24 single-qubit Cliffords modulo phase, by closure under H and S
fn cliffords() -> Vec<M2> {
    let h = M2::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)) * c(FRAC_1_SQRT_2, 0.0);
    let s = M2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let mut group = vec![M2::identity()];
    let mut k = 0;
    while k < group.len() {
        for g in [h, s] {
            let next = g * group[k];
            if !group.iter().any(|m| same_up_to_phase(m, &next)) {
                group.push(next);
            }
        }
        k += 1;
    }
    group
}

// the 60 two-qubit stabilizer states: 36 products and 24 maximally
// entangled, amplitudes in the order 00, 01, 10, 11 (partner, fluxed)
fn stabilizer_states() -> Vec<Vector4<C64>> {
    let cl = cliffords();
    assert_eq!(cl.len(), 24);
    let mut singles: Vec<[C64; 2]> = Vec::new();
    for m in &cl {
        let v = [m[(0, 0)], m[(1, 0)]];
        let dup = singles.iter().any(|w| (w[0].conj() * v[0] + w[1].conj() * v[1]).norm() > 1.0 - 1e-9);
        if !dup {
            singles.push(v);
        }
    }
    assert_eq!(singles.len(), 6);
    let mut out = Vec::new();
    for p in &singles {
        for f in &singles {
            out.push(Vector4::new(p[0] * f[0], p[0] * f[1], p[1] * f[0], p[1] * f[1]));
        }
    }
    let r = c(FRAC_1_SQRT_2, 0.0);
    for m in &cl {
        // (C ⊗ I)|Φ+>, C acting on the partner
        out.push(Vector4::new(m[(0, 0)] * r, m[(0, 1)] * r, m[(1, 0)] * r, m[(1, 1)] * r));
    }
    assert_eq!(out.len(), 60);
    out
}

fn embed(v: &Vector4<C64>) -> [C64; 9] {
    let mut e = [c(0.0, 0.0); 9];
    for (k, &i) in COMPUTATIONAL.iter().enumerate() {
        e[i] = v[k];
    }
    e
}

fn projector(v: &[C64; 9]) -> Mat9 {
    Mat9::from_fn(|i, j| v[i] * v[j].conj())
}

fn brute_force_fidelity(channel: &Superoperator, target: &TargetGate) -> f64 {
    let states = stabilizer_states();
    let mut total = 0.0;
    for psi in &states {
        let out = channel.apply_matrix(&projector(&embed(psi)));
        let ideal = embed(&(target * psi));
        let mut f = c(0.0, 0.0);
        for i in 0..9 {
            for j in 0..9 {
                f += ideal[i].conj() * out[(i, j)] * ideal[j];
            }
        }
        total += f.re;
    }
    total / states.len() as f64
}

fn snz_unitary(a: f64, f: f64) -> PairUnitary {
    let cfg = common::device();
    let pair = cfg.pair("QL-QM2").unwrap();
    let ts = cfg.ts();
    let w = make_snz(&SnzParams::from_samples(a, f * a, 86, 4, ts), ts).unwrap();
    full_propagate(&pair, &w).unwrap()
}

#[test]
fn fidelity_matches_stabilizer_average_for_leaky_unitary() {
    let u = snz_unitary(1.01, 0.3);
    let p = extract_cp_params(&u).unwrap();
    assert!(unitary_leakage(&u) > 1e-4);
    for target in [ideal_cz(), cz_target(p.phi01, p.phi10), cz_target(0.3, -1.2)] {
        let s = Superoperator::from_unitary(&u);
        let brute = brute_force_fidelity(&s, &target);
        assert!((avg_gate_fidelity(&s, &target).unwrap() - brute).abs() < 1e-12);
        assert!((unitary_fidelity(&u, &target).unwrap() - brute).abs() < 1e-12);
    }
}

#[test]
fn fidelity_matches_stabilizer_average_for_noisy_channel() {
    let cfg = common::device();
    let pair = cfg.pair("QL-QM2").unwrap();
    let mut noise = cfg.noise("QL-QM2").unwrap();
    noise.fluxed.t1 = 2e-6;
    noise.partner.t1 = 3e-6;
    let ts = cfg.ts();
    let w = make_snz(&SnzParams::from_samples(1.0, 0.4, 86, 4, ts), ts).unwrap();
    let ch = simulate_waveform(&pair, &w, &noise, NoiseLevel::C).unwrap();
    let target = cz_target(0.7, 0.1);
    let brute = brute_force_fidelity(&ch, &target);
    assert!(brute < 0.99);
    assert!((avg_gate_fidelity(&ch, &target).unwrap() - brute).abs() < 1e-12);
}

#[test]
fn fidelity_of_depolarized_cz_matches_stabilizer_average() {
    let paulis = {
        let i = M2::identity();
        let x = M2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let y = M2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
        let z = M2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        [i, x, y, z]
    };
    let cz = ideal_cz();
    let p = 0.03;
    let mut parts = Vec::new();
    for (ka, a) in paulis.iter().enumerate() {
        for (kb, b) in paulis.iter().enumerate() {
            let mut m = Mat9::identity();
            for (r, &ir) in COMPUTATIONAL.iter().enumerate() {
                for (s, &is) in COMPUTATIONAL.iter().enumerate() {
                    let mut v = c(0.0, 0.0);
                    for t in 0..4 {
                        v += a[(r / 2, t / 2)] * b[(r % 2, t % 2)] * cz[(t, s)];
                    }
                    m[(ir, is)] = v;
                }
            }
            let w = if ka == 0 && kb == 0 { 1.0 - 15.0 * p / 16.0 } else { p / 16.0 };
            parts.push((w, Superoperator::from_unitary(&PairUnitary::new(m, Interaction::Avoided11_02).unwrap())));
        }
    }
    let ch = Superoperator::mixture(&parts).unwrap();
    let brute = brute_force_fidelity(&ch, &cz);
    assert!(brute < 0.99);
    assert!((avg_gate_fidelity(&ch, &cz).unwrap() - brute).abs() < 1e-12);
}

#[test]
fn ideal_snz_in_reduced_model_is_cz() {
    let pair = common::device().pair("QL-QM2").unwrap();
    let half = pair.t_lim() / 2.0;
    let u = reduced_pulse_unitary(&pair, &[(1.0, half), (-1.0, half)]).unwrap();
    let p = extract_cp_params(&u.embed(pair.interaction)).unwrap();
    assert!((p.phi2q.abs() - PI).abs() < 1e-9);
    assert!(p.leak_l1 < 1e-15);
}

#[test]
fn half_pulse_conditions() {
    let pair = common::device().pair("QL-QM2").unwrap();
    let half = reduced_pulse_unitary(&pair, &[(1.0, pair.t_lim() / 2.0)]).unwrap();
    let r = check_conditions(&half, 0.0).unwrap();
    assert!(r.lc3_residual < 1e-9 && r.pc_residual < 1e-9);
    assert!(r.satisfied.contains(&"PC".to_string()) && r.satisfied.contains(&"LC3".to_string()));
    // a full off-resonant oscillation reflects
    let delta = 0.6e9;
    let j = pair.j2;
    let t = 2.0 * PI / (delta * delta + 4.0 * j * j).sqrt();
    let refl = reduced_propagate(&[delta], &[t], j).unwrap();
    assert!(check_conditions(&refl, 0.3).unwrap().lc1_residual < 1e-9);
}

proptest! {
    #[test]
    fn construct_extract_round_trip(
        phi01 in -3.0f64..3.0,
        phi10 in -3.0f64..3.0,
        phi2q in -3.0f64..3.0,
        phi02 in -3.0f64..3.0,
        off in -3.0f64..3.0,
        l1 in 0.0f64..0.25,
        twenty in any::<bool>(),
    ) {
        let inter = if twenty { Interaction::Avoided11_20 } else { Interaction::Avoided11_02 };
        let p = CpGateParams { phi01, phi10, phi11: 0.0, phi2q, phi02, phi_offdiag: off, leak_l1: l1 };
        let u = construct_cp(&p, inter).unwrap();
        let q = extract_cp_params(&u).unwrap();
        for (a, b) in [(phi01, q.phi01), (phi10, q.phi10), (phi2q, q.phi2q), (phi02, q.phi02)] {
            prop_assert!(wrap_phase(a - b).abs() < 1e-10);
        }
        prop_assert!((q.leak_l1 - l1).abs() < 1e-10);
        if l1 > 1e-6 {
            prop_assert!(wrap_phase(off - q.phi_offdiag).abs() < 1e-8);
        }
    }

    #[test]
    fn embedded_reduced_unitary_leakage(theta in 0.0f64..PI, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (s, co) = theta.sin_cos();
        let m = M2::new(
            C64::from_polar(co, a),
            C64::from_polar(-s, -b),
            C64::from_polar(s, b),
            C64::from_polar(co, -a),
        );
        let u = ReducedUnitary::new(m).unwrap();
        let p = extract_cp_params(&u.embed(Interaction::Avoided11_02)).unwrap();
        prop_assert!((p.leak_l1 - s * s / 4.0).abs() < 1e-10);
        let r = check_conditions(&u, a - b).unwrap();
        prop_assert!(r.pc_residual >= 0.0 && r.pc_residual <= 2.0 + 1e-12);
    }
}

#[test]
fn residual_zz_vanishes_without_coupling() {
    let pair = common::device().pair("QM2-QH").unwrap().with_exchange(0.0);
    assert!(residual_zz(&pair).unwrap().abs() < 1e-3);
}

#[test]
fn residual_zz_matches_second_order_perturbation() {
    let cfg = common::device();
    for name in ["QM1-QH", "QM2-QH", "QL-QM1", "QL-QM2"] {
        let base = cfg.pair(name).unwrap();
        let g = 0.2 * base.exchange;
        let pair = base.with_exchange(g);
        let d = pair.fluxed.omega_sweet - pair.static_partner.omega_sweet;
        let (af, ap) = (pair.fluxed.anharm, pair.static_partner.anharm);
        let oracle = 2.0 * g * g * (1.0 / (d - ap) - 1.0 / (d + af));
        let zz = residual_zz(&pair).unwrap();
        assert!((zz - oracle).abs() < 0.2 * oracle.abs(), "{name}: {zz} vs {oracle}");
    }
}

#[test]
fn residual_zz_is_largest_for_high_frequency_pairs() {
    let cfg = common::device();
    let zz = |n: &str| residual_zz(&cfg.pair(n).unwrap()).unwrap().abs();
    let high = zz("QM1-QH").min(zz("QM2-QH"));
    let low = zz("QL-QM1").max(zz("QL-QM2"));
    assert!(high > low, "{high} vs {low}");
}
