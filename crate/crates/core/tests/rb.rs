use snz_core::rb::*;
use snz_core::Error;

fn n_list() -> Vec<u32> {
    (1..=60).collect()
}

fn fig4_gate() -> CliffordError {
    CliffordError {
        fidelity: 0.9993,
        leakage: 0.001,
    }
}

#[test]
fn ideal_inputs_give_flat_curves() {
    let ideal = CliffordError {
        fidelity: 1.0,
        leakage: 0.0,
    };
    let (r, i) = synth_decays(ideal, ideal, &n_list(), 0, 1).unwrap();
    for c in [r, i] {
        assert!(c.m0.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(c.chi1.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }
}

#[test]
fn noiseless_curves_follow_the_model() {
    let gate = fig4_gate();
    let reference = gate.scaled(DEFAULT_CLIFFORD_RATIO);
    let (r, _) = synth_decays(gate, reference, &[0, 5, 10], 0, 3).unwrap();
    let p = reference.depolarizing();
    let l = reference.leakage_decay();
    for (k, &n) in r.n_cliffords.iter().enumerate() {
        let chi = l.powi(n as i32);
        assert!((r.chi1[k] - chi).abs() < 1e-15);
        assert!((r.m0[k] - (chi / 4.0 + 0.75 * p.powi(n as i32))).abs() < 1e-15);
    }
}

#[test]
fn synthesis_is_deterministic_per_seed() {
    let gate = fig4_gate();
    let reference = gate.scaled(DEFAULT_CLIFFORD_RATIO);
    let a = synth_decays(gate, reference, &n_list(), 2000, 9).unwrap();
    let b = synth_decays(gate, reference, &n_list(), 2000, 9).unwrap();
    let c = synth_decays(gate, reference, &n_list(), 2000, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}

#[test]
fn interleaved_decays_slower_than_reference() {
    let gate = fig4_gate();
    let reference = gate.scaled(DEFAULT_CLIFFORD_RATIO);
    let (r, i) = synth_decays(gate, reference, &n_list(), 0, 0).unwrap();
    // per reference-length decay: the interleaved sequence carries one
    // extra gate, so its per-Clifford decay is the product; the reference
    // Clifford alone decays faster than the gate alone
    let fr = fit_decay(&r, DecayModel::Constrained).unwrap();
    let fi = fit_decay(&i, DecayModel::Constrained).unwrap();
    let gate_p = fi.p / fr.p;
    assert!(1.0 - gate_p < 1.0 - fr.p);
    assert!(i.m0.last().unwrap() < r.m0.last().unwrap());
}

#[test]
fn noiseless_fit_recovers_parameters() {
    let gate = fig4_gate();
    let reference = gate.scaled(DEFAULT_CLIFFORD_RATIO);
    let (r, _) = synth_decays(gate, reference, &n_list(), 0, 0).unwrap();
    for model in [DecayModel::Constrained, DecayModel::Free] {
        let fit = fit_decay(&r, model).unwrap();
        assert!((fit.p - reference.depolarizing()).abs() < 1e-9, "{model:?} p {}", fit.p);
        assert!((fit.lambda1 - reference.leakage_decay()).abs() < 1e-9, "{model:?} λ {}", fit.lambda1);
        assert!((fit.leakage - reference.leakage).abs() < 1e-9);
    }
}

#[test]
fn uniform_shot_rescaling_keeps_noiseless_estimates() {
    let gate = fig4_gate();
    let reference = gate.scaled(3.0);
    let (r, _) = synth_decays(gate, reference, &n_list(), 0, 0).unwrap();
    let mut a = r.clone();
    a.shots = vec![1000; a.len()];
    let mut b = r.clone();
    b.shots = vec![7000; b.len()];
    let fa = fit_decay(&a, DecayModel::Constrained).unwrap();
    let fb = fit_decay(&b, DecayModel::Constrained).unwrap();
    assert!((fa.p - fb.p).abs() < 1e-9);
    assert!((fa.lambda1 - fb.lambda1).abs() < 1e-9);
    assert!(fb.stderr[0] < fa.stderr[0]);
}

#[test]
fn constant_curve_is_flagged() {
    let n: Vec<u32> = (1..=10).collect();
    let c = DecayCurve::new(n.clone(), vec![0.9; 10], vec![0.98; 10], vec![0; 10]).unwrap();
    match fit_decay(&c, DecayModel::Constrained) {
        Ok(fit) => assert!(fit.at_boundary),
        Err(e) => assert!(matches!(e, Error::FitFailed(_) | Error::IllConditioned { .. })),
    }
}

#[test]
fn too_few_points_fail() {
    let c = DecayCurve::new(vec![1, 2, 3], vec![0.9; 3], vec![0.9; 3], vec![100; 3]).unwrap();
    assert!(matches!(fit_decay(&c, DecayModel::Constrained), Err(Error::FitFailed(_))));
}

#[test]
fn identical_curves_give_unit_fidelity() {
    let gate = fig4_gate();
    let reference = gate.scaled(DEFAULT_CLIFFORD_RATIO);
    let (r, _) = synth_decays(gate, reference, &n_list(), 2000, 4).unwrap();
    let fit = fit_decay(&r, DecayModel::Constrained).unwrap();
    let res = interleaved_extract(&fit, &fit);
    assert!((res.fidelity.value - 1.0).abs() < 1e-12);
    assert!(res.leakage.value.abs() < 1e-12);
    assert!(!res.invalid_ratio);
}

#[test]
fn seepage_gives_negative_leakage() {
    let gate = CliffordError {
        fidelity: 0.999,
        leakage: -0.0005,
    };
    let reference = CliffordError {
        fidelity: 0.99,
        leakage: 0.004,
    };
    let (r, i) = synth_decays(gate, reference, &n_list(), 0, 0).unwrap();
    let res = interleaved_extract(
        &fit_decay(&r, DecayModel::Constrained).unwrap(),
        &fit_decay(&i, DecayModel::Constrained).unwrap(),
    );
    assert!((res.leakage.value + 0.0005).abs() < 1e-9, "{:?}", res.leakage);
}

#[test]
fn faster_interleaved_decay_is_flagged() {
    let reference = CliffordError {
        fidelity: 0.99,
        leakage: 0.0,
    };
    let (r, _) = synth_decays(reference, reference, &n_list(), 0, 0).unwrap();
    let slower = CliffordError {
        fidelity: 0.995,
        leakage: 0.0,
    };
    let (i, _) = synth_decays(slower, slower, &n_list(), 0, 0).unwrap();
    let res = interleaved_extract(
        &fit_decay(&r, DecayModel::Constrained).unwrap(),
        &fit_decay(&i, DecayModel::Constrained).unwrap(),
    );
    assert!(res.invalid_ratio);
}

#[test]
fn csv_round_trip() {
    let gate = fig4_gate();
    let (r, _) = synth_decays(gate, gate.scaled(1.5), &[1, 4, 9], 500, 2).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("n_cliffords,m0,chi1,shots"));
    assert_eq!(DecayCurve::read_csv(&buf[..]).unwrap(), r);
}

// Monte Carlo coverage of the quoted standard errors at 2000 shots.
#[test]
fn standard_errors_cover_truth() {
    let gate = fig4_gate();
    let reference = gate.scaled(DEFAULT_CLIFFORD_RATIO);
    let trials = 500;
    let mut inside = [0usize; 2];
    for seed in 0..trials {
        let (r, _) = synth_decays(gate, reference, &n_list(), 2000, seed).unwrap();
        let fit = fit_decay(&r, DecayModel::Constrained).unwrap();
        if (fit.p - reference.depolarizing()).abs() <= 3.0 * fit.stderr[0] {
            inside[0] += 1;
        }
        if (fit.leakage - reference.leakage).abs() <= 3.0 * fit.stderr[2] {
            inside[1] += 1;
        }
    }
    for k in inside {
        assert!(k as f64 >= 0.99 * trials as f64, "coverage {k}/{trials}");
    }
}
