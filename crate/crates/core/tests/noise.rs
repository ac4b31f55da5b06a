mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snz_core::config::DeviceConfig;
use snz_core::device::PairSpec;
use snz_core::gate::*;
use snz_core::landscape::{calibrate_snz_in_slot, GateModel};
use snz_core::model::full_propagate_lines;
use snz_core::noise::*;
use snz_core::pulse::*;
use std::sync::OnceLock;

const PAIR: &str = "QL-QM2";

fn setup() -> (DeviceConfig, PairSpec) {
    let cfg = common::device();
    let pair = cfg.pair(PAIR).unwrap();
    (cfg, pair)
}

// SNZ calibrated in the full model inside the default allocation
fn calibrated() -> &'static Schedule {
    static S: OnceLock<Schedule> = OnceLock::new();
    S.get_or_init(|| {
        let (cfg, pair) = setup();
        let ts = cfg.ts();
        let cal = calibrate_snz_in_slot(&pair, GateModel::Full, 86.0 * ts, 2.0 * ts, ts, 300, 60e-9).unwrap();
        let strong = make_snz(&cal.params, ts).unwrap();
        gate_schedule(&strong, (0.0, 0.0), &Allocation::default()).unwrap()
    })
}

fn small_noise(cfg: &DeviceConfig) -> NoiseConfig {
    let mut n = cfg.noise(PAIR).unwrap();
    n.n_quasistatic = 5;
    // QM2 has no off-sweetspot coherence data to infer σ from
    n.flux_noise_sigma = Some(2e-5);
    n
}

#[test]
fn every_level_emits_a_valid_channel() {
    let (cfg, pair) = setup();
    let noise = small_noise(&cfg);
    let ts = cfg.ts();
    let pulses = [
        calibrated().clone(),
        Schedule::fluxed_only(make_square(1.0, 85.0 * ts, ts).unwrap()),
        Schedule::fluxed_only(make_nz(&NzParams { a: 1.1, a_curve: 1.0, tp: 110.0 * ts }, ts).unwrap()),
    ];
    for s in &pulses {
        for level in NoiseLevel::ALL {
            let ch = simulate_channel(&pair, s, &noise, level).unwrap();
            assert!(ch.min_choi_eigenvalue() >= -1e-9, "{level:?}");
            assert!(ch.trace_deviation() <= 1e-9, "{level:?}");
        }
    }
}

#[test]
fn level_b_without_relaxation_is_level_a() {
    let (cfg, pair) = setup();
    let mut noise = small_noise(&cfg);
    noise.fluxed.t1 = f64::INFINITY;
    noise.partner.t1 = f64::INFINITY;
    let s = calibrated();
    let a = simulate_channel(&pair, s, &noise, NoiseLevel::A).unwrap();
    let b = simulate_channel(&pair, s, &noise, NoiseLevel::B).unwrap();
    let diff = (a.matrix() - b.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn flux_noise_raises_leakage_of_a_full_oscillation() {
    let (cfg, pair) = setup();
    let ts = cfg.ts();
    let mut noise = small_noise(&cfg);
    // detuning spread of about J₂/10 at the resonance
    let slope = pair.fluxed.frequency_slope(pair.flux(1.0)).abs();
    noise.flux_noise_sigma = Some(0.1 * pair.j2 / slope);
    noise.n_quasistatic = 21;
    let w = make_square(1.0, 85.0 * ts, ts).unwrap();
    let c = channel_leakage(&simulate_waveform(&pair, &w, &noise, NoiseLevel::C).unwrap()).unwrap();
    let d = channel_leakage(&simulate_waveform(&pair, &w, &noise, NoiseLevel::D).unwrap()).unwrap();
    assert!(d > c, "{d} vs {c}");
}

#[test]
fn quasistatic_average_limits() {
    let f = |x: f64| Ok(3.0 + 2.0 * x);
    assert_eq!(quasistatic_average(f, 0.0, 1, 5).unwrap(), 3.0);
    let (sigma, n) = (0.7, 101);
    let m: f64 = quasistatic_average(f, sigma, n, 5).unwrap();
    assert!((m - 3.0).abs() <= 3.0 * 2.0 * sigma / (n as f64).sqrt());
}

#[test]
fn fixed_seed_is_reproducible() {
    let (cfg, pair) = setup();
    let mut noise = small_noise(&cfg);
    let s = calibrated();
    let a = simulate_channel(&pair, s, &noise, NoiseLevel::D).unwrap();
    let b = simulate_channel(&pair, s, &noise, NoiseLevel::D).unwrap();
    assert_eq!(a.matrix(), b.matrix());
    noise.seed += 1;
    let c = simulate_channel(&pair, s, &noise, NoiseLevel::D).unwrap();
    assert_ne!(a.matrix(), c.matrix());
}

#[test]
fn noiseless_budget_is_flat() {
    let (_, pair) = setup();
    let b = schedule_budget(&pair, "SNZ", calibrated(), &NoiseConfig::noiseless()).unwrap();
    let a = b.entry(NoiseLevel::A).unwrap();
    for e in &b.entries {
        assert!((e.infidelity - a.infidelity).abs() < 1e-12, "{:?}", e.level);
        assert!((e.leakage - a.leakage).abs() < 1e-12);
    }
}

#[test]
fn level_a_entry_is_the_unitary_gate_error() {
    let (cfg, pair) = setup();
    let s = calibrated();
    let b = schedule_budget(&pair, "SNZ", s, &small_noise(&cfg)).unwrap();
    let u = full_propagate_lines(&pair, s.fluxed.samples(), s.partner.as_ref().map(|p| p.samples()), cfg.ts()).unwrap();
    let p = extract_cp_params(&u).unwrap();
    let a = b.entry(NoiseLevel::A).unwrap();
    assert!((a.infidelity - (1.0 - unitary_fidelity(&u, &cz_target(p.phi01, p.phi10)).unwrap())).abs() < 1e-12);
    assert!((a.leakage - unitary_leakage(&u)).abs() < 1e-12);
    assert!(b.dissipative_levels_monotone(0.0));
}

fn random_table(rng: &mut ChaCha8Rng, omega: f64) -> DephasingTable {
    DephasingTable::new(vec![
        (omega, rng.random_range(20e-6..100e-6)),
        (0.97 * omega, rng.random_range(3e-6..20e-6)),
    ])
    .unwrap()
}

#[test]
fn dissipation_never_helps() {
    let (cfg, pair) = setup();
    let s = calibrated();
    let u = full_propagate_lines(&pair, s.fluxed.samples(), s.partner.as_ref().map(|p| p.samples()), cfg.ts()).unwrap();
    let p = extract_cp_params(&u).unwrap();
    let target = cz_target(p.phi01, p.phi10);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut transmon = |omega: f64| TransmonNoise {
            t1: rng.random_range(5e-6..100e-6),
            t2_echo: Some(random_table(&mut rng, omega)),
            t2_star: None,
        };
        let noise = NoiseConfig::new(
            transmon(pair.fluxed.omega_sweet),
            transmon(pair.static_partner.omega_sweet),
            Some(0.0),
            DistortionModel::default(),
            1,
            0,
        )
        .unwrap();
        let eps: Vec<f64> = [NoiseLevel::A, NoiseLevel::B, NoiseLevel::C]
            .iter()
            .map(|&l| 1.0 - avg_gate_fidelity(&simulate_channel(&pair, s, &noise, l).unwrap(), &target).unwrap())
            .collect();
        assert!(eps[0] <= eps[1] && eps[1] <= eps[2], "{eps:?}");
    }
}
