use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const DEVICE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/device_table_s1.json");

fn snz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snz")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = snz(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn dir(t: &tempfile::TempDir, name: &str) -> PathBuf {
    t.path().join(name)
}

#[test]
fn chevron_grid_and_adaptive_agree() {
    let t = tempfile::tempdir().unwrap();
    let (g, a) = (dir(&t, "grid"), dir(&t, "adaptive"));
    let common = ["chevron", "--device", DEVICE, "--pair", "QL-QM2"];
    ok(&[&common[..], &["--out", g.to_str().unwrap(), "--grid", "32x32"]].concat());
    ok(&[&common[..], &["--out", a.to_str().unwrap(), "--budget", "1000"]].concat());
    let fg = json(g.join("chevron_fit.json"));
    let fa = json(a.join("chevron_fit.json"));
    let res = |v: &Value| v["fit"]["a_res"].as_f64().unwrap();
    assert!((res(&fg) - res(&fa)).abs() < 0.005);
    for f in [&fg, &fa] {
        let t_lim = f["fit"]["t_lim_fit"].as_f64().unwrap();
        assert!((t_lim - 35.40e-9).abs() < 0.01 * 35.40e-9, "{t_lim:e}");
    }
    assert!(g.join("chevron.csv").exists() && a.join("chevron_samples.csv").exists());
}

#[test]
fn uncoupled_chevron_is_a_computational_failure() {
    let t = tempfile::tempdir().unwrap();
    let mut cfg = json(DEVICE);
    cfg["pairs"]["QL-QM2"]["exchange_MHz"] = 0.0.into();
    let device = dir(&t, "device.json");
    std::fs::write(&device, cfg.to_string()).unwrap();
    let out = snz(&[
        "chevron",
        "--device",
        device.to_str().unwrap(),
        "--pair",
        "QL-QM2",
        "--out",
        dir(&t, "o").to_str().unwrap(),
        "--grid",
        "9x60",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fit failed"));
}

fn calibrate(t: &tempfile::TempDir, name: &str, offset: &str) -> Value {
    let out = dir(t, name);
    ok(&[
        "calibrate",
        "--device",
        DEVICE,
        "--pair",
        "QL-QM2",
        "--model",
        "reduced",
        "--out",
        out.to_str().unwrap(),
        // two samples
        "--t-mid-ns",
        "0.8333333333333334",
        &format!("--tp-offset={offset}"),
    ]);
    assert!(out.join("contour.csv").exists() && out.join("trace.csv").exists());
    json(out.join("calibration.json"))
}

#[test]
fn calibration_reports_speed_limit_and_minima() {
    let t = tempfile::tempdir().unwrap();
    let matched = calibrate(&t, "matched", "0");
    assert!(matched["leakage"].as_f64().unwrap() < 1e-4);
    assert!((matched["phi2q_deg"].as_f64().unwrap().abs() - 180.0).abs() < 1e-3);
    let short = calibrate(&t, "short", "-6");
    assert_eq!(short["speed_limit_violation"], true);
    let long = calibrate(&t, "long", "6");
    assert_eq!(long["speed_limit_violation"], false);
    assert_eq!(long["minima"].as_array().unwrap().len(), 2);
}

#[test]
fn landscape_writes_both_fields_and_the_contour() {
    let t = tempfile::tempdir().unwrap();
    let out = dir(&t, "l");
    ok(&["landscape", "--device", DEVICE, "--pair", "QL-QM2", "--out", out.to_str().unwrap(), "--budget", "300"]);
    for f in ["landscape_phi2q.csv", "landscape_leakage.csv", "contour.csv"] {
        let rows = std::fs::read_to_string(out.join(f)).unwrap().lines().count();
        assert!(rows > 1, "{f}");
    }
}

#[test]
fn noiseless_budget_is_flat() {
    let t = tempfile::tempdir().unwrap();
    let out = dir(&t, "b");
    ok(&[
        "budget", "--device", DEVICE, "--pair", "QL-QM2", "--out", out.to_str().unwrap(), "--budget", "400", "--noiseless",
    ]);
    let b = json(out.join("budget.json"));
    assert_eq!(b["monotone"], true);
    for budget in b["budgets"].as_array().unwrap() {
        let entries = budget["entries"].as_array().unwrap();
        assert_eq!(entries.len(), 5);
        let first = &entries[0];
        for e in entries {
            for k in ["infidelity", "leakage"] {
                assert!((e[k].as_f64().unwrap() - first[k].as_f64().unwrap()).abs() < 1e-12);
            }
        }
    }
    let rows = std::fs::read_to_string(out.join("budget.csv")).unwrap().lines().count();
    assert_eq!(rows, 11);
}

#[test]
fn rbfit_round_trip_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir(&t, "a"), dir(&t, "b"), dir(&t, "c"));
    ok(&["rbfit", "--synth", "--seed", "3", "--out", a.to_str().unwrap()]);
    ok(&["rbfit", "--synth", "--seed", "3", "--out", b.to_str().unwrap()]);
    let read = |p: &Path| std::fs::read(p.join("rb_fit.json")).unwrap();
    assert_eq!(read(&a), read(&b));

    let gate = &json(a.join("rb_fit.json"))["gate"];
    assert!((gate["fidelity"]["value"].as_f64().unwrap() - 0.9993).abs() < 0.0024);
    assert!((gate["leakage"]["value"].as_f64().unwrap() - 0.001).abs() < 0.0005);

    // refitting the written curves reproduces the result
    ok(&[
        "rbfit",
        "--reference",
        a.join("reference.csv").to_str().unwrap(),
        "--interleaved",
        a.join("interleaved.csv").to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(json(c.join("rb_fit.json"))["gate"], *gate);
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(snz(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(snz(&["rbfit"]).status.code(), Some(1));
    let t = tempfile::tempdir().unwrap();
    let out = snz(&["landscape", "--device", DEVICE, "--pair", "QX-QY", "--out", dir(&t, "x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = snz(&["landscape", "--device", "/nonexistent.json", "--pair", "QL-QM2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(snz(&["--help"]).status.success());
}
