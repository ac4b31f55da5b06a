"""Smoke test of the snz Python module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""
import math
import pathlib

import snz

ROOT = pathlib.Path(__file__).resolve().parent.parent
dev = snz.Device.load(str(ROOT / "configs" / "device_table_s1.json"))
ts = dev.ts
pair = dev.pair("QL-QM2")
print(pair)

# grid rule
assert snz.choose_tp_samples(pair.t_lim, ts) == 86

# ideal SNZ in the reduced model is a CZ without leakage
tp = snz.choose_tp(pair.t_lim, ts)
w = snz.make_snz(1.0, 0.0, tp, 2 * ts, ts)
assert abs(sum(w)) < 1e-12
phi, leak = snz.gate_metrics(pair, w, ts, model="reduced")
print(f"uncalibrated SNZ: phi2Q = {math.degrees(phi):.2f} deg, L1 = {leak:.2e}")

cal = snz.calibrate_snz(pair, tp, 2 * ts, ts, budget=300, model="reduced")
best = cal["report"]["best"]
print(f"calibrated: A = {cal['a_star']:.6f}, B = {cal['b_star']:.6f}, L1 = {best['leakage']:.2e}")
assert abs(abs(best["phi2q"]) - math.pi) < 1e-6
assert best["leakage"] < 1e-6

p = snz.cp_params(pair, snz.make_snz(cal["a_star"], cal["b_star"], tp, 2 * ts, ts), ts)
print(f"full model at that point: phi2Q = {math.degrees(p['phi2q']):.2f} deg, leakage = {p['leakage']:.2e}")

# chevron
amps = [0.99 + 0.001 * k for k in range(21)]
fit = snz.chevron_fit(snz.simulate_chevron(pair, amps, 240, ts, model="reduced"))
print(f"chevron: a_res = {fit['a_res']:.5f}, t_lim = {fit['t_lim_fit'] * 1e9:.3f} ns")
assert abs(fit["t_lim_fit"] - 35.40e-9) < 0.01 * 35.40e-9

# noiseless budget is flat
nz = snz.calibrate_nz(pair, 110 * ts, ts, budget=400, slot=60e-9)
snz_in_slot = snz.calibrate_snz(pair, tp, 2 * ts, ts, budget=300, slot=60e-9)
budgets = snz.error_budget(dev, "QL-QM2", snz_in_slot["params"], nz["params"], noiseless=True)
for b in budgets:
    eps = [e["infidelity"] for e in b["entries"]]
    assert max(eps) - min(eps) < 1e-12, eps
    print(f"{b['scheme']} noiseless infidelity {100 * eps[0]:.4f} %")

# RB round trip
ref, inter = snz.synth_decays(0.9993, 0.001, list(range(1, 61)), shots=2000, seed=1)
res = snz.fit_interleaved(ref, inter)["gate"]
print(f"IRB: F = {100 * res['fidelity']['value']:.3f} %, L1 = {100 * res['leakage']['value']:.3f} %")
assert abs(res["fidelity"]["value"] - 0.9993) < 0.0024
assert abs(res["leakage"]["value"] - 0.001) < 0.0005

# errors map to Python exceptions
try:
    dev.pair("nope")
except ValueError as e:
    print("bad pair:", e)
else:
    raise AssertionError("expected ValueError")

print("smoke test passed")
