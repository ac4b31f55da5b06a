//! Python module `snz`: device configuration, pulse construction, gate
//! metrics, calibration, error budgets and RB fitting.
//!
//! Structured results cross the boundary as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;
use snz_core::config::DeviceConfig;
use snz_core::device::PairSpec;
use snz_core::gate::{extract_cp_params, unitary_leakage};
use snz_core::landscape::{self, GateModel};
use snz_core::model::full_propagate;
use snz_core::noise::{self, Allocation};
use snz_core::pulse::{self, NzParams, SnzParams, Waveform};
use snz_core::rb::{self, CliffordError, DecayCurve, DecayModel};

fn err(e: snz_core::Error) -> PyErr {
    if e.is_computational() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn model(name: &str) -> PyResult<GateModel> {
    match name {
        "reduced" => Ok(GateModel::Reduced),
        "full" => Ok(GateModel::Full),
        _ => Err(PyValueError::new_err(format!("unknown model `{name}` (reduced or full)"))),
    }
}

/// Device description loaded from JSON.
#[pyclass(name = "Device", module = "snz", frozen)]
struct PyDevice {
    inner: DeviceConfig,
}

#[pymethods]
impl PyDevice {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: DeviceConfig::load(path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: DeviceConfig::from_json(text).map_err(err)?,
        })
    }

    /// AWG sample period in seconds.
    #[getter]
    fn ts(&self) -> f64 {
        self.inner.ts()
    }

    fn pairs(&self) -> Vec<String> {
        self.inner.pairs.keys().cloned().collect()
    }

    fn pair(&self, name: &str) -> PyResult<PyPair> {
        Ok(PyPair {
            inner: self.inner.pair(name).map_err(err)?,
        })
    }

    /// Configured SNZ idle for a pair in seconds, or None.
    fn t_mid(&self, name: &str) -> PyResult<Option<f64>> {
        self.inner.t_mid(name).map_err(err)
    }
}

/// Coupled pair: fluxed transmon, static partner and interaction.
#[pyclass(name = "Pair", module = "snz", frozen)]
#[derive(Clone)]
struct PyPair {
    inner: PairSpec,
}

#[pymethods]
impl PyPair {
    /// Speed limit `π/J₂` in seconds.
    #[getter]
    fn t_lim(&self) -> f64 {
        self.inner.t_lim()
    }

    #[getter]
    fn j2(&self) -> f64 {
        self.inner.j2
    }

    #[getter]
    fn delta_bias(&self) -> f64 {
        self.inner.delta_bias
    }

    #[getter]
    fn exchange(&self) -> f64 {
        self.inner.exchange
    }

    fn with_exchange(&self, g: f64) -> Self {
        Self {
            inner: self.inner.clone().with_exchange(g),
        }
    }

    fn residual_zz(&self) -> PyResult<f64> {
        snz_core::gate::residual_zz(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Pair(t_lim={:.3} ns, delta_bias/2π={:.4} GHz)",
            self.inner.t_lim() * 1e9,
            self.inner.delta_bias / (2.0 * std::f64::consts::PI) / 1e9
        )
    }
}

fn waveform(samples: Vec<f64>, ts: f64) -> PyResult<Waveform> {
    Waveform::new(samples, ts).map_err(err)
}

#[pyfunction]
fn choose_tp(t_lim: f64, ts: f64) -> PyResult<f64> {
    pulse::choose_tp(t_lim, ts).map_err(err)
}

#[pyfunction]
fn choose_tp_samples(t_lim: f64, ts: f64) -> PyResult<usize> {
    pulse::choose_tp_samples(t_lim, ts).map_err(err)
}

/// SNZ samples: half pulses of `±a` with `±b` edge samples around an idle.
#[pyfunction]
fn make_snz(a: f64, b: f64, tp: f64, t_mid: f64, ts: f64) -> PyResult<Vec<f64>> {
    Ok(pulse::make_snz(&SnzParams::new(a, b, tp, t_mid), ts).map_err(err)?.samples().to_vec())
}

#[pyfunction]
fn make_nz(a: f64, a_curve: f64, tp: f64, ts: f64) -> PyResult<Vec<f64>> {
    Ok(pulse::make_nz(&NzParams { a, a_curve, tp }, ts).map_err(err)?.samples().to_vec())
}

/// `(φ2Q, L₁)` of a flux waveform.
#[pyfunction]
#[pyo3(signature = (pair, samples, ts, model = "full"))]
fn gate_metrics(pair: &PyPair, samples: Vec<f64>, ts: f64, model: &str) -> PyResult<(f64, f64)> {
    landscape::gate_metrics(&pair.inner, self::model(model)?, &waveform(samples, ts)?).map_err(err)
}

/// Controlled-phase parameters of the full-model unitary, plus its leakage.
#[pyfunction]
fn cp_params<'py>(py: Python<'py>, pair: &PyPair, samples: Vec<f64>, ts: f64) -> PyResult<Bound<'py, PyAny>> {
    let u = full_propagate(&pair.inner, &waveform(samples, ts)?).map_err(err)?;
    let p = extract_cp_params(&u).map_err(err)?;
    let d = to_py(py, &p)?;
    d.set_item("leakage", unitary_leakage(&u))?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (pair, amplitudes, max_samples, ts, model = "full"))]
fn simulate_chevron<'py>(
    py: Python<'py>,
    pair: &PyPair,
    amplitudes: Vec<f64>,
    max_samples: usize,
    ts: f64,
    model: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let map = landscape::simulate_chevron(&pair.inner, self::model(model)?, &amplitudes, max_samples, ts).map_err(err)?;
    to_py(py, &map)
}

/// Fit of a chevron dict as returned by `simulate_chevron`.
#[pyfunction]
fn chevron_fit<'py>(py: Python<'py>, chevron: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let map: landscape::ChevronMap = from_py(chevron)?;
    to_py(py, &landscape::chevron_fit(&map).map_err(err)?)
}

/// SNZ calibration along the 180° contour. With `slot` the pulse is padded
/// to that allocation.
#[pyfunction]
#[pyo3(signature = (pair, tp, t_mid, ts, budget = 600, model = "full", slot = None))]
#[allow(clippy::too_many_arguments)]
fn calibrate_snz<'py>(
    py: Python<'py>,
    pair: &PyPair,
    tp: f64,
    t_mid: f64,
    ts: f64,
    budget: usize,
    model: &str,
    slot: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let m = self::model(model)?;
    let cal = py
        .allow_threads(|| match slot {
            Some(s) => landscape::calibrate_snz_in_slot(&pair.inner, m, tp, t_mid, ts, budget, s),
            None => landscape::calibrate_snz(&pair.inner, m, tp, t_mid, ts, budget, None),
        })
        .map_err(err)?;
    to_py(py, &cal)
}

#[pyfunction]
#[pyo3(signature = (pair, tp, ts, budget = 600, model = "full", slot = None))]
fn calibrate_nz<'py>(
    py: Python<'py>,
    pair: &PyPair,
    tp: f64,
    ts: f64,
    budget: usize,
    model: &str,
    slot: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let m = self::model(model)?;
    let cal = py
        .allow_threads(|| match slot {
            Some(s) => landscape::calibrate_nz_in_slot(&pair.inner, m, tp, ts, budget, s),
            None => landscape::calibrate_nz(&pair.inner, m, tp, ts, budget),
        })
        .map_err(err)?;
    to_py(py, &cal)
}

/// SNZ and NZ error budgets for a configured pair. `snz` and `nz` are the
/// `params` dicts of the calibrations.
#[pyfunction]
#[pyo3(signature = (device, pair, snz, nz, null_phases = true, noiseless = false, n_quasistatic = None, flux_noise_sigma = None))]
#[allow(clippy::too_many_arguments)]
fn error_budget<'py>(
    py: Python<'py>,
    device: &PyDevice,
    pair: &str,
    snz: &Bound<'py, PyAny>,
    nz: &Bound<'py, PyAny>,
    null_phases: bool,
    noiseless: bool,
    n_quasistatic: Option<usize>,
    flux_noise_sigma: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = &device.inner;
    let spec = cfg.pair(pair).map_err(err)?;
    let mut nc = if noiseless {
        noise::NoiseConfig::noiseless()
    } else {
        cfg.noise(pair).map_err(err)?
    };
    if let Some(n) = n_quasistatic {
        nc.n_quasistatic = n;
    }
    if flux_noise_sigma.is_some() {
        nc.flux_noise_sigma = flux_noise_sigma;
    }
    let snz: SnzParams = from_py(snz)?;
    let nz: NzParams = from_py(nz)?;
    let ts = cfg.ts();
    let budgets = py
        .allow_threads(|| noise::error_budget(&spec, &snz, &nz, &nc, ts, &Allocation::default(), null_phases))
        .map_err(err)?;
    to_py(py, &[budgets.0, budgets.1])
}

/// Synthetic reference and interleaved decay curves as dicts with keys
/// `n_cliffords`, `m0`, `chi1`, `shots`.
#[pyfunction]
#[pyo3(signature = (fidelity, leakage, n_cliffords, shots = 2000, seed = 0, ratio = rb::DEFAULT_CLIFFORD_RATIO))]
fn synth_decays<'py>(
    py: Python<'py>,
    fidelity: f64,
    leakage: f64,
    n_cliffords: Vec<u32>,
    shots: u32,
    seed: u64,
    ratio: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let gate = CliffordError { fidelity, leakage };
    let (r, i) = rb::synth_decays(gate, gate.scaled(ratio), &n_cliffords, shots, seed).map_err(err)?;
    to_py(py, &(r, i))
}

/// Fits both curves and returns `{"reference", "interleaved", "gate"}`.
#[pyfunction]
#[pyo3(signature = (reference, interleaved, model = "constrained"))]
fn fit_interleaved<'py>(
    py: Python<'py>,
    reference: &Bound<'py, PyAny>,
    interleaved: &Bound<'py, PyAny>,
    model: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let m = match model {
        "constrained" => DecayModel::Constrained,
        "free" => DecayModel::Free,
        _ => return Err(PyValueError::new_err(format!("unknown decay model `{model}`"))),
    };
    let curve = |obj: &Bound<'py, PyAny>| -> PyResult<DecayCurve> {
        let c: DecayCurve = from_py(obj)?;
        DecayCurve::new(c.n_cliffords, c.m0, c.chi1, c.shots).map_err(err)
    };
    let fr = rb::fit_decay(&curve(reference)?, m).map_err(err)?;
    let fi = rb::fit_decay(&curve(interleaved)?, m).map_err(err)?;
    let gate = rb::interleaved_extract(&fr, &fi);
    let out = pyo3::types::PyDict::new(py);
    out.set_item("reference", to_py(py, &fr)?)?;
    out.set_item("interleaved", to_py(py, &fi)?)?;
    out.set_item("gate", to_py(py, &gate)?)?;
    Ok(out.into_any())
}

#[pymodule]
fn snz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDevice>()?;
    m.add_class::<PyPair>()?;
    m.add("DEFAULT_TS", snz_core::DEFAULT_TS)?;
    m.add("LEAKAGE_FLOOR", landscape::LEAKAGE_FLOOR)?;
    m.add_function(wrap_pyfunction!(choose_tp, m)?)?;
    m.add_function(wrap_pyfunction!(choose_tp_samples, m)?)?;
    m.add_function(wrap_pyfunction!(make_snz, m)?)?;
    m.add_function(wrap_pyfunction!(make_nz, m)?)?;
    m.add_function(wrap_pyfunction!(gate_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(cp_params, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_chevron, m)?)?;
    m.add_function(wrap_pyfunction!(chevron_fit, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_snz, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_nz, m)?)?;
    m.add_function(wrap_pyfunction!(error_budget, m)?)?;
    m.add_function(wrap_pyfunction!(synth_decays, m)?)?;
    m.add_function(wrap_pyfunction!(fit_interleaved, m)?)?;
    Ok(())
}
