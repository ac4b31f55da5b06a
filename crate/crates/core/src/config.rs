//! Device description loaded from JSON.
//!
//! ```json
//! {
//!   "ts_ns": 0.4166666666666667,
//!   "transmons": {
//!     "QH": { "omega_sweet_GHz": 6.4329, "anharm_MHz": -280, "t1_us": 37,
//!             "t2_echo_table": [[6.4329, 54.0], [6.35, 20.0]],
//!             "t2_star_table": [[6.4329, 38.0], [6.35, 6.0]] }
//!   },
//!   "pairs": {
//!     "QM2-QH": { "fluxed": "QH", "static": "QM2", "tlim_ns": 29.0,
//!                 "interaction": "11-02", "t_mid_ns": 3.75 }
//!   },
//!   "noise": { "flux_noise_sigma": null, "n_quasistatic": 101, "seed": 0,
//!              "distortion": [{ "amplitude": 0.002, "tau_ns": 40 }] }
//! }
//! ```
//!
//! Frequencies are in GHz (`/2π`), anharmonicities and couplings in MHz,
//! times in ns or µs as suffixed. Pairs give either `tlim_ns` or `j2_MHz`;
//! `delta_bias_GHz` defaults to the value implied by the two transmons and
//! the interaction. Table rows are `[frequency_GHz, time_us]`.

use crate::device::{Interaction, PairSpec, TransmonSpec};
use crate::noise::{DephasingTable, NoiseConfig, TransmonNoise};
use crate::pulse::{DistortionModel, DistortionTerm};
use crate::{angular, Error, Result, DEFAULT_TS};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonEntry {
    #[serde(rename = "omega_sweet_GHz")]
    pub omega_sweet_ghz: f64,
    #[serde(rename = "anharm_MHz")]
    pub anharm_mhz: f64,
    #[serde(default)]
    pub t1_us: Option<f64>,
    #[serde(default)]
    pub t2_echo_table: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub t2_star_table: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub fluxed: String,
    #[serde(rename = "static")]
    pub static_partner: String,
    #[serde(default)]
    pub tlim_ns: Option<f64>,
    #[serde(default, rename = "j2_MHz")]
    pub j2_mhz: Option<f64>,
    #[serde(default, rename = "delta_bias_GHz")]
    pub delta_bias_ghz: Option<f64>,
    pub interaction: Interaction,
    /// Idle between the SNZ halves used by calibration and budget commands.
    #[serde(default)]
    pub t_mid_ns: Option<f64>,
    /// Full-model exchange coupling; derived from the gap when absent.
    #[serde(default, rename = "exchange_MHz")]
    pub exchange_mhz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionEntry {
    pub amplitude: f64,
    pub tau_ns: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseEntry {
    #[serde(default)]
    pub flux_noise_sigma: Option<f64>,
    #[serde(default = "default_quasistatic")]
    pub n_quasistatic: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub distortion: Vec<DistortionEntry>,
}

fn default_quasistatic() -> usize {
    101
}

impl Default for NoiseEntry {
    fn default() -> Self {
        Self {
            flux_noise_sigma: None,
            n_quasistatic: default_quasistatic(),
            seed: 0,
            distortion: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    #[serde(default)]
    pub ts_ns: Option<f64>,
    pub transmons: BTreeMap<String, TransmonEntry>,
    pub pairs: BTreeMap<String, PairEntry>,
    #[serde(default)]
    pub noise: Option<NoiseEntry>,
}

impl DeviceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: DeviceConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        for name in self.pairs.keys() {
            self.pair(name)?;
        }
        if let Some(ts) = self.ts_ns {
            if !(ts > 0.0) {
                return Err(Error::Config(format!("ts_ns = {ts} must be positive")));
            }
        }
        Ok(())
    }

    /// AWG sample period in seconds.
    pub fn ts(&self) -> f64 {
        self.ts_ns.map_or(DEFAULT_TS, |t| t * 1e-9)
    }

    fn transmon_entry(&self, name: &str) -> Result<&TransmonEntry> {
        self.transmons
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown transmon `{name}`")))
    }

    pub fn transmon(&self, name: &str) -> Result<TransmonSpec> {
        let t = self.transmon_entry(name)?;
        TransmonSpec::new(angular(t.omega_sweet_ghz * 1e9), angular(t.anharm_mhz * 1e6))
            .map_err(|e| Error::Config(format!("transmon `{name}`: {e}")))
    }

    fn pair_entry(&self, name: &str) -> Result<&PairEntry> {
        self.pairs.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.pairs.keys().map(String::as_str).collect();
            Error::Config(format!("unknown pair `{name}` (known: {})", known.join(", ")))
        })
    }

    pub fn pair(&self, name: &str) -> Result<PairSpec> {
        let p = self.pair_entry(name)?;
        let fluxed = self.transmon(&p.fluxed)?;
        let partner = self.transmon(&p.static_partner)?;
        let j2 = match (p.tlim_ns, p.j2_mhz) {
            (Some(t), None) => PI / (t * 1e-9),
            (None, Some(j)) => angular(j * 1e6),
            _ => {
                return Err(Error::Config(format!(
                    "pair `{name}` needs exactly one of tlim_ns and j2_MHz"
                )))
            }
        };
        let delta_bias = match p.delta_bias_ghz {
            Some(d) => angular(d * 1e9),
            None => match p.interaction {
                Interaction::Avoided11_02 => fluxed.omega_sweet + fluxed.anharm - partner.omega_sweet,
                Interaction::Avoided11_20 => fluxed.omega_sweet - partner.omega_sweet - partner.anharm,
            },
        };
        let pair = PairSpec::new(fluxed, partner, j2, p.interaction, delta_bias)
            .map_err(|e| Error::Config(format!("pair `{name}`: {e}")))?;
        Ok(match p.exchange_mhz {
            Some(g) if g >= 0.0 && g.is_finite() => pair.with_exchange(angular(g * 1e6)),
            Some(g) => return Err(Error::Config(format!("pair `{name}`: exchange_MHz = {g} must be non-negative"))),
            None => pair,
        })
    }

    /// Idle between the SNZ halves configured for a pair, in seconds.
    pub fn t_mid(&self, name: &str) -> Result<Option<f64>> {
        Ok(self.pair_entry(name)?.t_mid_ns.map(|t| t * 1e-9))
    }

    fn transmon_noise(&self, name: &str) -> Result<TransmonNoise> {
        let t = self.transmon_entry(name)?;
        let table = |rows: &Option<Vec<[f64; 2]>>| -> Result<Option<DephasingTable>> {
            rows.as_ref()
                .map(|r| {
                    DephasingTable::new(
                        r.iter()
                            .map(|[f, t]| (angular(f * 1e9), t * 1e-6))
                            .collect(),
                    )
                })
                .transpose()
        };
        Ok(TransmonNoise {
            t1: t.t1_us.map_or(f64::INFINITY, |x| x * 1e-6),
            t2_echo: table(&t.t2_echo_table)?,
            t2_star: table(&t.t2_star_table)?,
        })
    }

    /// Noise model for a pair; absent fields leave the corresponding
    /// mechanism switched off (or, for the flux-noise amplitude, derived
    /// from the tables when needed).
    pub fn noise(&self, name: &str) -> Result<NoiseConfig> {
        let p = self.pair_entry(name)?;
        let entry = self.noise.clone().unwrap_or_default();
        let distortion = DistortionModel::new(
            entry
                .distortion
                .iter()
                .map(|d| DistortionTerm {
                    amplitude: d.amplitude,
                    tau: d.tau_ns * 1e-9,
                })
                .collect(),
        )?;
        NoiseConfig::new(
            self.transmon_noise(&p.fluxed)?,
            self.transmon_noise(&p.static_partner)?,
            entry.flux_noise_sigma,
            distortion,
            entry.n_quasistatic,
            entry.seed,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "transmons": {
            "A": { "omega_sweet_GHz": 6.0, "anharm_MHz": -300 },
            "B": { "omega_sweet_GHz": 5.0, "anharm_MHz": -300 }
        },
        "pairs": {
            "B-A": { "fluxed": "A", "static": "B", "tlim_ns": 40.0, "interaction": "11-02" },
            "B-A20": { "fluxed": "A", "static": "B", "j2_MHz": 10.0, "interaction": "11-20" }
        }
    }"#;

    #[test]
    fn derived_bias_detuning() {
        let cfg = DeviceConfig::from_json(DOC).unwrap();
        let p = cfg.pair("B-A").unwrap();
        assert!((p.delta_bias - angular(0.7e9)).abs() < 1.0);
        assert!((p.t_lim() - 40e-9).abs() < 1e-20);
        let q = cfg.pair("B-A20").unwrap();
        assert!((q.delta_bias - angular(1.3e9)).abs() < 1.0);
        assert!((q.j2 - angular(10e6)).abs() < 1e-6);
        assert_eq!(cfg.ts(), DEFAULT_TS);
    }

    #[test]
    fn config_errors() {
        let cfg = DeviceConfig::from_json(DOC).unwrap();
        assert!(matches!(cfg.pair("nope"), Err(Error::Config(_))));
        let bad = DOC.replace("\"tlim_ns\": 40.0,", "");
        assert!(DeviceConfig::from_json(&bad).is_err());
        let unknown = DOC.replace("\"fluxed\": \"A\", \"static\": \"B\", \"tlim", "\"fluxed\": \"C\", \"static\": \"B\", \"tlim");
        assert!(DeviceConfig::from_json(&unknown).is_err());
    }
}
