//! Flat JSON run configuration with unit-suffixed keys.
//!
//! Every key is optional in a config file; missing keys keep the value of the
//! base configuration (library defaults or the active preset).

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context};
use cachenet::exec::Execution;
use cachenet::model::{dbm_to_watts, ETA_NATS_TO_BITS};
use cachenet::montecarlo::{ActiveD2dRule, BoundaryMode, McSettings};
use cachenet::queueing::CtmcOptions;
use cachenet::NetworkConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Margin,
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda0_per_m2: f64,
    pub lambda2_per_m2: f64,
    pub lambda3_per_m2: f64,
    pub alpha: f64,
    pub p1_dbm: f64,
    pub p2_dbm: f64,
    pub p3_dbm: f64,
    pub beta: f64,
    /// `null` for an interference-limited network.
    pub noise_dbm: Option<f64>,
    pub bandwidth_hz: f64,
    pub n_contents: usize,
    pub content_size_bits: f64,
    pub m1: usize,
    pub m2: usize,
    pub gamma: f64,
    pub eta_bits_per_nat: f64,
    pub varsigma_per_s: f64,
    pub varrho_inv: f64,
    pub backhaul_kappa: f64,
    pub local_rate_nats: f64,
    pub tau_db: Vec<f64>,
    pub mc_window_m: f64,
    pub mc_boundary: Boundary,
    pub mc_margin_m: f64,
    pub mc_topologies: usize,
    pub mc_fading_draws: usize,
    pub mc_per_case_cap: Option<usize>,
    pub mc_active_rule: ActiveD2dRule,
    pub mc_case3_nearest_d2d_interferes: bool,
    pub mc_max_resamples: usize,
    pub ctmc_horizon_s: f64,
    pub ctmc_replications: usize,
    pub ctmc_slot_s: f64,
    pub ctmc_warmup_s: f64,
    pub execution: Execution,
}

pub fn per_disk(count: f64) -> f64 {
    count / (PI * 500.0 * 500.0)
}

impl Default for FileConfig {
    fn default() -> Self {
        let net = NetworkConfig::default();
        let mc = McSettings::default();
        let ctmc = CtmcOptions::default();
        Self {
            lambda0_per_m2: per_disk(300.0),
            lambda2_per_m2: per_disk(5.0),
            lambda3_per_m2: per_disk(1.0),
            alpha: net.alpha,
            p1_dbm: 23.0,
            p2_dbm: 33.0,
            p3_dbm: 43.0,
            beta: net.beta,
            noise_dbm: None,
            bandwidth_hz: net.bandwidth_w,
            n_contents: net.n_contents,
            content_size_bits: net.content_size_s,
            m1: net.m1,
            m2: net.m2,
            gamma: net.gamma,
            eta_bits_per_nat: ETA_NATS_TO_BITS,
            varsigma_per_s: net.varsigma,
            varrho_inv: net.varrho_inv,
            backhaul_kappa: net.backhaul_kappa,
            local_rate_nats: net.local_rate_ul,
            tau_db: mc.thresholds_db.clone(),
            mc_window_m: mc.side,
            mc_boundary: Boundary::Margin,
            mc_margin_m: 500.0,
            mc_topologies: mc.topologies,
            mc_fading_draws: mc.fading_draws,
            mc_per_case_cap: mc.per_case_cap,
            mc_active_rule: mc.active_rule,
            mc_case3_nearest_d2d_interferes: mc.case3_nearest_d2d_interferes,
            mc_max_resamples: mc.max_resamples,
            ctmc_horizon_s: 100.0,
            ctmc_replications: 20,
            ctmc_slot_s: ctmc.slot,
            ctmc_warmup_s: ctmc.warmup,
            execution: Execution::Parallel,
        }
    }
}

impl FileConfig {
    /// Denser infrastructure, 13 dBm D2D power and alpha = 0.25, used by the
    /// queueing experiments.
    pub fn queueing_reference() -> Self {
        Self {
            lambda2_per_m2: per_disk(30.0),
            lambda3_per_m2: per_disk(6.0),
            alpha: 0.25,
            p1_dbm: 13.0,
            varsigma_per_s: 0.25,
            varrho_inv: 1.0,
            ..Self::default()
        }
    }

    /// Settings that keep Monte Carlo estimates free of visible window bias.
    pub fn with_large_torus(self) -> Self {
        Self { mc_window_m: 6000.0, mc_boundary: Boundary::Torus, mc_per_case_cap: Some(60), ..self }
    }

    pub fn network(&self) -> anyhow::Result<NetworkConfig> {
        let cfg = NetworkConfig {
            lambda0: self.lambda0_per_m2,
            lambda2: self.lambda2_per_m2,
            lambda3: self.lambda3_per_m2,
            alpha: self.alpha,
            p1: dbm_to_watts(self.p1_dbm),
            p2: dbm_to_watts(self.p2_dbm),
            p3: dbm_to_watts(self.p3_dbm),
            beta: self.beta,
            noise: self.noise_dbm.map_or(0.0, dbm_to_watts),
            bandwidth_w: self.bandwidth_hz,
            n_contents: self.n_contents,
            content_size_s: self.content_size_bits,
            m1: self.m1,
            m2: self.m2,
            gamma: self.gamma,
            nu: 1.0,
            bias: 1.0,
            eta: self.eta_bits_per_nat,
            varsigma: self.varsigma_per_s,
            varrho_inv: self.varrho_inv,
            backhaul_kappa: self.backhaul_kappa,
            local_rate_ul: self.local_rate_nats,
        };
        cfg.validate().context("invalid network configuration")?;
        Ok(cfg)
    }

    pub fn monte_carlo(&self, seed: u64, thresholds_db: Vec<f64>) -> McSettings {
        McSettings {
            side: self.mc_window_m,
            boundary: match self.mc_boundary {
                Boundary::Margin => BoundaryMode::CentralMargin { margin: self.mc_margin_m },
                Boundary::Torus => BoundaryMode::Torus,
            },
            topologies: self.mc_topologies,
            fading_draws: self.mc_fading_draws,
            per_case_cap: self.mc_per_case_cap,
            thresholds_db,
            active_rule: self.mc_active_rule,
            case3_nearest_d2d_interferes: self.mc_case3_nearest_d2d_interferes,
            max_resamples: self.mc_max_resamples,
            keep_samples: false,
            seed,
            execution: self.execution,
        }
    }

    pub fn ctmc(&self) -> CtmcOptions {
        CtmcOptions { slot: self.ctmc_slot_s, warmup: self.ctmc_warmup_s, record_slots: true }
    }

    /// Applies the keys of a JSON object on top of `self`.
    pub fn merged(&self, overrides: &Map<String, Value>) -> anyhow::Result<Self> {
        let mut base = match serde_json::to_value(self)? {
            Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        for (k, v) in overrides {
            if !base.contains_key(k) {
                bail!("unknown config key `{k}`");
            }
            base.insert(k.clone(), v.clone());
        }
        serde_json::from_value(Value::Object(base)).context("config value has the wrong type")
    }

    /// Sets one numeric key, as used by sweeps.
    pub fn with_key(&self, key: &str, value: f64) -> anyhow::Result<Self> {
        let mut m = Map::new();
        let v = if matches!(key, "n_contents" | "m1" | "m2" | "mc_topologies" | "mc_fading_draws" | "ctmc_replications")
        {
            if value.fract() != 0.0 || value < 0.0 {
                bail!("`{key}` takes non-negative integers, got {value}");
            }
            Value::from(value as u64)
        } else {
            Value::from(value)
        };
        m.insert(key.to_string(), v);
        self.merged(&m)
    }

    pub fn load_overrides(path: &Path) -> anyhow::Result<Map<String, Value>> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))? {
            Value::Object(m) => Ok(m),
            _ => bail!("{}: config must be a JSON object", path.display()),
        }
    }

    #[cfg(test)]
    pub fn keys() -> Vec<String> {
        match serde_json::to_value(Self::default()) {
            Ok(Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_library_defaults() {
        let cfg = FileConfig::default().network().unwrap();
        let lib = NetworkConfig::default();
        for (a, b) in [(cfg.p1, lib.p1), (cfg.p2, lib.p2), (cfg.p3, lib.p3), (cfg.lambda0, lib.lambda0)] {
            assert!((a / b - 1.0).abs() < 1e-14);
        }
        let q = FileConfig::queueing_reference().network().unwrap();
        let lq = NetworkConfig::queueing_reference();
        assert!((q.lambda2 / lq.lambda2 - 1.0).abs() < 1e-14 && (q.p1 / lq.p1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overrides_and_unknown_keys() {
        let m: Map<String, Value> = serde_json::from_str(r#"{"alpha": 0.2, "noise_dbm": -100}"#).unwrap();
        let c = FileConfig::default().merged(&m).unwrap();
        assert_eq!(c.alpha, 0.2);
        assert_eq!(c.noise_dbm, Some(-100.0));
        let bad: Map<String, Value> = serde_json::from_str(r#"{"alpah": 0.2}"#).unwrap();
        assert!(FileConfig::default().merged(&bad).is_err());
        let wrong: Map<String, Value> = serde_json::from_str(r#"{"m1": "five"}"#).unwrap();
        assert!(FileConfig::default().merged(&wrong).is_err());
        assert_eq!(FileConfig::default().with_key("m1", 7.0).unwrap().m1, 7);
        assert!(FileConfig::default().with_key("m1", 7.5).is_err());
    }

    #[test]
    fn invalid_network_is_rejected() {
        let c = FileConfig { lambda2_per_m2: 1.0, ..FileConfig::default() };
        assert!(c.network().is_err());
    }

    #[test]
    fn schema_lists_every_key() {
        let text = include_str!("../schema/network_config.schema.json");
        let schema: Value = serde_json::from_str(text).unwrap();
        let mut documented: Vec<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
        let mut keys = FileConfig::keys();
        documented.sort();
        keys.sort();
        assert_eq!(documented, keys);
    }

    #[test]
    fn shipped_configs_load() {
        for text in [
            include_str!("../configs/low_power_d2d.json"),
            include_str!("../configs/queueing_reference.json"),
            include_str!("../configs/quick_mc.json"),
        ] {
            let m: Map<String, Value> = serde_json::from_str(text).unwrap();
            FileConfig::default().merged(&m).unwrap().network().unwrap();
        }
    }
}
