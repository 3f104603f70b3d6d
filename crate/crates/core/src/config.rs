//! Scenario configuration.
//!
//! Configs are flat TOML tables; every key is optional and falls back to the
//! reference cell parameters (20 MHz LTE-A carrier, 10 UEs in a 500 m square,
//! 10 s episodes). See `docs/config.md` for the full schema.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Direction;

/// UE selection strategy run by the dApp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Rr,
    Cqi,
    Buffer,
    Criticality,
    Pf,
}

impl Strategy {
    pub const ALL: [Strategy; 5] =
        [Strategy::Rr, Strategy::Cqi, Strategy::Buffer, Strategy::Criticality, Strategy::Pf];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Rr => "rr",
            Strategy::Cqi => "cqi",
            Strategy::Buffer => "buffer",
            Strategy::Criticality => "criticality",
            Strategy::Pf => "pf",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::validation("strategy", format!("unknown strategy `{s}` (expected rr|cqi|buffer|criticality|pf)")))
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reference xApp behaviour. Benchmarks use `pass_through`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XappPolicy {
    PassThrough,
    LoadShedding,
}

/// How images are handed to UEs at episode start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageAssignment {
    /// Uniform draw with replacement from the traffic substream.
    Random,
    /// UE `i` uplinks dataset image `i` and downlinks image `i + n_ues`, modulo the dataset size.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    // cell and traffic
    pub area_m: f64,
    pub n_ues: u32,
    pub episode_s: f64,
    pub ul_pkt_bytes: u32,
    pub dl_pkt_bytes: u32,
    pub ul_rate_bps: u64,
    pub dl_rate_bps: u64,
    pub ul_prbs: u32,
    pub dl_rbgs: u32,
    pub rbg_size_prbs: u32,
    pub bandwidth_hz: f64,
    pub prb_hz: f64,
    pub ue_tx_pwr_dbm_range: [f64; 2],
    pub enb_tx_pwr_dbm: f64,
    pub p0_pusch_dbm: f64,
    pub qci: u8,

    // control loops
    pub delta_dapp: u32,
    pub near_rt_period_ttis: u32,
    pub strategy: Strategy,
    pub intent_based: bool,
    pub xapp_policy: XappPolicy,
    pub load_shedding_threshold: f64,
    pub load_shedding_fraction: f64,

    // run
    pub seed: u64,
    pub dataset_dir: PathBuf,
    pub image_assignment: ImageAssignment,
    pub measure_decision_time: bool,

    // mobility and channel
    pub enb_height_m: f64,
    pub ue_height_m: f64,
    pub ue_speed_kmh: f64,
    pub turn_distance_m: f64,
    pub pathloss_ref_db: f64,
    pub pathloss_exponent: f64,
    pub shadowing_sigma_db: f64,
    pub shadowing_decorrelation_m: f64,
    pub fading_sigma_db: f64,
    pub fading_ar_coeff: f64,
    pub noise_psd_dbm_hz: f64,
    pub ue_noise_figure_db: f64,
    pub enb_noise_figure_db: f64,
    pub shannon_attenuation: f64,
    pub bler_slope_db: f64,
    pub max_harq_tx: u8,

    // scheduler
    pub buffer_ref_bytes: f64,
    pub pf_horizon_ttis: f64,
    pub pf_init_bps: f64,

    // fidelity
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub f_min: f64,
    pub content_block_px: usize,
    pub content_var_threshold: f64,
    pub content_ratio: f64,
    pub patch_grid: usize,
    pub patch_threshold: f64,

    // reporting
    pub backhaul_ms: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_m: 500.0,
            n_ues: 10,
            episode_s: 10.0,
            ul_pkt_bytes: 1400,
            dl_pkt_bytes: 1400,
            ul_rate_bps: 100_000,
            dl_rate_bps: 200_000,
            ul_prbs: 100,
            dl_rbgs: 25,
            rbg_size_prbs: 4,
            bandwidth_hz: 20e6,
            prb_hz: 180_000.0,
            ue_tx_pwr_dbm_range: [-40.0, 23.0],
            enb_tx_pwr_dbm: 46.0,
            p0_pusch_dbm: -96.0,
            qci: 9,

            delta_dapp: 1,
            near_rt_period_ttis: 10,
            strategy: Strategy::Rr,
            intent_based: false,
            xapp_policy: XappPolicy::PassThrough,
            load_shedding_threshold: 0.9,
            load_shedding_fraction: 0.9,

            seed: 1,
            dataset_dir: PathBuf::from("dataset"),
            image_assignment: ImageAssignment::Random,
            measure_decision_time: true,

            enb_height_m: 30.0,
            ue_height_m: 1.5,
            ue_speed_kmh: 3.0,
            turn_distance_m: 10.0,
            pathloss_ref_db: 30.0,
            pathloss_exponent: 3.5,
            shadowing_sigma_db: 7.0,
            shadowing_decorrelation_m: 10.0,
            fading_sigma_db: 4.0,
            fading_ar_coeff: 0.98,
            noise_psd_dbm_hz: -174.0,
            ue_noise_figure_db: 9.0,
            enb_noise_figure_db: 5.0,
            shannon_attenuation: 0.6,
            bler_slope_db: 0.5,
            max_harq_tx: 4,

            buffer_ref_bytes: 50_000.0,
            pf_horizon_ttis: 100.0,
            pf_init_bps: 1_000.0,

            alpha: 0.4,
            beta: 0.3,
            gamma: 0.3,
            f_min: 0.2,
            content_block_px: 16,
            content_var_threshold: 10.0,
            content_ratio: 0.5,
            patch_grid: 4,
            patch_threshold: 0.8,

            backhaul_ms: 0.0,
        }
    }
}

impl ScenarioConfig {
    /// Number of 1 ms TTIs in one episode.
    pub fn episode_ttis(&self) -> u64 {
        (self.episode_s * 1000.0).round() as u64
    }

    /// Schedulable units per TTI: PRBs on the uplink, RBGs on the downlink.
    pub fn capacity(&self, dir: Direction) -> u32 {
        match dir {
            Direction::Ul => self.ul_prbs,
            Direction::Dl => self.dl_rbgs,
        }
    }

    /// PRBs that make up one schedulable unit.
    pub fn unit_prbs(&self, dir: Direction) -> u32 {
        match dir {
            Direction::Ul => 1,
            Direction::Dl => self.rbg_size_prbs,
        }
    }

    pub fn pkt_bytes(&self, dir: Direction) -> u32 {
        match dir {
            Direction::Ul => self.ul_pkt_bytes,
            Direction::Dl => self.dl_pkt_bytes,
        }
    }

    pub fn rate_bps(&self, dir: Direction) -> u64 {
        match dir {
            Direction::Ul => self.ul_rate_bps,
            Direction::Dl => self.dl_rate_bps,
        }
    }

    pub fn weights(&self) -> crate::fidelity::FidelityWeights {
        crate::fidelity::FidelityWeights { alpha: self.alpha, beta: self.beta, gamma: self.gamma }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be > 0, got {v}")))
            }
        }
        fn unit(field: &str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must lie in [0, 1], got {v}")))
            }
        }

        positive("area_m", self.area_m)?;
        positive("episode_s", self.episode_s)?;
        let ttis = self.episode_s * 1000.0;
        if (ttis - ttis.round()).abs() > 1e-6 {
            return Err(Error::validation("episode_s", "must be a whole number of milliseconds"));
        }
        if self.n_ues == 0 {
            return Err(Error::validation("n_ues", "must be >= 1"));
        }
        if self.near_rt_period_ttis < 2 {
            return Err(Error::validation("near_rt_period_ttis", "must be >= 2"));
        }
        if self.delta_dapp < 1 || self.delta_dapp >= self.near_rt_period_ttis {
            return Err(Error::validation(
                "delta_dapp",
                format!("must satisfy 1 <= delta_dapp < {}, got {}", self.near_rt_period_ttis, self.delta_dapp),
            ));
        }
        for (field, v) in [
            ("ul_pkt_bytes", self.ul_pkt_bytes as u64),
            ("dl_pkt_bytes", self.dl_pkt_bytes as u64),
            ("ul_rate_bps", self.ul_rate_bps),
            ("dl_rate_bps", self.dl_rate_bps),
            ("ul_prbs", self.ul_prbs as u64),
            ("dl_rbgs", self.dl_rbgs as u64),
            ("rbg_size_prbs", self.rbg_size_prbs as u64),
            ("max_harq_tx", self.max_harq_tx as u64),
            ("content_block_px", self.content_block_px as u64),
            ("patch_grid", self.patch_grid as u64),
        ] {
            if v == 0 {
                return Err(Error::validation(field, "must be > 0"));
            }
        }
        if self.ul_prbs > 100 {
            return Err(Error::validation("ul_prbs", "a 20 MHz carrier has at most 100 PRBs"));
        }
        if self.dl_rbgs * self.rbg_size_prbs > 100 {
            return Err(Error::validation("dl_rbgs", "dl_rbgs * rbg_size_prbs must be <= 100"));
        }
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("prb_hz", self.prb_hz)?;
        let [lo, hi] = self.ue_tx_pwr_dbm_range;
        if lo.partial_cmp(&hi).is_none_or(|o| o.is_gt()) {
            return Err(Error::validation("ue_tx_pwr_dbm_range", "min must not exceed max"));
        }
        positive("ue_speed_kmh", self.ue_speed_kmh)?;
        positive("turn_distance_m", self.turn_distance_m)?;
        positive("shadowing_decorrelation_m", self.shadowing_decorrelation_m)?;
        positive("pathloss_exponent", self.pathloss_exponent)?;
        positive("shannon_attenuation", self.shannon_attenuation)?;
        positive("bler_slope_db", self.bler_slope_db)?;
        if !(0.0..1.0).contains(&self.fading_ar_coeff) {
            return Err(Error::validation("fading_ar_coeff", "must lie in [0, 1)"));
        }
        if self.shadowing_sigma_db < 0.0 || self.fading_sigma_db < 0.0 {
            return Err(Error::validation("fading_sigma_db", "standard deviations must be >= 0"));
        }
        positive("buffer_ref_bytes", self.buffer_ref_bytes)?;
        positive("pf_horizon_ttis", self.pf_horizon_ttis)?;
        positive("pf_init_bps", self.pf_init_bps)?;
        self.weights().validate()?;
        unit("f_min", self.f_min)?;
        unit("content_ratio", self.content_ratio)?;
        unit("patch_threshold", self.patch_threshold)?;
        unit("load_shedding_threshold", self.load_shedding_threshold)?;
        if !(self.load_shedding_fraction > 0.0 && self.load_shedding_fraction <= 1.0) {
            return Err(Error::validation("load_shedding_fraction", "must lie in (0, 1]"));
        }
        if self.content_var_threshold < 0.0 {
            return Err(Error::validation("content_var_threshold", "must be >= 0"));
        }
        if self.backhaul_ms < 0.0 {
            return Err(Error::validation("backhaul_ms", "must be >= 0"));
        }
        Ok(())
    }

    /// Parse a TOML document, apply `key=value` overrides, fill defaults and validate.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        for (key, raw) in overrides {
            table.insert(key.clone(), parse_override_value(raw));
        }
        let cfg: ScenarioConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }
}

/// Interpret an override as a TOML scalar/array when it parses as one, else as a bare string.
fn parse_override_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Split `key=value` into its parts.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::ConfigParse(format!("override `{s}` is not of the form key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Load a config file and apply overrides on top of it.
pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_toml_str(&text, overrides)
}
