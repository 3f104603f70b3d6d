use rand::Rng;
use rand_distr::StandardNormal;

use super::link::LinkAdaptation;
use super::mobility::UePosition;
use crate::config::ScenarioConfig;
use crate::Direction;

/// Large- and small-scale channel of one UE, per direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    pub fastfade_db: f64,
    pub sinr_db: f64,
    pub cqi: u8,
}

/// Per-UE random channel state. Shadowing is shared by both directions;
/// fast fading evolves independently per direction.
#[derive(Debug, Clone, Copy)]
pub struct ChannelState {
    pub shadowing_db: f64,
    pub walked_since_redraw: f64,
    pub fastfade_db: [f64; 2],
}

fn dir_index(dir: Direction) -> usize {
    match dir {
        Direction::Ul => 0,
        Direction::Dl => 1,
    }
}

impl ChannelState {
    pub fn new<R: Rng + ?Sized>(cfg: &ScenarioConfig, shadow_rng: &mut R, fade_rng: &mut R) -> Self {
        let shadowing_db = cfg.shadowing_sigma_db * shadow_rng.sample::<f64, _>(StandardNormal);
        let fastfade_db = [
            cfg.fading_sigma_db * fade_rng.sample::<f64, _>(StandardNormal),
            cfg.fading_sigma_db * fade_rng.sample::<f64, _>(StandardNormal),
        ];
        Self { shadowing_db, walked_since_redraw: 0.0, fastfade_db }
    }

    /// Advance one TTI: redraw shadowing after the decorrelation distance and
    /// step the AR(1) fading process.
    pub fn advance<R: Rng + ?Sized>(&mut self, walked_m: f64, cfg: &ScenarioConfig, shadow_rng: &mut R, fade_rng: &mut R) {
        self.walked_since_redraw += walked_m;
        if self.walked_since_redraw >= cfg.shadowing_decorrelation_m {
            self.walked_since_redraw = 0.0;
            self.shadowing_db = cfg.shadowing_sigma_db * shadow_rng.sample::<f64, _>(StandardNormal);
        }
        let a = cfg.fading_ar_coeff;
        let innov = cfg.fading_sigma_db * (1.0 - a * a).sqrt();
        for f in &mut self.fastfade_db {
            *f = a * *f + innov * fade_rng.sample::<f64, _>(StandardNormal);
        }
    }

    pub fn fastfade(&self, dir: Direction) -> f64 {
        self.fastfade_db[dir_index(dir)]
    }
}

/// Log-distance pathloss at 3-D distance `d_m`.
pub fn pathloss_db(d_m: f64, cfg: &ScenarioConfig) -> f64 {
    cfg.pathloss_ref_db + 10.0 * cfg.pathloss_exponent * d_m.max(1.0).log10()
}

/// 3-D distance from the eNodeB at the area centre.
pub fn distance_3d(pos: &UePosition, cfg: &ScenarioConfig) -> f64 {
    let c = cfg.area_m / 2.0;
    let dh = cfg.enb_height_m - cfg.ue_height_m;
    ((pos.x - c).powi(2) + (pos.y - c).powi(2) + dh * dh).sqrt()
}

/// Open-loop PUSCH power with full pathloss compensation, clamped to the UE range.
pub fn ul_tx_power_dbm(pathloss_db: f64, cfg: &ScenarioConfig) -> f64 {
    let [lo, hi] = cfg.ue_tx_pwr_dbm_range;
    (cfg.p0_pusch_dbm + pathloss_db).clamp(lo, hi)
}

/// Thermal noise plus receiver noise figure over `bandwidth_hz`.
pub fn noise_dbm(bandwidth_hz: f64, noise_figure_db: f64, cfg: &ScenarioConfig) -> f64 {
    cfg.noise_psd_dbm_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// SINR and CQI of one UE in one direction. Signal and noise are both taken
/// per PRB so the SINR does not depend on how many PRBs are granted.
pub fn compute_link(pos: &UePosition, dir: Direction, cfg: &ScenarioConfig, chan: &ChannelState, la: &LinkAdaptation) -> LinkState {
    let pl = pathloss_db(distance_3d(pos, cfg), cfg);
    let shadow = chan.shadowing_db;
    let fade = chan.fastfade(dir);
    let (tx_per_prb, nf) = match dir {
        Direction::Ul => (ul_tx_power_dbm(pl + shadow, cfg), cfg.enb_noise_figure_db),
        Direction::Dl => {
            let dl_prbs = (cfg.dl_rbgs * cfg.rbg_size_prbs) as f64;
            (cfg.enb_tx_pwr_dbm - 10.0 * dl_prbs.log10(), cfg.ue_noise_figure_db)
        }
    };
    let rx = tx_per_prb - pl - shadow + fade;
    let sinr_db = rx - noise_dbm(cfg.prb_hz, nf, cfg);
    LinkState { pathloss_db: pl, shadowing_db: shadow, fastfade_db: fade, sinr_db, cqi: la.cqi_for_sinr(sinr_db) }
}
