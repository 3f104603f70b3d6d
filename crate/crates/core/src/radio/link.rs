//! CQI link adaptation.
//!
//! Efficiencies are the 4-bit CQI table of 3GPP TS 36.213 (Table 7.2.3-1),
//! stored in units of 1e-4 bit per resource element so that bit counts are
//! exact integers.

use rand::Rng;

use crate::error::{Error, Result};

/// Spectral efficiency per CQI index in 1e-4 bits/RE. Index 0 is out of range.
pub const CQI_EFFICIENCY_E4: [u64; 16] =
    [0, 1523, 2344, 3770, 6016, 8770, 11758, 14766, 19141, 24063, 27305, 33223, 39023, 45234, 51152, 55547];

/// Same table as floating point.
pub const CQI_EFFICIENCY: [f64; 16] = [
    0.0, 0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234,
    5.1152, 5.5547,
];

pub const MAX_CQI: u8 = 15;

/// Bits carried in one TTI by `n_prbs` PRBs at `cqi`: `floor(eff * 180 * n)`.
pub fn bits_per_alloc(cqi: u8, n_prbs: u32) -> Result<u64> {
    if cqi == 0 || cqi > MAX_CQI {
        return Err(Error::Unschedulable);
    }
    Ok(CQI_EFFICIENCY_E4[cqi as usize] * 180 * n_prbs as u64 / 10_000)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAdaptation {
    /// Fraction of the Shannon bound achieved by the modem.
    pub attenuation: f64,
    /// Width of the BLER sigmoid in dB.
    pub bler_slope_db: f64,
}

impl Default for LinkAdaptation {
    fn default() -> Self {
        Self { attenuation: 0.6, bler_slope_db: 0.5 }
    }
}

impl LinkAdaptation {
    /// Attenuated Shannon efficiency at `sinr_db`.
    pub fn efficiency(&self, sinr_db: f64) -> f64 {
        self.attenuation * (1.0 + 10f64.powf(sinr_db / 10.0)).log2()
    }

    /// SINR at which the efficiency first reaches the CQI table entry.
    pub fn threshold_db(&self, cqi: u8) -> f64 {
        let eff = CQI_EFFICIENCY[cqi as usize];
        10.0 * ((eff / self.attenuation).exp2() - 1.0).log10()
    }

    /// Highest CQI whose threshold does not exceed `sinr_db`; 0 below CQI 1.
    ///
    /// Comparing against thresholds rather than efficiencies keeps
    /// `cqi_for_sinr(threshold_db(c)) == c` exact in floating point.
    pub fn cqi_for_sinr(&self, sinr_db: f64) -> u8 {
        (1..=MAX_CQI).rev().find(|&c| sinr_db >= self.threshold_db(c)).unwrap_or(0)
    }

    /// Transport-block error probability when transmitting at `cqi` with `sinr_db`.
    pub fn failure_probability(&self, sinr_db: f64, cqi: u8) -> f64 {
        let x = (sinr_db - self.threshold_db(cqi)) / self.bler_slope_db;
        1.0 / (1.0 + x.exp())
    }

    /// Bernoulli draw: `true` when the block is delivered.
    pub fn tb_outcome<R: Rng + ?Sized>(&self, sinr_db: f64, cqi: u8, rng: &mut R) -> bool {
        rng.random::<f64>() >= self.failure_probability(sinr_db, cqi)
    }
}
