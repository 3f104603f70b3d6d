//! Control plane: intent producer, E2/E3 message models, the reference xApp
//! policy and the message ledger.

pub mod messages;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use messages::{
    apply_e3_control, e2_control_dapp, e2_control_rc, e2_report_dapp, e2_report_kpm, e3_control, e3_indication,
    summarize_controls, ControlMessage, DappReport, KpmReport, MsgType, Payload, ServiceModel, UeReport, XappDirective,
};

use crate::config::{ScenarioConfig, XappPolicy};
use crate::error::{Error, Result};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub object_id: u32,
    pub activated_tti: u64,
    pub episode_index: u64,
}

/// Draw the episode's intent uniformly from the distinct object IDs.
pub fn producer_activate<R: Rng + ?Sized>(vocab: &[u32], episode_index: u64, rng: &mut R) -> Result<Intent> {
    let &object_id = vocab.choose(rng).ok_or_else(|| Error::Dataset("empty label vocabulary".into()))?;
    Ok(Intent { object_id, activated_tti: 0, episode_index })
}

/// Reference xApp: pass everything through, or shed load above a utilization threshold.
pub fn xapp_step(policy: XappPolicy, kpm: &KpmReport, cfg: &ScenarioConfig) -> XappDirective {
    let budget_fraction = match policy {
        XappPolicy::PassThrough => 1.0,
        XappPolicy::LoadShedding if kpm.resource_utilization >= cfg.load_shedding_threshold => {
            cfg.load_shedding_fraction
        }
        XappPolicy::LoadShedding => 1.0,
    };
    XappDirective { budget_fraction, ..XappDirective::default() }
}

/// First dApp boundary at or after `received_tti`.
pub fn effective_tti(received_tti: u64, delta_dapp: u32) -> u64 {
    received_tti.div_ceil(delta_dapp as u64) * delta_dapp as u64
}

/// One row of the signalling ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub tti: u64,
    pub service_model: ServiceModel,
    pub msg_type: MsgType,
    pub direction: Direction,
    pub payload_fields: u32,
}

/// Append-only record of every control message exchanged in an episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageLedger {
    pub entries: Vec<LedgerEntry>,
}

impl MessageLedger {
    pub fn record(&mut self, msg: &ControlMessage) {
        self.entries.push(LedgerEntry {
            tti: msg.tti,
            service_model: msg.service_model,
            msg_type: msg.msg_type,
            direction: msg.payload.direction(),
            payload_fields: msg.payload.field_count(),
        });
    }

    pub fn count(&self, sm: ServiceModel, mt: MsgType, dir: Direction) -> usize {
        self.entries.iter().filter(|e| e.service_model == sm && e.msg_type == mt && e.direction == dir).count()
    }
}

/// Closed-form per-direction message counts for an episode of `ttis` TTIs:
/// `(E3 INDICATION, E3 CONTROL, near-RT windows)`. Each window carries one
/// KPM report, one dApp report and one dApp control.
pub fn predicted_counts(ttis: u64, delta_dapp: u32, near_rt_period: u32) -> (u64, u64, u64) {
    let dapp = ttis.div_ceil(delta_dapp as u64);
    (dapp, dapp, ttis / near_rt_period as u64)
}
