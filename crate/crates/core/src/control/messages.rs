use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::Strategy;
use crate::sched::{AllocationMap, Grant};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ServiceModel {
    #[serde(rename = "E2SM-KPM")]
    E2smKpm,
    #[serde(rename = "E2SM-RC")]
    E2smRc,
    #[serde(rename = "E2SM-DAPP")]
    E2smDapp,
    #[serde(rename = "E3SM")]
    E3sm,
}

impl ServiceModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceModel::E2smKpm => "E2SM-KPM",
            ServiceModel::E2smRc => "E2SM-RC",
            ServiceModel::E2smDapp => "E2SM-DAPP",
            ServiceModel::E3sm => "E3SM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MsgType {
    #[serde(rename = "RIC REPORT")]
    RicReport,
    #[serde(rename = "RIC CONTROL")]
    RicControl,
    #[serde(rename = "E3 INDICATION")]
    E3Indication,
    #[serde(rename = "E3 CONTROL")]
    E3Control,
}

impl MsgType {
    pub fn as_str(self) -> &'static str {
        match self {
            MsgType::RicReport => "RIC REPORT",
            MsgType::RicControl => "RIC CONTROL",
            MsgType::E3Indication => "E3 INDICATION",
            MsgType::E3Control => "E3 CONTROL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeReport {
    pub rnti: u16,
    pub cqi: u8,
    pub qci: u8,
    pub buffer_bytes: u64,
    pub criticality: f64,
}

/// Aggregated MAC/RLC measurements over one near-RT window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KpmReport {
    pub active_ues: u32,
    /// Fraction of the window's unit-TTIs that carried a transmission.
    pub resource_utilization: f64,
    pub throughput_bps: f64,
    /// Mean latency of packets delivered in the window; 0 when none.
    pub latency_ms: f64,
    pub buffer_bytes: u64,
    pub mean_cqi: f64,
}

/// Sum of the dApp's decisions over one near-RT window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DappReport {
    pub served_ues: u32,
    pub allocated_units: u32,
    /// Allocated units over the summed budgets of the window's decisions.
    pub system_load: f64,
    pub bytes_served: u64,
}

/// Directive from the xApp to the dApp, bridged over E2 then E3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XappDirective {
    pub budget_fraction: f64,
    pub strategy_override: Option<Strategy>,
    pub skip_rntis: BTreeSet<u16>,
    pub skip_subframes: BTreeSet<u8>,
}

impl Default for XappDirective {
    fn default() -> Self {
        Self { budget_fraction: 1.0, strategy_override: None, skip_rntis: BTreeSet::new(), skip_subframes: BTreeSet::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    E3Indication { active_ues: u32, available_units: u32, subframe: u8, direction: Direction, ues: Vec<UeReport> },
    E3Control { direction: Direction, grants: Vec<Grant> },
    KpmReport { direction: Direction, kpm: KpmReport },
    DappReport { direction: Direction, summary: DappReport },
    DappControl { direction: Direction, directive: XappDirective },
    RcControl { direction: Direction, params: BTreeMap<String, f64> },
}

impl Payload {
    /// Scalar fields carried, counting each per-UE record field.
    pub fn field_count(&self) -> u32 {
        match self {
            Payload::E3Indication { ues, .. } => 4 + 5 * ues.len() as u32,
            Payload::E3Control { grants, .. } => 1 + grants.iter().map(|g| 2 + g.n_units()).sum::<u32>(),
            Payload::KpmReport { .. } => 7,
            Payload::DappReport { .. } => 5,
            Payload::DappControl { directive, .. } => {
                3 + directive.skip_rntis.len() as u32 + directive.skip_subframes.len() as u32
            }
            Payload::RcControl { params, .. } => 1 + params.len() as u32,
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Payload::E3Indication { direction, .. }
            | Payload::E3Control { direction, .. }
            | Payload::KpmReport { direction, .. }
            | Payload::DappReport { direction, .. }
            | Payload::DappControl { direction, .. }
            | Payload::RcControl { direction, .. } => *direction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlMessage {
    pub tti: u64,
    pub service_model: ServiceModel,
    pub msg_type: MsgType,
    pub payload: Payload,
}

impl ControlMessage {
    fn new(tti: u64, payload: Payload) -> Self {
        let (service_model, msg_type) = match &payload {
            Payload::E3Indication { .. } => (ServiceModel::E3sm, MsgType::E3Indication),
            Payload::E3Control { .. } => (ServiceModel::E3sm, MsgType::E3Control),
            Payload::KpmReport { .. } => (ServiceModel::E2smKpm, MsgType::RicReport),
            Payload::DappReport { .. } => (ServiceModel::E2smDapp, MsgType::RicReport),
            Payload::DappControl { .. } => (ServiceModel::E2smDapp, MsgType::RicControl),
            Payload::RcControl { .. } => (ServiceModel::E2smRc, MsgType::RicControl),
        };
        Self { tti, service_model, msg_type, payload }
    }
}

/// E3 INDICATION: cell state handed to the dApp at a decision boundary.
pub fn e3_indication(tti: u64, direction: Direction, available_units: u32, ues: Vec<UeReport>) -> ControlMessage {
    ControlMessage::new(
        tti,
        Payload::E3Indication {
            active_ues: ues.len() as u32,
            available_units,
            subframe: (tti % 10) as u8,
            direction,
            ues,
        },
    )
}

/// E3 CONTROL: the dApp's allocation, mirrored field for field.
pub fn e3_control(tti: u64, alloc: &AllocationMap) -> ControlMessage {
    ControlMessage::new(tti, Payload::E3Control { direction: alloc.direction, grants: alloc.grants.clone() })
}

/// Rebuild the allocation carried by an E3 CONTROL message.
pub fn apply_e3_control(msg: &ControlMessage, budget: u32) -> Option<AllocationMap> {
    match &msg.payload {
        Payload::E3Control { direction, grants } => {
            Some(AllocationMap { direction: *direction, grants: grants.clone(), budget })
        }
        _ => None,
    }
}

pub fn e2_report_kpm(tti: u64, direction: Direction, kpm: KpmReport) -> ControlMessage {
    ControlMessage::new(tti, Payload::KpmReport { direction, kpm })
}

pub fn e2_report_dapp(tti: u64, direction: Direction, summary: DappReport) -> ControlMessage {
    ControlMessage::new(tti, Payload::DappReport { direction, summary })
}

pub fn e2_control_dapp(tti: u64, direction: Direction, directive: XappDirective) -> ControlMessage {
    ControlMessage::new(tti, Payload::DappControl { direction, directive })
}

pub fn e2_control_rc(tti: u64, direction: Direction, params: BTreeMap<String, f64>) -> ControlMessage {
    ControlMessage::new(tti, Payload::RcControl { direction, params })
}

/// Sum the E3 CONTROL decisions of a window into the dApp report.
pub fn summarize_controls(controls: &[AllocationMap], bytes_served: u64) -> DappReport {
    let mut r = DappReport { bytes_served, ..DappReport::default() };
    let mut budget = 0u64;
    for alloc in controls {
        r.served_ues += alloc.grants.len() as u32;
        r.allocated_units += alloc.used();
        budget += alloc.budget as u64;
    }
    r.system_load = if budget == 0 { 0.0 } else { r.allocated_units as f64 / budget as f64 };
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subframe_and_counts() {
        let m = e3_indication(13, Direction::Ul, 88, vec![]);
        match &m.payload {
            Payload::E3Indication { subframe, active_ues, available_units, ues, .. } => {
                assert_eq!((*subframe, *active_ues, *available_units), (3, 0, 88));
                assert!(ues.is_empty());
            }
            _ => unreachable!(),
        }
        assert_eq!((m.service_model, m.msg_type), (ServiceModel::E3sm, MsgType::E3Indication));
    }

    #[test]
    fn control_mirrors_allocation() {
        let alloc = AllocationMap {
            direction: Direction::Dl,
            grants: vec![Grant { rnti: 1, units: vec![0, 1], mcs: 7 }, Grant { rnti: 4, units: vec![5], mcs: 12 }],
            budget: 25,
        };
        let m = e3_control(8, &alloc);
        let text = serde_json::to_string(&m).unwrap();
        let back: ControlMessage = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(apply_e3_control(&back, 25), Some(alloc));
        assert_eq!(apply_e3_control(&e3_control(8, &AllocationMap::empty(Direction::Ul, 100)), 100).unwrap().used(), 0);
    }

    #[test]
    fn window_summary_sums_controls() {
        let two = AllocationMap {
            direction: Direction::Ul,
            grants: vec![Grant { rnti: 0, units: vec![0], mcs: 1 }, Grant { rnti: 1, units: vec![1, 2], mcs: 1 }],
            budget: 10,
        };
        let s = summarize_controls(&[two.clone(), two.clone(), two], 15);
        assert_eq!(s.served_ues, 6);
        assert_eq!(s.allocated_units, 9);
        assert_eq!(s.bytes_served, 15);
        assert!((s.system_load - 0.3).abs() < 1e-12);
        assert_eq!(summarize_controls(&[], 0), DappReport::default());
    }
}
