//! Deterministic TTI-level simulator of intent-based radio resource management
//! in a single Open RAN cell.
//!
//! The crate is organised around the control loops of the cell:
//!
//! * [`engine`] owns simulated time and runs episodes and batches.
//! * [`radio`] models mobility, the channel, link adaptation and HARQ.
//! * [`media`] parses PNG images into prioritised packets and rebuilds them at the receiver.
//! * [`sched`] is the dApp scheduler: demand estimation, utilities, intent admission
//!   and the greedy density knapsack.
//! * [`control`] simulates the intent producer, E2/E3 agents and the xApp loop.
//! * [`fidelity`] scores reconstructed images and computes the Intent Satisfaction Score.
//! * [`kpi`] aggregates per-episode KPIs and writes CSV/JSON reports.

pub mod config;
pub mod control;
pub mod engine;
pub mod error;
pub mod fidelity;
pub mod kpi;
pub mod media;
pub mod radio;
pub mod rng;
pub mod sched;

pub use config::{ScenarioConfig, Strategy};
pub use engine::{run_batch, run_episode, BatchResult, EpisodeResult};
pub use error::{Error, Result};

/// Link direction. Uplink and downlink are scheduled on separate carriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ul,
    Dl,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Ul, Direction::Dl];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Ul => "ul",
            Direction::Dl => "dl",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
