//! Radio model: UE mobility, a log-distance channel with shadowing and AR(1)
//! fading, CQI link adaptation, a sigmoid BLER curve and HARQ bookkeeping.

pub mod channel;
pub mod harq;
pub mod link;
pub mod mobility;

pub use channel::{ChannelState, LinkState};
pub use harq::{harq_tick, HarqOutcome, HarqProcess};
pub use link::{bits_per_alloc, LinkAdaptation, CQI_EFFICIENCY};
pub use mobility::{step_mobility, MobilityParams, UePosition};
