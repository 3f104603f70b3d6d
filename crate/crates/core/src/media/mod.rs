//! Media transport: dataset ingestion, PNG chunk criticality, packetisation,
//! RLC buffers and receiver-side reconstruction.

pub mod buffer;
pub mod dataset;
pub mod flow;
pub mod image;
pub mod png;

pub use buffer::{RlcBuffer, Segment};
pub use dataset::{Dataset, SourceImage};
pub use flow::{packetize, reconstruct, ImageFlow, Packet, PacketStatus, Reconstruction};
pub use image::{GrayImage, RgbImage};
pub use png::{parse_png, PngChunk, PngError};
