//! Multi-beam MAC building blocks.
//!
//! `common` holds the frame-level substrate, `basic` and `proposed` the
//! variant-specific reception rules. The protocol state machine that wires
//! them to the radio lives in [`crate::network`].

pub mod basic;
pub mod common;
pub mod frame;
pub mod proposed;

pub use common::{Backoff, BeamState, MacParams, MacVariant, NavTable};
pub use frame::{Frame, FrameKind, Packet, PacketId};
