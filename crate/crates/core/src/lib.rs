//! Discrete-event simulator for synchronous and asynchronous multi-beam
//! directional MAC protocols in multi-hop wireless networks.

pub mod engine;
pub mod geometry;
pub mod mac;
pub mod metrics;
pub mod mobility;
pub mod network;
pub mod report;
pub mod routing;
pub mod scenario;
pub mod time;

pub use engine::NodeId;
pub use time::SimTime;
