//! CBR traffic description, per-packet fate tracking and flow metrics.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::NodeId;
use crate::mac::frame::PacketId;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbrFlow {
    pub flow_id: usize,
    pub src: NodeId,
    pub dst: NodeId,
    pub rate_bps: f64,
    pub packet_bytes: u32,
    pub start: SimTime,
    pub stop: SimTime,
}

impl CbrFlow {
    pub fn rate_pps(&self) -> f64 {
        self.rate_bps / (self.packet_bytes as f64 * 8.0)
    }

    pub fn inter_arrival(&self) -> SimTime {
        SimTime::from_secs_f64(1.0 / self.rate_pps())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DropReason {
    Overflow,
    RetryLimit,
    NoRoute,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowStats {
    pub generated: u64,
    pub delivered: u64,
    pub drops_overflow: u64,
    pub drops_retry: u64,
    pub drops_noroute: u64,
    pub in_flight: u64,
    /// (gen_time, delivery_time) of every delivered packet.
    pub delays: Vec<(SimTime, SimTime)>,
}

impl FlowStats {
    pub fn dropped(&self) -> u64 {
        self.drops_overflow + self.drops_retry + self.drops_noroute
    }

    pub fn conserved(&self) -> bool {
        self.generated == self.delivered + self.dropped() + self.in_flight
    }
}

pub fn throughput(stats: &FlowStats, packet_bytes: u32, horizon: SimTime) -> f64 {
    assert!(horizon > SimTime::ZERO);
    stats.delivered as f64 * packet_bytes as f64 * 8.0 / horizon.as_secs_f64()
}

pub fn pdr(stats: &FlowStats) -> Option<f64> {
    (stats.generated > 0).then(|| stats.delivered as f64 / stats.generated as f64)
}

/// Mean end-to-end delay in seconds.
pub fn e2e_delay(stats: &FlowStats) -> Option<f64> {
    if stats.delays.is_empty() {
        return None;
    }
    let sum: f64 = stats.delays.iter().map(|(g, d)| (*d - *g).as_secs_f64()).sum();
    Some(sum / stats.delays.len() as f64)
}

/// Mean delay over every delivered packet of every flow.
pub fn pooled_e2e_delay<'a>(flows: impl IntoIterator<Item = &'a FlowStats>) -> Option<f64> {
    let mut n = 0usize;
    let mut sum = 0.0;
    for f in flows {
        for (g, d) in &f.delays {
            sum += (*d - *g).as_secs_f64();
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteUsageSample {
    pub t: SimTime,
    pub flow_id: usize,
    pub active_routes: usize,
    pub route_count: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairingError {
    #[error("sample counts differ: {0} vs {1}")]
    Length(usize, usize),
    #[error("sample {index} is unpaired: ({t_a}, flow {flow_a}) vs ({t_b}, flow {flow_b})")]
    Mismatch { index: usize, t_a: SimTime, flow_a: usize, t_b: SimTime, flow_b: usize },
}

/// Percentage of sampling instants at which the proposed run used more routes.
pub fn extra_route_utilization(proposed: &[RouteUsageSample], basic: &[RouteUsageSample]) -> Result<f64, PairingError> {
    if proposed.len() != basic.len() {
        return Err(PairingError::Length(proposed.len(), basic.len()));
    }
    if proposed.is_empty() {
        return Ok(0.0);
    }
    let mut extra = 0usize;
    for (i, (p, b)) in proposed.iter().zip(basic).enumerate() {
        if p.t != b.t || p.flow_id != b.flow_id {
            return Err(PairingError::Mismatch { index: i, t_a: p.t, flow_a: p.flow_id, t_b: b.t, flow_b: b.flow_id });
        }
        if p.active_routes > b.active_routes {
            extra += 1;
        }
    }
    Ok(100.0 * extra as f64 / proposed.len() as f64)
}

#[derive(Debug, Clone, Default)]
struct Fate {
    copies: u32,
    delivered: bool,
    dropped: Option<DropReason>,
    last_loss: Option<DropReason>,
}

/// Tracks how many nodes hold a copy of each packet so that a packet is
/// counted as dropped only when its last copy disappears undelivered.
#[derive(Debug, Default)]
pub struct PacketLedger {
    fates: HashMap<PacketId, Fate>,
    flows: Vec<FlowStats>,
}

impl PacketLedger {
    pub fn new(flow_count: usize) -> Self {
        PacketLedger { fates: HashMap::new(), flows: vec![FlowStats::default(); flow_count] }
    }

    pub fn generated(&mut self, id: PacketId) {
        self.flows[id.flow].generated += 1;
        self.fates.insert(id, Fate::default());
    }

    pub fn copy_created(&mut self, id: PacketId) {
        let f = self.fates.get_mut(&id).expect("known packet");
        f.copies += 1;
    }

    /// A loss event that did not remove a copy (e.g. next hop overflowed).
    pub fn note_loss(&mut self, id: PacketId, reason: DropReason) {
        if let Some(f) = self.fates.get_mut(&id) {
            f.last_loss = Some(reason);
            self.settle(id);
        }
    }

    /// A holder gave up its copy; `reason` is `None` for a successful hand-off.
    pub fn copy_released(&mut self, id: PacketId, reason: Option<DropReason>) {
        let f = self.fates.get_mut(&id).expect("known packet");
        assert!(f.copies > 0, "releasing a copy of {id:?} that does not exist");
        f.copies -= 1;
        if reason.is_some() {
            f.last_loss = reason;
        }
        self.settle(id);
    }

    pub fn delivered(&mut self, id: PacketId, gen_time: SimTime, now: SimTime) -> bool {
        let f = self.fates.get_mut(&id).expect("known packet");
        if f.delivered || f.dropped.is_some() {
            return false;
        }
        f.delivered = true;
        let s = &mut self.flows[id.flow];
        s.delivered += 1;
        s.delays.push((gen_time, now));
        true
    }

    pub fn is_delivered(&self, id: PacketId) -> bool {
        self.fates.get(&id).is_some_and(|f| f.delivered)
    }

    fn settle(&mut self, id: PacketId) {
        let f = self.fates.get_mut(&id).expect("known packet");
        if f.copies == 0 && !f.delivered && f.dropped.is_none() {
            let reason = f.last_loss.unwrap_or(DropReason::NoRoute);
            f.dropped = Some(reason);
            let s = &mut self.flows[id.flow];
            match reason {
                DropReason::Overflow => s.drops_overflow += 1,
                DropReason::RetryLimit => s.drops_retry += 1,
                DropReason::NoRoute => s.drops_noroute += 1,
            }
        }
    }

    pub fn finish(&self) -> Vec<FlowStats> {
        let mut out = self.flows.clone();
        for s in &mut out {
            s.in_flight = 0;
        }
        for (id, f) in &self.fates {
            if !f.delivered && f.dropped.is_none() {
                out[id.flow].in_flight += 1;
            }
        }
        out
    }
}
