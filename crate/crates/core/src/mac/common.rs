//! MAC substrate shared by both protocol variants.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::engine::NodeId;
use crate::geometry::transmission_delay;
use crate::mac::frame::{Frame, FrameKind, Packet};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MacVariant {
    Basic,
    Proposed,
}

impl MacVariant {
    pub fn label(self) -> &'static str {
        match self {
            MacVariant::Basic => "basic",
            MacVariant::Proposed => "proposed",
        }
    }
}

impl std::str::FromStr for MacVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "basic" => Ok(MacVariant::Basic),
            "proposed" => Ok(MacVariant::Proposed),
            other => Err(format!("unknown MAC variant `{other}` (expected basic|proposed)")),
        }
    }
}

/// Resolved timing and sizing parameters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MacParams {
    pub variant: MacVariant,
    pub slot: SimTime,
    pub sifs: SimTime,
    pub difs: SimTime,
    pub cw_min: u32,
    pub cw_max: u32,
    pub short_retry_limit: u32,
    pub long_retry_limit: u32,
    pub rts_bytes: u32,
    pub cts_bytes: u32,
    pub ack_bytes: u32,
    pub bit_rate: f64,
    pub max_prop: SimTime,
    pub window_period: SimTime,
    pub data_wp_multiplier: u32,
    pub role_switch_slots: u32,
    pub queue_capacity: usize,
    pub timeout_slack_slots: u32,
}

impl MacParams {
    /// Constants of the reference setup on a given channel.
    pub fn reference(variant: MacVariant, bit_rate: f64, comm_radius: f64) -> Self {
        MacParams {
            variant,
            slot: SimTime::from_micros(20),
            sifs: SimTime::from_micros(10),
            difs: SimTime::from_micros(50),
            cw_min: 16,
            cw_max: 1024,
            short_retry_limit: 7,
            long_retry_limit: 4,
            rts_bytes: 20,
            cts_bytes: 14,
            ack_bytes: 14,
            bit_rate,
            max_prop: SimTime::from_secs_f64(comm_radius / crate::geometry::SPEED_OF_LIGHT),
            window_period: SimTime::from_micros(9),
            data_wp_multiplier: 1,
            role_switch_slots: 3,
            queue_capacity: 50,
            timeout_slack_slots: 2,
        }
    }

    pub fn frame_bytes(&self, kind: FrameKind, data_bytes: u32) -> u32 {
        match kind {
            FrameKind::Rts | FrameKind::NRts => self.rts_bytes,
            FrameKind::Cts | FrameKind::NCts => self.cts_bytes,
            FrameKind::Ack => self.ack_bytes,
            FrameKind::Data => data_bytes,
        }
    }

    pub fn airtime(&self, kind: FrameKind, data_bytes: u32) -> SimTime {
        transmission_delay(self.frame_bytes(kind, data_bytes), self.bit_rate)
    }

    /// Window allowance folded into RTS/CTS reservations.
    pub fn wp_allowance(&self) -> SimTime {
        match self.variant {
            MacVariant::Basic => SimTime::ZERO,
            MacVariant::Proposed => self.window_period,
        }
    }

    pub fn nav_duration(&self, kind: FrameKind, data_bytes: u32) -> SimTime {
        handshake_nav_duration(self, kind, data_bytes, self.wp_allowance())
    }

    /// Window length for a reception phase that collects `kind` frames.
    pub fn window_for(&self, kind: FrameKind) -> SimTime {
        if kind == FrameKind::Data {
            self.window_period.mul(self.data_wp_multiplier as u64)
        } else {
            self.window_period
        }
    }

    /// Deadline, measured from the end of our own frame, for the peer's response.
    pub fn response_timeout(&self, response: FrameKind, data_bytes: u32) -> SimTime {
        self.sifs
            + self.airtime(response, data_bytes)
            + self.max_prop.mul(2)
            + self.slot.mul(self.timeout_slack_slots as u64)
    }

    pub fn contention_time(&self, cw: u32) -> SimTime {
        self.difs + self.slot.mul(cw as u64)
    }
}

/// Remaining handshake airtime carried by a frame of `kind`.
pub fn handshake_nav_duration(p: &MacParams, kind: FrameKind, data_bytes: u32, wp_allowance: SimTime) -> SimTime {
    let t = |k| p.airtime(k, data_bytes);
    let prop2 = p.max_prop.mul(2);
    match kind {
        FrameKind::Rts | FrameKind::NRts => {
            p.sifs.mul(3) + t(FrameKind::Cts) + t(FrameKind::Data) + t(FrameKind::Ack) + prop2 + wp_allowance
        }
        FrameKind::Cts | FrameKind::NCts => {
            p.sifs.mul(2) + t(FrameKind::Data) + t(FrameKind::Ack) + prop2 + wp_allowance
        }
        FrameKind::Data => p.sifs + t(FrameKind::Ack) + p.max_prop,
        FrameKind::Ack => SimTime::ZERO,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavEntry {
    pub neighbor: NodeId,
    pub nav_expiry: SimTime,
    pub potential_tx: bool,
}

#[derive(Debug, Clone, Default)]
pub struct NavTable {
    entries: Vec<NavEntry>,
}

impl NavTable {
    fn entry(&mut self, neighbor: NodeId) -> &mut NavEntry {
        if let Some(i) = self.entries.iter().position(|e| e.neighbor == neighbor) {
            &mut self.entries[i]
        } else {
            self.entries.push(NavEntry { neighbor, nav_expiry: SimTime::ZERO, potential_tx: false });
            self.entries.last_mut().expect("just pushed")
        }
    }

    pub fn get(&self, neighbor: NodeId) -> Option<&NavEntry> {
        self.entries.iter().find(|e| e.neighbor == neighbor)
    }

    pub fn update(&mut self, neighbor: NodeId, until: SimTime) {
        let e = self.entry(neighbor);
        e.nav_expiry = e.nav_expiry.max(until);
    }

    pub fn mark_potential_transmitter(&mut self, neighbor: NodeId) {
        self.entry(neighbor).potential_tx = true;
    }

    pub fn potential_transmitters(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().filter(|e| e.potential_tx).map(|e| e.neighbor)
    }

    pub fn has_potential_transmitter(&self) -> bool {
        self.entries.iter().any(|e| e.potential_tx)
    }

    pub fn clear_potential(&mut self, neighbor: NodeId) {
        if let Some(e) = self.entries.iter_mut().find(|e| e.neighbor == neighbor) {
            e.potential_tx = false;
        }
    }

    pub fn clear_all_potential(&mut self) {
        for e in &mut self.entries {
            e.potential_tx = false;
        }
    }

    /// Latest NAV expiry over all neighbors of the beam.
    pub fn blocked_until(&self) -> SimTime {
        self.entries.iter().map(|e| e.nav_expiry).max().unwrap_or(SimTime::ZERO)
    }

    pub fn is_clear(&self, now: SimTime) -> bool {
        self.blocked_until() <= now
    }
}

#[derive(Debug, Clone)]
pub struct QueuedPacket {
    pub packet: Packet,
    pub short_retries: u32,
    pub long_retries: u32,
}

impl QueuedPacket {
    pub fn new(packet: Packet) -> Self {
        QueuedPacket { packet, short_retries: 0, long_retries: 0 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BeamState {
    pub nav: NavTable,
    pub queue: VecDeque<QueuedPacket>,
    /// End of the latest energy seen on this beam.
    pub energy_until: SimTime,
}

impl BeamState {
    /// The beam carries no energy and no unexpired NAV at `now`.
    pub fn is_idle(&self, now: SimTime) -> bool {
        self.energy_until <= now && self.nav.is_clear(now)
    }

    /// Instant after which the beam is both energy-free and NAV-clear.
    pub fn busy_until(&self) -> SimTime {
        self.energy_until.max(self.nav.blocked_until())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enqueue {
    Accepted,
    Overflow,
}

pub fn enqueue_data(beam: &mut BeamState, item: QueuedPacket, capacity: usize) -> Enqueue {
    if beam.queue.len() >= capacity {
        return Enqueue::Overflow;
    }
    beam.queue.push_back(item);
    Enqueue::Accepted
}

/// Node-based contention window shared by every beam of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backoff {
    cw: u32,
    cw_min: u32,
    cw_max: u32,
}

impl Backoff {
    pub fn new(cw_min: u32, cw_max: u32) -> Self {
        assert!(cw_min.is_power_of_two() && cw_max.is_power_of_two() && cw_min <= cw_max);
        Backoff { cw: cw_min, cw_min, cw_max }
    }

    pub fn cw(&self) -> u32 {
        self.cw
    }

    /// Resets to the minimum if any beam succeeded, otherwise doubles up to the cap.
    pub fn on_result(&mut self, any_beam_succeeded: bool) {
        if any_beam_succeeded {
            self.cw = self.cw_min;
        } else {
            self.cw = (self.cw * 2).min(self.cw_max);
        }
        debug_assert!(self.is_valid(), "cw left its range: {}", self.cw);
    }

    pub fn reset(&mut self) {
        self.cw = self.cw_min;
    }

    pub fn is_valid(&self) -> bool {
        self.cw.is_power_of_two() && (self.cw_min..=self.cw_max).contains(&self.cw)
    }
}

/// What a node is currently waiting for, from the classifier's viewpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Awaiting {
    Nothing,
    Response(FrameKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Desired,
    Undesired,
}

pub fn classify(me: NodeId, awaiting: Awaiting, frame: &Frame) -> Class {
    if frame.dst != me || frame.kind.is_notification() {
        return Class::Undesired;
    }
    match awaiting {
        Awaiting::Response(k) if frame.kind != k => Class::Undesired,
        _ => Class::Desired,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> MacParams {
        let mut p = MacParams::reference(MacVariant::Proposed, 5e6, 3000.0);
        p.max_prop = SimTime::from_micros(10);
        p
    }

    #[test]
    fn nav_duration_examples() {
        let p = params();
        assert_eq!(handshake_nav_duration(&p, FrameKind::Ack, 1500, SimTime::from_micros(9)), SimTime::ZERO);
        assert_eq!(
            handshake_nav_duration(&p, FrameKind::Rts, 1500, SimTime::from_micros(9)),
            SimTime::from_micros_f64(2503.8)
        );
        assert_eq!(
            handshake_nav_duration(&p, FrameKind::Data, 1500, SimTime::from_micros(9)),
            SimTime::from_micros_f64(42.4)
        );
        assert_eq!(
            handshake_nav_duration(&p, FrameKind::NRts, 1500, SimTime::ZERO),
            handshake_nav_duration(&p, FrameKind::Rts, 1500, SimTime::ZERO)
        );
    }

    #[test]
    fn nav_update_keeps_maximum() {
        let mut t = NavTable::default();
        let now = SimTime::from_micros(1000);
        t.update(3, now + SimTime::from_micros(500));
        assert_eq!(t.get(3).unwrap().nav_expiry, now + SimTime::from_micros(500));
        t.update(3, now + SimTime::from_micros(300));
        assert_eq!(t.get(3).unwrap().nav_expiry, now + SimTime::from_micros(500));
        assert!(!t.is_clear(now));
        assert!(t.is_clear(now + SimTime::from_micros(500)));
    }

    #[test]
    fn potential_flags_are_idempotent() {
        let mut t = NavTable::default();
        t.mark_potential_transmitter(6);
        t.mark_potential_transmitter(6);
        assert_eq!(t.potential_transmitters().collect::<Vec<_>>(), vec![6]);
        t.clear_potential(6);
        assert!(!t.has_potential_transmitter());
    }

    #[test]
    fn cw_examples() {
        let mut b = Backoff::new(16, 1024);
        b.on_result(false);
        assert_eq!(b.cw(), 32);
        let mut b = Backoff { cw: 1024, cw_min: 16, cw_max: 1024 };
        b.on_result(false);
        assert_eq!(b.cw(), 1024);
        let mut b = Backoff { cw: 256, cw_min: 16, cw_max: 1024 };
        b.on_result(true);
        assert_eq!(b.cw(), 16);
    }

    #[test]
    fn queue_capacity() {
        let mut beam = BeamState::default();
        let pkt = |seq| {
            QueuedPacket::new(Packet {
                id: crate::mac::frame::PacketId { flow: 0, seq },
                gen_time: SimTime::ZERO,
                size_bytes: 1500,
                path: vec![0, 1].into(),
                hop: 0,
            })
        };
        for s in 0..49 {
            assert_eq!(enqueue_data(&mut beam, pkt(s), 50), Enqueue::Accepted);
        }
        assert_eq!(enqueue_data(&mut beam, pkt(49), 50), Enqueue::Accepted);
        assert_eq!(enqueue_data(&mut beam, pkt(50), 50), Enqueue::Overflow);
        assert_eq!(beam.queue.len(), 50);
    }

    #[test]
    fn classify_examples() {
        let rts = Frame::control(FrameKind::Rts, 6, 5, SimTime::ZERO, 20);
        assert_eq!(classify(5, Awaiting::Nothing, &rts), Class::Desired);
        assert_eq!(classify(5, Awaiting::Response(FrameKind::Cts), &rts), Class::Undesired);
        let ncts = Frame::control(FrameKind::NCts, 5, 6, SimTime::ZERO, 14);
        assert_eq!(classify(6, Awaiting::Nothing, &ncts), Class::Undesired);
        let other = Frame::control(FrameKind::Rts, 6, 7, SimTime::ZERO, 20);
        assert_eq!(classify(5, Awaiting::Nothing, &other), Class::Undesired);
        let cts = Frame::control(FrameKind::Cts, 2, 5, SimTime::ZERO, 14);
        assert_eq!(classify(5, Awaiting::Response(FrameKind::Cts), &cts), Class::Desired);
    }

    proptest! {
        #[test]
        fn cw_stays_a_power_of_two_in_range(results in proptest::collection::vec(any::<bool>(), 0..64)) {
            let mut b = Backoff::new(16, 1024);
            for r in results {
                b.on_result(r);
                prop_assert!(b.is_valid());
            }
        }
    }
}
