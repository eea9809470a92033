//! The shared medium: who hears a transmission, overlap corruption and the
//! half-duplex rule.

use crate::engine::{NodeId, Scheduler};
use crate::geometry::{azimuth, hearers, RadioNode, TxSector};
use crate::mac::{Frame, FrameKind};
use crate::time::SimTime;

use super::mac::Phase;
use super::{Ev, Network};

#[derive(Debug, Clone)]
pub(crate) struct Arrival {
    pub rx: NodeId,
    pub beam: usize,
    pub start: SimTime,
    pub end: SimTime,
    pub frame: Frame,
    pub corrupted: bool,
    pub lost: bool,
}

impl Network {
    /// Peer a steerable antenna currently faces.
    fn facing(&self, id: NodeId) -> Option<NodeId> {
        let n = &self.nodes[id];
        if let Phase::Busy(c) = &n.phase {
            if let Some(&p) = c.expected.values().next() {
                return Some(p);
            }
            if let Some(a) = c.accepted.values().next() {
                return Some(a.frame.src);
            }
        }
        if let Some(q) = n.beams.iter().find_map(|b| b.queue.front()) {
            if let Some(h) = q.packet.next_hop() {
                return Some(h);
            }
        }
        for rs in &self.routes {
            for r in &rs.routes {
                if let Some(i) = r.iter().position(|&x| x == id) {
                    if i > 0 {
                        return Some(r[i - 1]);
                    }
                }
            }
        }
        n.last_rts_from.or(n.default_peer)
    }

    fn radio_view(&self) -> Vec<RadioNode> {
        self.nodes
            .iter()
            .map(|n| RadioNode {
                id: n.id,
                pos: n.pos,
                antenna: n.antenna,
                pointing: if n.antenna.steerable {
                    self.facing(n.id).and_then(|p| azimuth(n.pos, self.nodes[p].pos).ok())
                } else {
                    None
                },
            })
            .collect()
    }

    /// Puts `frames` on the air from `node`, all starting now. Returns the
    /// latest end of transmission.
    pub(crate) fn transmit(&mut self, s: &mut Scheduler<Ev>, node: NodeId, frames: Vec<(usize, Frame)>) -> SimTime {
        let now = s.now();
        debug_assert!(self.nodes[node].tx_until <= now, "node {node} starts a batch while still transmitting");
        let view = self.radio_view();
        let me = view[node];
        // Half-duplex: our own transmission kills anything we were receiving.
        let active = std::mem::take(&mut self.nodes[node].active);
        for id in active {
            if let Some(a) = self.arrivals.get_mut(&id) {
                if a.end > now && !a.lost {
                    a.lost = true;
                }
            }
        }
        let mut tx_end = now;
        for (beam, frame) in frames {
            if matches!(frame.kind, FrameKind::Rts | FrameKind::Cts | FrameKind::NRts | FrameKind::NCts) {
                debug_assert!(
                    self.nodes[node].beams[beam].nav.is_clear(now),
                    "node {node} sends {} on beam {beam} under an unexpired NAV",
                    frame.kind
                );
            }
            let air = self.sc.channel.transmission_delay(frame.size_bytes);
            let end = now + air;
            tx_end = tx_end.max(end);
            let sector = if me.antenna.steerable {
                TxSector::Steered(azimuth(me.pos, self.nodes[frame.dst].pos).unwrap_or(0.0))
            } else {
                TxSector::Fixed(beam)
            };
            self.log_frame(now, node, beam, "tx", frame.kind, frame.src, frame.dst);
            if frame.kind == FrameKind::Data {
                if let Some(p) = &frame.packet {
                    let p = p.clone();
                    self.note_route_usage(&p);
                }
            }
            let n = &mut self.nodes[node];
            n.count(match frame.kind {
                FrameKind::Rts => "tx_rts",
                FrameKind::Cts => "tx_cts",
                FrameKind::Data => "tx_data",
                FrameKind::Ack => "tx_ack",
                FrameKind::NRts => "tx_nrts",
                FrameKind::NCts => "tx_ncts",
            });
            for h in hearers(&me, sector, &view, &self.sc.channel) {
                let id = self.next_arrival;
                self.next_arrival += 1;
                let start = now + h.delay;
                self.arrivals.insert(
                    id,
                    Arrival { rx: h.rx, beam: h.rx_beam, start, end: start + air, frame: frame.clone(), corrupted: false, lost: false },
                );
                s.schedule(start, h.rx, Ev::ArrivalStart(id)).expect("future");
                s.schedule(start + air, h.rx, Ev::ArrivalEnd(id)).expect("future");
            }
        }
        self.nodes[node].tx_until = tx_end;
        tx_end
    }

    pub(crate) fn on_arrival_start(&mut self, _s: &mut Scheduler<Ev>, id: u64) {
        let a = self.arrivals.get(&id).expect("scheduled arrival").clone();
        let now = a.start;
        let rx = a.rx;
        let mut lost = false;
        if self.nodes[rx].tx_until > now {
            lost = true;
        }
        let mut corrupt = false;
        let others: Vec<u64> = self.nodes[rx].active.clone();
        for o in others {
            let b = self.arrivals.get_mut(&o).expect("active arrival");
            if b.beam == a.beam && b.end > now {
                b.corrupted = true;
                corrupt = true;
            }
        }
        let beam = &mut self.nodes[rx].beams[a.beam];
        beam.energy_until = beam.energy_until.max(a.end);
        let entry = self.arrivals.get_mut(&id).expect("scheduled arrival");
        entry.corrupted |= corrupt;
        entry.lost |= lost;
        self.nodes[rx].active.push(id);
        self.log_frame(now, rx, a.beam, "rx_start", a.frame.kind, a.frame.src, a.frame.dst);
    }

    pub(crate) fn on_arrival_end(&mut self, s: &mut Scheduler<Ev>, id: u64) {
        let a = self.arrivals.remove(&id).expect("scheduled arrival");
        let rx = a.rx;
        self.nodes[rx].active.retain(|&x| x != id);
        let (k, src, dst) = (a.frame.kind, a.frame.src, a.frame.dst);
        if a.lost {
            self.nodes[rx].count("rx_lost");
            self.log_frame(a.end, rx, a.beam, "rx_lost", k, src, dst);
            return;
        }
        if a.corrupted {
            self.nodes[rx].count("rx_corrupt");
            self.log_frame(a.end, rx, a.beam, "rx_corrupt", k, src, dst);
            return;
        }
        debug_assert!(self.nodes[rx].tx_until <= a.start, "half-duplex violated at node {rx}");
        self.log_frame(a.end, rx, a.beam, "rx_end", k, src, dst);
        self.on_frame(s, rx, a.beam, a.frame, a.start, a.end);
    }
}
