//! Per-node MAC state machine shared by both variants. Variant differences
//! are confined to how a reception batch is collected, what happens to an
//! RTS that arrives while the node is busy, when notifications are sent and
//! whether the node defers after a successful exchange.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{EventHandle, NodeId, Scheduler};
use crate::mac::basic::{role_priority_switch_basic, StrictCommit, StrictOffer};
use crate::mac::common::{enqueue_data, Enqueue, QueuedPacket};
use crate::mac::proposed::{after_ack_defer, beam_index_guard, WindowOffer, WindowState};
use crate::mac::{Frame, FrameKind, MacVariant, Packet, PacketId};
use crate::metrics::DropReason;
use crate::time::SimTime;

use super::{Ev, Network, Timer};

pub(crate) enum Phase {
    Idle,
    Contending { handle: EventHandle },
    Busy(Box<Cycle>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stage {
    CollectRts,
    AwaitCts,
    AwaitData,
    AwaitAck,
}

impl Stage {
    fn awaited(self) -> FrameKind {
        match self {
            Stage::CollectRts => FrameKind::Rts,
            Stage::AwaitCts => FrameKind::Cts,
            Stage::AwaitData => FrameKind::Data,
            Stage::AwaitAck => FrameKind::Ack,
        }
    }
}

pub(crate) enum Collector {
    Window(WindowState),
    Strict(StrictCommit),
}

impl Collector {
    fn is_complete(&self) -> bool {
        match self {
            Collector::Window(w) => w.is_complete(),
            Collector::Strict(s) => s.is_complete(),
        }
    }
}

pub(crate) struct Accepted {
    pub frame: Frame,
    pub end: SimTime,
}

pub(crate) struct Cycle {
    initiator: bool,
    stage: Stage,
    /// Beam -> peer whose response is awaited in this stage.
    pub expected: BTreeMap<usize, NodeId>,
    pub accepted: BTreeMap<usize, Accepted>,
    deferred: BTreeSet<usize>,
    collector: Option<Collector>,
    sifs: Option<EventHandle>,
    window: Option<EventHandle>,
    timeout: Option<EventHandle>,
    packets: BTreeMap<usize, PacketId>,
    succeeded: bool,
    failed: bool,
    dropped: bool,
}

impl Cycle {
    fn new(initiator: bool, stage: Stage) -> Self {
        Cycle {
            initiator,
            stage,
            expected: BTreeMap::new(),
            accepted: BTreeMap::new(),
            deferred: BTreeSet::new(),
            collector: None,
            sifs: None,
            window: None,
            timeout: None,
            packets: BTreeMap::new(),
            succeeded: false,
            failed: false,
            dropped: false,
        }
    }

    fn next_stage(&mut self, stage: Stage) {
        self.stage = stage;
        self.expected.clear();
        self.accepted.clear();
        self.collector = None;
    }

    fn cancel_timers(&mut self, s: &mut Scheduler<Ev>) {
        for h in [self.sifs.take(), self.window.take(), self.timeout.take()].into_iter().flatten() {
            s.cancel(h);
        }
    }
}

impl Network {
    fn variant(&self) -> MacVariant {
        self.sc.mac.variant
    }

    fn take_cycle(&mut self, node: NodeId) -> Option<Box<Cycle>> {
        match std::mem::replace(&mut self.nodes[node].phase, Phase::Idle) {
            Phase::Busy(c) => Some(c),
            other => {
                self.nodes[node].phase = other;
                None
            }
        }
    }

    fn put_cycle(&mut self, node: NodeId, c: Box<Cycle>) {
        self.nodes[node].phase = Phase::Busy(c);
    }

    pub(crate) fn on_timer(&mut self, s: &mut Scheduler<Ev>, node: NodeId, t: Timer) {
        match t {
            Timer::Contention => self.on_contention_expiry(s, node),
            Timer::Sifs => self.on_sifs(s, node),
            Timer::Window => self.on_window_expiry(s, node),
            Timer::Timeout => self.on_timeout(s, node),
            Timer::Notify => self.on_notify(s, node),
        }
    }

    // ---- contention -------------------------------------------------------

    pub(crate) fn maybe_contend(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        let n = &self.nodes[node];
        if !matches!(n.phase, Phase::Idle) {
            return;
        }
        let Some(busy) = n.beams.iter().filter(|b| !b.queue.is_empty()).map(|b| b.busy_until()).min() else {
            return;
        };
        let now = s.now();
        let start = now.max(n.defer_until).max(n.tx_until).max(busy);
        debug_assert!(n.backoff.is_valid(), "cw {} outside its range", n.backoff.cw());
        let fire = start + self.sc.mac.contention_time(n.backoff.cw());
        let handle = s.schedule(fire, node, Ev::Timer(Timer::Contention)).expect("future");
        self.nodes[node].phase = Phase::Contending { handle };
        self.log_timer(now, node, "contend_start");
    }

    fn restart_contention(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        if let Phase::Contending { handle } = self.nodes[node].phase {
            s.cancel(handle);
            self.nodes[node].phase = Phase::Idle;
            self.maybe_contend(s, node);
        }
    }

    fn on_contention_expiry(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        let now = s.now();
        self.nodes[node].phase = Phase::Idle;
        self.log_timer(now, node, "contend_expire");
        if self.nodes[node].tx_until > now {
            self.maybe_contend(s, node);
            return;
        }
        self.remap_queues(node);
        let difs = self.sc.mac.difs;
        let eligible: Vec<usize> = self.nodes[node]
            .beams
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.queue.is_empty() && b.nav.is_clear(now) && b.energy_until + difs <= now)
            .map(|(i, _)| i)
            .collect();
        if eligible.is_empty() {
            self.maybe_contend(s, node);
            return;
        }
        let mut c = Box::new(Cycle::new(true, Stage::AwaitCts));
        let mut frames = Vec::new();
        for &b in &eligible {
            let hol = &self.nodes[node].beams[b].queue.front().expect("nonempty").packet;
            let dst = hol.next_hop().expect("queued packet has a next hop");
            let nav = self.sc.mac.nav_duration(FrameKind::Rts, hol.size_bytes);
            c.expected.insert(b, dst);
            c.packets.insert(b, hol.id);
            frames.push((b, Frame::control(FrameKind::Rts, node, dst, nav, self.sc.mac.rts_bytes)));
        }
        self.put_cycle(node, c);
        let frames = self.with_notifications(node, frames, now);
        self.transmit(s, node, frames);
        let rts_end = now + self.sc.mac.airtime(FrameKind::Rts, 0);
        let t = s
            .schedule(rts_end + self.sc.mac.response_timeout(FrameKind::Cts, self.data_bytes), node, Ev::Timer(Timer::Timeout))
            .expect("future");
        if let Phase::Busy(c) = &mut self.nodes[node].phase {
            c.timeout = Some(t);
        }
    }

    /// Moves queued packets whose next hop now lies behind another beam.
    fn remap_queues(&mut self, node: NodeId) {
        let n = &self.nodes[node];
        if n.beams.len() == 1 {
            return;
        }
        let cap = self.sc.mac.queue_capacity;
        let mut all = Vec::new();
        for (b, beam) in n.beams.iter().enumerate() {
            for (i, q) in beam.queue.iter().enumerate() {
                let target = self.beam_toward(node, q.packet.next_hop().expect("next hop"));
                all.push((b, i, target));
            }
        }
        if all.iter().all(|&(b, _, t)| b == t) {
            return;
        }
        let mut fresh: Vec<std::collections::VecDeque<QueuedPacket>> = vec![Default::default(); n.beams.len()];
        let mut dropped = Vec::new();
        let queues: Vec<_> = self.nodes[node].beams.iter_mut().map(|b| std::mem::take(&mut b.queue)).collect();
        let mut it = all.into_iter();
        for q in queues {
            for item in q {
                let (_, _, target) = it.next().expect("one target per packet");
                if fresh[target].len() >= cap {
                    dropped.push(item.packet.id);
                } else {
                    fresh[target].push_back(item);
                }
            }
        }
        for (b, q) in fresh.into_iter().enumerate() {
            self.nodes[node].beams[b].queue = q;
        }
        for id in dropped {
            self.ledger.copy_released(id, Some(DropReason::Overflow));
            self.nodes[node].count("drop_overflow");
        }
    }

    // ---- notifications ----------------------------------------------------

    /// Adds N-RTS/N-CTS frames on flagged, otherwise unused beams.
    fn with_notifications(&mut self, node: NodeId, mut frames: Vec<(usize, Frame)>, now: SimTime) -> Vec<(usize, Frame)> {
        let Some((_, companion)) = frames.first() else {
            return frames;
        };
        let ckind = companion.kind;
        if self.variant() == MacVariant::Basic && !matches!(ckind, FrameKind::Rts | FrameKind::Cts) {
            return frames;
        }
        let nkind = match ckind {
            FrameKind::Rts | FrameKind::Data => FrameKind::NRts,
            _ => FrameKind::NCts,
        };
        let comp_end = now + self.sc.channel.transmission_delay(companion.size_bytes);
        let comp_nav = companion.nav;
        let size = self.sc.mac.frame_bytes(nkind, 0);
        let notif_end = now + self.sc.channel.transmission_delay(size);
        let nav = (comp_end + comp_nav).saturating_sub(notif_end);
        let used: BTreeSet<usize> = frames.iter().map(|(b, _)| *b).collect();
        for (b, beam) in self.nodes[node].beams.iter_mut().enumerate() {
            if used.contains(&b) || !beam.nav.is_clear(now) {
                continue;
            }
            let flagged: Vec<NodeId> = beam.nav.potential_transmitters().collect();
            let Some(&dst) = flagged.iter().min() else {
                continue;
            };
            for f in flagged {
                beam.nav.clear_potential(f);
            }
            frames.push((b, Frame::control(nkind, node, dst, nav, size)));
        }
        frames
    }

    fn schedule_notify(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        if self.variant() != MacVariant::Proposed || self.nodes[node].notify_timer.is_some() {
            return;
        }
        if self.nodes[node].beams.iter().any(|b| b.nav.has_potential_transmitter()) {
            let h = s.schedule_in(self.sc.mac.sifs, node, Ev::Timer(Timer::Notify));
            self.nodes[node].notify_timer = Some(h);
        }
    }

    /// Leftover flags after a cycle: tell those neighbors the node is free.
    fn on_notify(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        let now = s.now();
        self.nodes[node].notify_timer = None;
        let n = &self.nodes[node];
        if matches!(n.phase, Phase::Busy(_)) || n.tx_until > now {
            return;
        }
        let size = self.sc.mac.rts_bytes;
        let mut frames = Vec::new();
        for (b, beam) in self.nodes[node].beams.iter_mut().enumerate() {
            if !beam.nav.is_clear(now) {
                continue;
            }
            let flagged: Vec<NodeId> = beam.nav.potential_transmitters().collect();
            let Some(&dst) = flagged.iter().min() else {
                continue;
            };
            for f in flagged {
                beam.nav.clear_potential(f);
            }
            frames.push((b, Frame::control(FrameKind::NRts, node, dst, SimTime::ZERO, size)));
        }
        if !frames.is_empty() {
            self.transmit(s, node, frames);
        }
    }

    fn on_notification(&mut self, s: &mut Scheduler<Ev>, rx: NodeId, beam: usize, frame: &Frame, end: SimTime) {
        self.nodes[rx].beams[beam].nav.update(frame.src, end + frame.nav);
        let mut deferred = false;
        if let Phase::Busy(c) = &mut self.nodes[rx].phase {
            if c.initiator && c.stage == Stage::AwaitCts {
                if let Some((&b, _)) = c.expected.iter().find(|(_, &p)| p == frame.src) {
                    deferred = c.deferred.insert(b);
                }
            }
        }
        if deferred {
            self.nodes[rx].count("deferred_by_notification");
        }
        if frame.dst == rx {
            self.restart_contention(s, rx);
        }
    }

    // ---- reception ----------------------------------------------------------

    pub(crate) fn on_frame(&mut self, s: &mut Scheduler<Ev>, rx: NodeId, beam: usize, frame: Frame, start: SimTime, end: SimTime) {
        if frame.kind.is_notification() {
            self.on_notification(s, rx, beam, &frame, end);
            return;
        }
        if frame.dst != rx {
            self.nodes[rx].beams[beam].nav.update(frame.src, end + frame.nav);
            return;
        }
        match self.nodes[rx].phase {
            Phase::Idle | Phase::Contending { .. } => {
                if frame.kind != FrameKind::Rts {
                    self.nodes[rx].count("rx_stray");
                } else if !self.nodes[rx].beams[beam].nav.is_clear(end) {
                    if self.variant() == MacVariant::Proposed {
                        self.nodes[rx].beams[beam].nav.mark_potential_transmitter(frame.src);
                        self.schedule_notify(s, rx);
                    }
                } else {
                    self.start_responder(s, rx, beam, frame, start, end);
                }
            }
            Phase::Busy(_) => self.on_frame_busy(s, rx, beam, frame, start, end),
        }
    }

    fn start_responder(&mut self, s: &mut Scheduler<Ev>, rx: NodeId, beam: usize, frame: Frame, start: SimTime, end: SimTime) {
        if let Phase::Contending { handle } = self.nodes[rx].phase {
            s.cancel(handle);
        }
        self.nodes[rx].last_rts_from = Some(frame.src);
        self.put_cycle(rx, Box::new(Cycle::new(false, Stage::CollectRts)));
        self.accept(s, rx, beam, frame, start, end);
    }

    /// Beams that lead to at least one neighbor and are free of NAV.
    fn capacity(&self, node: NodeId, now: SimTime) -> usize {
        let n = &self.nodes[node];
        if n.antenna.steerable || n.beams.len() == 1 {
            return 1;
        }
        let beams: BTreeSet<usize> = self.neighbors[node]
            .iter()
            .map(|nb| self.beam_toward(node, nb.id))
            .filter(|&b| n.beams[b].nav.is_clear(now))
            .collect();
        beams.len().max(1)
    }

    fn on_frame_busy(&mut self, s: &mut Scheduler<Ev>, rx: NodeId, beam: usize, frame: Frame, start: SimTime, end: SimTime) {
        let variant = self.variant();
        let nav_clear = self.nodes[rx].beams[beam].nav.is_clear(end);
        let Phase::Busy(c) = &self.nodes[rx].phase else { unreachable!() };
        let awaited = c.stage.awaited();
        let already = c.accepted.contains_key(&beam);
        let guard = if c.stage == Stage::CollectRts {
            frame.kind == FrameKind::Rts && !already && nav_clear
        } else {
            beam_index_guard(&c.expected, awaited, frame.kind, beam) && c.expected[&beam] == frame.src && !already
        };
        if guard {
            self.accept(s, rx, beam, frame, start, end);
            return;
        }
        if frame.kind != FrameKind::Rts {
            self.nodes[rx].count("rx_undesired");
            return;
        }
        let case_ii = c.initiator && c.stage == Stage::AwaitCts && c.accepted.is_empty() && c.collector.is_none();
        let in_commit = c.collector.is_some();
        match variant {
            MacVariant::Basic if case_ii => self.abandon_for_responder(s, rx, beam, frame, start, end),
            MacVariant::Basic if in_commit => {
                self.nodes[rx].count("rts_discarded");
                self.log_frame(end, rx, beam, "rx_discard", frame.kind, frame.src, frame.dst);
            }
            _ => {
                self.nodes[rx].beams[beam].nav.mark_potential_transmitter(frame.src);
                self.nodes[rx].count("rts_flagged");
            }
        }
    }

    /// Hands a desired frame of the awaited kind to the batch collector.
    fn accept(&mut self, s: &mut Scheduler<Ev>, node: NodeId, beam: usize, frame: Frame, start: SimTime, end: SimTime) {
        let variant = self.variant();
        let capacity = self.capacity(node, end);
        let sifs = self.sc.mac.sifs;
        let mut c = self.take_cycle(node).expect("busy node");
        let stage = c.stage;
        match c.collector.as_mut() {
            None => {
                let total = if stage == Stage::CollectRts { capacity } else { c.expected.len() };
                let collector = match variant {
                    MacVariant::Proposed => {
                        Collector::Window(WindowState::open(end, self.sc.mac.window_for(stage.awaited()), sifs, total))
                    }
                    MacVariant::Basic => Collector::Strict(StrictCommit::open(start, end, sifs, total)),
                };
                let complete = collector.is_complete();
                c.collector = Some(collector);
                c.accepted.insert(beam, Accepted { frame, end });
                if stage == Stage::AwaitAck && complete {
                    self.conclude_initiator(s, node, c);
                    return;
                }
                c.sifs = Some(s.schedule(end + sifs, node, Ev::Timer(Timer::Sifs)).expect("future"));
                self.log_timer(end, node, "sifs_arm");
                if variant == MacVariant::Proposed && !complete {
                    let wp = self.sc.mac.window_for(stage.awaited());
                    assert!(wp < sifs, "window period {wp} armed at or above SIFS {sifs}");
                    c.window = Some(s.schedule(end + wp, node, Ev::Timer(Timer::Window)).expect("future"));
                    self.log_timer(end, node, "window_arm");
                }
            }
            Some(col) => {
                let verdict = match col {
                    Collector::Window(w) => match w.offer(start) {
                        WindowOffer::Accepted { complete } => Some(complete),
                        WindowOffer::Late => None,
                    },
                    Collector::Strict(st) => match st.offer(start) {
                        StrictOffer::Accepted => Some(st.is_complete()),
                        StrictOffer::Discarded => None,
                    },
                };
                match verdict {
                    None => {
                        self.nodes[node].count("rx_late");
                        self.log_frame(end, node, beam, "rx_discard", frame.kind, frame.src, frame.dst);
                        if variant == MacVariant::Proposed && frame.kind == FrameKind::Rts {
                            self.nodes[node].beams[beam].nav.mark_potential_transmitter(frame.src);
                        }
                    }
                    Some(complete) => {
                        c.accepted.insert(beam, Accepted { frame, end });
                        if complete {
                            if let Some(h) = c.window.take() {
                                s.cancel(h);
                                self.log_timer(end, node, "window_cancel");
                            }
                            if stage == Stage::AwaitAck {
                                self.conclude_initiator(s, node, c);
                                return;
                            }
                        }
                    }
                }
            }
        }
        self.put_cycle(node, c);
    }

    fn on_window_expiry(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        let now = s.now();
        if let Phase::Busy(c) = &mut self.nodes[node].phase {
            c.window = None;
            if let Some(Collector::Window(w)) = &mut c.collector {
                w.on_window_expiry();
            }
        }
        self.log_timer(now, node, "window_expire");
    }

    fn on_timeout(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        let now = s.now();
        let Some(mut c) = self.take_cycle(node) else { return };
        c.timeout = None;
        if c.collector.is_some() {
            self.put_cycle(node, c);
            return;
        }
        self.log_timer(now, node, "timeout");
        self.nodes[node].count("timeout");
        match c.stage {
            Stage::AwaitCts | Stage::AwaitAck => self.conclude_initiator(s, node, c),
            Stage::AwaitData => self.end_responder(s, node, c),
            Stage::CollectRts => unreachable!("no timeout while collecting RTS"),
        }
    }

    fn abandon_for_responder(&mut self, s: &mut Scheduler<Ev>, rx: NodeId, beam: usize, frame: Frame, start: SimTime, end: SimTime) {
        let mut c = self.take_cycle(rx).expect("busy node");
        c.cancel_timers(s);
        self.settle_stage(rx, &mut c);
        self.nodes[rx].count("abandoned_for_rts");
        self.apply_cw(rx, &c);
        self.start_responder(s, rx, beam, frame, start, end);
    }

    // ---- responses --------------------------------------------------------

    fn on_sifs(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        let now = s.now();
        let Some(mut c) = self.take_cycle(node) else { return };
        c.sifs = None;
        self.log_timer(now, node, "sifs_expire");
        for h in [c.window.take(), c.timeout.take()].into_iter().flatten() {
            s.cancel(h);
        }
        let mac = self.sc.mac.clone();
        match c.stage {
            Stage::CollectRts => {
                let mut frames = Vec::new();
                let mut expected = BTreeMap::new();
                for (&b, a) in &c.accepted {
                    if self.nodes[node].beams[b].nav.is_clear(now) {
                        let nav = mac.nav_duration(FrameKind::Cts, self.data_bytes);
                        frames.push((b, Frame::control(FrameKind::Cts, node, a.frame.src, nav, mac.cts_bytes)));
                        expected.insert(b, a.frame.src);
                    }
                }
                if frames.is_empty() {
                    self.end_responder(s, node, c);
                    return;
                }
                c.next_stage(Stage::AwaitData);
                c.expected = expected;
                self.put_cycle(node, c);
                let frames = self.with_notifications(node, frames, now);
                self.transmit(s, node, frames);
                let cts_end = now + mac.airtime(FrameKind::Cts, 0);
                let h = s
                    .schedule(cts_end + mac.response_timeout(FrameKind::Data, self.data_bytes), node, Ev::Timer(Timer::Timeout))
                    .expect("future");
                if let Phase::Busy(c) = &mut self.nodes[node].phase {
                    c.timeout = Some(h);
                }
            }
            Stage::AwaitCts => {
                let mut frames = Vec::new();
                let mut expected = BTreeMap::new();
                for (&b, &peer) in &c.expected {
                    if !c.accepted.contains_key(&b) {
                        continue;
                    }
                    let q = self.nodes[node].beams[b].queue.front().expect("packet still queued");
                    debug_assert_eq!(Some(&q.packet.id), c.packets.get(&b));
                    let p = q.packet.clone();
                    let nav = mac.nav_duration(FrameKind::Data, p.size_bytes);
                    frames.push((b, Frame { kind: FrameKind::Data, src: node, dst: peer, nav, size_bytes: p.size_bytes, packet: Some(p) }));
                    expected.insert(b, peer);
                }
                self.settle_stage(node, &mut c);
                if frames.is_empty() {
                    self.conclude_initiator(s, node, c);
                    return;
                }
                c.next_stage(Stage::AwaitAck);
                c.expected = expected;
                self.put_cycle(node, c);
                let frames = self.with_notifications(node, frames, now);
                let end = self.transmit(s, node, frames);
                let h = s
                    .schedule(end + mac.response_timeout(FrameKind::Ack, self.data_bytes), node, Ev::Timer(Timer::Timeout))
                    .expect("future");
                if let Phase::Busy(c) = &mut self.nodes[node].phase {
                    c.timeout = Some(h);
                }
            }
            Stage::AwaitData => {
                let mut frames = Vec::new();
                let mut payloads = Vec::new();
                for (&b, a) in &c.accepted {
                    frames.push((b, Frame::control(FrameKind::Ack, node, a.frame.src, SimTime::ZERO, mac.ack_bytes)));
                    if let Some(p) = &a.frame.packet {
                        payloads.push((p.clone(), a.end));
                    }
                }
                let frames = self.with_notifications(node, frames, now);
                self.transmit(s, node, frames);
                for (p, at) in payloads {
                    self.deliver_or_forward(node, p, at);
                }
                self.end_responder(s, node, c);
            }
            Stage::AwaitAck => self.conclude_initiator(s, node, c),
        }
    }

    /// Failures (and, for ACKs, successes) of the stage that just closed.
    fn settle_stage(&mut self, node: NodeId, c: &mut Cycle) {
        let stage = c.stage;
        if !matches!(stage, Stage::AwaitCts | Stage::AwaitAck) {
            return;
        }
        let expected: Vec<usize> = c.expected.keys().copied().collect();
        for b in expected {
            if c.accepted.contains_key(&b) {
                if stage == Stage::AwaitAck {
                    let q = self.nodes[node].beams[b].queue.pop_front().expect("acknowledged packet queued");
                    debug_assert_eq!(Some(&q.packet.id), c.packets.get(&b));
                    self.ledger.copy_released(q.packet.id, None);
                    c.succeeded = true;
                }
            } else if !c.deferred.contains(&b) {
                c.failed = true;
                c.dropped |= self.packet_failed(node, b, stage == Stage::AwaitAck);
            }
        }
        c.expected.clear();
    }

    fn packet_failed(&mut self, node: NodeId, beam: usize, long: bool) -> bool {
        let (srl, lrl) = (self.sc.mac.short_retry_limit, self.sc.mac.long_retry_limit);
        let q = &mut self.nodes[node].beams[beam].queue;
        let Some(front) = q.front_mut() else { return false };
        if long {
            front.long_retries += 1;
        } else {
            front.short_retries += 1;
        }
        if front.short_retries < srl && front.long_retries < lrl {
            return false;
        }
        let item = q.pop_front().expect("front exists");
        let p = item.packet;
        self.ledger.copy_released(p.id, Some(DropReason::RetryLimit));
        if let Some(nh) = p.next_hop() {
            self.invalidate_link(p.id.flow, node, nh);
        }
        self.nodes[node].count("drop_retry");
        true
    }

    fn apply_cw(&mut self, node: NodeId, c: &Cycle) {
        let n = &mut self.nodes[node];
        if c.succeeded {
            n.backoff.on_result(true);
            n.count("cw_reset");
        } else if c.failed {
            n.backoff.on_result(false);
            n.count("cw_double");
        }
        if c.dropped && !c.succeeded {
            n.backoff.reset();
        }
        debug_assert!(n.backoff.is_valid());
    }

    fn conclude_initiator(&mut self, s: &mut Scheduler<Ev>, node: NodeId, mut c: Box<Cycle>) {
        let now = s.now();
        c.cancel_timers(s);
        self.settle_stage(node, &mut c);
        self.apply_cw(node, &c);
        if c.succeeded && self.variant() == MacVariant::Proposed {
            let p = &self.sc.mac;
            self.nodes[node].defer_until = after_ack_defer(now, p.role_switch_slots, p.slot);
        }
        self.finish_cycle(s, node);
    }

    fn end_responder(&mut self, s: &mut Scheduler<Ev>, node: NodeId, mut c: Box<Cycle>) {
        c.cancel_timers(s);
        self.finish_cycle(s, node);
    }

    fn finish_cycle(&mut self, s: &mut Scheduler<Ev>, node: NodeId) {
        self.nodes[node].phase = Phase::Idle;
        if self.variant() == MacVariant::Basic {
            let n = &mut self.nodes[node];
            let (role, contend) = role_priority_switch_basic(n.role, n.queues_nonempty());
            n.role = role;
            if !contend {
                return;
            }
        }
        self.schedule_notify(s, node);
        self.maybe_contend(s, node);
    }

    // ---- packets ----------------------------------------------------------

    pub(crate) fn enqueue(&mut self, node: NodeId, packet: Packet) -> bool {
        let nh = packet.next_hop().expect("packet has somewhere to go");
        let b = self.beam_toward(node, nh);
        let id = packet.id;
        let cap = self.sc.mac.queue_capacity;
        match enqueue_data(&mut self.nodes[node].beams[b], QueuedPacket::new(packet), cap) {
            Enqueue::Accepted => {
                self.ledger.copy_created(id);
                true
            }
            Enqueue::Overflow => {
                self.ledger.note_loss(id, DropReason::Overflow);
                self.nodes[node].count("drop_overflow");
                false
            }
        }
    }

    fn deliver_or_forward(&mut self, node: NodeId, mut p: Packet, at: SimTime) {
        p.hop += 1;
        debug_assert_eq!(p.holder(), node);
        let Some(nh) = p.next_hop() else {
            if self.ledger.delivered(p.id, p.gen_time, at) {
                self.nodes[node].count("delivered");
            }
            return;
        };
        if !self.nodes[node].seen.insert(p.id) {
            self.nodes[node].count("rx_duplicate");
            return;
        }
        if !self.neighbors[node].iter().any(|n| n.id == nh) {
            let alt = self.routes[p.id.flow]
                .routes
                .iter()
                .find_map(|r| r.iter().position(|&x| x == node).filter(|&i| i + 1 < r.len()).map(|i| (r.clone(), i)));
            match alt {
                Some((r, i)) => {
                    p.path = r;
                    p.hop = i;
                }
                None => {
                    self.ledger.note_loss(p.id, DropReason::NoRoute);
                    self.nodes[node].count("drop_noroute");
                    return;
                }
            }
        }
        self.enqueue(node, p);
    }
}
