//! Deterministic discrete-event scheduler and seeded random streams.
//!
//! Events are delivered in `(fire_at, seq)` order where `seq` is the
//! insertion counter, so events scheduled for the same instant run FIFO.
//! Cancellation is lazy: a cancelled entry stays in the heap and is skipped
//! when it reaches the front.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::time::SimTime;

pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("event scheduled in the past: fire_at {fire_at} < now {now}")]
    InThePast { fire_at: SimTime, now: SimTime },
}

/// Coarse classification used for run statistics and per-node counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    FrameArrivalStart,
    FrameArrivalEnd,
    TimerExpiry,
    TrafficArrival,
    MobilityUpdate,
    NeighborDiscovery,
    MetricsSample,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::FrameArrivalStart,
        EventKind::FrameArrivalEnd,
        EventKind::TimerExpiry,
        EventKind::TrafficArrival,
        EventKind::MobilityUpdate,
        EventKind::NeighborDiscovery,
        EventKind::MetricsSample,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EventKind::FrameArrivalStart => "frame_arrival_start",
            EventKind::FrameArrivalEnd => "frame_arrival_end",
            EventKind::TimerExpiry => "timer_expiry",
            EventKind::TrafficArrival => "traffic_arrival",
            EventKind::MobilityUpdate => "mobility_update",
            EventKind::NeighborDiscovery => "neighbor_discovery",
            EventKind::MetricsSample => "metrics_sample",
        }
    }
}

/// Implemented by whatever payload the simulation attaches to events.
pub trait Classify {
    fn kind(&self) -> EventKind;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventHandle(u64);

impl EventHandle {
    pub fn seq(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct Event<P> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub target: NodeId,
    pub payload: P,
}

struct Queued<P>(Event<P>);

impl<P> PartialEq for Queued<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0.fire_at == other.0.fire_at && self.0.seq == other.0.seq
    }
}

impl<P> Eq for Queued<P> {}

impl<P> PartialOrd for Queued<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Queued<P> {
    // BinaryHeap is a max-heap; reverse so the earliest (fire_at, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .fire_at
            .cmp(&self.0.fire_at)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub processed: BTreeMap<EventKind, u64>,
}

impl RunStats {
    pub fn total(&self) -> u64 {
        self.processed.values().sum()
    }

    pub fn count(&self, kind: EventKind) -> u64 {
        self.processed.get(&kind).copied().unwrap_or(0)
    }
}

pub struct Scheduler<P> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Queued<P>>,
    pending: HashSet<u64>,
    last_delivered: (SimTime, u64),
    stats: RunStats,
}

impl<P: Classify> Default for Scheduler<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: Classify> Scheduler<P> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            pending: HashSet::new(),
            last_delivered: (SimTime::ZERO, 0),
            stats: RunStats::default(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn schedule(
        &mut self,
        fire_at: SimTime,
        target: NodeId,
        payload: P,
    ) -> Result<EventHandle, ScheduleError> {
        if fire_at < self.now {
            return Err(ScheduleError::InThePast { fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.insert(seq);
        self.heap.push(Queued(Event { fire_at, seq, target, payload }));
        Ok(EventHandle(seq))
    }

    /// Schedules `delay` after the current clock. Cannot fail.
    pub fn schedule_in(&mut self, delay: SimTime, target: NodeId, payload: P) -> EventHandle {
        let at = self.now + delay;
        self.schedule(at, target, payload).expect("non-negative delay")
    }

    pub fn cancel(&mut self, h: EventHandle) -> bool {
        self.pending.remove(&h.0)
    }

    pub fn is_pending(&self, h: EventHandle) -> bool {
        self.pending.contains(&h.0)
    }

    /// Pops the next live event with `fire_at <= limit`, advancing the clock.
    pub fn pop_until(&mut self, limit: SimTime) -> Option<Event<P>> {
        loop {
            let top = self.heap.peek()?;
            if top.0.fire_at > limit {
                return None;
            }
            let Queued(ev) = self.heap.pop().expect("peeked");
            if !self.pending.remove(&ev.seq) {
                continue;
            }
            let key = (ev.fire_at, ev.seq);
            assert!(
                key >= self.last_delivered,
                "event order violated: {:?} after {:?}",
                key,
                self.last_delivered
            );
            self.last_delivered = key;
            self.now = ev.fire_at;
            *self.stats.processed.entry(ev.payload.kind()).or_insert(0) += 1;
            return Some(ev);
        }
    }

    /// Runs every event with `fire_at <= t_end` through `handler`, then
    /// advances the clock to `t_end`.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> RunStats
    where
        F: FnMut(&mut Self, Event<P>),
    {
        let before = self.stats.clone();
        while let Some(ev) = self.pop_until(t_end) {
            handler(self, ev);
        }
        if t_end > self.now {
            self.now = t_end;
        }
        let mut delta = RunStats::default();
        for (k, v) in &self.stats.processed {
            let d = v - before.count(*k);
            if d > 0 {
                delta.processed.insert(*k, d);
            }
        }
        delta
    }

    /// Moves the clock forward with nothing processed; used after the last
    /// event of a bounded run.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }
}

/// Purpose label for an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Mobility,
    TrafficJitter,
    FlowSelection,
    Placement,
}

impl StreamId {
    fn index(self) -> u64 {
        match self {
            StreamId::Mobility => 1,
            StreamId::TrafficJitter => 2,
            StreamId::FlowSelection => 3,
            StreamId::Placement => 4,
        }
    }
}

/// A reproducible random stream keyed by `(seed, stream)`.
pub fn rng_stream(seed: u64, stream: StreamId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.index());
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[derive(Debug, Clone, PartialEq)]
    struct Tag(&'static str);

    impl Classify for Tag {
        fn kind(&self) -> EventKind {
            EventKind::TimerExpiry
        }
    }

    fn drain(s: &mut Scheduler<Tag>, until: SimTime) -> Vec<&'static str> {
        let mut out = Vec::new();
        s.run_until(until, |_, ev| out.push(ev.payload.0));
        out
    }

    #[test]
    fn same_instant_is_fifo() {
        let mut s = Scheduler::new();
        let t = SimTime::from_micros(100);
        s.schedule(t, 0, Tag("A")).unwrap();
        s.schedule(t, 0, Tag("B")).unwrap();
        assert_eq!(drain(&mut s, SimTime::from_secs(1)), vec!["A", "B"]);
    }

    #[test]
    fn schedule_now_runs_after_already_queued_same_time_events() {
        let mut s = Scheduler::new();
        let t = SimTime::from_micros(5);
        s.schedule(t, 0, Tag("first")).unwrap();
        s.schedule(t, 0, Tag("second")).unwrap();
        let mut order = Vec::new();
        s.run_until(SimTime::from_micros(10), |s, ev| {
            order.push(ev.payload.0);
            if ev.payload.0 == "first" {
                let now = s.now();
                s.schedule(now, 0, Tag("now")).unwrap();
            }
        });
        assert_eq!(order, vec!["first", "second", "now"]);
    }

    #[test]
    fn past_scheduling_is_rejected() {
        let mut s: Scheduler<Tag> = Scheduler::new();
        s.schedule(SimTime::from_micros(10), 0, Tag("x")).unwrap();
        drain(&mut s, SimTime::from_micros(10));
        let err = s
            .schedule(SimTime::from_nanos(9_999), 0, Tag("late"))
            .unwrap_err();
        assert!(matches!(err, ScheduleError::InThePast { .. }));
    }

    #[test]
    fn cancel_semantics() {
        let mut s = Scheduler::new();
        let h = s.schedule(SimTime::from_micros(9), 0, Tag("window")).unwrap();
        assert!(s.cancel(h));
        assert!(!s.cancel(h));
        assert!(drain(&mut s, SimTime::from_secs(1)).is_empty());

        let h2 = s.schedule(SimTime::from_secs(2), 0, Tag("t")).unwrap();
        drain(&mut s, SimTime::from_secs(3));
        assert!(!s.cancel(h2));
    }

    #[test]
    fn empty_run_returns_zero_counts() {
        let mut s: Scheduler<Tag> = Scheduler::new();
        let stats = s.run_until(SimTime::from_secs(180), |_, _| {});
        assert_eq!(stats.total(), 0);
        assert_eq!(s.now(), SimTime::from_secs(180));
    }

    #[test]
    fn streams_are_reproducible_and_independent() {
        let a: Vec<u64> = (0..8).map(|_| 0).scan(rng_stream(7, StreamId::Mobility), |r, _| Some(r.gen())).collect();
        let b: Vec<u64> = (0..8).map(|_| 0).scan(rng_stream(7, StreamId::Mobility), |r, _| Some(r.gen())).collect();
        let c: Vec<u64> = (0..8).map(|_| 0).scan(rng_stream(7, StreamId::FlowSelection), |r, _| Some(r.gen())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest::proptest! {
        #[test]
        fn delivery_order_is_time_then_seq(times in proptest::collection::vec(0u64..50, 1..200), cancel_mask in proptest::collection::vec(proptest::bool::ANY, 200)) {
            let mut s = Scheduler::new();
            let mut handles = Vec::new();
            for &t in &times {
                handles.push(s.schedule(SimTime::from_nanos(t), 0, Tag("e")).unwrap());
            }
            let mut cancelled = HashSet::new();
            for (h, c) in handles.iter().zip(cancel_mask.iter()) {
                if *c { s.cancel(*h); cancelled.insert(h.seq()); }
            }
            let mut seen = Vec::new();
            s.run_until(SimTime::from_nanos(100), |_, ev| seen.push((ev.fire_at, ev.seq)));
            let mut sorted = seen.clone();
            sorted.sort();
            proptest::prop_assert_eq!(&seen, &sorted);
            for (_, seq) in &seen { proptest::prop_assert!(!cancelled.contains(seq)); }
            proptest::prop_assert_eq!(seen.len(), times.len() - cancelled.len());
        }
    }
}
