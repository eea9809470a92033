//! Baseline synchronous multi-beam MAC: responses only to frames that arrive
//! at exactly the same instant, and transmit-first role priority.

use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrictOffer {
    Accepted,
    Discarded,
}

/// A baseline reception batch: every accepted frame began arriving at the
/// same instant as the first one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrictCommit {
    pub first_start: SimTime,
    pub sifs_at: SimTime,
    pub accepted: usize,
    pub capacity: usize,
}

impl StrictCommit {
    pub fn open(first_start: SimTime, first_end: SimTime, sifs: SimTime, capacity: usize) -> Self {
        StrictCommit { first_start, sifs_at: first_end + sifs, accepted: 1, capacity: capacity.max(1) }
    }

    pub fn offer(&mut self, arrival_start: SimTime) -> StrictOffer {
        if arrival_start == self.first_start && self.accepted < self.capacity {
            self.accepted += 1;
            StrictOffer::Accepted
        } else {
            StrictOffer::Discarded
        }
    }

    pub fn is_complete(&self) -> bool {
        self.accepted >= self.capacity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleRole {
    TransmitPriority,
    ReceivePriority,
}

/// Alternates the nominal role after a cycle. The baseline still contends
/// whenever it has queued data, so the returned flag says whether the node
/// should start contending right away.
pub fn role_priority_switch_basic(role: CycleRole, queues_nonempty: bool) -> (CycleRole, bool) {
    let next = match role {
        CycleRole::TransmitPriority => CycleRole::ReceivePriority,
        CycleRole::ReceivePriority => CycleRole::TransmitPriority,
    };
    (next, queues_nonempty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_identical_arrival_instants_are_accepted() {
        let t0 = SimTime::from_micros(425);
        let mut c = StrictCommit::open(t0, t0 + SimTime::from_nanos(22_400), SimTime::from_micros(10), 4);
        assert_eq!(c.offer(t0), StrictOffer::Accepted);
        assert_eq!(c.offer(t0 + SimTime::from_micros(2)), StrictOffer::Discarded);
        assert_eq!(c.offer(t0 + SimTime::from_nanos(1)), StrictOffer::Discarded);
        assert_eq!(c.accepted, 2);
    }

    #[test]
    fn four_simultaneous_frames_fill_capacity() {
        let t0 = SimTime::from_micros(1);
        let mut c = StrictCommit::open(t0, t0, SimTime::from_micros(10), 4);
        for _ in 0..3 {
            assert_eq!(c.offer(t0), StrictOffer::Accepted);
        }
        assert!(c.is_complete());
        assert_eq!(c.offer(t0), StrictOffer::Discarded);
    }

    #[test]
    fn role_switch_prefers_transmission_with_backlog() {
        assert_eq!(
            role_priority_switch_basic(CycleRole::ReceivePriority, true),
            (CycleRole::TransmitPriority, true)
        );
        assert_eq!(
            role_priority_switch_basic(CycleRole::TransmitPriority, true),
            (CycleRole::ReceivePriority, true)
        );
        assert_eq!(
            role_priority_switch_basic(CycleRole::TransmitPriority, false),
            (CycleRole::ReceivePriority, false)
        );
    }
}
