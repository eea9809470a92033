//! Asynchronous multi-beam MAC: windowed reception, window-period bound,
//! beam-index guarding of response timers and role-switch slots.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::NodeId;
use crate::mac::frame::FrameKind;
use crate::time::SimTime;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("no valid window period: lower bound {lower} is not below SIFS {sifs}")]
    Infeasible { lower: SimTime, sifs: SimTime },
    #[error("window period {requested} is below the delay-spread bound {lower}")]
    BelowLowerBound { requested: SimTime, lower: SimTime },
    #[error("window period {requested} must be strictly less than SIFS {sifs}")]
    NotBelowSifs { requested: SimTime, sifs: SimTime },
    #[error("window period must be positive")]
    Zero,
}

/// Twice the largest propagation-delay difference between two transmitters
/// that share a receiver.
pub fn delay_spread_bound(pairs: &[(SimTime, SimTime)]) -> SimTime {
    pairs
        .iter()
        .map(|&(a, b)| if a > b { a - b } else { b - a })
        .max()
        .unwrap_or(SimTime::ZERO)
        .mul(2)
}

/// Validates `requested` against `2*max|t_ir - t_jr| <= wp < sifs`.
pub fn compute_window_period(
    pairs: &[(SimTime, SimTime)],
    sifs: SimTime,
    requested: SimTime,
) -> Result<SimTime, WindowError> {
    let lower = delay_spread_bound(pairs);
    if lower >= sifs {
        return Err(WindowError::Infeasible { lower, sifs });
    }
    if requested == SimTime::ZERO {
        return Err(WindowError::Zero);
    }
    if requested >= sifs {
        return Err(WindowError::NotBelowSifs { requested, sifs });
    }
    if requested < lower {
        return Err(WindowError::BelowLowerBound { requested, lower });
    }
    Ok(requested)
}

/// `ceil(max_delay / slot)`.
pub fn required_role_switch_slots(max_delay: SimTime, slot: SimTime) -> u32 {
    assert!(slot > SimTime::ZERO, "slot must be positive");
    let d = max_delay.as_nanos();
    let s = slot.as_nanos();
    d.div_ceil(s) as u32
}

/// Earliest instant a node that just collected its ACKs may contend again.
pub fn after_ack_defer(now: SimTime, role_switch_slots: u32, slot: SimTime) -> SimTime {
    now + slot.mul(role_switch_slots as u64)
}

/// True iff a frame on `beam` may touch the response timers of the awaited beams.
pub fn beam_index_guard(
    pending: &BTreeMap<usize, NodeId>,
    awaited: FrameKind,
    frame_kind: FrameKind,
    beam: usize,
) -> bool {
    pending.contains_key(&beam) && frame_kind == awaited
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowOffer {
    Accepted { complete: bool },
    Late,
}

/// Counters of one windowed reception phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowState {
    pub window_period: SimTime,
    pub window_end: SimTime,
    pub sifs_at: SimTime,
    pub no_of_frames: usize,
    pub total_desired_frames: usize,
    pub window_closed: bool,
}

impl WindowState {
    /// Opens the window on the first desired frame, decoded at `first_end`.
    pub fn open(first_end: SimTime, window_period: SimTime, sifs: SimTime, total_desired_frames: usize) -> Self {
        assert!(
            window_period > SimTime::ZERO && window_period < sifs,
            "window period {window_period} must lie in (0, SIFS {sifs})"
        );
        assert!(total_desired_frames >= 1);
        let complete = total_desired_frames == 1;
        WindowState {
            window_period,
            window_end: first_end + window_period,
            sifs_at: first_end + sifs,
            no_of_frames: 1,
            total_desired_frames,
            window_closed: complete,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.no_of_frames == self.total_desired_frames
    }

    /// A later desired frame whose arrival started at `arrival_start`.
    pub fn offer(&mut self, arrival_start: SimTime) -> WindowOffer {
        if self.is_complete() || arrival_start > self.window_end {
            return WindowOffer::Late;
        }
        self.no_of_frames += 1;
        debug_assert!(self.no_of_frames <= self.total_desired_frames);
        let complete = self.is_complete();
        if complete {
            self.window_closed = true;
        }
        WindowOffer::Accepted { complete }
    }

    /// Window timer fired: it must not fire once all frames arrived.
    pub fn on_window_expiry(&mut self) {
        assert!(
            !self.is_complete(),
            "window timer fired after no_of_frames reached total_desired_frames"
        );
        self.window_closed = true;
    }
}
