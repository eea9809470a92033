//! Node positions, sectored antennas, delays and per-beam reception outcomes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::NodeId;
use crate::time::SimTime;

pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("azimuth undefined between coincident positions ({0}, {1})")]
    Coincident(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Direction from `from` toward `to` in degrees, counterclockwise from +x, in [0, 360).
pub fn azimuth(from: Position, to: Position) -> Result<f64, GeometryError> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(GeometryError::Coincident(from.x, from.y));
    }
    Ok(normalize_deg(dy.atan2(dx).to_degrees()))
}

pub fn normalize_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    // rem_euclid can return exactly 360.0 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Smallest absolute angle between two bearings, in [0, 180].
pub fn angular_gap(a: f64, b: f64) -> f64 {
    let d = normalize_deg(a - b);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub num_beams: usize,
    #[serde(default)]
    pub boresight_offset: f64,
    /// Single steerable beam that points at the current peer.
    #[serde(default)]
    pub steerable: bool,
    /// Beamwidth of a steerable antenna, degrees.
    #[serde(default = "default_beamwidth")]
    pub beamwidth: f64,
}

fn default_beamwidth() -> f64 {
    45.0
}

impl AntennaConfig {
    pub fn sectored(num_beams: usize) -> Self {
        assert!(num_beams >= 1);
        AntennaConfig { num_beams, boresight_offset: 0.0, steerable: false, beamwidth: 360.0 / num_beams as f64 }
    }

    pub fn steerable(beamwidth: f64) -> Self {
        AntennaConfig { num_beams: 1, boresight_offset: 0.0, steerable: true, beamwidth }
    }

    pub fn sector_width(&self) -> f64 {
        if self.steerable {
            self.beamwidth
        } else {
            360.0 / self.num_beams as f64
        }
    }

    pub fn is_multi_beam(&self) -> bool {
        !self.steerable && self.num_beams > 1
    }
}

/// Index of the fixed sector that contains `az`.
pub fn beam_for_direction(a: &AntennaConfig, az: f64) -> usize {
    if a.steerable || a.num_beams == 1 {
        return 0;
    }
    let rel = normalize_deg(az - a.boresight_offset);
    let idx = (rel / (360.0 / a.num_beams as f64)).floor() as usize;
    idx.min(a.num_beams - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub bit_rate: f64,
    pub comm_radius: f64,
    #[serde(default = "default_c")]
    pub propagation_speed: f64,
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

impl ChannelModel {
    pub fn in_range(&self, d: f64) -> bool {
        d <= self.comm_radius
    }

    pub fn propagation_delay(&self, distance: f64) -> SimTime {
        propagation_delay_at(distance, self.propagation_speed)
    }

    pub fn transmission_delay(&self, size_bytes: u32) -> SimTime {
        transmission_delay(size_bytes, self.bit_rate)
    }

    pub fn max_propagation(&self) -> SimTime {
        self.propagation_delay(self.comm_radius)
    }
}

pub fn propagation_delay(distance: f64) -> SimTime {
    propagation_delay_at(distance, SPEED_OF_LIGHT)
}

fn propagation_delay_at(distance: f64, speed: f64) -> SimTime {
    assert!(distance >= 0.0, "negative distance");
    SimTime::from_secs_f64(distance / speed)
}

pub fn transmission_delay(size_bytes: u32, rate_bps: f64) -> SimTime {
    assert!(size_bytes > 0 && rate_bps > 0.0);
    SimTime::from_secs_f64(size_bytes as f64 * 8.0 / rate_bps)
}

/// Radio-relevant snapshot of one node.
#[derive(Debug, Clone, Copy)]
pub struct RadioNode {
    pub id: NodeId,
    pub pos: Position,
    pub antenna: AntennaConfig,
    /// Bearing of a steerable beam; `None` for sectored antennas.
    pub pointing: Option<f64>,
}

/// Which way a transmission is radiated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TxSector {
    Fixed(usize),
    Steered(f64),
}

impl RadioNode {
    fn tx_covers(&self, sector: TxSector, az_to_rx: f64) -> bool {
        match sector {
            TxSector::Fixed(b) => beam_for_direction(&self.antenna, az_to_rx) == b,
            TxSector::Steered(dir) => angular_gap(dir, az_to_rx) <= self.antenna.beamwidth / 2.0,
        }
    }

    /// Beam on which this node would hear energy coming from bearing `az_to_tx`.
    pub fn rx_beam(&self, az_to_tx: f64) -> Option<usize> {
        if self.antenna.steerable {
            let dir = self.pointing?;
            (angular_gap(dir, az_to_tx) <= self.antenna.beamwidth / 2.0).then_some(0)
        } else {
            Some(beam_for_direction(&self.antenna, az_to_tx))
        }
    }
}

/// One node that will see energy from a transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hearer {
    pub rx: NodeId,
    pub rx_beam: usize,
    pub delay: SimTime,
}

/// Every node inside the transmit sector and range, with the receiving
/// beam pointing back toward the transmitter.
pub fn hearers(tx: &RadioNode, sector: TxSector, nodes: &[RadioNode], ch: &ChannelModel) -> Vec<Hearer> {
    let mut out = Vec::new();
    for n in nodes {
        if n.id == tx.id {
            continue;
        }
        let d = tx.pos.distance(n.pos);
        if !ch.in_range(d) || d == 0.0 {
            continue;
        }
        let az_fwd = azimuth(tx.pos, n.pos).expect("distinct");
        if !tx.tx_covers(sector, az_fwd) {
            continue;
        }
        let az_back = normalize_deg(az_fwd + 180.0);
        if let Some(rx_beam) = n.rx_beam(az_back) {
            out.push(Hearer { rx: n.id, rx_beam, delay: ch.propagation_delay(d) });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RxOutcome {
    Ok,
    Corrupted,
}

/// Outcome for each arrival interval `[start, end)` on one receiver beam:
/// any temporal overlap corrupts every frame involved (no capture).
pub fn beam_reception_outcome(arrivals: &[(SimTime, SimTime)]) -> Vec<RxOutcome> {
    arrivals
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let hit = arrivals
                .iter()
                .enumerate()
                .any(|(j, b)| i != j && a.0 < b.1 && b.0 < a.1);
            if hit {
                RxOutcome::Corrupted
            } else {
                RxOutcome::Ok
            }
        })
        .collect()
}
