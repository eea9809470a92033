//! Scenario files: JSON schema, defaults, validation and per-seed resolution.

use std::collections::VecDeque;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{rng_stream, NodeId, StreamId};
use crate::geometry::{AntennaConfig, ChannelModel, Position, SPEED_OF_LIGHT};
use crate::mac::proposed::{compute_window_period, required_role_switch_slots, WindowError};
use crate::mac::{FrameKind, MacParams, MacVariant};
use crate::metrics::CbrFlow;
use crate::mobility::{Bounds, GaussMarkovParams};
use crate::routing::{adjacency, neighbor_discovery};
use crate::time::SimTime;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario does not match the schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{context} refers to unknown node {id}")]
    UnknownNode { context: String, id: NodeId },
    #[error("node ids must be 0..n in order; found {found} at position {index}")]
    NodeOrder { index: usize, found: NodeId },
    #[error("window period: {0}")]
    Window(#[from] WindowError),
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_world")]
    pub world: Bounds,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub nodes: Vec<NodeConfig>,
    #[serde(default)]
    pub random_nodes: Option<RandomNodes>,
    #[serde(default)]
    pub mac: MacConfig,
    #[serde(default)]
    pub flows: Vec<FlowConfig>,
    #[serde(default)]
    pub random_flows: Option<RandomFlows>,
    #[serde(default)]
    pub mobility: MobilityConfig,
    #[serde(default)]
    pub routing: RoutingConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

fn default_world() -> Bounds {
    Bounds { width: 10_000.0, height: 10_000.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub bit_rate_bps: f64,
    pub comm_radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub antenna: AntennaConfig,
    /// Where an idle steerable antenna points when nothing else applies.
    #[serde(default)]
    pub default_peer: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomNodes {
    pub count: usize,
    /// Sectors of flow endpoints; every other node gets one steerable beam.
    #[serde(default = "default_endpoint_beams")]
    pub endpoint_beams: usize,
    #[serde(default = "default_relay_beamwidth")]
    pub relay_beamwidth: f64,
}

fn default_endpoint_beams() -> usize {
    4
}

fn default_relay_beamwidth() -> f64 {
    45.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RoleSwitchSetting {
    Slots(u32),
    Auto(AutoTag),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacConfig {
    pub variant: MacVariant,
    pub window_period_us: f64,
    pub data_wp_multiplier: u32,
    pub role_switch_slots: RoleSwitchSetting,
    pub cw_min: u32,
    pub cw_max: u32,
    pub short_retry_limit: u32,
    pub long_retry_limit: u32,
    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    pub queue_capacity: usize,
    pub rts_bytes: u32,
    pub cts_bytes: u32,
    pub ack_bytes: u32,
    pub timeout_slack_slots: u32,
}

impl Default for MacConfig {
    fn default() -> Self {
        MacConfig {
            variant: MacVariant::Proposed,
            window_period_us: 9.0,
            data_wp_multiplier: 1,
            role_switch_slots: RoleSwitchSetting::Auto(AutoTag::Auto),
            cw_min: 16,
            cw_max: 1024,
            short_retry_limit: 7,
            long_retry_limit: 4,
            slot_us: 20.0,
            sifs_us: 10.0,
            difs_us: 50.0,
            queue_capacity: 50,
            rts_bytes: 20,
            cts_bytes: 14,
            ack_bytes: 14,
            timeout_slack_slots: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub src: NodeId,
    pub dst: NodeId,
    pub rate_bps: f64,
    #[serde(default = "default_packet_bytes")]
    pub packet_bytes: u32,
    #[serde(default)]
    pub start_s: f64,
    #[serde(default)]
    pub stop_s: Option<f64>,
}

fn default_packet_bytes() -> u32 {
    1500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFlows {
    pub count: usize,
    pub rate_bps: f64,
    #[serde(default = "default_packet_bytes")]
    pub packet_bytes: u32,
    #[serde(default = "default_min_hops")]
    pub min_hops: usize,
}

fn default_min_hops() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MobilityConfig {
    Static,
    GaussMarkov {
        #[serde(default = "default_mean_speed")]
        mean_speed: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_speed_sigma")]
        speed_sigma: f64,
        #[serde(default = "default_direction_sigma")]
        direction_sigma: f64,
        #[serde(default = "default_one")]
        update_interval_s: f64,
    },
}

impl Default for MobilityConfig {
    fn default() -> Self {
        MobilityConfig::Static
    }
}

fn default_mean_speed() -> f64 {
    GaussMarkovParams::default().mean_speed
}
fn default_alpha() -> f64 {
    GaussMarkovParams::default().alpha
}
fn default_speed_sigma() -> f64 {
    GaussMarkovParams::default().speed_sigma
}
fn default_direction_sigma() -> f64 {
    GaussMarkovParams::default().direction_sigma
}
fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingConfig {
    pub k: usize,
    pub refresh_s: f64,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        RoutingConfig { k: 4, refresh_s: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub duration_s: f64,
    pub seed: u64,
    pub replications: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { duration_s: 180.0, seed: 1, replications: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub sample_interval_s: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { sample_interval_s: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub pos: Position,
    pub antenna: AntennaConfig,
    pub default_peer: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilitySpec {
    pub params: GaussMarkovParams,
    pub interval: SimTime,
}

/// A fully resolved scenario for one seed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub world: Bounds,
    pub channel: ChannelModel,
    pub nodes: Vec<NodeSpec>,
    pub mac: MacParams,
    pub flows: Vec<CbrFlow>,
    pub mobility: Option<MobilitySpec>,
    pub routes_k: usize,
    pub route_refresh: SimTime,
    pub duration: SimTime,
    pub sample_interval: SimTime,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = serde_json::from_str(text)?;
    cfg.resolve(cfg.sim.seed)?;
    Ok(cfg)
}

impl ScenarioConfig {
    pub fn is_mobile(&self) -> bool {
        matches!(self.mobility, MobilityConfig::GaussMarkov { .. })
    }

    /// Hex digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn set_rate(&mut self, rate_bps: f64) {
        for f in &mut self.flows {
            f.rate_bps = rate_bps;
        }
        if let Some(r) = &mut self.random_flows {
            r.rate_bps = rate_bps;
        }
    }

    pub fn set_flow_count(&mut self, count: usize) {
        if let Some(r) = &mut self.random_flows {
            r.count = count;
        } else {
            self.flows.truncate(count);
        }
    }

    fn check_basics(&self) -> Result<(), ConfigError> {
        let m = &self.mac;
        if !(self.channel.bit_rate_bps > 0.0) {
            return Err(invalid("channel.bit_rate_bps", "must be positive"));
        }
        if !(self.channel.comm_radius_m > 0.0) {
            return Err(invalid("channel.comm_radius_m", "must be positive"));
        }
        if !m.cw_min.is_power_of_two() || !m.cw_max.is_power_of_two() || m.cw_min > m.cw_max {
            return Err(invalid("mac.cw_min/cw_max", "must be powers of two with cw_min <= cw_max"));
        }
        if !(m.slot_us > 0.0 && m.sifs_us > 0.0 && m.difs_us > 0.0) {
            return Err(invalid("mac timing", "slot, SIFS and DIFS must be positive"));
        }
        if m.queue_capacity == 0 {
            return Err(invalid("mac.queue_capacity", "must be at least 1"));
        }
        if m.data_wp_multiplier == 0 {
            return Err(invalid("mac.data_wp_multiplier", "must be at least 1"));
        }
        if !(self.sim.duration_s > 0.0) {
            return Err(invalid("sim.duration_s", "must be positive"));
        }
        if !(self.metrics.sample_interval_s > 0.0) || !(self.routing.refresh_s > 0.0) {
            return Err(invalid("sampling/refresh interval", "must be positive"));
        }
        if self.nodes.is_empty() == self.random_nodes.is_none() {
            return Err(invalid("nodes", "give either an explicit node list or random_nodes"));
        }
        for f in &self.flows {
            if !(f.rate_bps > 0.0) || f.packet_bytes == 0 {
                return Err(invalid("flows", "rate and packet size must be positive"));
            }
        }
        if let MobilityConfig::GaussMarkov { alpha, update_interval_s, .. } = self.mobility {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(invalid("mobility.alpha", "must lie in [0, 1]"));
            }
            if !(update_interval_s > 0.0) {
                return Err(invalid("mobility.update_interval_s", "must be positive"));
            }
        }
        Ok(())
    }

    fn mac_params(&self, channel: &ChannelModel) -> MacParams {
        let m = &self.mac;
        MacParams {
            variant: m.variant,
            slot: SimTime::from_micros_f64(m.slot_us),
            sifs: SimTime::from_micros_f64(m.sifs_us),
            difs: SimTime::from_micros_f64(m.difs_us),
            cw_min: m.cw_min,
            cw_max: m.cw_max,
            short_retry_limit: m.short_retry_limit,
            long_retry_limit: m.long_retry_limit,
            rts_bytes: m.rts_bytes,
            cts_bytes: m.cts_bytes,
            ack_bytes: m.ack_bytes,
            bit_rate: channel.bit_rate,
            max_prop: channel.max_propagation(),
            window_period: SimTime::from_micros_f64(m.window_period_us),
            data_wp_multiplier: m.data_wp_multiplier,
            role_switch_slots: 0,
            queue_capacity: m.queue_capacity,
            timeout_slack_slots: m.timeout_slack_slots,
        }
    }

    /// Builds the concrete scenario for `seed`, drawing random placement and
    /// flows from their own streams.
    pub fn resolve(&self, seed: u64) -> Result<Scenario, ConfigError> {
        self.check_basics()?;
        let channel = ChannelModel {
            bit_rate: self.channel.bit_rate_bps,
            comm_radius: self.channel.comm_radius_m,
            propagation_speed: SPEED_OF_LIGHT,
        };
        let duration = SimTime::from_secs_f64(self.sim.duration_s);
        let mut nodes = match &self.random_nodes {
            Some(r) => random_nodes(r, &self.world, seed),
            None => explicit_nodes(&self.nodes)?,
        };
        let mut flows: Vec<CbrFlow> = Vec::new();
        for (i, f) in self.flows.iter().enumerate() {
            for (what, id) in [("source", f.src), ("destination", f.dst)] {
                if id >= nodes.len() {
                    return Err(ConfigError::UnknownNode { context: format!("flow {i} {what}"), id });
                }
            }
            if f.src == f.dst {
                return Err(invalid("flows", format!("flow {i} has the same source and destination")));
            }
            flows.push(CbrFlow {
                flow_id: i,
                src: f.src,
                dst: f.dst,
                rate_bps: f.rate_bps,
                packet_bytes: f.packet_bytes,
                start: SimTime::from_secs_f64(f.start_s),
                stop: f.stop_s.map(SimTime::from_secs_f64).unwrap_or(duration),
            });
        }
        if let Some(rf) = &self.random_flows {
            let picked = random_flow_pairs(&nodes, &channel, rf, seed);
            if picked.len() < rf.count {
                return Err(invalid("random_flows", format!("only {} connected pairs found", picked.len())));
            }
            let mut jitter = rng_stream(seed, StreamId::TrafficJitter);
            for (src, dst) in picked {
                let id = flows.len();
                let mut flow = CbrFlow {
                    flow_id: id,
                    src,
                    dst,
                    rate_bps: rf.rate_bps,
                    packet_bytes: rf.packet_bytes,
                    start: SimTime::ZERO,
                    stop: duration,
                };
                let ia = flow.inter_arrival().as_nanos();
                flow.start = SimTime::from_nanos(jitter.gen_range(0..ia.max(1)));
                flows.push(flow);
            }
            if let Some(r) = &self.random_nodes {
                for f in &flows {
                    for id in [f.src, f.dst] {
                        nodes[id].antenna = AntennaConfig::sectored(r.endpoint_beams);
                        nodes[id].default_peer = None;
                    }
                }
            }
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Some(p) = n.default_peer {
                if p >= nodes.len() || p == i {
                    return Err(ConfigError::UnknownNode { context: format!("default_peer of node {i}"), id: p });
                }
            }
        }

        let mut mac = self.mac_params(&channel);
        let t_rts = mac.airtime(FrameKind::Rts, 0);
        let mobile = self.is_mobile();
        let max_link = if mobile { channel.max_propagation() } else { max_neighbor_delay(&nodes, &channel) };
        mac.role_switch_slots = match self.mac.role_switch_slots {
            RoleSwitchSetting::Slots(s) => s,
            RoleSwitchSetting::Auto(_) => required_role_switch_slots(t_rts + max_link, mac.slot),
        };
        let pairs = delay_spread_pairs(&nodes, &channel, mobile);
        match compute_window_period(&pairs, mac.sifs, mac.window_period) {
            Ok(_) => {}
            Err(e @ (WindowError::NotBelowSifs { .. } | WindowError::Zero)) => return Err(e.into()),
            Err(e) if !mobile => return Err(e.into()),
            Err(e) => log::warn!("{}: window period not guaranteed for every geometry: {e}", self.name),
        }
        let mac_for_check = mac.window_for(FrameKind::Data);
        if mac_for_check >= mac.sifs {
            return Err(WindowError::NotBelowSifs { requested: mac_for_check, sifs: mac.sifs }.into());
        }

        let mobility = match self.mobility {
            MobilityConfig::Static => None,
            MobilityConfig::GaussMarkov { mean_speed, alpha, speed_sigma, direction_sigma, update_interval_s } => {
                Some(MobilitySpec {
                    params: GaussMarkovParams { mean_speed, alpha, speed_sigma, direction_sigma },
                    interval: SimTime::from_secs_f64(update_interval_s),
                })
            }
        };
        Ok(Scenario {
            name: self.name.clone(),
            config_hash: self.hash(),
            seed,
            world: self.world,
            channel,
            nodes,
            mac,
            flows,
            mobility,
            routes_k: self.routing.k.max(1),
            route_refresh: SimTime::from_secs_f64(self.routing.refresh_s),
            duration,
            sample_interval: SimTime::from_secs_f64(self.metrics.sample_interval_s),
        })
    }
}

fn explicit_nodes(list: &[NodeConfig]) -> Result<Vec<NodeSpec>, ConfigError> {
    let mut out = Vec::with_capacity(list.len());
    for (i, n) in list.iter().enumerate() {
        if n.id != i {
            return Err(ConfigError::NodeOrder { index: i, found: n.id });
        }
        if n.antenna.num_beams == 0 {
            return Err(invalid("antenna.num_beams", format!("node {i} has no beams")));
        }
        if n.antenna.steerable && n.antenna.num_beams != 1 {
            return Err(invalid("antenna", format!("steerable node {i} must have exactly one beam")));
        }
        out.push(NodeSpec { pos: Position::new(n.x, n.y), antenna: n.antenna, default_peer: n.default_peer });
    }
    Ok(out)
}

fn random_nodes(r: &RandomNodes, world: &Bounds, seed: u64) -> Vec<NodeSpec> {
    let mut rng = rng_stream(seed, StreamId::Placement);
    (0..r.count)
        .map(|_| NodeSpec {
            pos: Position::new(rng.gen_range(0.0..world.width), rng.gen_range(0.0..world.height)),
            antenna: AntennaConfig::steerable(r.relay_beamwidth),
            default_peer: None,
        })
        .collect()
}

fn hop_distance(adj: &[Vec<NodeId>], src: NodeId, dst: NodeId) -> Option<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut q = VecDeque::from([src]);
    dist[src] = 0;
    while let Some(u) = q.pop_front() {
        if u == dst {
            return Some(dist[u]);
        }
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    None
}

/// Distinct-endpoint source/destination pairs that are connected over at
/// least `min_hops` hops in the initial topology.
fn random_flow_pairs(nodes: &[NodeSpec], ch: &ChannelModel, rf: &RandomFlows, seed: u64) -> Vec<(NodeId, NodeId)> {
    let pos: Vec<Position> = nodes.iter().map(|n| n.pos).collect();
    let ant: Vec<AntennaConfig> = nodes.iter().map(|n| n.antenna).collect();
    let adj = adjacency(&neighbor_discovery(&pos, &ant, ch));
    let mut candidates: Vec<(NodeId, NodeId)> = Vec::new();
    for s in 0..nodes.len() {
        for d in 0..nodes.len() {
            if s != d && hop_distance(&adj, s, d).is_some_and(|h| h >= rf.min_hops) {
                candidates.push((s, d));
            }
        }
    }
    let mut rng = rng_stream(seed, StreamId::FlowSelection);
    candidates.shuffle(&mut rng);
    let mut used = vec![false; nodes.len()];
    let mut out = Vec::new();
    for (s, d) in candidates {
        if out.len() == rf.count {
            break;
        }
        if !used[s] && !used[d] {
            used[s] = true;
            used[d] = true;
            out.push((s, d));
        }
    }
    out
}

fn max_neighbor_delay(nodes: &[NodeSpec], ch: &ChannelModel) -> SimTime {
    let mut best = SimTime::ZERO;
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let d = a.pos.distance(b.pos);
            if ch.in_range(d) {
                best = best.max(ch.propagation_delay(d));
            }
        }
    }
    best
}

/// (nearest, farthest) neighbor delay of every multi-beam receiver. Mobile
/// scenarios use the worst case over the whole radius.
fn delay_spread_pairs(nodes: &[NodeSpec], ch: &ChannelModel, mobile: bool) -> Vec<(SimTime, SimTime)> {
    if mobile {
        return vec![(SimTime::ZERO, ch.max_propagation())];
    }
    let mut out = Vec::new();
    for (i, r) in nodes.iter().enumerate() {
        if !r.antenna.is_multi_beam() {
            continue;
        }
        let delays: Vec<SimTime> = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, n)| r.pos.distance(n.pos))
            .filter(|&d| d > 0.0 && ch.in_range(d))
            .map(|d| ch.propagation_delay(d))
            .collect();
        if let (Some(lo), Some(hi)) = (delays.iter().min(), delays.iter().max()) {
            out.push((*lo, *hi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra_mac: &str) -> String {
        format!(
            r#"{{
              "name": "t",
              "channel": {{"bit_rate_bps": 5e6, "comm_radius_m": 3000}},
              "nodes": [
                {{"id": 0, "x": 0, "y": 0, "antenna": {{"num_beams": 4}}}},
                {{"id": 1, "x": 2000, "y": 0, "antenna": {{"num_beams": 1, "steerable": true}}, "default_peer": 0}}
              ],
              "mac": {{ {extra_mac} }},
              "flows": [{{"src": 0, "dst": 1, "rate_bps": 3e6}}]
            }}"#
        )
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_scenario(&minimal("")).unwrap();
        let sc = cfg.resolve(1).unwrap();
        assert_eq!(sc.mac.slot, SimTime::from_micros(20));
        assert_eq!(sc.mac.sifs, SimTime::from_micros(10));
        assert_eq!(sc.mac.difs, SimTime::from_micros(50));
        assert_eq!(sc.mac.window_period, SimTime::from_micros(9));
        assert_eq!(sc.flows[0].packet_bytes, 1500);
        assert_eq!(sc.flows[0].stop, SimTime::from_secs(180));
    }

    #[test]
    fn window_at_or_above_sifs_is_rejected() {
        let err = parse_scenario(&minimal(r#""window_period_us": 12"#)).unwrap_err();
        assert!(matches!(err, ConfigError::Window(WindowError::NotBelowSifs { .. })), "{err}");
    }

    #[test]
    fn unknown_flow_node_is_rejected() {
        let text = minimal("").replace(r#""dst": 1"#, r#""dst": 7"#);
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownNode { id: 7, .. }), "{err}");
    }

    #[test]
    fn unknown_field_is_a_schema_error() {
        let text = minimal("").replace(r#""name": "t","#, r#""name": "t", "bogus": 1,"#);
        assert!(matches!(parse_scenario(&text).unwrap_err(), ConfigError::Schema(_)));
    }

    #[test]
    fn fixed_role_switch_slots_are_kept() {
        let cfg = parse_scenario(&minimal(r#""role_switch_slots": 5"#)).unwrap();
        assert_eq!(cfg.resolve(1).unwrap().mac.role_switch_slots, 5);
    }

    #[test]
    fn hash_changes_with_content() {
        let a = parse_scenario(&minimal("")).unwrap();
        let mut b = a.clone();
        b.set_rate(4e6);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
    }
}
