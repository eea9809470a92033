//! The simulated network: radio medium, per-node MAC state machines, traffic
//! sources, mobility and routing, all driven by one event scheduler.

mod mac;
mod radio;
mod trace;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand_chacha::ChaCha8Rng;

use crate::engine::{rng_stream, Classify, EventHandle, EventKind, NodeId, RunStats, Scheduler, StreamId};
use crate::geometry::{azimuth, beam_for_direction, AntennaConfig, Position};
use crate::mac::basic::CycleRole;
use crate::mac::{Backoff, BeamState, MacVariant, PacketId};
use crate::metrics::{CbrFlow, FlowStats, PacketLedger, RouteUsageSample};
use crate::mobility::{gm_step, GaussMarkovState};
use crate::routing::{adjacency, compute_node_disjoint_routes, neighbor_discovery, Neighbor, RouteSet};
use crate::scenario::Scenario;
use crate::time::SimTime;

pub use trace::TraceRow;

use mac::Phase;
use radio::Arrival;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timer {
    Contention,
    Sifs,
    Window,
    Timeout,
    Notify,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ev {
    ArrivalStart(u64),
    ArrivalEnd(u64),
    Timer(Timer),
    Traffic(usize),
    Sample,
    Mobility,
    Discovery,
}

impl Classify for Ev {
    fn kind(&self) -> EventKind {
        match self {
            Ev::ArrivalStart(_) => EventKind::FrameArrivalStart,
            Ev::ArrivalEnd(_) => EventKind::FrameArrivalEnd,
            Ev::Timer(_) => EventKind::TimerExpiry,
            Ev::Traffic(_) => EventKind::TrafficArrival,
            Ev::Sample => EventKind::MetricsSample,
            Ev::Mobility => EventKind::MobilityUpdate,
            Ev::Discovery => EventKind::NeighborDiscovery,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub flow: CbrFlow,
    pub stats: FlowStats,
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: String,
    pub variant: MacVariant,
    pub seed: u64,
    pub config_hash: String,
    pub horizon: SimTime,
    pub flows: Vec<FlowResult>,
    pub node_events: Vec<BTreeMap<&'static str, u64>>,
    pub route_usage: Vec<RouteUsageSample>,
    pub trace: Option<Vec<TraceRow>>,
    pub run_stats: RunStats,
}

pub(crate) struct Node {
    pub id: NodeId,
    pub pos: Position,
    pub antenna: AntennaConfig,
    pub default_peer: Option<NodeId>,
    pub beams: Vec<BeamState>,
    pub backoff: Backoff,
    pub phase: Phase,
    pub defer_until: SimTime,
    pub tx_until: SimTime,
    /// Arrivals currently on the air toward this node.
    pub active: Vec<u64>,
    pub seen: HashSet<PacketId>,
    pub last_rts_from: Option<NodeId>,
    pub role: CycleRole,
    pub notify_timer: Option<EventHandle>,
    pub events: BTreeMap<&'static str, u64>,
    pub gm: Option<GaussMarkovState>,
}

impl Node {
    pub fn count(&mut self, what: &'static str) {
        *self.events.entry(what).or_insert(0) += 1;
    }

    pub fn queues_nonempty(&self) -> bool {
        self.beams.iter().any(|b| !b.queue.is_empty())
    }
}

pub struct Network {
    pub(crate) sc: Scenario,
    pub(crate) nodes: Vec<Node>,
    pub(crate) neighbors: Vec<Vec<Neighbor>>,
    pub(crate) routes: Vec<RouteSet>,
    rr: Vec<usize>,
    next_seq: Vec<u64>,
    usage: Vec<BTreeSet<usize>>,
    samples: Vec<RouteUsageSample>,
    pub(crate) ledger: PacketLedger,
    pub(crate) arrivals: HashMap<u64, Arrival>,
    pub(crate) next_arrival: u64,
    pub(crate) trace: Option<Vec<TraceRow>>,
    /// Payload size used for reservations and timeouts.
    pub(crate) data_bytes: u32,
    mobility_rng: ChaCha8Rng,
}

impl Network {
    pub fn new(sc: Scenario, trace: bool) -> Self {
        let mut mobility_rng = rng_stream(sc.seed, StreamId::Mobility);
        let nodes = sc
            .nodes
            .iter()
            .enumerate()
            .map(|(id, spec)| Node {
                id,
                pos: spec.pos,
                antenna: spec.antenna,
                default_peer: spec.default_peer,
                beams: vec![BeamState::default(); spec.antenna.num_beams],
                backoff: Backoff::new(sc.mac.cw_min, sc.mac.cw_max),
                phase: Phase::Idle,
                defer_until: SimTime::ZERO,
                tx_until: SimTime::ZERO,
                active: Vec::new(),
                seen: HashSet::new(),
                last_rts_from: None,
                role: CycleRole::TransmitPriority,
                notify_timer: None,
                events: BTreeMap::new(),
                gm: sc.mobility.as_ref().map(|m| GaussMarkovState::random(&m.params, &mut mobility_rng)),
            })
            .collect();
        let flow_count = sc.flows.len();
        let data_bytes = sc.flows.iter().map(|f| f.packet_bytes).max().unwrap_or(1500);
        let mut net = Network {
            nodes,
            neighbors: Vec::new(),
            routes: Vec::new(),
            rr: vec![0; flow_count],
            next_seq: vec![0; flow_count],
            usage: vec![BTreeSet::new(); flow_count],
            samples: Vec::new(),
            ledger: PacketLedger::new(flow_count),
            arrivals: HashMap::new(),
            next_arrival: 0,
            trace: trace.then(Vec::new),
            data_bytes,
            mobility_rng,
            sc,
        };
        net.discover(SimTime::ZERO);
        net
    }

    pub fn run(mut self) -> RunOutput {
        let mut sched: Scheduler<Ev> = Scheduler::new();
        for f in &self.sc.flows {
            if f.start < f.stop {
                sched.schedule(f.start, f.src, Ev::Traffic(f.flow_id)).expect("start is not negative");
            }
        }
        sched.schedule(self.sc.sample_interval, 0, Ev::Sample).expect("future");
        if let Some(m) = &self.sc.mobility {
            sched.schedule(m.interval, 0, Ev::Mobility).expect("future");
        }
        sched.schedule(self.sc.route_refresh, 0, Ev::Discovery).expect("future");

        let end = self.sc.duration;
        while let Some(ev) = sched.pop_until(end) {
            self.dispatch(&mut sched, ev.target, ev.payload);
        }
        sched.advance_to(end);

        let stats = self.ledger.finish();
        for s in &stats {
            assert!(s.conserved(), "packet conservation violated: {s:?}");
        }
        RunOutput {
            scenario: self.sc.name.clone(),
            variant: self.sc.mac.variant,
            seed: self.sc.seed,
            config_hash: self.sc.config_hash.clone(),
            horizon: end,
            flows: self.sc.flows.iter().cloned().zip(stats).map(|(flow, stats)| FlowResult { flow, stats }).collect(),
            node_events: self.nodes.iter().map(|n| n.events.clone()).collect(),
            route_usage: self.samples,
            trace: self.trace,
            run_stats: sched.stats().clone(),
        }
    }

    fn dispatch(&mut self, s: &mut Scheduler<Ev>, target: NodeId, ev: Ev) {
        match ev {
            Ev::ArrivalStart(id) => self.on_arrival_start(s, id),
            Ev::ArrivalEnd(id) => self.on_arrival_end(s, id),
            Ev::Timer(t) => self.on_timer(s, target, t),
            Ev::Traffic(f) => self.on_traffic(s, f),
            Ev::Sample => {
                let now = s.now();
                for (f, used) in self.usage.iter_mut().enumerate() {
                    self.samples.push(RouteUsageSample {
                        t: now,
                        flow_id: f,
                        active_routes: used.len(),
                        route_count: self.routes[f].routes.len(),
                    });
                    used.clear();
                }
                s.schedule_in(self.sc.sample_interval, 0, Ev::Sample);
            }
            Ev::Mobility => {
                let m = self.sc.mobility.clone().expect("mobility event without a model");
                let dt = m.interval.as_secs_f64();
                for n in &mut self.nodes {
                    let st = n.gm.as_mut().expect("mobile node state");
                    n.pos = gm_step(st, &m.params, n.pos, dt, &self.sc.world, &mut self.mobility_rng);
                }
                s.schedule_in(m.interval, 0, Ev::Mobility);
            }
            Ev::Discovery => {
                self.discover(s.now());
                s.schedule_in(self.sc.route_refresh, 0, Ev::Discovery);
            }
        }
    }

    fn discover(&mut self, now: SimTime) {
        let pos: Vec<Position> = self.nodes.iter().map(|n| n.pos).collect();
        let ant: Vec<AntennaConfig> = self.nodes.iter().map(|n| n.antenna).collect();
        self.neighbors = neighbor_discovery(&pos, &ant, &self.sc.channel);
        let adj = adjacency(&self.neighbors);
        self.routes = self
            .sc
            .flows
            .iter()
            .map(|f| compute_node_disjoint_routes(&adj, f.flow_id, f.src, f.dst, self.sc.routes_k, now))
            .collect();
    }

    fn on_traffic(&mut self, s: &mut Scheduler<Ev>, flow: usize) {
        let now = s.now();
        let f = self.sc.flows[flow].clone();
        let next = now + f.inter_arrival();
        if next < f.stop {
            s.schedule(next, f.src, Ev::Traffic(flow)).expect("future");
        }
        let id = PacketId { flow, seq: self.next_seq[flow] };
        self.next_seq[flow] += 1;
        self.ledger.generated(id);
        let routes = &self.routes[flow].routes;
        if routes.is_empty() {
            self.ledger.note_loss(id, crate::metrics::DropReason::NoRoute);
            self.nodes[f.src].count("drop_noroute");
            return;
        }
        let path = routes[self.rr[flow] % routes.len()].clone();
        self.rr[flow] = self.rr[flow].wrapping_add(1);
        let packet = crate::mac::Packet { id, gen_time: now, size_bytes: f.packet_bytes, path, hop: 0 };
        if self.enqueue(f.src, packet) && matches!(self.nodes[f.src].phase, Phase::Idle) {
            self.maybe_contend(s, f.src);
        }
    }

    /// Beam of `node` that covers neighbor `other` at current positions.
    pub(crate) fn beam_toward(&self, node: NodeId, other: NodeId) -> usize {
        let n = &self.nodes[node];
        if n.antenna.steerable {
            return 0;
        }
        match azimuth(n.pos, self.nodes[other].pos) {
            Ok(az) => beam_for_direction(&n.antenna, az),
            Err(_) => 0,
        }
    }

    pub(crate) fn note_route_usage(&mut self, packet: &crate::mac::Packet) {
        let f = packet.id.flow;
        if let Some(i) = self.routes[f].routes.iter().position(|r| **r == *packet.path) {
            self.usage[f].insert(i);
        }
    }

    /// Drops every route of `flow` that uses the link `a -> b`.
    pub(crate) fn invalidate_link(&mut self, flow: usize, a: NodeId, b: NodeId) {
        self.routes[flow].routes.retain(|r| !r.windows(2).any(|w| w[0] == a && w[1] == b));
    }
}

/// Runs one replication to completion.
pub fn simulate(sc: Scenario, trace: bool) -> RunOutput {
    Network::new(sc, trace).run()
}

/// Runs one replication per seed, in parallel; results come back in seed order.
pub fn run_seeds(
    cfg: &crate::scenario::ScenarioConfig,
    seeds: &[u64],
    trace: bool,
) -> Result<Vec<RunOutput>, crate::scenario::ConfigError> {
    use rayon::prelude::*;
    let scenarios = seeds.iter().map(|&s| cfg.resolve(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(scenarios.into_par_iter().map(|sc| simulate(sc, trace)).collect())
}
