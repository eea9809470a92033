#![allow(dead_code)]

use std::path::{Path, PathBuf};

use mbmac::mac::MacVariant;
use mbmac::network::{simulate, RunOutput, TraceRow};
use mbmac::scenario::{load_scenario, ScenarioConfig};

pub mod timeline;

const C: f64 = 3.0e8;

pub fn preset_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json"))
}

pub fn preset(name: &str) -> ScenarioConfig {
    load_scenario(&preset_path(name)).unwrap_or_else(|e| panic!("preset {name}: {e}"))
}

pub fn with_variant(cfg: &ScenarioConfig, v: MacVariant) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.mac.variant = v;
    c
}

pub fn run(cfg: &ScenarioConfig, trace: bool) -> RunOutput {
    simulate(cfg.resolve(cfg.sim.seed).expect("scenario resolves"), trace)
}

pub fn xy(cfg: &ScenarioConfig, id: usize) -> (f64, f64) {
    let n = cfg.nodes.iter().find(|n| n.id == id).expect("node listed");
    (n.x, n.y)
}

/// Line-of-sight delay between two listed nodes, nearest nanosecond.
pub fn prop_ns(cfg: &ScenarioConfig, a: usize, b: usize) -> u64 {
    let (p, q) = (xy(cfg, a), xy(cfg, b));
    let d = ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    (d / C * 1e9).round() as u64
}

pub fn air_ns(bytes: u32, rate_bps: f64) -> u64 {
    (bytes as f64 * 8.0 / rate_bps * 1e9).round() as u64
}

/// Bytes on air for a frame label in the reference setup.
pub fn frame_bytes(kind: &str) -> u32 {
    match kind {
        "RTS" | "N-RTS" => 20,
        "CTS" | "N-CTS" | "ACK" => 14,
        "DATA" => 1500,
        other => panic!("unknown frame kind {other}"),
    }
}

pub fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol * target
}

pub fn throughput_bps(out: &RunOutput, flow: usize) -> f64 {
    let f = &out.flows[flow];
    f.stats.delivered as f64 * f.flow.packet_bytes as f64 * 8.0 / out.horizon.as_secs_f64()
}

/// A trace row with the beam index left out.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Row {
    pub t: u64,
    pub node: usize,
    pub event: String,
    pub kind: Option<String>,
    pub src: Option<usize>,
    pub dst: Option<usize>,
}

impl Row {
    pub fn timer(t: u64, node: usize, event: &str) -> Self {
        Row { t, node, event: event.into(), kind: None, src: None, dst: None }
    }

    pub fn frame(t: u64, node: usize, event: &str, kind: &str, src: usize, dst: usize) -> Self {
        Row { t, node, event: event.into(), kind: Some(kind.into()), src: Some(src), dst: Some(dst) }
    }
}

impl From<&TraceRow> for Row {
    fn from(r: &TraceRow) -> Self {
        Row {
            t: r.t_ns,
            node: r.node,
            event: r.event.into(),
            kind: r.frame_kind.map(Into::into),
            src: r.src,
            dst: r.dst,
        }
    }
}

pub fn rows_until(trace: &[TraceRow], end: u64) -> Vec<Row> {
    let mut v: Vec<Row> = trace.iter().filter(|r| r.t_ns <= end).map(Row::from).collect();
    v.sort();
    v
}

pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}
