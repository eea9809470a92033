//! CSV output of runs and the paired basic-vs-proposed comparison.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::mac::MacVariant;
use crate::metrics::{e2e_delay, extra_route_utilization, pdr, throughput, RouteUsageSample};
use crate::network::RunOutput;
use crate::time::SimTime;

pub const METRICS_FILE: &str = "metrics.csv";
pub const NODE_EVENTS_FILE: &str = "node_events.csv";
pub const ROUTE_USAGE_FILE: &str = "route_usage.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub variant: String,
    pub seed: u64,
    pub flow_id: usize,
    pub rate_bps: f64,
    pub generated: u64,
    pub delivered: u64,
    pub drops_overflow: u64,
    pub drops_retry: u64,
    pub drops_noroute: u64,
    pub throughput_bps: f64,
    pub pdr: Option<f64>,
    pub e2e_delay_us: Option<f64>,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEventRow {
    pub scenario: String,
    pub variant: String,
    pub seed: u64,
    pub node: usize,
    pub event: String,
    pub count: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteUsageRow {
    pub scenario: String,
    pub variant: String,
    pub seed: u64,
    pub t_ns: u64,
    pub flow_id: usize,
    pub active_routes: usize,
    pub route_count: usize,
    pub config_hash: String,
}

pub fn metrics_rows(out: &RunOutput) -> Vec<MetricsRow> {
    out.flows
        .iter()
        .map(|f| MetricsRow {
            scenario: out.scenario.clone(),
            variant: out.variant.label().to_string(),
            seed: out.seed,
            flow_id: f.flow.flow_id,
            rate_bps: f.flow.rate_bps,
            generated: f.stats.generated,
            delivered: f.stats.delivered,
            drops_overflow: f.stats.drops_overflow,
            drops_retry: f.stats.drops_retry,
            drops_noroute: f.stats.drops_noroute,
            throughput_bps: throughput(&f.stats, f.flow.packet_bytes, out.horizon),
            pdr: pdr(&f.stats),
            e2e_delay_us: e2e_delay(&f.stats).map(|d| d * 1e6),
            config_hash: out.config_hash.clone(),
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every output file for a set of replications into `dir`.
pub fn write_runs(dir: &Path, runs: &[RunOutput]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_csv(&dir.join(METRICS_FILE), runs.iter().flat_map(metrics_rows))?;
    write_csv(
        &dir.join(NODE_EVENTS_FILE),
        runs.iter().flat_map(|r| {
            r.node_events.iter().enumerate().flat_map(move |(node, ev)| {
                ev.iter().map(move |(k, v)| NodeEventRow {
                    scenario: r.scenario.clone(),
                    variant: r.variant.label().to_string(),
                    seed: r.seed,
                    node,
                    event: k.to_string(),
                    count: *v,
                    config_hash: r.config_hash.clone(),
                })
            })
        }),
    )?;
    write_csv(
        &dir.join(ROUTE_USAGE_FILE),
        runs.iter().flat_map(|r| {
            r.route_usage.iter().map(move |u| RouteUsageRow {
                scenario: r.scenario.clone(),
                variant: r.variant.label().to_string(),
                seed: r.seed,
                t_ns: u.t.as_nanos(),
                flow_id: u.flow_id,
                active_routes: u.active_routes,
                route_count: u.route_count,
                config_hash: r.config_hash.clone(),
            })
        }),
    )?;
    for r in runs {
        if let Some(trace) = &r.trace {
            write_csv(&dir.join(format!("trace-seed{}.csv", r.seed)), trace)?;
        }
    }
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|x| x.map_err(Into::into)).collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    Some(Quartiles { q1: quantile(&v, 0.25)?, median: quantile(&v, 0.5)?, q3: quantile(&v, 0.75)? })
}

/// One replication reduced to the values the comparison needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub flows: usize,
    pub rate_bps: f64,
    /// Delivered over generated, pooled over flows.
    pub pdr: Option<f64>,
    /// Mean delay over every delivered packet.
    pub delay_us: Option<f64>,
}

pub fn summarize(rows: &[MetricsRow]) -> SeedSummary {
    let gen: u64 = rows.iter().map(|r| r.generated).sum();
    let del: u64 = rows.iter().map(|r| r.delivered).sum();
    let weighted: f64 = rows.iter().filter_map(|r| r.e2e_delay_us.map(|d| d * r.delivered as f64)).sum();
    SeedSummary {
        flows: rows.len(),
        rate_bps: rows.first().map(|r| r.rate_bps).unwrap_or(0.0),
        pdr: (gen > 0).then(|| del as f64 / gen as f64),
        delay_us: (del > 0).then(|| weighted / del as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub scenario: String,
    pub flows: usize,
    pub rate_bps: f64,
    pub seeds: usize,
    pub basic_pdr_q1: Option<f64>,
    pub basic_pdr_median: Option<f64>,
    pub basic_pdr_q3: Option<f64>,
    pub proposed_pdr_q1: Option<f64>,
    pub proposed_pdr_median: Option<f64>,
    pub proposed_pdr_q3: Option<f64>,
    pub basic_delay_us_q1: Option<f64>,
    pub basic_delay_us_median: Option<f64>,
    pub basic_delay_us_q3: Option<f64>,
    pub proposed_delay_us_q1: Option<f64>,
    pub proposed_delay_us_median: Option<f64>,
    pub proposed_delay_us_q3: Option<f64>,
    pub pdr_median_delta: Option<f64>,
    pub delay_us_median_delta: Option<f64>,
    pub extra_route_pct_median: Option<f64>,
    pub extra_route_pct_mean: Option<f64>,
}

type GroupKey = (String, usize, u64);

struct Side {
    variant: MacVariant,
    seeds: BTreeMap<(GroupKey, u64), (SeedSummary, Vec<RouteUsageSample>)>,
}

fn load_side(dir: &Path) -> Result<Side> {
    let metrics: Vec<MetricsRow> = read_csv(&dir.join(METRICS_FILE))?;
    let usage: Vec<RouteUsageRow> = read_csv(&dir.join(ROUTE_USAGE_FILE))?;
    let Some(first) = metrics.first() else { bail!("{} holds no metrics rows", dir.display()) };
    let variant: MacVariant = first.variant.parse().map_err(anyhow::Error::msg)?;
    if metrics.iter().any(|r| r.variant != first.variant) {
        bail!("{} mixes MAC variants", dir.display());
    }
    let mut by_run: BTreeMap<(String, String, u64), Vec<MetricsRow>> = BTreeMap::new();
    for r in metrics {
        by_run.entry((r.scenario.clone(), r.config_hash.clone(), r.seed)).or_default().push(r);
    }
    let mut seeds = BTreeMap::new();
    for ((scenario, hash, seed), rows) in by_run {
        let sum = summarize(&rows);
        let samples = usage
            .iter()
            .filter(|u| u.scenario == scenario && u.config_hash == hash && u.seed == seed)
            .map(|u| RouteUsageSample {
                t: SimTime::from_nanos(u.t_ns),
                flow_id: u.flow_id,
                active_routes: u.active_routes,
                route_count: u.route_count,
            })
            .collect();
        let key = ((scenario, sum.flows, sum.rate_bps.to_bits()), seed);
        if seeds.insert(key, (sum, samples)).is_some() {
            bail!("{} holds two runs with the same scenario, flow count, rate and seed", dir.display());
        }
    }
    Ok(Side { variant, seeds })
}

/// Pairs runs by (scenario, flow count, rate, seed) and summarizes each group.
pub fn compare_dirs(dir_a: &Path, dir_b: &Path) -> Result<Vec<CompareRow>> {
    let a = load_side(dir_a)?;
    let b = load_side(dir_b)?;
    // The basic side is the reference; with two runs of one variant the
    // first directory is.
    let (basic, proposed) = match (a.variant, b.variant) {
        (MacVariant::Proposed, MacVariant::Basic) => (b, a),
        _ => (a, b),
    };
    let bk: Vec<_> = basic.seeds.keys().collect();
    let pk: Vec<_> = proposed.seeds.keys().collect();
    if bk != pk {
        bail!("result directories are not paired: runs differ in scenario, flow count, rate or seed");
    }
    let mut groups: BTreeMap<GroupKey, Vec<u64>> = BTreeMap::new();
    for (g, seed) in basic.seeds.keys() {
        groups.entry(g.clone()).or_default().push(*seed);
    }
    let mut out = Vec::new();
    for (g, seeds) in groups {
        let mut cols: [Vec<f64>; 4] = Default::default();
        let mut extra = Vec::new();
        for seed in &seeds {
            let (bs, bu) = &basic.seeds[&(g.clone(), *seed)];
            let (ps, pu) = &proposed.seeds[&(g.clone(), *seed)];
            cols[0].extend(bs.pdr);
            cols[1].extend(ps.pdr);
            cols[2].extend(bs.delay_us);
            cols[3].extend(ps.delay_us);
            extra.push(extra_route_utilization(pu, bu).with_context(|| format!("seed {seed}"))?);
        }
        let q: Vec<Option<Quartiles>> = cols.iter().map(|c| quartiles(c)).collect();
        let pick = |i: usize, f: fn(&Quartiles) -> f64| q[i].as_ref().map(f);
        let ex = quartiles(&extra);
        out.push(CompareRow {
            scenario: g.0.clone(),
            flows: g.1,
            rate_bps: f64::from_bits(g.2),
            seeds: seeds.len(),
            basic_pdr_q1: pick(0, |q| q.q1),
            basic_pdr_median: pick(0, |q| q.median),
            basic_pdr_q3: pick(0, |q| q.q3),
            proposed_pdr_q1: pick(1, |q| q.q1),
            proposed_pdr_median: pick(1, |q| q.median),
            proposed_pdr_q3: pick(1, |q| q.q3),
            basic_delay_us_q1: pick(2, |q| q.q1),
            basic_delay_us_median: pick(2, |q| q.median),
            basic_delay_us_q3: pick(2, |q| q.q3),
            proposed_delay_us_q1: pick(3, |q| q.q1),
            proposed_delay_us_median: pick(3, |q| q.median),
            proposed_delay_us_q3: pick(3, |q| q.q3),
            pdr_median_delta: pick(1, |q| q.median).zip(pick(0, |q| q.median)).map(|(p, b)| p - b),
            delay_us_median_delta: pick(3, |q| q.median).zip(pick(2, |q| q.median)).map(|(p, b)| p - b),
            extra_route_pct_median: ex.map(|q| q.median),
            extra_route_pct_mean: (!extra.is_empty()).then(|| extra.iter().sum::<f64>() / extra.len() as f64),
        });
    }
    Ok(out)
}

pub fn write_compare(path: &Path, rows: &[CompareRow]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_csv(path, rows)
}
