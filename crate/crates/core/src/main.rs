use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use mbmac::mac::MacVariant;
use mbmac::network::run_seeds;
use mbmac::report::{compare_dirs, metrics_rows, write_compare, write_runs};
use mbmac::scenario::load_scenario;

#[derive(Parser)]
#[command(name = "mbmac", version, about = "Multi-beam directional MAC simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write CSV results.
    Run {
        scenario: PathBuf,
        /// First seed; replications use consecutive seeds from here.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replications: Option<u32>,
        #[arg(long, value_parser = parse_variant)]
        mac: Option<MacVariant>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Also write the per-event trace.
        #[arg(long)]
        trace: bool,
        /// Override every flow's rate (Mbps).
        #[arg(long)]
        rate_mbps: Option<f64>,
        /// Override the number of flows.
        #[arg(long)]
        flows: Option<usize>,
        /// Override the simulated duration (seconds).
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Compare a basic and a proposed result directory (deltas are proposed minus basic).
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
}

fn parse_variant(s: &str) -> Result<MacVariant, String> {
    s.parse()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SIM_LOG", "warn")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { scenario, seed, replications, mac, out, trace, rate_mbps, flows, duration } => {
            let mut cfg = load_scenario(&scenario)?;
            if let Some(v) = mac {
                cfg.mac.variant = v;
            }
            if let Some(r) = rate_mbps {
                cfg.set_rate(r * 1e6);
            }
            if let Some(n) = flows {
                cfg.set_flow_count(n);
            }
            if let Some(d) = duration {
                cfg.sim.duration_s = d;
            }
            let first = seed.unwrap_or(cfg.sim.seed);
            let reps = replications.unwrap_or(cfg.sim.replications).max(1) as u64;
            let seeds: Vec<u64> = (first..first + reps).collect();
            log::info!("running {} ({}) for seeds {:?}", cfg.name, cfg.mac.variant.label(), seeds);
            let runs = run_seeds(&cfg, &seeds, trace)?;
            write_runs(&out, &runs).with_context(|| format!("writing results to {}", out.display()))?;
            for r in &runs {
                for m in metrics_rows(r) {
                    println!(
                        "{} {} seed={} flow={} {}->{} delivered={}/{} throughput={:.3} Mbps",
                        m.scenario,
                        m.variant,
                        m.seed,
                        m.flow_id,
                        r.flows[m.flow_id].flow.src,
                        r.flows[m.flow_id].flow.dst,
                        m.delivered,
                        m.generated,
                        m.throughput_bps / 1e6
                    );
                }
            }
        }
        Cmd::Compare { dir_a, dir_b, out } => {
            let rows = compare_dirs(&dir_a, &dir_b)?;
            write_compare(&out, &rows)?;
            println!("wrote {} comparison rows to {}", rows.len(), out.display());
        }
        Cmd::Validate { scenario } => {
            let cfg = load_scenario(&scenario)?;
            let sc = cfg.resolve(cfg.sim.seed)?;
            println!(
                "{}: ok ({} nodes, {} flows, window {} , role_switch_slots {}, hash {})",
                cfg.name,
                sc.nodes.len(),
                sc.flows.len(),
                sc.mac.window_period,
                sc.mac.role_switch_slots,
                sc.config_hash
            );
        }
    }
    Ok(())
}
