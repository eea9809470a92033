//! Hand-built event timeline of one concurrent 4-way handshake: several
//! single-beam senders, one multi-beam receiver, all starting with empty
//! state at t = 0 and a packet queued.

use std::collections::BTreeMap;

use mbmac::scenario::ScenarioConfig;

use super::{air_ns, prop_ns, Row};

const SLOT: u64 = 20_000;
const SIFS: u64 = 10_000;
const DIFS: u64 = 50_000;
const CW_MIN: u64 = 16;
const WP: u64 = 9_000;

/// Rows of every event up to the last ACK reception, and that instant.
pub fn concurrent_handshake(cfg: &ScenarioConfig, senders: &[usize], hub: usize) -> (Vec<Row>, u64) {
    let rate = cfg.channel.bit_rate_bps;
    let (rts, cts, data, ack) = (air_ns(20, rate), air_ns(14, rate), air_ns(1500, rate), air_ns(14, rate));
    let p: BTreeMap<usize, u64> = senders.iter().map(|&s| (s, prop_ns(cfg, s, hub))).collect();
    let mut rows = Vec::new();

    // Every sender draws the same contention: DIFS plus cw_min slots.
    let t_rts = DIFS + CW_MIN * SLOT;
    for &s in senders {
        rows.push(Row::timer(0, s, "contend_start"));
        rows.push(Row::timer(t_rts, s, "contend_expire"));
        rows.push(Row::frame(t_rts, s, "tx", "RTS", s, hub));
        rows.push(Row::frame(t_rts + p[&s], hub, "rx_start", "RTS", s, hub));
        rows.push(Row::frame(t_rts + rts + p[&s], hub, "rx_end", "RTS", s, hub));
    }

    // Hub collects one batch and answers SIFS after the first arrival.
    let collect = |rows: &mut Vec<Row>, ends: Vec<u64>| -> u64 {
        let first = *ends.iter().min().unwrap();
        let last = *ends.iter().max().unwrap();
        assert!(last - first < WP, "senders too far apart for one batch");
        rows.push(Row::timer(first, hub, "sifs_arm"));
        rows.push(Row::timer(first, hub, "window_arm"));
        rows.push(Row::timer(last, hub, "window_cancel"));
        rows.push(Row::timer(first + SIFS, hub, "sifs_expire"));
        first + SIFS
    };
    let t_cts = collect(&mut rows, senders.iter().map(|s| t_rts + rts + p[s]).collect());

    let mut data_end = Vec::new();
    for &s in senders {
        rows.push(Row::frame(t_cts, hub, "tx", "CTS", hub, s));
        rows.push(Row::frame(t_cts + p[&s], s, "rx_start", "CTS", hub, s));
        let got = t_cts + cts + p[&s];
        rows.push(Row::frame(got, s, "rx_end", "CTS", hub, s));
        rows.push(Row::timer(got, s, "sifs_arm"));
        rows.push(Row::timer(got + SIFS, s, "sifs_expire"));
        let t_data = got + SIFS;
        rows.push(Row::frame(t_data, s, "tx", "DATA", s, hub));
        rows.push(Row::frame(t_data + p[&s], hub, "rx_start", "DATA", s, hub));
        rows.push(Row::frame(t_data + data + p[&s], hub, "rx_end", "DATA", s, hub));
        data_end.push(t_data + data + p[&s]);
    }
    let t_ack = collect(&mut rows, data_end);

    let mut end = 0;
    for &s in senders {
        rows.push(Row::frame(t_ack, hub, "tx", "ACK", hub, s));
        rows.push(Row::frame(t_ack + p[&s], s, "rx_start", "ACK", hub, s));
        rows.push(Row::frame(t_ack + ack + p[&s], s, "rx_end", "ACK", hub, s));
        end = end.max(t_ack + ack + p[&s]);
    }
    rows.sort();
    (rows, end)
}
