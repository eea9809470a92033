mod support;

use std::path::Path;
use std::process::{Command, Output};

use support::preset_path;

fn mbmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbmac")).args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    r.records().map(Result::unwrap).collect()
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn validate_reports_resolved_parameters() {
    let p = preset_path("fig1-cpr");
    let out = mbmac(&["validate", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    assert!(s.contains("11 nodes") && s.contains("role_switch_slots 3"), "{s}");
}

#[test]
fn validate_rejects_a_broken_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"name": "x", "channel": {"bit_rate_bps": 1e6}}"#).unwrap();
    let out = mbmac(&["validate", p.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).starts_with("error:"), "{}", text(&out.stderr));
}

#[test]
fn run_writes_metrics_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let p = preset_path("fig1-cpt");
    let out = mbmac(&[
        "run",
        p.to_str().unwrap(),
        "--duration",
        "1.5",
        "--mac",
        "basic",
        "--trace",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));

    let m = dir.path().join("metrics.csv");
    let cols = header(&m);
    for c in ["scenario", "variant", "seed", "flow_id", "rate_bps", "generated", "delivered", "drops_overflow", "drops_retry", "drops_noroute", "throughput_bps", "pdr", "e2e_delay_us"] {
        assert!(cols.iter().any(|x| x == c), "missing column {c}");
    }
    let rows = csv_rows(&m);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[1] == "basic"));

    assert!(!csv_rows(&dir.path().join("node_events.csv")).is_empty());
    assert!(!csv_rows(&dir.path().join("route_usage.csv")).is_empty());
    let trace = csv_rows(&dir.path().join("trace-seed1.csv"));
    assert!(trace.iter().any(|r| &r[3] == "tx"));
}

#[test]
fn compare_pairs_two_result_sets() {
    let dir = tempfile::tempdir().unwrap();
    let p = preset_path("mobile-50");
    for v in ["basic", "proposed"] {
        let out_dir = dir.path().join(v);
        let out = mbmac(&[
            "run",
            p.to_str().unwrap(),
            "--mac",
            v,
            "--replications",
            "2",
            "--duration",
            "3",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", text(&out.stderr));
    }
    let cmp = dir.path().join("compare.csv");
    let b = dir.path().join("basic");
    let pr = dir.path().join("proposed");
    let out = mbmac(&["compare", b.to_str().unwrap(), pr.to_str().unwrap(), "--out", cmp.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let cols = header(&cmp);
    assert!(cols.iter().any(|c| c == "extra_route_pct_median"));
    let rows = csv_rows(&cmp);
    assert_eq!(rows.len(), 1);
    let seeds = cols.iter().position(|c| c == "seeds").unwrap();
    assert_eq!(&rows[0][seeds], "2");

    // A directory against itself: every delta is zero.
    let same = dir.path().join("same.csv");
    let out = mbmac(&["compare", b.to_str().unwrap(), b.to_str().unwrap(), "--out", same.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let cols = header(&same);
    let row = &csv_rows(&same)[0];
    for c in ["pdr_median_delta", "delay_us_median_delta", "extra_route_pct_median"] {
        let i = cols.iter().position(|x| x == c).unwrap();
        assert_eq!(row[i].parse::<f64>().unwrap(), 0.0, "{c}");
    }

    // Different seeds cannot be paired.
    let other = dir.path().join("other");
    let out = mbmac(&["run", p.to_str().unwrap(), "--mac", "proposed", "--seed", "7", "--duration", "3", "--out", other.to_str().unwrap()]);
    assert!(out.status.success());
    let out = mbmac(&["compare", b.to_str().unwrap(), other.to_str().unwrap(), "--out", cmp.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("not paired"), "{}", text(&out.stderr));
}
