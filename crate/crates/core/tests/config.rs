mod support;

use mbmac::mac::proposed::WindowError;
use mbmac::mac::MacVariant;
use mbmac::scenario::{load_scenario, parse_scenario, ConfigError};
use mbmac::SimTime;
use serde_json::{json, Value};

use support::{preset, preset_path};

fn two_nodes() -> Value {
    json!({
        "name": "pair",
        "channel": { "bit_rate_bps": 5e6, "comm_radius_m": 3000.0 },
        "nodes": [
            { "id": 0, "x": 1000.0, "y": 1000.0, "antenna": { "num_beams": 8 } },
            { "id": 1, "x": 2000.0, "y": 1000.0, "antenna": { "num_beams": 1, "steerable": true, "beamwidth": 45.0 }, "default_peer": 0 }
        ],
        "flows": [ { "src": 0, "dst": 1, "rate_bps": 1e6 } ],
        "mac": {},
        "sim": { "duration_s": 1.0 }
    })
}

fn parse(v: &Value) -> Result<mbmac::scenario::ScenarioConfig, ConfigError> {
    parse_scenario(&v.to_string())
}

#[test]
fn every_preset_loads_and_resolves() {
    for name in ["fig1-cpt", "fig1-cpr", "fig1-multihop", "mobile-50"] {
        let cfg = preset(name);
        let sc = cfg.resolve(cfg.sim.seed).unwrap();
        assert_eq!(sc.mac.window_period, SimTime::from_micros(9), "{name}");
        assert_eq!(sc.mac.variant, MacVariant::Proposed, "{name}");
    }
    let sc = preset("mobile-50").resolve(4).unwrap();
    assert_eq!(sc.nodes.len(), 50);
    assert_eq!(sc.flows.len(), 1);
    assert!(sc.mobility.is_some());
}

#[test]
fn minimal_config_gets_reference_defaults() {
    let cfg = parse(&two_nodes()).unwrap();
    let sc = cfg.resolve(1).unwrap();
    assert_eq!(sc.mac.slot, SimTime::from_micros(20));
    assert_eq!(sc.mac.sifs, SimTime::from_micros(10));
    assert_eq!(sc.mac.difs, SimTime::from_micros(50));
    assert_eq!((sc.mac.cw_min, sc.mac.cw_max), (16, 1024));
    assert_eq!((sc.mac.short_retry_limit, sc.mac.long_retry_limit), (7, 4));
    assert_eq!(sc.mac.queue_capacity, 50);
    assert_eq!(sc.flows[0].packet_bytes, 1500);
}

#[test]
fn hash_tracks_content() {
    let a = parse(&two_nodes()).unwrap();
    let mut v = two_nodes();
    v["flows"][0]["rate_bps"] = json!(2e6);
    let b = parse(&v).unwrap();
    assert_eq!(a.hash(), parse(&two_nodes()).unwrap().hash());
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 16);
}

#[test]
fn missing_file() {
    let err = load_scenario(&preset_path("no-such-preset")).unwrap_err();
    assert!(matches!(err, ConfigError::Io { .. }), "{err}");
}

#[test]
fn unknown_field_is_a_schema_error() {
    let mut v = two_nodes();
    v["mac"] = json!({ "windw_period_us": 9.0 });
    assert!(matches!(parse(&v), Err(ConfigError::Schema(_))));
    let mut v = two_nodes();
    v["mac"] = json!({ "variant": "fancy" });
    assert!(matches!(parse(&v), Err(ConfigError::Schema(_))));
}

#[test]
fn flow_to_missing_node() {
    let mut v = two_nodes();
    v["flows"][0]["dst"] = json!(9);
    assert!(matches!(parse(&v), Err(ConfigError::UnknownNode { id: 9, .. })));
}

#[test]
fn nodes_out_of_order() {
    let mut v = two_nodes();
    v["nodes"][1]["id"] = json!(3);
    assert!(matches!(parse(&v), Err(ConfigError::NodeOrder { index: 1, found: 3 })));
}

#[test]
fn window_period_must_stay_below_sifs() {
    let mut v = two_nodes();
    v["mac"] = json!({ "window_period_us": 10.0 });
    let err = parse(&v).unwrap_err();
    assert!(matches!(err, ConfigError::Window(WindowError::NotBelowSifs { .. })), "{err}");
    v["mac"] = json!({ "window_period_us": 0.0 });
    assert!(matches!(parse(&v), Err(ConfigError::Window(WindowError::Zero))));
}

#[test]
fn window_period_must_cover_the_spread() {
    // Two senders at 1 km and 2.5 km from a hub: 2 * 5 us spread is above SIFS.
    let v = json!({
        "name": "spread",
        "channel": { "bit_rate_bps": 5e6, "comm_radius_m": 3000.0 },
        "nodes": [
            { "id": 0, "x": 5000.0, "y": 5000.0, "antenna": { "num_beams": 4 } },
            { "id": 1, "x": 6000.0, "y": 5000.0, "antenna": { "num_beams": 1, "steerable": true }, "default_peer": 0 },
            { "id": 2, "x": 5000.0, "y": 7500.0, "antenna": { "num_beams": 1, "steerable": true }, "default_peer": 0 }
        ],
        "flows": [ { "src": 1, "dst": 0, "rate_bps": 1e6 } ]
    });
    let err = parse(&v).unwrap_err();
    assert!(matches!(err, ConfigError::Window(WindowError::Infeasible { .. })), "{err}");
}

#[test]
fn bad_numbers_are_rejected() {
    let cases = [
        ("/mac/cw_min", json!(12)),
        ("/mac/queue_capacity", json!(0)),
        ("/channel/bit_rate_bps", json!(0.0)),
        ("/sim/duration_s", json!(-1.0)),
        ("/flows/0/rate_bps", json!(0.0)),
    ];
    for (ptr, val) in cases {
        let mut v = two_nodes();
        let (parent, key) = ptr.rsplit_once('/').unwrap();
        v.pointer_mut(parent).unwrap()[key] = val;
        assert!(matches!(parse(&v), Err(ConfigError::Invalid { .. })), "{ptr} accepted");
    }
}

#[test]
fn role_switch_accepts_auto_or_a_count() {
    let mut v = two_nodes();
    v["mac"] = json!({ "role_switch_slots": 5 });
    assert_eq!(parse(&v).unwrap().resolve(1).unwrap().mac.role_switch_slots, 5);
    v["mac"] = json!({ "role_switch_slots": "auto" });
    // 32 us RTS plus the 3.33 us hop, over 20 us slots.
    assert_eq!(parse(&v).unwrap().resolve(1).unwrap().mac.role_switch_slots, 2);
}
