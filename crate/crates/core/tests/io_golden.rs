//! Golden fingerprints, file round trips and schema conformance.

use std::path::PathBuf;

use semichan::channel::simulate_from_prior;
use semichan::info::{estimate_kl, estimate_mi, RouteChoice};
use semichan::io::{export_scenario, load_scenario, parse_scenario, scenario_fingerprint};
use semichan::scenarios::{default_mismatch_pair, preset_by_name, PRESET_NAMES};

fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn schema(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(manifest_path(&format!("schema/{name}"))).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

#[test]
fn preset_fingerprints_are_stable() {
    // sha256 of the compact canonical JSON, computed outside the crate.
    let golden = [
        ("gaussian-conjugate", "60bdbef98cbf73258071b657153aae907cf9e49088448d5e9dea9940e42282c1"),
        ("bpsk-gaussian", "320e3cf1035187ce21c443f935b9a39863380ee9d62dcaf50e287af21c71979f"),
        ("poisson-binary", "cbebd026f4a6dfacd533beeb07ecd65ddb47102c40b70f038ae66d219cb5dae2"),
        ("jump-diffusion-feedback", "962eadfd31d1a988769da20270b1fa1c6c211860efd608fbad5487e64655f49b"),
    ];
    for (name, fp) in golden {
        assert_eq!(scenario_fingerprint(&preset_by_name(name, None).unwrap().config), fp, "{name}");
    }
}

#[test]
fn export_round_trip_preserves_behavior() {
    for name in PRESET_NAMES {
        let cfg = preset_by_name(name, Some(50)).unwrap().config;
        let back = parse_scenario(&export_scenario(&cfg).unwrap()).unwrap();
        assert_eq!(scenario_fingerprint(&cfg), scenario_fingerprint(&back));
        assert_eq!(simulate_from_prior(&cfg, 11).unwrap(), simulate_from_prior(&back, 11).unwrap());
    }
}

#[test]
fn checked_in_scenario_loads() {
    let cfg = load_scenario(&manifest_path("tests/data/poisson_binary.json")).unwrap();
    assert_eq!(
        scenario_fingerprint(&cfg),
        scenario_fingerprint(&preset_by_name("poisson-binary", None).unwrap().config)
    );
}

#[test]
fn exported_scenarios_match_schema() {
    let v = schema("scenario.schema.json");
    for name in PRESET_NAMES {
        let cfg = preset_by_name(name, None).unwrap().config;
        let json: serde_json::Value = serde_json::from_str(&export_scenario(&cfg).unwrap()).unwrap();
        assert!(v.is_valid(&json), "{name}");
    }
    let bad = serde_json::json!({"version": 1, "snr": 1.0, "horizon": 1.0, "steps": 10, "extra": 1});
    assert!(!v.is_valid(&bad));
}

#[test]
fn estimate_outputs_match_schema() {
    let v = schema("info_estimate.schema.json");
    let cfg = preset_by_name("bpsk-gaussian", Some(50)).unwrap().config;
    for route in [RouteChoice::Loss, RouteChoice::Density, RouteChoice::Both] {
        let json = estimate_mi(&cfg, route, 20, 1).unwrap().to_json().unwrap();
        assert!(v.is_valid(&serde_json::from_str(&json).unwrap()), "{json}");
    }
    let (p, q) = default_mismatch_pair(&preset_by_name("poisson-binary", Some(50)).unwrap()).unwrap();
    let json = estimate_kl(&p, &q, RouteChoice::Both, 20, 1).unwrap().to_json().unwrap();
    assert!(v.is_valid(&serde_json::from_str(&json).unwrap()));
    assert!(!v.is_valid(&serde_json::json!({"value": 1.0})));
}
