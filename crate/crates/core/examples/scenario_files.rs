//! Export a preset to a scenario file, edit it, and load it back.

use semichan::io::{export_scenario, parse_scenario, scenario_fingerprint};
use semichan::scenarios::preset_poisson_binary;

fn main() -> semichan::Result<()> {
    let cfg = preset_poisson_binary(1.0, 1.0, 2000, 1.0, 2.0)?.config;
    let json = export_scenario(&cfg)?;
    println!("{json}");

    let mut edited: serde_json::Value = serde_json::from_str(&json)?;
    edited["hypotheses"][1]["encoding"]["lambda"] = serde_json::json!([3.0]);
    let changed = parse_scenario(&edited.to_string())?;
    println!("original fingerprint {}", scenario_fingerprint(&cfg));
    println!("edited fingerprint   {}", scenario_fingerprint(&changed));
    Ok(())
}
