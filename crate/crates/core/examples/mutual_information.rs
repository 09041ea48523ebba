//! Estimate mutual information by the loss and density routes and compare
//! with each preset's oracle.
//!
//!     cargo run --release --example mutual_information

use semichan::info::{estimate_mi, RouteChoice};
use semichan::scenarios::{preset_by_name, PRESET_NAMES};

fn main() -> semichan::Result<()> {
    for name in PRESET_NAMES {
        let preset = preset_by_name(name, None)?;
        let r = estimate_mi(&preset.config, RouteChoice::Both, 4_000, 1)?;
        let (l, d) = (r.loss.as_ref().unwrap(), r.density.as_ref().unwrap());
        let oracle = preset
            .oracle
            .value()
            .map_or_else(|| "   (none)".to_string(), |v| format!("{v:9.5}"));
        println!(
            "{name:<24} loss {:.5} ± {:.5}   density {:.5} ± {:.5}   oracle {oracle}",
            l.value, l.std_error, d.value, d.std_error
        );
    }
    Ok(())
}
