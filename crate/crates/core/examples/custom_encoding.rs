//! A programmatic encoding: the drift tracks a message-dependent target
//! level, and jump intensities rise while the output is below it.

use semichan::info::{estimate_mi, RouteChoice};
use semichan::{Encoding, History, Hypothesis, LevyMeasure, ScenarioConfig, TimeGrid};

#[derive(Debug)]
struct Tracker {
    target: f64,
}

impl Encoding for Tracker {
    fn drift(&self, h: &History<'_>) -> f64 {
        (self.target - h.y()).clamp(-2.0, 2.0)
    }

    fn jump_scale(&self, h: &History<'_>, _atom: usize, size: f64) -> f64 {
        if (self.target - h.y()) * size > 0.0 {
            2.0
        } else {
            0.5
        }
    }
}

fn main() -> semichan::Result<()> {
    let cfg = ScenarioConfig::finite(
        1.0,
        TimeGrid::new(2.0, 800)?,
        LevyMeasure::new(&[(-0.5, 1.0), (0.5, 1.0)])?,
        vec![
            Hypothesis::new("up", 0.5, Tracker { target: 1.0 }),
            Hypothesis::new("down", 0.5, Tracker { target: -1.0 }),
        ],
    )?;
    let r = estimate_mi(&cfg, RouteChoice::Both, 3_000, 8)?;
    println!("{}", r.to_json()?);
    Ok(())
}
