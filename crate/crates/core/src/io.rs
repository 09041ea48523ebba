//! Scenario files, fingerprints and CSV dumps.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::PathRecord;
use crate::doob_meyer::DecompositionTrace;
use crate::error::{Error, Result};
use crate::filter::FilterTrace;
use crate::model::{
    EncodingSpec, Hypothesis, HypothesisSet, LevyMeasure, Message, ScenarioConfig, TimeGrid,
    LAMBDA_FLOOR, MAX_EXPECTED_JUMPS,
};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub snr: f64,
    pub horizon: f64,
    pub steps: usize,
    #[serde(default)]
    pub levy: LevyFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hypotheses: Vec<HypothesisFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_message: Option<GaussianMessageFile>,
    #[serde(default = "default_true")]
    pub strict_positivity: bool,
    #[serde(default = "default_floor")]
    pub lambda_floor: f64,
    #[serde(default = "default_max_jumps")]
    pub max_expected_jumps: f64,
    #[serde(default)]
    pub check_assumptions: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyFile {
    /// `[size, rate]` pairs.
    pub atoms: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisFile {
    pub label: String,
    pub prior: f64,
    pub encoding: EncodingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMessageFile {
    pub prior_var: f64,
}

fn default_true() -> bool {
    true
}

fn default_floor() -> f64 {
    LAMBDA_FLOOR
}

fn default_max_jumps() -> f64 {
    MAX_EXPECTED_JUMPS
}

impl ScenarioFile {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let (hypotheses, gaussian_message) = match cfg.message() {
            Message::Finite(set) => {
                let hs = set
                    .iter()
                    .map(|h| {
                        let encoding = h.encoding.to_spec().ok_or_else(|| {
                            Error::Unsupported(format!(
                                "encoding of hypothesis '{}' has no declarative form",
                                h.label
                            ))
                        })?;
                        Ok(HypothesisFile {
                            label: h.label.clone(),
                            prior: h.prior,
                            encoding,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (hs, None)
            }
            Message::Gaussian { prior_var } => (
                Vec::new(),
                Some(GaussianMessageFile {
                    prior_var: *prior_var,
                }),
            ),
        };
        Ok(Self {
            version: SCENARIO_VERSION,
            snr: cfg.snr(),
            horizon: cfg.grid().horizon(),
            steps: cfg.grid().steps(),
            levy: LevyFile {
                atoms: cfg.levy().to_pairs().into_iter().map(|(z, r)| [z, r]).collect(),
            },
            hypotheses,
            gaussian_message,
            strict_positivity: cfg.strict_positivity(),
            lambda_floor: cfg.lambda_floor(),
            max_expected_jumps: cfg.max_expected_jumps(),
            check_assumptions: cfg.check_assumptions(),
        })
    }

    pub fn to_config(&self) -> Result<ScenarioConfig> {
        if self.version != SCENARIO_VERSION {
            return Err(Error::validation(
                "version",
                format!("unsupported scenario version {}", self.version),
            ));
        }
        let grid = TimeGrid::new(self.horizon, self.steps)?;
        let pairs: Vec<(f64, f64)> = self.levy.atoms.iter().map(|a| (a[0], a[1])).collect();
        let levy = LevyMeasure::new(&pairs)?;
        let message = match (&self.gaussian_message, self.hypotheses.is_empty()) {
            (Some(g), true) => Message::Gaussian {
                prior_var: g.prior_var,
            },
            (None, false) => Message::Finite(HypothesisSet::new(
                self.hypotheses
                    .iter()
                    .map(|h| Hypothesis::from_spec(h.label.clone(), h.prior, h.encoding.clone()))
                    .collect(),
            )?),
            (Some(_), false) => {
                return Err(Error::validation(
                    "hypotheses",
                    "give either hypotheses or gaussian_message, not both",
                ))
            }
            (None, true) => {
                return Err(Error::validation(
                    "hypotheses",
                    "scenario needs hypotheses or a gaussian_message",
                ))
            }
        };
        ScenarioConfig::new(self.snr, grid, levy, message)?
            .with_strict_positivity(self.strict_positivity)
            .with_lambda_floor(self.lambda_floor)?
            .with_max_expected_jumps(self.max_expected_jumps)
            .map(|c| c.with_assumption_check(self.check_assumptions))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn parse_scenario(json: &str) -> Result<ScenarioConfig> {
    serde_json::from_str::<ScenarioFile>(json)?.to_config()
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn export_scenario(cfg: &ScenarioConfig) -> Result<String> {
    ScenarioFile::from_config(cfg)?.to_json()
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Hash of the canonical (compact JSON) serialization. Scenarios with
/// programmatic encodings hash their debug representation instead and are
/// marked with a `custom-` prefix.
pub fn scenario_fingerprint(cfg: &ScenarioConfig) -> String {
    match ScenarioFile::from_config(cfg).and_then(|f| Ok(serde_json::to_string(&f)?)) {
        Ok(canonical) => sha256_hex(canonical.as_bytes()),
        Err(_) => format!("custom-{}", sha256_hex(format!("{cfg:?}").as_bytes())),
    }
}

/// Fingerprint of an ordered pair of models.
pub fn pair_fingerprint(p: &ScenarioConfig, q: &ScenarioConfig) -> String {
    sha256_hex(format!("{}|{}", scenario_fingerprint(p), scenario_fingerprint(q)).as_bytes())
}

fn fmt_sizes(prefix: &str, sizes: &[f64]) -> String {
    sizes.iter().map(|z| format!(",{prefix}{z}")).collect()
}

/// Writes path blocks: one header, then one row per node for each path.
/// Increment columns on the final node of a block are empty.
pub fn write_paths_csv<W: Write>(out: &mut W, paths: &[PathRecord]) -> Result<()> {
    let sizes = paths.first().map(|p| p.jump_sizes.clone()).unwrap_or_default();
    writeln!(
        out,
        "path,t,Y,dYc{},beta_true{}",
        fmt_sizes("N_z=", &sizes),
        fmt_sizes("lambda_true_z=", &sizes)
    )?;
    for (pi, p) in paths.iter().enumerate() {
        let y = p.y_series();
        let n = p.grid.steps();
        for k in 0..=n {
            let mut row = format!("{pi},{},{}", p.grid.node(k), y[k]);
            if k < n {
                let _ = write!(row, ",{}", p.cont_increments[k]);
                for c in p.counts(k) {
                    let _ = write!(row, ",{c}");
                }
                let _ = write!(row, ",{}", p.truth_beta[k]);
                for l in p.lambdas(k) {
                    let _ = write!(row, ",{l}");
                }
            } else {
                row.push_str(&",".repeat(2 + 2 * sizes.len()));
            }
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}

/// One row per node; estimate columns are empty on the final node.
pub fn write_trace_csv<W: Write>(out: &mut W, trace: &FilterTrace, jump_sizes: &[f64]) -> Result<()> {
    let m = trace.hypothesis_count();
    let mut header = String::from("t");
    for i in 0..m {
        let _ = write!(header, ",w_{i}");
    }
    header.push_str(",beta_hat");
    header.push_str(&fmt_sizes("lambda_hat_z=", jump_sizes));
    for i in 0..m {
        let _ = write!(header, ",logL_{i}");
    }
    header.push_str(",marginal_logL");
    writeln!(out, "{header}")?;
    let n = trace.grid().steps();
    for k in 0..=n {
        let mut row = format!("{}", trace.grid().node(k));
        for w in trace.weights(k) {
            let _ = write!(row, ",{w}");
        }
        if k < n {
            let _ = write!(row, ",{}", trace.beta_hat(k));
            for l in trace.lambda_hat(k) {
                let _ = write!(row, ",{l}");
            }
        } else {
            row.push_str(&",".repeat(1 + jump_sizes.len()));
        }
        for l in trace.log_lik(k) {
            let _ = write!(row, ",{l}");
        }
        let _ = write!(row, ",{}", trace.marginal_log_lik(k));
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn write_decomposition_csv<W: Write>(out: &mut W, d: &DecompositionTrace) -> Result<()> {
    writeln!(out, "t,target,A,M_residual,M_explicit")?;
    for k in 0..=d.grid.steps() {
        writeln!(
            out,
            "{},{},{},{},{}",
            d.grid.node(k),
            d.target[k],
            d.compensator[k],
            d.martingale_residual[k],
            d.martingale_explicit[k]
        )?;
    }
    Ok(())
}
