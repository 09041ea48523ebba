//! Command-line front end.
//!
//! Exit codes: 0 success, 1 acceptance failure, 2 usage or validation
//! error, 3 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channel::{project_observable, simulate_from_prior};
use crate::doob_meyer::{decompose_density, decompose_relative};
use crate::error::{Error, Result};
use crate::filter::mismatched_filter_pair;
use crate::info::{estimate_kl_with, estimate_mi_with, RouteChoice, RouteEstimates};
use crate::io::{export_scenario, load_scenario, write_decomposition_csv, write_paths_csv};
use crate::mc::{McJob, WORKERS_ENV};
use crate::model::{Message, ScenarioConfig, TimeGrid};
use crate::rng::derive_seed;
use crate::scenarios::{default_mismatch_pair, preset_by_name, PRESET_NAMES};
use crate::verify::{run_suite, Fixtures, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "semichan", version, about = "Information and estimation on jump-diffusion channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate channel paths and write them as CSV.
    Simulate(SimulateArgs),
    /// Estimate the mutual information between message and output.
    Mi(MiArgs),
    /// Estimate the relative entropy between output laws under two models.
    Kl(KlArgs),
    /// Decompose a log-likelihood ratio along one simulated path.
    Decompose(DecomposeArgs),
    /// Run acceptance criteria with pinned seeds and sizes.
    Verify(VerifyArgs),
    /// Write a preset as a scenario file.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ScenarioSource {
    /// Built-in preset name.
    #[arg(long)]
    pub preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the number of grid steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long, value_enum, default_value_t = RouteChoice::Both)]
    pub route: RouteChoice,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report progress on standard error.
    #[arg(long)]
    pub progress: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
}

#[derive(Debug, Args)]
pub struct MiArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct MismatchArgs {
    /// Q: the P preset with these priors (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["scenario_q", "q_prior_var"])]
    pub q_prior: Option<Vec<f64>>,
    /// Q: the P preset with this Gaussian prior variance.
    #[arg(long, conflicts_with = "scenario_q")]
    pub q_prior_var: Option<f64>,
    /// Q: scenario file.
    #[arg(long)]
    pub scenario_q: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KlArgs {
    /// P: built-in preset.
    #[arg(long, conflicts_with = "scenario_p", required_unless_present = "scenario_p")]
    pub preset: Option<String>,
    /// P: scenario file.
    #[arg(long)]
    pub scenario_p: Option<PathBuf>,
    #[command(flatten)]
    pub q: MismatchArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecomposeKind {
    /// Information density of the true message.
    Density,
    /// `ln L̄^P − ln L̄^Q`.
    Relative,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[arg(long, value_enum, default_value_t = DecomposeKind::Density)]
    pub kind: DecomposeKind,
    #[command(flatten)]
    pub q: MismatchArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Oracle fixture file replacing the bundled one.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub progress: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub preset: String,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Messages go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Mi(a) => cmd_mi(&a),
        Command::Kl(a) => cmd_kl(&a),
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Export(a) => cmd_export(&a),
    }
}

fn with_steps(cfg: ScenarioConfig, steps: Option<usize>) -> Result<ScenarioConfig> {
    match steps {
        Some(s) => {
            let grid = TimeGrid::new(cfg.grid().horizon(), s)?;
            Ok(cfg.with_grid(grid))
        }
        None => Ok(cfg),
    }
}

fn resolve(preset: Option<&str>, file: Option<&Path>, steps: Option<usize>) -> Result<ScenarioConfig> {
    match (preset, file) {
        (Some(name), None) => Ok(preset_by_name(name, steps)?.config),
        (None, Some(path)) => with_steps(load_scenario(path)?, steps),
        _ => Err(Error::validation(
            "scenario",
            format!("give exactly one of a scenario file or a preset ({})", PRESET_NAMES.join(", ")),
        )),
    }
}

fn resolve_source(src: &ScenarioSource, steps: Option<usize>) -> Result<ScenarioConfig> {
    resolve(src.preset.as_deref(), src.scenario.as_deref(), steps)
}

/// Q for a given P: an explicit file, replaced priors, or the preset default.
fn resolve_q(p: &ScenarioConfig, preset: Option<&str>, q: &MismatchArgs, steps: Option<usize>) -> Result<ScenarioConfig> {
    if let Some(path) = &q.scenario_q {
        return with_steps(load_scenario(path)?, steps);
    }
    if let Some(priors) = &q.q_prior {
        let set = p
            .hypotheses()
            .ok_or_else(|| Error::validation("q_prior", "P has no finite hypothesis set"))?;
        return p.with_message(Message::Finite(set.with_priors(priors)?));
    }
    if let Some(var) = q.q_prior_var {
        return p.with_message(Message::Gaussian { prior_var: var });
    }
    match preset {
        Some(name) => Ok(default_mismatch_pair(&preset_by_name(name, steps)?)?.1),
        None => Err(Error::validation(
            "q",
            "give --scenario-q, --q-prior or --q-prior-var when P is a scenario file",
        )),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn job(run: &RunArgs, mc: &McArgs) -> McJob {
    let mut job = McJob::new(mc.paths, run.seed).with_progress(mc.progress);
    job.workers = mc.workers;
    job
}

fn write_estimates(est: &RouteEstimates, format: Format, out: Option<&Path>) -> Result<()> {
    let mut w = open_out(out)?;
    match format {
        Format::Json => writeln!(w, "{}", est.to_json()?)?,
        Format::Csv => {
            writeln!(w, "route,value,std_error,n_paths,seed,scenario_fingerprint")?;
            for e in [&est.loss, &est.density].into_iter().flatten() {
                let route = serde_json::to_value(e.route)?;
                writeln!(
                    w,
                    "{},{:?},{:?},{},{},{}",
                    route.as_str().unwrap_or_default(),
                    e.value,
                    e.std_error,
                    e.n_paths,
                    e.seed,
                    e.scenario_fingerprint
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let cfg = resolve_source(&a.source, a.run.steps)?;
    if a.paths == 0 {
        return Err(Error::validation("paths", "must be at least 1"));
    }
    let paths = (0..a.paths as u64)
        .map(|i| simulate_from_prior(&cfg, derive_seed(a.run.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let mut w = open_out(a.run.out.as_deref())?;
    write_paths_csv(&mut w, &paths)?;
    w.flush()?;
    Ok(EXIT_OK)
}

fn cmd_mi(a: &MiArgs) -> Result<i32> {
    let cfg = resolve_source(&a.source, a.run.steps)?;
    let est = estimate_mi_with(&job(&a.run, &a.mc), &cfg, a.mc.route)?;
    write_estimates(&est, a.mc.format, a.run.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_kl(a: &KlArgs) -> Result<i32> {
    let p = resolve(a.preset.as_deref(), a.scenario_p.as_deref(), a.run.steps)?;
    let q = resolve_q(&p, a.preset.as_deref(), &a.q, a.run.steps)?;
    let est = estimate_kl_with(&job(&a.run, &a.mc), &p, &q, a.mc.route)?;
    write_estimates(&est, a.mc.format, a.run.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<i32> {
    let p = resolve_source(&a.source, a.run.steps)?;
    let truth = simulate_from_prior(&p, derive_seed(a.run.seed, 0))?;
    let obs = project_observable(&truth);
    let d = match a.kind {
        DecomposeKind::Density => {
            let trace = crate::filter::filter_scenario(&obs, &p)?;
            decompose_density(&truth, &trace, &p)?
        }
        DecomposeKind::Relative => {
            let q = resolve_q(&p, a.source.preset.as_deref(), &a.q, a.run.steps)?;
            let (tp, tq) = mismatched_filter_pair(&obs, &p, &q)?;
            decompose_relative(&truth, &tp, &tq, &p)?
        }
    };
    if !d.is_monotone() {
        return Err(Error::Domain("compensator decreased; refusing to emit".into()));
    }
    let mut w = open_out(a.run.out.as_deref())?;
    write_decomposition_csv(&mut w, &d)?;
    w.flush()?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let fixtures = match &a.fixtures {
        Some(p) => Fixtures::load(p)?,
        None => Fixtures::pinned(),
    };
    let opts = VerifyOptions {
        fixtures,
        workers: a.workers,
        progress: a.progress,
    };
    let results = run_suite(a.suite, &opts)?;
    let mut all = true;
    for r in &results {
        println!("{r}");
        all &= r.passed;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    Ok(if all { EXIT_OK } else { EXIT_ACCEPTANCE })
}

fn cmd_export(a: &ExportArgs) -> Result<i32> {
    let cfg = preset_by_name(&a.preset, a.run.steps)?.config;
    let mut w = open_out(a.run.out.as_deref())?;
    writeln!(w, "{}", export_scenario(&cfg)?)?;
    w.flush()?;
    Ok(EXIT_OK)
}
