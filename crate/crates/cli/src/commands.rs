//! Subcommand execution: load configuration, run the pipeline, write the
//! outputs and a manifest describing them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use distill_core::channels::{apply_local, partial_polarizer, Arm};
use distill_core::metrics::MetricsReport;
use distill_core::pipelines::{run_distill, run_qpt_characterization, run_sweep_epsilon, run_sweep_tv, run_table1};
use distill_core::rng::derive_seed;
use distill_core::tomography::{qst, simulate_counts, two_qubit_settings};
use serde_json::{json, Value};

use crate::config::Config;
use crate::emit::{self, Basis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Qst,
    Qpt,
    Distill,
    SweepTv,
    SweepEps,
    Table1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Qst => "qst",
            Command::Qpt => "qpt",
            Command::Distill => "distill",
            Command::SweepTv => "sweep-tv",
            Command::SweepEps => "sweep-eps",
            Command::Table1 => "table1",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub format: Format,
    /// Count table (CSV) to reconstruct instead of simulating one; `qst` only.
    pub counts: Option<PathBuf>,
}

/// One output file before it is written: its JSON form and, when the data
/// is naturally tabular, a dedicated CSV form.
struct Artifact {
    stem: String,
    json: Value,
    csv: Option<String>,
}

impl Artifact {
    fn new(stem: impl Into<String>, json: Value) -> Self {
        Self {
            stem: stem.into(),
            json,
            csv: None,
        }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => emit::json_string(&self.json),
            Format::Csv => self.csv.clone().unwrap_or_else(|| emit::flatten_csv(&self.json)),
        }
    }
}

fn load_config(opts: &RunOptions) -> Result<Config> {
    let mut cfg = match &opts.config {
        Some(path) => Config::load(path)?,
        None if opts.command == Command::Table1 => Config::minimal(0.5, 1.0),
        None => bail!("--config is required for {}", opts.command.name()),
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn metrics_of_state(cfg: &Config, rho: &distill_core::states::DensityMatrix) -> Result<Value> {
    Ok(emit::metrics_json(&MetricsReport::of(rho, cfg.family())?))
}

fn simulate(cfg: &Config) -> Result<Vec<Artifact>> {
    let exp = cfg.experiment();
    let initial = exp.initial_state()?;
    let (distilled, p) = apply_local(&partial_polarizer(&exp.channel)?, &initial, Arm::First)?;
    let mut out = Vec::new();
    for (tag, name, rho) in [(1, "initial", &initial), (2, "distilled", &distilled)] {
        let counts = simulate_counts(
            rho,
            &two_qubit_settings(),
            exp.acquisition_scale,
            exp.noise,
            derive_seed(exp.seed, tag),
        )?;
        out.push(Artifact::new(
            format!("simulate-{name}-state"),
            emit::object([
                ("state", emit::matrix_json(rho.matrix(), Basis::TwoQubit)),
                ("metrics", metrics_of_state(cfg, rho)?),
                ("success_prob", emit::num(if tag == 1 { 1.0 } else { p })),
            ]),
        ));
        out.push(
            Artifact::new(format!("simulate-{name}-counts"), emit::counts_json(&counts))
                .with_csv(emit::counts_csv(&counts)),
        );
    }
    Ok(out)
}

fn reconstruct(cfg: &Config, counts_path: Option<&Path>) -> Result<Vec<Artifact>> {
    let exp = cfg.experiment();
    let counts = match counts_path {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            emit::counts_from_csv(&text, exp.acquisition_scale).with_context(|| path.display().to_string())?
        }
        None => simulate_counts(
            &exp.initial_state()?,
            &two_qubit_settings(),
            exp.acquisition_scale,
            exp.noise,
            derive_seed(exp.seed, 1),
        )?,
    };
    let result = qst(&counts, exp.method)?;
    let metrics = if result.rho.dim() == 4 {
        metrics_of_state(cfg, &result.rho)?
    } else {
        Value::Null
    };
    Ok(vec![Artifact::new(
        "qst",
        emit::object([("tomography", emit::tomo_json(&result)), ("metrics", metrics)]),
    )])
}

fn execute(cmd: Command, cfg: &Config, counts: Option<&Path>) -> Result<Vec<Artifact>> {
    let exp = cfg.experiment();
    Ok(match cmd {
        Command::Simulate => simulate(cfg)?,
        Command::Qst => reconstruct(cfg, counts)?,
        Command::Qpt => {
            let q = run_qpt_characterization(&exp, cfg.qpt_tv_true())?;
            vec![Artifact::new("qpt", emit::qpt_json(&q))]
        }
        Command::Distill => {
            let r = run_distill(&exp)?;
            vec![Artifact::new("distill", emit::distill_json(&r)).with_csv(emit::distill_csv(&r))]
        }
        Command::SweepTv => {
            let rows = run_sweep_tv(&exp, &cfg.sweep.tv_list)?;
            vec![Artifact::new("sweep-tv", emit::sweep_json("t_v", &rows)).with_csv(emit::sweep_csv("t_v", &rows))]
        }
        Command::SweepEps => {
            let rows = run_sweep_epsilon(&exp, &cfg.sweep.eps_list, cfg.family())?;
            vec![Artifact::new("sweep-eps", emit::sweep_json("epsilon", &rows))
                .with_csv(emit::sweep_csv("epsilon", &rows))]
        }
        Command::Table1 => {
            let rows = run_table1(&exp)?;
            vec![Artifact::new("table1", emit::table1_json(&rows)).with_csv(emit::table1_csv(&rows))]
        }
    })
}

/// Seconds since the Unix epoch, pinned by `SOURCE_DATE_EPOCH` when set so
/// that manifests are reproducible.
fn timestamp() -> Result<u64> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("SOURCE_DATE_EPOCH={v:?} is not an integer")),
        Err(_) => Ok(SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs()),
    }
}

/// `{"tool", "version", "command", "format", "config", "seeds", "timestamps", "outputs"}`.
fn manifest(opts: &RunOptions, cfg: &Config, started: u64, finished: u64, outputs: &[String]) -> Result<Value> {
    Ok(json!({
        "tool": "distill",
        "version": env!("CARGO_PKG_VERSION"),
        "command": opts.command.name(),
        "format": opts.format.extension(),
        "config": serde_json::to_value(cfg)?,
        "seeds": { "seed": cfg.seed, "mc_seed": cfg.mc_seed() },
        "timestamps": { "started_unix": started, "finished_unix": finished },
        "outputs": outputs,
    }))
}

pub fn manifest_name(cmd: Command) -> String {
    format!("manifest-{}.json", cmd.name())
}

/// Run a subcommand and write its outputs and manifest under `opts.out`.
/// Returns the paths written, manifest last.
pub fn run(opts: &RunOptions) -> Result<Vec<PathBuf>> {
    if opts.counts.is_some() && opts.command != Command::Qst {
        bail!("--counts only applies to qst");
    }
    let started = timestamp()?;
    let cfg = load_config(opts)?;
    let artifacts = execute(opts.command, &cfg, opts.counts.as_deref())?;
    fs::create_dir_all(&opts.out).with_context(|| format!("cannot create {}", opts.out.display()))?;

    let mut written = Vec::new();
    let mut names = Vec::new();
    for a in &artifacts {
        let name = format!("{}.{}", a.stem, opts.format.extension());
        let path = opts.out.join(&name);
        fs::write(&path, a.render(opts.format)).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
        names.push(name);
    }
    let finished = timestamp()?;
    let m = manifest(opts, &cfg, started, finished, &names)?;
    let path = opts.out.join(manifest_name(opts.command));
    fs::write(&path, emit::json_string(&m)).with_context(|| format!("cannot write {}", path.display()))?;
    written.push(path);
    Ok(written)
}
