//! Command-line front end for `xyconv-core`: phase-diagram scans, sign maps,
//! Rényi curves, majorization profiles and finite-size fits, written as CSV
//! and JSON next to a manifest that can replay the run.

pub mod config;
pub mod output;
pub mod pool;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use xyconv_core::convertibility::classify_measurements;
use xyconv_core::sweep::{
    run_phase_diagram_with, run_sign_sweep_with, transition_by_length, TransitionKind,
};
use xyconv_core::{scaling_fit, ModelParams};

use crate::config::{ConfigError, RawConfig, RunConfig};
use crate::output::{MajorizationFile, MajorizationRecord, Manifest, ScalingFile, ScalingSample};
use crate::pool::Pool;

#[derive(Debug, Parser)]
#[command(
    name = "xyconv",
    version,
    about = "Ground-state convertibility of the periodic XY chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// LOCC/ELOCC verdicts over the (gamma, h) grid → grid.csv
    Scan(Options),
    /// Sign of dS_alpha/dh over the (h, alpha) grid → sign_map.csv
    SignMap(Options),
    /// Rényi curves at the listed h values → renyi_NNN.csv
    Renyi(Options),
    /// Schmidt spectra and partial sums of (h, h + delta) pairs → majorization.json
    Majorization(Options),
    /// Boundary per chain length and exponential extrapolation → scaling.json
    Scaling(Options),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Scan(_) => "scan",
            Command::SignMap(_) => "sign-map",
            Command::Renyi(_) => "renyi",
            Command::Majorization(_) => "majorization",
            Command::Scaling(_) => "scaling",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Scan(o)
            | Command::SignMap(o)
            | Command::Renyi(o)
            | Command::Majorization(o)
            | Command::Scaling(o) => o,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replay the resolved config stored in a manifest.json.
    #[arg(long, conflicts_with = "config")]
    pub from_manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: XYCONV_WORKERS, else one per core).
    #[arg(long)]
    pub workers: Option<usize>,

    /// Chain length.
    #[arg(long = "L")]
    pub chain_len: Option<String>,
    /// Anisotropy values: `a,b,c` or `min:max:step`; `sqrt(x)/y` accepted.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Explicit field values (renyi, majorization).
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub h_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub h_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub h_step: Option<String>,
    /// Pair spacing and finite-difference step (default: h-step).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Block sites, e.g. `0,1`.
    #[arg(long)]
    pub block: Option<String>,
    #[arg(long)]
    pub alpha_min: Option<String>,
    #[arg(long)]
    pub alpha_max: Option<String>,
    /// Number of log-spaced finite orders; the limits are always added.
    #[arg(long)]
    pub alpha_count: Option<String>,
    /// `lowest` or `min_entanglement`.
    #[arg(long)]
    pub policy: Option<String>,
    /// `auto`, `dense` or `iterative`.
    #[arg(long)]
    pub method: Option<String>,
    /// Eigensolver residual tolerance.
    #[arg(long)]
    pub tolerance: Option<String>,
    #[arg(long)]
    pub max_applications: Option<String>,
    #[arg(long)]
    pub basis_size: Option<String>,
    #[arg(long)]
    pub keep: Option<String>,
    /// Chain lengths for `scaling`: `8,10,12` or `8..=16`.
    #[arg(long)]
    pub lengths: Option<String>,
    /// `first` or `second`.
    #[arg(long)]
    pub kind: Option<String>,
    /// `elocc` or `locc`.
    #[arg(long)]
    pub criterion: Option<String>,
}

impl Options {
    fn flag_pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("L", &self.chain_len),
            ("gamma", &self.gamma),
            ("h", &self.h),
            ("h_min", &self.h_min),
            ("h_max", &self.h_max),
            ("h_step", &self.h_step),
            ("delta", &self.delta),
            ("block", &self.block),
            ("alpha_min", &self.alpha_min),
            ("alpha_max", &self.alpha_max),
            ("alpha_count", &self.alpha_count),
            ("policy", &self.policy),
            ("method", &self.method),
            ("tolerance", &self.tolerance),
            ("max_applications", &self.max_applications),
            ("basis_size", &self.basis_size),
            ("keep", &self.keep),
            ("lengths", &self.lengths),
            ("kind", &self.kind),
            ("criterion", &self.criterion),
        ]
    }

    /// Config file (or manifest) first, then flags on top.
    pub fn resolve(&self, command: &str) -> Result<RunConfig, Failure> {
        if let Some(path) = &self.from_manifest {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
            let manifest: Manifest = serde_json::from_str(&text).map_err(|e| {
                Failure::Validation(format!("{} is not a manifest: {e}", path.display()))
            })?;
            if manifest.command != command {
                return Err(Failure::Validation(format!(
                    "manifest was written by `{}`, not `{command}`",
                    manifest.command
                )));
            }
            if self.flag_pairs().iter().any(|(_, v)| v.is_some()) {
                return Err(Failure::Validation(
                    "--from-manifest cannot be combined with config flags".into(),
                ));
            }
            manifest.config.validate()?;
            return Ok(manifest.config);
        }
        let mut raw = match &self.config {
            Some(path) => RawConfig::read(path)?,
            None => RawConfig::default(),
        };
        for (key, value) in self.flag_pairs() {
            if let Some(v) = value {
                raw.set(key, v.clone());
            }
        }
        Ok(RunConfig::resolve(&raw)?)
    }
}

/// Why a command did not succeed; each kind has its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Validation(String),
    Budget { failed: usize, total: usize },
    Fit(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Budget { .. } => 3,
            Failure::Fit(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid configuration: {m}"),
            Failure::Budget { failed, total } => write!(
                f,
                "{failed} of {total} cells failed, above the 1% failure budget"
            ),
            Failure::Fit(m) => write!(f, "scaling fit failed: {m}"),
            Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.0)
    }
}

/// Share of failed cells a sweep may have.
pub const FAILURE_BUDGET: f64 = 0.01;

fn within_budget(failed: usize, total: usize) -> bool {
    (failed as f64) <= FAILURE_BUDGET * total as f64
}

struct Run {
    command: &'static str,
    config: RunConfig,
    run_id: String,
    out: PathBuf,
    started: Instant,
    outputs: Vec<String>,
}

impl Run {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.out.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, cells: usize, failed: usize) -> Result<Summary, Failure> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            run_id: self.run_id.clone(),
            command: self.command.into(),
            config: self.config.clone(),
            outputs: self.outputs.clone(),
            cells,
            failed_cells: failed,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        self.write("manifest.json", &output::json(&manifest))?;
        if !within_budget(failed, cells) {
            return Err(Failure::Budget {
                failed,
                total: cells,
            });
        }
        Ok(Summary {
            run_id: self.run_id,
            outputs: self.outputs,
            cells,
            failed,
        })
    }
}

/// What a successful command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub run_id: String,
    pub outputs: Vec<String>,
    pub cells: usize,
    pub failed: usize,
}

pub fn run(cli: &Cli) -> Result<Summary, Failure> {
    let command = cli.command.name();
    let options = cli.command.options();
    let config = options.resolve(command)?;
    let pool = Pool::new(options.workers).map_err(Failure::Validation)?;
    std::fs::create_dir_all(&options.out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", options.out.display())))?;
    let run = Run {
        command,
        run_id: config.run_id(command),
        config,
        out: options.out.clone(),
        started: Instant::now(),
        outputs: Vec::new(),
    };
    match &cli.command {
        Command::Scan(_) => scan(run, &pool),
        Command::SignMap(_) => sign_map(run, &pool),
        Command::Renyi(_) => renyi(run, &pool),
        Command::Majorization(_) => majorization(run, &pool),
        Command::Scaling(_) => scaling(run, &pool),
    }
}

fn scan(mut run: Run, pool: &Pool) -> Result<Summary, Failure> {
    let sweep = run.config.sweep_for(run.config.chain_len)?;
    let grid =
        run_phase_diagram_with(&sweep, pool).map_err(|e| Failure::Validation(e.to_string()))?;
    for cell in grid.cells.iter().filter(|c| c.outcome.is_err()) {
        eprintln!(
            "warning: {}",
            xyconv_core::sweep::describe_failure(cell).unwrap_or_default()
        );
    }
    run.write("grid.csv", &output::grid_csv(&run.run_id, &grid))?;
    let (cells, failed) = (grid.cells.len(), grid.failures());
    run.finish(cells, failed)
}

fn sign_map(mut run: Run, pool: &Pool) -> Result<Summary, Failure> {
    let sweep = run.config.sweep_for(run.config.chain_len)?;
    let maps = sweep
        .gammas
        .iter()
        .map(|&g| run_sign_sweep_with(&sweep, g, pool))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Validation(e.to_string()))?;
    run.write("sign_map.csv", &output::sign_map_csv(&run.run_id, &maps))?;
    let cells = maps.iter().map(|m| m.fields.len()).sum();
    let failed = maps.iter().map(|m| m.failures()).sum();
    run.finish(cells, failed)
}

fn explicit_points(config: &RunConfig) -> Result<Vec<(f64, f64)>, Failure> {
    if config.h.is_empty() {
        return Err(Failure::Validation(
            "this command needs at least one value in `h`".into(),
        ));
    }
    let points: Vec<(f64, f64)> = config
        .gamma
        .iter()
        .flat_map(|&g| config.h.iter().map(move |&h| (g, h)))
        .collect();
    for &(g, h) in &points {
        ModelParams::new(config.chain_len, g, h).map_err(|e| Failure::Validation(e.to_string()))?;
    }
    Ok(points)
}

fn solver_error(e: xyconv_core::Error) -> Failure {
    Failure::Runtime(format!("solver failed: {e}"))
}

fn renyi(mut run: Run, pool: &Pool) -> Result<Summary, Failure> {
    let points = explicit_points(&run.config)?;
    let probe = run.config.sweep_for(run.config.chain_len)?.probe();
    let l = run.config.chain_len;
    let results = xyconv_core::Executor::map(pool, &points, |&(g, h)| {
        probe.measure(&ModelParams::new(l, g, h)?)
    });
    for (k, (r, &(g, h))) in results.into_iter().zip(&points).enumerate() {
        let r = r.map_err(solver_error)?;
        let text = output::curve_csv(&run.run_id, l, g, h, &r.curve);
        run.write(&format!("renyi_{k:03}.csv"), &text)?;
    }
    run.finish(points.len(), 0)
}

fn majorization(mut run: Run, pool: &Pool) -> Result<Summary, Failure> {
    let points = explicit_points(&run.config)?;
    let probe = run.config.sweep_for(run.config.chain_len)?.probe();
    let (l, delta) = (run.config.chain_len, run.config.delta);
    let records = xyconv_core::Executor::map(pool, &points, |&(g, h)| {
        let at_h = probe.measure(&ModelParams::new(l, g, h)?)?;
        let at_hd = probe.measure(&ModelParams::new(l, g, h + delta)?)?;
        let v = classify_measurements(&at_h, &at_hd)?;
        Ok(MajorizationRecord::new(
            g,
            h,
            h + delta,
            &at_h.spectrum,
            &at_hd.spectrum,
            &v,
        ))
    });
    let pairs = records
        .into_iter()
        .collect::<Result<Vec<_>, xyconv_core::Error>>()
        .map_err(solver_error)?;
    let file = MajorizationFile {
        run_id: run.run_id.clone(),
        pairs,
    };
    run.write("majorization.json", &output::json(&file))?;
    run.finish(points.len(), 0)
}

fn scaling(mut run: Run, pool: &Pool) -> Result<Summary, Failure> {
    let config = run.config.clone();
    let mut lengths = config.lengths.clone();
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.len() < 4 || lengths.len() != config.lengths.len() {
        return Err(Failure::Validation(format!(
            "scaling needs at least 4 distinct chain lengths (got {:?})",
            config.lengths
        )));
    }
    let [gamma] = config.gamma[..] else {
        return Err(Failure::Validation(
            "scaling takes exactly one gamma".into(),
        ));
    };
    for &l in &config.lengths {
        config.sweep_for(l)?;
    }
    let template = config.sweep_for(config.lengths[0])?;
    let kind = config.kind();
    let found = transition_by_length(
        &template,
        gamma,
        &config.lengths,
        config.criterion(),
        kind,
        pool,
    );

    let mut samples = Vec::new();
    let mut failed = 0;
    for (&l, r) in config.lengths.iter().zip(found) {
        let sample = match r {
            Err(e) => {
                failed += 1;
                ScalingSample {
                    chain_len: l,
                    h_c: None,
                    artifact: false,
                    used: false,
                    note: Some(e.to_string()),
                }
            }
            Ok(None) => ScalingSample {
                chain_len: l,
                h_c: None,
                artifact: false,
                used: false,
                note: Some("no boundary of this kind in the field window".into()),
            },
            Ok(Some(b)) => {
                let excluded = b.artifact && kind == TransitionKind::SecondOrder;
                ScalingSample {
                    chain_len: l,
                    h_c: Some(b.h),
                    artifact: b.artifact,
                    used: !excluded,
                    note: excluded.then(|| "level-crossing artifact".to_string()),
                }
            }
        };
        samples.push(sample);
    }
    let points: Vec<(usize, f64)> = samples
        .iter()
        .filter(|s| s.used)
        .filter_map(|s| s.h_c.map(|h| (s.chain_len, h)))
        .collect();
    let fit = scaling_fit(&points);
    let file = ScalingFile {
        run_id: run.run_id.clone(),
        gamma,
        kind: config.kind,
        criterion: config.criterion,
        samples,
        fit: fit.as_ref().ok().cloned(),
        error: fit.as_ref().err().map(|e| e.to_string()),
    };
    run.write("scaling.json", &output::json(&file))?;
    let total = config.lengths.len();
    let summary = run.finish(total, failed)?;
    match fit {
        Ok(_) => Ok(summary),
        Err(e) => Err(Failure::Fit(e.to_string())),
    }
}

/// Parse `path` as a manifest.
pub fn read_manifest(path: &Path) -> Result<Manifest, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}
