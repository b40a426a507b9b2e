//! Command-line front end.
//!
//! Exit status: `0` on success, `1` on domain errors, `2` on usage errors.
//! Errors are reported as one line on standard error:
//! `error: <kind>: <message>`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::asymptotics::{
    gamma_inverse, gamma_matrix, limiting_cf_multi, scaling_d1, scaling_d2, tau_with_diagnostic,
    v_transform, TauReport, DEFAULT_N_APPROX,
};
use crate::error::Error;
use crate::estimators::{estimate_multi, BlindSearch, Init, Method, SearchConfig};
use crate::model::{synthesize, ChirpModel, SampleSeries};
use crate::montecarlo::{rate_check, run_experiment_with_progress, ExperimentConfig, SummaryTable};
use crate::noise::{empirical_cf, sample_sas, theoretical_cf, StableNoiseSpec};
use crate::optim::SimplexConfig;

#[derive(Debug, Parser)]
#[command(
    name = "chirpest",
    version,
    about = "Chirp parameter estimation in α-stable noise"
)]
pub struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Print a replication counter to standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a chirp series and write it as `t,y` CSV.
    Synth(SynthArgs),
    /// Estimate chirp parameters from a `t,y` CSV.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment described by a TOML config.
    Experiment(ExperimentArgs),
    /// Compare empirical and theoretical characteristic functions of the noise.
    ValidateNoise(ValidateNoiseArgs),
    /// Print limiting-distribution quantities as JSON.
    Asymptotics(AsymptoticsArgs),
    /// Fit log-log convergence slopes from a summary table.
    Rates(RatesArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Model preset: model1 or model2.
    #[arg(long, default_value = "model1")]
    pub model: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    /// Noise scale; 0 gives a noise-free series.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path (standard output if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "lse")]
    pub method: Method,
    #[arg(long, default_value_t = 1)]
    pub components: usize,
    /// `blind`, `window:θ1,θ2[,θ1,θ2...]`, or `window` together with `--model`.
    #[arg(long, default_value = "blind")]
    pub init: String,
    /// Preset whose true parameters seed a bare `--init window`.
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub simplex: SimplexFlags,
    #[command(flatten)]
    pub blind: BlindFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimplexFlags {
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub f_tolerance: Option<f64>,
    #[arg(long)]
    pub x_tolerance: Option<f64>,
    /// Simplex restarts after the first run.
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
    /// Lattice points per axis scanned around each window start (0 disables).
    #[arg(long, default_value_t = 5)]
    pub window_scan: usize,
}

#[derive(Debug, Args)]
pub struct BlindFlags {
    #[arg(long)]
    pub top_m: Option<usize>,
    #[arg(long)]
    pub theta1_oversample: Option<usize>,
    #[arg(long)]
    pub theta2_spacing: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Summary CSV path (standard output if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-replication dump CSV.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    /// Overrides `experiment.replications`.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Overrides `experiment.master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ValidateNoiseArgs {
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub t: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long, default_value = "model1")]
    pub model: String,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Sample size for the D1 and D2 entries.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Truncation point of the τ approximation.
    #[arg(long, default_value_t = DEFAULT_N_APPROX)]
    pub n_approx: usize,
    /// Scale of the axis test points `t = scale · e_k`.
    #[arg(long, default_value_t = 0.2)]
    pub scale: f64,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// Summary CSV written by `experiment`.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a CLI invocation.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    /// The single-line `error: <kind>: <message>` report.
    pub fn report(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Domain(e) => (e.kind(), e.to_string()),
        };
        let msg = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error: {kind}: {msg}")
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `std::env::args`, runs the command and returns the exit status.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}

/// Runs one parsed invocation.
pub fn dispatch(cli: &Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Estimate(a) => estimate(a),
        Command::Experiment(a) => experiment(a, cli.verbose),
        Command::ValidateNoise(a) => validate_noise(a),
        Command::Asymptotics(a) => asymptotics(a),
        Command::Rates(a) => rates(a),
    }
}

fn preset(name: &str) -> CliResult<ChirpModel> {
    ChirpModel::preset(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown model preset {name:?} (expected model1 or model2)"
        ))
    })
}

fn open_input(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Usage(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let mut w = output(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidParameter(format!("json encoding failed: {e}")))?;
    writeln!(w, "{text}").map_err(Error::from)?;
    w.flush().map_err(Error::from)?;
    Ok(())
}

fn synth(a: &SynthArgs) -> CliResult<()> {
    let model = preset(&a.model)?;
    let noise = if a.sigma == 0.0 {
        None
    } else {
        Some(sample_sas(
            &StableNoiseSpec::new(a.alpha, a.sigma, a.seed)?,
            a.n,
        )?)
    };
    let y = synthesize(&model, a.n, noise.as_deref())?;
    y.write_csv(output(a.out.as_deref())?)?;
    Ok(())
}

/// Parses `--init`. A bare `window` takes its starts from `model`.
pub fn parse_init(spec: &str, model: Option<&ChirpModel>, blind: BlindSearch) -> CliResult<Init> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("blind") {
        return Ok(Init::Blind(blind));
    }
    if spec.eq_ignore_ascii_case("window") {
        let model = model.ok_or_else(|| {
            CliError::Usage("--init window without coordinates needs --model".into())
        })?;
        return Ok(Init::Window(
            model
                .components()
                .iter()
                .map(|c| (c.theta1, c.theta2))
                .collect(),
        ));
    }
    let coords = spec
        .strip_prefix("window:")
        .ok_or_else(|| CliError::Usage(format!("unrecognized --init {spec:?}")))?;
    let values = coords
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("bad --init coordinate: {e}")))?;
    if values.is_empty() || values.len() % 2 != 0 {
        return Err(CliError::Usage("--init window: needs θ1,θ2 pairs".into()));
    }
    Ok(Init::Window(
        values.chunks(2).map(|c| (c[0], c[1])).collect(),
    ))
}

fn simplex_config(f: &SimplexFlags) -> SimplexConfig {
    let mut cfg = SimplexConfig::default();
    if let Some(v) = f.max_iterations {
        cfg.max_iterations = v;
    }
    if let Some(v) = f.f_tolerance {
        cfg.f_tolerance = v;
    }
    if let Some(v) = f.x_tolerance {
        cfg.x_tolerance = v;
    }
    cfg
}

fn blind_config(f: &BlindFlags) -> BlindSearch {
    let mut cfg = BlindSearch::default();
    if let Some(v) = f.top_m {
        cfg.top_m = v;
    }
    if let Some(v) = f.theta1_oversample {
        cfg.theta1_oversample = v;
    }
    if let Some(v) = f.theta2_spacing {
        cfg.theta2_spacing = v;
    }
    cfg
}

fn estimate(a: &EstimateArgs) -> CliResult<()> {
    let y = SampleSeries::read_csv(open_input(&a.input)?)?;
    let model = a.model.as_deref().map(preset).transpose()?;
    let init = parse_init(&a.init, model.as_ref(), blind_config(&a.blind))?;
    let search = SearchConfig {
        init,
        simplex: simplex_config(&a.simplex),
        restarts: a.simplex.restarts,
        window_scan: a.simplex.window_scan,
    };
    let result = estimate_multi(&y, a.components, a.method, &search)?;
    write_json(&result, a.out.as_deref())
}

fn experiment(a: &ExperimentArgs, verbose: bool) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.config.display())))?;
    let mut cfg = ExperimentConfig::from_toml_str(&text)?;
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    let progress = |done: usize, total: usize| {
        if verbose {
            eprint!("\rreplication {done}/{total}");
            if done == total {
                eprintln!();
            }
        }
    };
    let out = run_experiment_with_progress(&cfg, &progress)?;
    for cell in &out.table.aborted {
        eprintln!(
            "warning: aborted cell method={} alpha={} sigma={} n={}: {}/{} replications failed (first: {})",
            cell.method, cell.alpha, cell.sigma, cell.n, cell.failures, cell.replications, cell.first_error
        );
    }
    out.table.write_csv(output(a.out.as_deref())?)?;
    if let Some(raw) = &a.raw {
        out.write_raw_csv(output(Some(raw))?, cfg.model.p())?;
    }
    Ok(())
}

fn validate_noise(a: &ValidateNoiseArgs) -> CliResult<()> {
    let spec = StableNoiseSpec::new(a.alpha, a.sigma, a.seed)?;
    let sample = sample_sas(&spec, a.n)?;
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    w.write_record([
        "t",
        "empirical_re",
        "empirical_im",
        "theoretical",
        "abs_error",
    ])
    .map_err(Error::from)?;
    for &t in &a.t {
        let emp = empirical_cf(&sample, t)?;
        let theo = theoretical_cf(a.alpha, a.sigma, t)?;
        let err = (emp - theo).norm();
        w.write_record([t, emp.re, emp.im, theo, err].map(|v| v.to_string()))
            .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct ComponentAsymptotics {
    gamma: Vec<Vec<f64>>,
    gamma_inverse: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct CfPoint {
    t: Vec<f64>,
    tau: Vec<TauReport>,
    limiting_cf: f64,
}

#[derive(Serialize)]
struct AsymptoticsReport {
    model: String,
    alpha: f64,
    sigma: f64,
    n: usize,
    d1: [f64; 4],
    d2: [f64; 4],
    components: Vec<ComponentAsymptotics>,
    cf_points: Vec<CfPoint>,
}

fn rows(m: &nalgebra::Matrix4<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn asymptotics(a: &AsymptoticsArgs) -> CliResult<()> {
    let model = preset(&a.model)?;
    let components = model
        .components()
        .iter()
        .map(|c| {
            Ok(ComponentAsymptotics {
                gamma: rows(&gamma_matrix(c.a, c.b)?),
                gamma_inverse: rows(&gamma_inverse(c.a, c.b)?),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let p = model.p();
    let mut cf_points = Vec::with_capacity(4 * p);
    for axis in 0..4 * p {
        let mut t = vec![0.0; 4 * p];
        t[axis] = a.scale;
        let mut tau = Vec::with_capacity(p);
        for (k, c) in model.components().iter().enumerate() {
            let tk = [t[4 * k], t[4 * k + 1], t[4 * k + 2], t[4 * k + 3]];
            let v = v_transform(&tk, c.a, c.b)?;
            tau.push(tau_with_diagnostic(&v, c, a.alpha, a.n_approx)?);
        }
        let cf = limiting_cf_multi(&t, &model, a.alpha, a.sigma, a.n_approx)?;
        cf_points.push(CfPoint {
            t,
            tau,
            limiting_cf: cf,
        });
    }
    let report = AsymptoticsReport {
        model: a.model.clone(),
        alpha: a.alpha,
        sigma: a.sigma,
        n: a.n,
        d1: scaling_d1(a.n, a.alpha)?,
        d2: scaling_d2(a.n, a.alpha)?,
        components,
        cf_points,
    };
    write_json(&report, None)
}

fn rates(a: &RatesArgs) -> CliResult<()> {
    let table = SummaryTable::read_csv(open_input(&a.table)?)?;
    let mut keys: Vec<(Method, f64, f64, String)> = Vec::new();
    for r in &table.rows {
        let key = (r.method, r.alpha, r.sigma, r.parameter.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    w.write_record(["method", "alpha", "sigma", "parameter", "slope"])
        .map_err(Error::from)?;
    for (method, alpha, sigma, parameter) in keys {
        let slope = rate_check(&table, &parameter, method, alpha, sigma)?;
        w.write_record([
            method.name().to_string(),
            alpha.to_string(),
            sigma.to_string(),
            parameter,
            slope.to_string(),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(())
}
