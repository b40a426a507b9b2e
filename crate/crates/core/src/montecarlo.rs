//! Monte Carlo replication harness.
//!
//! A cell is one `(α, σ, n)` combination. Every replication of a cell draws
//! its noise and its oracle-window offsets from seeds derived from the
//! master seed and the cell's own values, so results do not depend on cell
//! order, thread count or scheduling.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_multi, BlindSearch, Init, Method, SearchConfig};
use crate::model::{synthesize, ChirpComponent, ChirpModel};
use crate::noise::{sample_sas, stream_seed, StableNoiseSpec};
use crate::optim::SimplexConfig;

/// Largest true amplitude magnitude accepted in a configuration.
pub const AMPLITUDE_BOUND: f64 = 1e6;

/// Cells with more than this fraction of failed replications are aborted.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;

const WINDOW_STREAM: u64 = 0x5749_4e44_4f57;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    Blind,
    OracleWindow,
}

impl InitMode {
    pub fn label(self) -> &'static str {
        match self {
            InitMode::Blind => "blind",
            InitMode::OracleWindow => "oracle-window",
        }
    }
}

/// A complete simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ChirpModel,
    pub alphas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub ns: Vec<usize>,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub init_mode: InitMode,
    pub master_seed: u64,
    /// Lattice points per axis scanned around oracle-window starts.
    pub window_scan: usize,
    pub simplex: SimplexConfig,
    pub blind: BlindSearch,
}

impl ExperimentConfig {
    /// One-cell design with 500 replications and oracle-window starts.
    pub fn single_cell(
        model: ChirpModel,
        alpha: f64,
        sigma: f64,
        n: usize,
        method: Method,
    ) -> Self {
        Self {
            model,
            alphas: vec![alpha],
            sigmas: vec![sigma],
            ns: vec![n],
            replications: 500,
            methods: vec![method],
            init_mode: InitMode::OracleWindow,
            master_seed: 0,
            window_scan: 5,
            simplex: SimplexConfig::default(),
            blind: BlindSearch::default(),
        }
    }

    /// Checks ranges. `σ = 0` is accepted and means noise-free data.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        ChirpModel::new(self.model.components().to_vec())?;
        for c in self.model.components() {
            if c.a.abs() > AMPLITUDE_BOUND || c.b.abs() > AMPLITUDE_BOUND {
                return bad(format!(
                    "amplitudes must not exceed {AMPLITUDE_BOUND} in magnitude"
                ));
            }
        }
        if self.alphas.is_empty() || self.sigmas.is_empty() || self.ns.is_empty() {
            return bad("alphas, sigmas and ns must be nonempty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must be nonempty".into());
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(a > 1.0 && a <= 2.0)) {
            return bad(format!("alpha must lie in (1, 2], got {a}"));
        }
        if let Some(s) = self.sigmas.iter().find(|&&s| !(s >= 0.0 && s.is_finite())) {
            return bad(format!("sigma must be non-negative, got {s}"));
        }
        let p = self.model.p();
        if let Some(n) = self.ns.iter().find(|&&n| n < 8 * p) {
            return bad(format!("n = {n} is below 8p = {}", 8 * p));
        }
        if self.replications < 2 {
            return bad("replications must be at least 2".into());
        }
        self.simplex.validate()?;
        self.blind.validate()?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = raw.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    experiment: RawExperiment,
    #[serde(default)]
    simplex: SimplexConfig,
    #[serde(default)]
    blind: BlindSearch,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    preset: Option<String>,
    components: Option<Vec<ChirpComponent>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    alphas: Vec<f64>,
    sigmas: Vec<f64>,
    ns: Vec<usize>,
    #[serde(default = "default_replications")]
    replications: usize,
    methods: Vec<String>,
    #[serde(default = "default_init_mode")]
    init_mode: InitMode,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_window_scan")]
    window_scan: usize,
}

fn default_replications() -> usize {
    500
}

fn default_window_scan() -> usize {
    5
}

fn default_init_mode() -> InitMode {
    InitMode::OracleWindow
}

impl RawConfig {
    fn into_config(self) -> Result<ExperimentConfig> {
        let model = match (self.model.preset, self.model.components) {
            (Some(name), None) => ChirpModel::preset(&name)
                .ok_or_else(|| Error::Config(format!("unknown model preset {name:?}")))?,
            (None, Some(components)) => {
                let components = components
                    .into_iter()
                    .map(|c| ChirpComponent::new(c.a, c.b, c.theta1, c.theta2))
                    .collect::<Result<Vec<_>>>()?;
                ChirpModel::new(components)?
            }
            _ => {
                return Err(Error::Config(
                    "[model] needs exactly one of `preset` or `components`".into(),
                ))
            }
        };
        let methods = self
            .experiment
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<Method>>>()?;
        Ok(ExperimentConfig {
            model,
            alphas: self.experiment.alphas,
            sigmas: self.experiment.sigmas,
            ns: self.experiment.ns,
            replications: self.experiment.replications,
            methods,
            init_mode: self.experiment.init_mode,
            master_seed: self.experiment.master_seed,
            window_scan: self.experiment.window_scan,
            simplex: self.simplex,
            blind: self.blind,
        })
    }
}

/// Parameter names in the order of the flattened estimate vector.
pub fn parameter_names(p: usize) -> Vec<String> {
    if p == 1 {
        return ["A", "B", "theta1", "theta2"].map(String::from).to_vec();
    }
    (1..=p)
        .flat_map(|k| {
            [
                format!("A{k}"),
                format!("B{k}"),
                format!("theta{k}1"),
                format!("theta{k}2"),
            ]
        })
        .collect()
}

fn flatten(components: &[ChirpComponent]) -> Vec<f64> {
    components
        .iter()
        .flat_map(|c| [c.a, c.b, c.theta1, c.theta2])
        .collect()
}

/// Outcome of one replication for one method.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    NotConverged,
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> String {
        match self {
            RunStatus::Ok => "ok".into(),
            RunStatus::NotConverged => "not-converged".into(),
            RunStatus::Failed(kind) => format!("failed:{kind}"),
        }
    }

    fn is_failure(&self) -> bool {
        !matches!(self, RunStatus::Ok)
    }
}

/// One row of the per-replication dump.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub method: Method,
    pub alpha: f64,
    pub sigma: f64,
    pub n: usize,
    pub replication: usize,
    pub status: RunStatus,
    /// Flattened `(A, B, θ1, θ2)` per component; empty when estimation failed.
    pub estimates: Vec<f64>,
}

/// AVE and MAD of one parameter in one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub alpha: f64,
    pub sigma: f64,
    pub n: usize,
    pub parameter: String,
    pub ave: f64,
    pub mad: f64,
    pub failures: usize,
}

/// A cell that exceeded the failure budget.
#[derive(Debug, Clone, PartialEq)]
pub struct AbortedCell {
    pub method: Method,
    pub alpha: f64,
    pub sigma: f64,
    pub n: usize,
    pub failures: usize,
    pub replications: usize,
    pub first_error: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    pub aborted: Vec<AbortedCell>,
}

impl SummaryTable {
    pub fn find(
        &self,
        method: Method,
        alpha: f64,
        sigma: f64,
        n: usize,
        parameter: &str,
    ) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| {
            r.method == method
                && r.alpha == alpha
                && r.sigma == sigma
                && r.n == n
                && r.parameter == parameter
        })
    }

    /// Reads a table written by [`SummaryTable::write_csv`].
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            method: String,
            alpha: f64,
            sigma: f64,
            n: usize,
            parameter: String,
            ave: f64,
            mad: f64,
            failures: usize,
        }
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for row in r.deserialize() {
            let row: Row = row?;
            rows.push(SummaryRow {
                method: row.method.parse()?,
                alpha: row.alpha,
                sigma: row.sigma,
                n: row.n,
                parameter: row.parameter,
                ave: row.ave,
                mad: row.mad,
                failures: row.failures,
            });
        }
        Ok(Self {
            rows,
            aborted: Vec::new(),
        })
    }

    /// CSV with header `method,alpha,sigma,n,parameter,ave,mad,failures`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "method",
            "alpha",
            "sigma",
            "n",
            "parameter",
            "ave",
            "mad",
            "failures",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.method.name().to_string(),
                r.alpha.to_string(),
                r.sigma.to_string(),
                r.n.to_string(),
                r.parameter.clone(),
                r.ave.to_string(),
                r.mad.to_string(),
                r.failures.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Summary table plus every per-replication record.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: SummaryTable,
    pub raw: Vec<RawRecord>,
}

impl ExperimentOutput {
    /// Per-replication CSV: cell keys, status and one column per parameter.
    pub fn write_raw_csv<W: Write>(&self, writer: W, p: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = ["method", "alpha", "sigma", "n", "replication", "status"]
            .map(String::from)
            .to_vec();
        header.extend(parameter_names(p));
        w.write_record(&header)?;
        for r in &self.raw {
            let mut rec = vec![
                r.method.name().to_string(),
                r.alpha.to_string(),
                r.sigma.to_string(),
                r.n.to_string(),
                r.replication.to_string(),
                r.status.label(),
            ];
            if r.estimates.is_empty() {
                rec.extend(std::iter::repeat_n(String::new(), 4 * p));
            } else {
                rec.extend(r.estimates.iter().map(|v| v.to_string()));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(mean(x), mean(|x − truth|))`.
pub fn summarize(estimates: &[f64], truth: f64) -> Result<(f64, f64)> {
    if estimates.is_empty() {
        return Err(Error::Empty("summarize needs at least one estimate"));
    }
    let n = estimates.len() as f64;
    let ave = estimates.iter().sum::<f64>() / n;
    let mad = estimates.iter().map(|x| (x - truth).abs()).sum::<f64>() / n;
    Ok((ave, mad))
}

/// Least-squares slope of `ln MAD` against `ln n` over the matching rows.
pub fn rate_check(
    table: &SummaryTable,
    parameter: &str,
    method: Method,
    alpha: f64,
    sigma: f64,
) -> Result<f64> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| {
            r.parameter == parameter && r.method == method && r.alpha == alpha && r.sigma == sigma
        })
        .map(|r| ((r.n as f64).ln(), r.mad.ln()))
        .collect();
    let distinct: BTreeSet<u64> = pts.iter().map(|p| p.0.to_bits()).collect();
    if distinct.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "rate_check needs at least 2 distinct n for {parameter}, got {}",
            distinct.len()
        )));
    }
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::InvalidParameter(
            "rate_check needs positive MAD values".into(),
        ));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Seed of the noise vector of replication `r` in cell `(alpha, sigma, n)`.
pub fn noise_seed(master: u64, alpha: f64, sigma: f64, n: usize, r: usize) -> u64 {
    stream_seed(
        master,
        &[alpha.to_bits(), sigma.to_bits(), n as u64, r as u64],
    )
}

/// Oracle-window starts: each true `(θ1, θ2)` shifted uniformly within
/// `±π/n` and `±π/n²`, clamped into `(0, π)`.
pub fn window_starts(model: &ChirpModel, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w1 = PI / n as f64;
    let w2 = PI / (n as f64 * n as f64);
    let inside = |x: f64| x.clamp(1e-9, PI - 1e-9);
    model
        .components()
        .iter()
        .map(|c| {
            let d1: f64 = rng.random_range(-w1..=w1);
            let d2: f64 = rng.random_range(-w2..=w2);
            (inside(c.theta1 + d1), inside(c.theta2 + d2))
        })
        .collect()
}

fn replicate(
    cfg: &ExperimentConfig,
    alpha: f64,
    sigma: f64,
    n: usize,
    r: usize,
) -> Vec<(RunStatus, Vec<f64>)> {
    let data = if sigma > 0.0 {
        let spec = StableNoiseSpec {
            alpha,
            sigma,
            seed: noise_seed(cfg.master_seed, alpha, sigma, n, r),
        };
        sample_sas(&spec, n).and_then(|e| synthesize(&cfg.model, n, Some(&e)))
    } else {
        synthesize(&cfg.model, n, None)
    };
    let y = match data {
        Ok(y) => y,
        Err(e) => {
            return cfg
                .methods
                .iter()
                .map(|_| (RunStatus::Failed(e.kind().to_string()), Vec::new()))
                .collect()
        }
    };
    let init = match cfg.init_mode {
        InitMode::Blind => Init::Blind(cfg.blind),
        InitMode::OracleWindow => {
            let seed = stream_seed(
                cfg.master_seed,
                &[
                    alpha.to_bits(),
                    sigma.to_bits(),
                    n as u64,
                    r as u64,
                    WINDOW_STREAM,
                ],
            );
            Init::Window(window_starts(&cfg.model, n, seed))
        }
    };
    let search = SearchConfig {
        init,
        simplex: cfg.simplex,
        restarts: 2,
        window_scan: cfg.window_scan,
    };
    cfg.methods
        .iter()
        .map(|&m| match estimate_multi(&y, cfg.model.p(), m, &search) {
            Ok(res) => {
                let status = if res.converged() {
                    RunStatus::Ok
                } else {
                    RunStatus::NotConverged
                };
                (status, flatten(&res.components))
            }
            Err(e) => (RunStatus::Failed(e.kind().to_string()), Vec::new()),
        })
        .collect()
}

/// Runs every cell of `cfg`; see [`run_experiment_with_progress`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with_progress(cfg, &|_, _| {})
}

/// Runs every cell of `cfg`, calling `progress(done, total)` after each
/// finished replication.
pub fn run_experiment_with_progress(
    cfg: &ExperimentConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let names = parameter_names(cfg.model.p());
    let truth = flatten(cfg.model.components());
    let total = cfg.alphas.len() * cfg.sigmas.len() * cfg.ns.len() * cfg.replications;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let mut out = ExperimentOutput {
        table: SummaryTable::default(),
        raw: Vec::new(),
    };

    for &alpha in &cfg.alphas {
        for &sigma in &cfg.sigmas {
            for &n in &cfg.ns {
                let reps: Vec<Vec<(RunStatus, Vec<f64>)>> = (0..cfg.replications)
                    .into_par_iter()
                    .map(|r| {
                        let res = replicate(cfg, alpha, sigma, n, r);
                        let d = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                        progress(d, total);
                        res
                    })
                    .collect();

                for (mi, &method) in cfg.methods.iter().enumerate() {
                    let mut failures = 0;
                    let mut first_error = None;
                    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); truth.len()];
                    for (r, rep) in reps.iter().enumerate() {
                        let (status, est) = &rep[mi];
                        if status.is_failure() {
                            failures += 1;
                            if first_error.is_none() {
                                first_error = Some(status.label());
                            }
                        }
                        if !est.is_empty() {
                            for (col, v) in columns.iter_mut().zip(est) {
                                col.push(*v);
                            }
                        }
                        out.raw.push(RawRecord {
                            method,
                            alpha,
                            sigma,
                            n,
                            replication: r,
                            status: status.clone(),
                            estimates: est.clone(),
                        });
                    }
                    let too_many = failures as f64 > MAX_FAILURE_FRACTION * cfg.replications as f64;
                    if too_many || columns[0].is_empty() {
                        out.table.aborted.push(AbortedCell {
                            method,
                            alpha,
                            sigma,
                            n,
                            failures,
                            replications: cfg.replications,
                            first_error: first_error.unwrap_or_default(),
                        });
                        continue;
                    }
                    for ((name, col), &tr) in names.iter().zip(&columns).zip(&truth) {
                        let (ave, mad) = summarize(col, tr)?;
                        out.table.rows.push(SummaryRow {
                            method,
                            alpha,
                            sigma,
                            n,
                            parameter: name.clone(),
                            ave,
                            mad,
                            failures,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            model: ChirpModel::model1(),
            alphas: vec![1.5, 1.9],
            sigmas: vec![0.1],
            ns: vec![64, 100],
            replications: 6,
            methods: vec![Method::Lse, Method::Alse],
            init_mode: InitMode::OracleWindow,
            master_seed: 11,
            window_scan: 5,
            simplex: SimplexConfig::default(),
            blind: BlindSearch::default(),
        }
    }

    fn csv_bytes(out: &ExperimentOutput) -> Vec<u8> {
        let mut buf = Vec::new();
        out.table.write_csv(&mut buf).unwrap();
        buf
    }

    #[test]
    fn summarize_examples() {
        let (ave, mad) = summarize(&[1.4, 1.6], 1.5).unwrap();
        assert!((ave - 1.5).abs() < 1e-15 && (mad - 0.1).abs() < 1e-15);
        assert_eq!(summarize(&[0.7; 5], 0.7).unwrap(), (0.7, 0.0));
        let (ave, mad) = summarize(&[1.0, 2.0, 3.0], 2.5).unwrap();
        assert_eq!(ave, 2.0);
        assert!((mad - 0.833_333_333_333_333_4).abs() < 1e-15);
        assert!(summarize(&[], 1.0).is_err());
    }

    #[test]
    fn rate_check_recovers_exact_power_law() {
        let rows = [250usize, 500, 1000]
            .iter()
            .map(|&n| SummaryRow {
                method: Method::Lse,
                alpha: 1.9,
                sigma: 0.1,
                n,
                parameter: "theta1".into(),
                ave: 1.5,
                mad: 3.7 * (n as f64).powf(-1.5),
                failures: 0,
            })
            .collect();
        let table = SummaryTable {
            rows,
            aborted: vec![],
        };
        let slope = rate_check(&table, "theta1", Method::Lse, 1.9, 0.1).unwrap();
        assert!((slope + 1.5).abs() < 1e-10);
        assert!(rate_check(&table, "theta2", Method::Lse, 1.9, 0.1).is_err());
        let one = SummaryTable {
            rows: table.rows[..1].to_vec(),
            aborted: vec![],
        };
        assert!(rate_check(&one, "theta1", Method::Lse, 1.9, 0.1).is_err());
    }

    #[test]
    fn parameter_naming() {
        assert_eq!(parameter_names(1), vec!["A", "B", "theta1", "theta2"]);
        assert_eq!(
            parameter_names(2),
            vec!["A1", "B1", "theta11", "theta12", "A2", "B2", "theta21", "theta22"]
        );
    }

    #[test]
    fn summary_csv_round_trips() {
        let mut cfg = small_cfg();
        cfg.alphas = vec![1.5];
        let out = run_experiment(&cfg).unwrap();
        let bytes = csv_bytes(&out);
        let back = SummaryTable::read_csv(bytes.as_slice()).unwrap();
        assert_eq!(back.rows, out.table.rows);
    }

    #[test]
    fn deterministic() {
        let cfg = small_cfg();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(csv_bytes(&a), csv_bytes(&b));
        assert_eq!(a.table.rows.len(), 2 * 2 * 2 * 4);
    }

    #[test]
    fn cell_order_does_not_matter() {
        let cfg = small_cfg();
        let mut swapped = cfg.clone();
        swapped.alphas.reverse();
        swapped.ns.reverse();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&swapped).unwrap();
        for row in &a.table.rows {
            let other = b
                .table
                .find(row.method, row.alpha, row.sigma, row.n, &row.parameter)
                .unwrap();
            assert_eq!(row, other);
        }
    }

    #[test]
    fn noise_free_cells_are_exact() {
        let mut cfg = small_cfg();
        cfg.sigmas = vec![0.0];
        cfg.alphas = vec![1.5];
        cfg.ns = vec![250];
        cfg.methods = vec![Method::Lse];
        let out = run_experiment(&cfg).unwrap();
        for row in &out.table.rows {
            assert!(row.mad < 1e-7, "{row:?}");
        }
    }

    #[test]
    fn window_starts_stay_in_the_window() {
        let m = ChirpModel::model2();
        for seed in 0..50 {
            let s = window_starts(&m, 250, seed);
            for (st, c) in s.iter().zip(m.components()) {
                assert!((st.0 - c.theta1).abs() <= PI / 250.0);
                assert!((st.1 - c.theta2).abs() <= PI / 62_500.0);
            }
        }
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            [model]
            preset = "model2"

            [experiment]
            alphas = [1.5, 1.7]
            sigmas = [0.1]
            ns = [250]
            methods = ["lse", "ALSE"]
            master_seed = 9

            [simplex]
            max_iterations = 500
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.model, ChirpModel::model2());
        assert_eq!(cfg.replications, 500);
        assert_eq!(cfg.methods, vec![Method::Lse, Method::Alse]);
        assert_eq!(cfg.init_mode, InitMode::OracleWindow);
        assert_eq!(cfg.simplex.max_iterations, 500);
        assert_eq!(cfg.simplex.f_tolerance, 1e-12);

        let custom = r#"
            [model]
            components = [{ A = 1.0, B = 0.5, theta1 = 0.8, theta2 = 0.05 }]
            [experiment]
            alphas = [2.0]
            sigmas = [1.0]
            ns = [100]
            replications = 3
            methods = ["alse"]
            init_mode = "blind"
        "#;
        let cfg = ExperimentConfig::from_toml_str(custom).unwrap();
        assert_eq!(cfg.init_mode, InitMode::Blind);
        assert_eq!(cfg.model.components()[0].b, 0.5);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small_cfg();
        cfg.alphas = vec![1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.replications = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.sigmas = vec![-0.1];
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.ns = vec![4];
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_toml_str("[model]\npreset = \"model9\"").is_err());
        let both = "[model]\npreset = \"model1\"\ncomponents = []\n[experiment]\nalphas=[1.5]\nsigmas=[0.1]\nns=[100]\nmethods=[\"lse\"]";
        assert!(ExperimentConfig::from_toml_str(both).is_err());
    }

    #[test]
    fn raw_dump_has_one_row_per_replication_and_method() {
        let mut cfg = small_cfg();
        cfg.alphas = vec![1.5];
        cfg.ns = vec![64];
        let out = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        out.write_raw_csv(&mut buf, 1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "method,alpha,sigma,n,replication,status,A,B,theta1,theta2"
        );
        assert_eq!(lines.count(), 2 * 6);
    }
}
