//! Monte Carlo rejection-rate grids.
//!
//! Every replication draws from streams derived from the master seed and the
//! cell's design point, so tables do not depend on the number of workers or
//! on which other cells are in the grid. Samples are shared across methods
//! (and across models with the same design point).

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::dgp::{simulate_system, Breaks, DgpConfig};
use crate::error::{Error, Result};
use crate::estimate::{prepare, Estimator, NlsOptions};
use crate::hypothesis::{
    bonferroni_subresidual_test, fixed_regressor_bootstrap_prepared, shin_critical_value_test,
    BlockChoice, BootstrapConfig, Method, TestOutcome,
};
use crate::model::{Family, ModelSpec, ParamVector};
use crate::rng::{derive_seed, label_hash};
use crate::variance::LrvConfig;

/// One (T, τ, σ₁², λ, ρ, ρ_μ²) constellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    #[serde(rename = "T")]
    pub n: usize,
    pub tau: f64,
    pub sigma1_sq: f64,
    pub lambda: f64,
    pub rho: f64,
    pub rho_mu_sq: f64,
}

impl DesignPoint {
    pub fn dgp_config(&self, model: &ModelSpec, theta: &ParamVector) -> Result<DgpConfig> {
        let cfg = DgpConfig {
            n: self.n,
            model: model.clone(),
            theta: theta.clone(),
            rho: self.rho,
            rho_mu_sq: self.rho_mu_sq,
            lambda: self.lambda,
            breaks: Breaks::shared(self.tau, self.sigma1_sq)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text used to derive the cell seed.
    pub fn seed_label(&self) -> String {
        format!(
            "T={};tau={:?};s1={:?};lambda={:?};rho={:?};rmu={:?}",
            self.n, self.tau, self.sigma1_sq, self.lambda, self.rho, self.rho_mu_sq
        )
    }

    pub fn cell_seed(&self, master_seed: u64) -> u64 {
        derive_seed(master_seed, &[label_hash(&self.seed_label())])
    }

    fn is_homoskedastic_null(&self) -> bool {
        self.rho_mu_sq == 0.0 && (self.tau == 0.0 || self.sigma1_sq == 1.0)
    }
}

/// How each replication is tested.
#[derive(Debug, Clone)]
pub struct CellTest {
    pub spec: ModelSpec,
    pub estimator: Estimator,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub bootstrap: BootstrapConfig,
    pub block: BlockChoice,
}

impl CellTest {
    pub fn new(
        spec: ModelSpec,
        estimator: Estimator,
        methods: Vec<Method>,
        draws: usize,
        lrv: LrvConfig,
    ) -> Self {
        CellTest {
            spec,
            estimator,
            methods,
            alpha: 0.05,
            bootstrap: BootstrapConfig {
                draws,
                lrv,
                ..Default::default()
            },
            block: BlockChoice::Auto,
        }
    }
}

/// Full-factorial Monte Carlo design.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub sizes: Vec<usize>,
    pub taus: Vec<f64>,
    pub sigma1_sq: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub rho_mu_sq: Vec<f64>,
    /// Model used both to simulate and to estimate.
    pub spec: ModelSpec,
    /// True parameters of the simulated relation.
    pub theta: ParamVector,
    pub estimator: Estimator,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub bootstrap_draws: usize,
    pub alpha: f64,
    pub block: BlockChoice,
    /// `None`: σ̂² for ρ = 0 cells and Bartlett with automatic bandwidth otherwise.
    pub lrv: Option<LrvConfig>,
    pub master_seed: u64,
}

impl GridSpec {
    /// Single-model grid with the desk-scale defaults (R = 2000, B = 399, α = 0.05).
    pub fn new(spec: ModelSpec, theta: ParamVector) -> Self {
        GridSpec {
            sizes: vec![100],
            taus: vec![0.0],
            sigma1_sq: vec![1.0],
            lambdas: vec![0.0],
            rhos: vec![0.0],
            rho_mu_sq: vec![0.0],
            spec,
            theta,
            estimator: Estimator::Nls,
            methods: vec![Method::Bootstrap],
            replications: 2000,
            bootstrap_draws: 399,
            alpha: 0.05,
            block: BlockChoice::Auto,
            lrv: None,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            self.sizes.is_empty(),
            self.taus.is_empty(),
            self.sigma1_sq.is_empty(),
            self.lambdas.is_empty(),
            self.rhos.is_empty(),
            self.rho_mu_sq.is_empty(),
            self.methods.is_empty(),
        ];
        if empty.iter().any(|&e| e) {
            return Err(Error::InvalidConfig("grid has an empty dimension".into()));
        }
        if self.replications == 0 || self.bootstrap_draws == 0 {
            return Err(Error::InvalidConfig(
                "replications and B must be positive".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.methods.contains(&Method::ShinCriticalValue) {
            let ok = matches!(self.spec.family(), Family::Linear | Family::Polynomial(1))
                && self.spec.deterministics().count() == 0
                && !matches!(self.estimator, Estimator::LeadsLags { .. });
            if !ok {
                return Err(Error::UnsupportedModel(format!(
                    "tabulated critical values need the plain linear model, got {} / {}",
                    self.spec.label(),
                    self.estimator.label()
                )));
            }
        }
        if self.estimator == Estimator::Ols && !self.spec.is_linear_in_params() {
            return Err(Error::UnsupportedModel(format!(
                "OLS cannot fit {}",
                self.spec.label()
            )));
        }
        for p in self.design_points() {
            p.dgp_config(&self.spec, &self.theta)?;
        }
        Ok(())
    }

    /// Cross product of the design values in file order. τ = 0 has no break,
    /// so it appears once with σ₁² recorded as 1.
    pub fn design_points(&self) -> Vec<DesignPoint> {
        let mut out: Vec<DesignPoint> = Vec::new();
        for &n in &self.sizes {
            for &tau in &self.taus {
                for &s in &self.sigma1_sq {
                    for &lambda in &self.lambdas {
                        for &rho in &self.rhos {
                            for &rho_mu_sq in &self.rho_mu_sq {
                                let sigma1_sq = if tau == 0.0 { 1.0 } else { s };
                                let p = DesignPoint {
                                    n,
                                    tau,
                                    sigma1_sq,
                                    lambda,
                                    rho,
                                    rho_mu_sq,
                                };
                                if !out.contains(&p) {
                                    out.push(p);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn cell_test(&self, point: &DesignPoint) -> CellTest {
        CellTest {
            spec: self.spec.clone(),
            estimator: self.estimator,
            methods: self.methods.clone(),
            alpha: self.alpha,
            bootstrap: BootstrapConfig {
                draws: self.bootstrap_draws,
                lrv: self
                    .lrv
                    .unwrap_or_else(|| LrvConfig::for_ar_coefficient(point.rho)),
                ..Default::default()
            },
            block: self.block,
        }
    }

    /// Identifies the grid in checkpoint files.
    pub fn fingerprint(&self) -> u64 {
        label_hash(&format!(
            "{:?}|{:?}|{:?}|{:?}|{:?}|{:?}|{}|{:?}|{:?}|{:?}|{}|{}|{:?}|{:?}|{:?}|{}",
            self.sizes,
            self.taus,
            self.sigma1_sq,
            self.lambdas,
            self.rhos,
            self.rho_mu_sq,
            self.spec.label(),
            self.theta.as_slice(),
            self.estimator,
            self.methods,
            self.replications,
            self.bootstrap_draws,
            self.alpha,
            self.block,
            self.lrv,
            self.master_seed
        ))
    }
}

/// Rejection count for one cell and method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellResult {
    pub rejections: usize,
    pub n_effective: usize,
    pub n_excluded: usize,
}

impl CellResult {
    /// Rejections / effective replications (0 when every replication was excluded).
    pub fn rate(&self) -> f64 {
        if self.n_effective == 0 {
            0.0
        } else {
            self.rejections as f64 / self.n_effective as f64
        }
    }
}

/// Per-method outcomes of one replication (`None` = excluded).
pub type Replication = Vec<Option<TestOutcome>>;

/// Runs `replications` draws of `config`, testing each sample with every
/// method in `test`. Replication `r` uses data seed `(seed, r, 0)` and
/// bootstrap seed `(seed, r, 1)`.
pub fn run_replications(
    config: &DgpConfig,
    test: &CellTest,
    replications: usize,
    seed: u64,
) -> Result<Vec<Replication>> {
    config.validate()?;
    let one = |r: usize| -> Result<Replication> {
        let data_seed = derive_seed(seed, &[r as u64, 0]);
        let sample = simulate_system(config, data_seed)?;
        let fitted = prepare(test.estimator, &test.spec, &sample.x, NlsOptions::default())
            .and_then(|reg| reg.fit(&sample.y).map(|f| (reg, f)));
        let (reg, fit) = match fitted {
            Ok((reg, fit)) if fit.converged => (reg, fit),
            Ok(_) => {
                log::debug!("replication {r}: fit did not converge, excluded");
                return Ok(vec![None; test.methods.len()]);
            }
            Err(
                e @ (Error::UnsupportedModel(_) | Error::InvalidModel(_) | Error::InvalidConfig(_)),
            ) => return Err(e),
            Err(e) => {
                log::debug!("replication {r}: fit failed ({e}), excluded");
                return Ok(vec![None; test.methods.len()]);
            }
        };
        let lrv = test.bootstrap.lrv;
        test.methods
            .iter()
            .map(|m| {
                let out = match m {
                    Method::Bootstrap => fixed_regressor_bootstrap_prepared(
                        &reg,
                        &fit,
                        &test.bootstrap,
                        derive_seed(seed, &[r as u64, 1]),
                    ),
                    Method::Subresidual => {
                        bonferroni_subresidual_test(&fit.residuals, test.alpha, test.block, &lrv)
                    }
                    Method::ShinCriticalValue => {
                        shin_critical_value_test(&test.spec, &fit.residuals, &lrv)
                    }
                };
                match out {
                    Ok(o) => Ok(Some(o)),
                    Err(e @ (Error::UnsupportedModel(_) | Error::InvalidConfig(_))) => Err(e),
                    Err(e) => {
                        log::debug!("replication {r}, {}: {e}, excluded", m.label());
                        Ok(None)
                    }
                }
            })
            .collect()
    };
    (0..replications).into_par_iter().map(one).collect()
}

/// Rejection frequencies at `test.alpha`, one entry per method.
pub fn run_cell(
    config: &DgpConfig,
    test: &CellTest,
    replications: usize,
    seed: u64,
) -> Result<Vec<(Method, CellResult)>> {
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be positive".into()));
    }
    let reps = run_replications(config, test, replications, seed)?;
    Ok(tally(&reps, test))
}

fn tally(reps: &[Replication], test: &CellTest) -> Vec<(Method, CellResult)> {
    test.methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let kept: Vec<&TestOutcome> = reps.iter().filter_map(|r| r[k].as_ref()).collect();
            let result = CellResult {
                rejections: kept.iter().filter(|o| o.rejects(test.alpha)).count(),
                n_effective: kept.len(),
                n_excluded: reps.len() - kept.len(),
            };
            (m, result)
        })
        .collect()
}

/// Identifies one row of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    #[serde(flatten)]
    pub point: DesignPoint,
    pub method: Method,
    pub model: String,
    pub estimator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(flatten)]
    pub key: CellKey,
    #[serde(flatten)]
    pub result: CellResult,
}

/// Rejection-rate table in grid order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct McTable {
    pub rows: Vec<TableRow>,
}

impl McTable {
    pub fn get(&self, point: &DesignPoint, method: Method) -> Option<&CellResult> {
        self.rows
            .iter()
            .find(|r| r.key.point == *point && r.key.method == method)
            .map(|r| &r.result)
    }

    /// Warnings for suspicious cells: exclusions outside smooth-transition
    /// models, and homoskedastic-null bootstrap rates outside the exact
    /// binomial 99% band around `alpha`.
    pub fn sanity_flags(&self, alpha: f64) -> Vec<String> {
        let mut flags = Vec::new();
        for row in &self.rows {
            let k = &row.key;
            if row.result.n_excluded > 0 && !k.model.starts_with("smooth_transition") {
                flags.push(format!(
                    "{} {} {}: {} replications excluded",
                    k.model,
                    k.point.seed_label(),
                    k.method.label(),
                    row.result.n_excluded
                ));
            }
            if k.method == Method::Bootstrap
                && k.point.is_homoskedastic_null()
                && row.result.n_effective > 0
            {
                let (lo, hi) = binomial_band(row.result.n_effective, alpha, 0.99);
                let rej = row.result.rejections;
                if rej < lo || rej > hi {
                    flags.push(format!(
                        "{} {}: {} rejections of {} outside binomial 99% band [{lo}, {hi}]",
                        k.model,
                        k.point.seed_label(),
                        rej,
                        row.result.n_effective
                    ));
                }
            }
        }
        flags
    }
}

/// Equal-tailed `level` band of Binomial(n, p) counts.
pub fn binomial_band(n: usize, p: f64, level: f64) -> (usize, usize) {
    let dist = Binomial::new(p, n as u64).expect("valid binomial parameters");
    let tail = (1.0 - level) / 2.0;
    let lo = (0..=n).find(|&k| dist.cdf(k as u64) > tail).unwrap_or(0);
    let hi = (0..=n)
        .find(|&k| dist.cdf(k as u64) >= 1.0 - tail)
        .unwrap_or(n);
    (lo, hi)
}

/// Grid execution settings.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    /// JSON-lines file receiving one record per finished cell. Existing
    /// records for the same grid are reused on restart.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointRecord {
    grid: u64,
    cell_seed: u64,
    point: DesignPoint,
    results: Vec<(Method, CellResult)>,
}

fn load_checkpoint(
    path: &PathBuf,
    grid: u64,
) -> Result<HashMap<String, Vec<(Method, CellResult)>>> {
    let mut done = HashMap::new();
    if !path.exists() {
        return Ok(done);
    }
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CheckpointRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: format!("checkpoint record: {e}"),
        })?;
        if rec.grid == grid {
            done.insert(rec.point.seed_label(), rec.results);
        }
    }
    Ok(done)
}

/// Evaluates every cell of `grid`.
pub fn run_grid(grid: &GridSpec, opts: &RunOptions) -> Result<McTable> {
    grid.validate()?;
    match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| run_grid_inner(grid, opts)),
        None => run_grid_inner(grid, opts),
    }
}

fn run_grid_inner(grid: &GridSpec, opts: &RunOptions) -> Result<McTable> {
    let fingerprint = grid.fingerprint();
    let done = match &opts.checkpoint {
        Some(p) => load_checkpoint(p, fingerprint)?,
        None => HashMap::new(),
    };
    let mut sink = match &opts.checkpoint {
        Some(p) => Some(OpenOptions::new().create(true).append(true).open(p)?),
        None => None,
    };
    let model = grid.spec.label();
    let estimator = grid.estimator.label();
    let mut table = McTable::default();
    for point in grid.design_points() {
        let cell_seed = point.cell_seed(grid.master_seed);
        let results = match done.get(&point.seed_label()) {
            Some(r) => {
                log::info!("cell {} restored from checkpoint", point.seed_label());
                r.clone()
            }
            None => {
                let config = point.dgp_config(&grid.spec, &grid.theta)?;
                let r = run_cell(
                    &config,
                    &grid.cell_test(&point),
                    grid.replications,
                    cell_seed,
                )?;
                if let Some(f) = sink.as_mut() {
                    let rec = CheckpointRecord {
                        grid: fingerprint,
                        cell_seed,
                        point,
                        results: r.clone(),
                    };
                    writeln!(f, "{}", serde_json::to_string(&rec)?)?;
                    f.flush()?;
                }
                log::info!("cell {} done", point.seed_label());
                r
            }
        };
        for (method, result) in results {
            let key = CellKey {
                point,
                method,
                model: model.clone(),
                estimator: estimator.clone(),
            };
            table.rows.push(TableRow { key, result });
        }
    }
    for flag in table.sanity_flags(grid.alpha) {
        log::warn!("{flag}");
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
    Text,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "text" | "txt" => Ok(TableFormat::Text),
            _ => Err(Error::InvalidConfig(format!("unknown table format `{s}`"))),
        }
    }
}

const CSV_HEADER: [&str; 13] = [
    "T",
    "tau",
    "sigma1_sq",
    "lambda",
    "rho",
    "rho_mu_sq",
    "method",
    "rate_pct",
    "model",
    "estimator",
    "rejections",
    "n_effective",
    "n_excluded",
];

/// Renders `table`. Column order is fixed: T, τ, σ₁², λ, ρ, ρ_μ², method,
/// rate·100, then bookkeeping columns.
pub fn emit_table(table: &McTable, format: TableFormat) -> Result<String> {
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for row in &table.rows {
                let (k, r) = (&row.key, &row.result);
                w.write_record([
                    k.point.n.to_string(),
                    k.point.tau.to_string(),
                    k.point.sigma1_sq.to_string(),
                    k.point.lambda.to_string(),
                    k.point.rho.to_string(),
                    k.point.rho_mu_sq.to_string(),
                    k.method.label().to_string(),
                    format!("{:.2}", 100.0 * r.rate()),
                    k.model.clone(),
                    k.estimator.clone(),
                    r.rejections.to_string(),
                    r.n_effective.to_string(),
                    r.n_excluded.to_string(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        TableFormat::Json => Ok(serde_json::to_string_pretty(table)?),
        TableFormat::Text => Ok(emit_text(table)),
    }
}

/// Panel layout: one block per (model, estimator, method), rows over
/// (T, τ, σ₁², λ, ρ), columns over ρ_μ².
fn emit_text(table: &McTable) -> String {
    let mut out = String::new();
    let mut panels: Vec<(String, String, Method)> = Vec::new();
    for r in &table.rows {
        let p = (r.key.model.clone(), r.key.estimator.clone(), r.key.method);
        if !panels.contains(&p) {
            panels.push(p);
        }
    }
    if panels.is_empty() {
        out.push_str(&format!(
            "{:>5} {:>5} {:>8} {:>6} {:>5}\n",
            "T", "tau", "sigma1^2", "lambda", "rho"
        ));
        return out;
    }
    for (model, est, method) in panels {
        let rows: Vec<&TableRow> = table
            .rows
            .iter()
            .filter(|r| r.key.model == model && r.key.estimator == est && r.key.method == method)
            .collect();
        let mut cols: Vec<f64> = Vec::new();
        for r in &rows {
            if !cols.contains(&r.key.point.rho_mu_sq) {
                cols.push(r.key.point.rho_mu_sq);
            }
        }
        out.push_str(&format!("{model} / {est} / {}\n", method.label()));
        out.push_str(&format!(
            "{:>5} {:>5} {:>8} {:>6} {:>5}",
            "T", "tau", "sigma1^2", "lambda", "rho"
        ));
        for c in &cols {
            out.push_str(&format!(" {:>8}", format!("rmu={c}")));
        }
        out.push('\n');
        let mut seen: Vec<DesignPoint> = Vec::new();
        for r in &rows {
            let base = DesignPoint {
                rho_mu_sq: 0.0,
                ..r.key.point
            };
            if seen.contains(&base) {
                continue;
            }
            seen.push(base);
            let p = r.key.point;
            let s1 = if p.tau == 0.0 {
                "-".to_string()
            } else {
                format_sigma(p.sigma1_sq)
            };
            out.push_str(&format!(
                "{:>5} {:>5} {:>8} {:>6} {:>5}",
                p.n, p.tau, s1, p.lambda, p.rho
            ));
            for &c in &cols {
                let cell = rows.iter().find(|q| {
                    DesignPoint {
                        rho_mu_sq: 0.0,
                        ..q.key.point
                    } == base
                        && q.key.point.rho_mu_sq == c
                });
                match cell {
                    Some(q) => out.push_str(&format!(" {:>8.1}", 100.0 * q.result.rate())),
                    None => out.push_str(&format!(" {:>8}", "")),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

fn format_sigma(s: f64) -> String {
    if s < 1.0 && s > 0.0 && (1.0 / s).fract() == 0.0 {
        format!("1/{}", 1.0 / s)
    } else {
        s.to_string()
    }
}

/// Reads a table written by [`emit_table`] in CSV format.
pub fn parse_table_csv(text: &str) -> Result<McTable> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected table header".into(),
        });
    }
    let mut table = McTable::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> {
            rec[k].parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("{}: {e}", CSV_HEADER[k]),
            })
        };
        let int = |k: usize| -> Result<usize> {
            rec[k].parse::<usize>().map_err(|e| Error::Parse {
                line,
                message: format!("{}: {e}", CSV_HEADER[k]),
            })
        };
        let point = DesignPoint {
            n: int(0)?,
            tau: num(1)?,
            sigma1_sq: num(2)?,
            lambda: num(3)?,
            rho: num(4)?,
            rho_mu_sq: num(5)?,
        };
        let method = rec[6].parse::<Method>().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let result = CellResult {
            rejections: int(10)?,
            n_effective: int(11)?,
            n_excluded: int(12)?,
        };
        let key = CellKey {
            point,
            method,
            model: rec[8].to_string(),
            estimator: rec[9].to_string(),
        };
        table.rows.push(TableRow { key, result });
    }
    Ok(table)
}
