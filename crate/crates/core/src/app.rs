//! Empirical application: CSV ingestion, empirical variance profiles and the
//! environmental Kuznets curve (EKC) pipeline
//! e_t = c + δt + θ₁y_t + θ₂y_t² + θ₃y_t³ + u_t.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{prepare, Estimator, NlsOptions};
use crate::hypothesis::{
    bonferroni_subresidual_test, fixed_regressor_bootstrap_prepared, shin_critical_value_test,
    stationarity_bootstrap_test, BlockChoice, BootstrapConfig, Method, TestOutcome,
};
use crate::model::{Deterministics, Family, ModelSpec};
use crate::rng::derive_seed;
use crate::scalar::sum_sq;
use crate::variance::LrvConfig;

/// Aligned time series for one unit (country).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataFrameSlice {
    pub label: String,
    pub years: Vec<i64>,
    /// (column name, values), all of length `years.len()`.
    pub columns: Vec<(String, Vec<f64>)>,
}

impl DataFrameSlice {
    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// CSV with a `year` column followed by the value columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["year".to_string()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, year) in self.years.iter().enumerate() {
            let mut rec = vec![year.to_string()];
            rec.extend(self.columns.iter().map(|(_, v)| v[i].to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// What to read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    /// Integer time column; `None` numbers the rows 1, 2, ….
    pub year_column: Option<String>,
    /// Column holding the unit label, with the value to keep.
    pub label: Option<(String, String)>,
    pub value_columns: Vec<String>,
    pub log_transform: bool,
}

impl IngestOptions {
    pub fn new<S: Into<String>>(value_columns: impl IntoIterator<Item = S>) -> Self {
        IngestOptions {
            year_column: Some("year".into()),
            label: None,
            value_columns: value_columns.into_iter().map(Into::into).collect(),
            log_transform: false,
        }
    }
}

fn is_missing(field: &str) -> bool {
    matches!(field.trim(), "" | "NA" | "NaN" | "nan" | "." | "null")
}

/// Reads `value_columns` from a CSV file. Rows with missing values, or with
/// non-positive values when `log_transform` is set, are dropped with a warning.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> Result<DataFrameSlice> {
    let text = std::fs::read_to_string(path)?;
    let default_label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    ingest_str(&text, &default_label, opts)
}

/// [`ingest_csv`] on in-memory text.
pub fn ingest_str(text: &str, default_label: &str, opts: &IngestOptions) -> Result<DataFrameSlice> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let year_idx = opts.year_column.as_deref().map(find).transpose()?;
    let label_idx = opts.label.as_ref().map(|(c, _)| find(c)).transpose()?;
    let value_idx = opts
        .value_columns
        .iter()
        .map(|c| find(c))
        .collect::<Result<Vec<_>>>()?;

    let mut years = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); value_idx.len()];
    let mut row_number = 0i64;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if let (Some(k), Some((_, want))) = (label_idx, &opts.label) {
            if &rec[k] != want {
                continue;
            }
        }
        row_number += 1;
        let year = match year_idx {
            Some(k) => rec[k].parse::<i64>().map_err(|e| Error::Parse {
                line,
                message: format!("year `{}`: {e}", &rec[k]),
            })?,
            None => row_number,
        };
        let mut row = Vec::with_capacity(value_idx.len());
        let mut drop = None;
        for (&k, name) in value_idx.iter().zip(&opts.value_columns) {
            let field = &rec[k];
            if is_missing(field) {
                drop = Some(format!("missing {name}"));
                break;
            }
            let v: f64 = field.parse().map_err(|e| Error::Parse {
                line,
                message: format!("{name} `{field}`: {e}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("{name} is not finite"),
                });
            }
            if opts.log_transform {
                if v <= 0.0 {
                    drop = Some(format!("non-positive {name} under log transform"));
                    break;
                }
                row.push(v.ln());
            } else {
                row.push(v);
            }
        }
        if let Some(reason) = drop {
            log::warn!("line {line}: dropped row ({reason})");
            continue;
        }
        if let Some(&last) = years.last() {
            if year <= last {
                return Err(Error::Parse {
                    line,
                    message: format!("year {year} does not increase"),
                });
            }
        }
        years.push(year);
        for (col, v) in values.iter_mut().zip(row) {
            col.push(v);
        }
    }
    let label = opts
        .label
        .as_ref()
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| default_label.to_string());
    Ok(DataFrameSlice {
        label,
        years,
        columns: opts.value_columns.iter().cloned().zip(values).collect(),
    })
}

/// Empirical variance profile ρ̂(s) on an even grid over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub s: Vec<f64>,
    pub rho_hat: Vec<f64>,
}

pub const DEFAULT_PROFILE_POINTS: usize = 512;

/// ρ̂(s) = [Σ_{t≤⌊sT⌋} û_t² + (sT − ⌊sT⌋) û²_{⌊sT⌋+1}] / Σ_t û_t², on
/// `grid_points` evenly spaced values including both endpoints.
pub fn variance_profile(residuals: &[f64], grid_points: usize) -> Result<VarianceProfile> {
    let n = residuals.len();
    let total = sum_sq(residuals);
    if n == 0 || total == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for &u in residuals {
        cum.push(cum.last().copied().unwrap_or(0.0) + u * u);
    }
    let s: Vec<f64> = match grid_points {
        0 => Vec::new(),
        1 => vec![1.0],
        g => (0..g).map(|k| k as f64 / (g - 1) as f64).collect(),
    };
    let rho_hat = s
        .iter()
        .map(|&s| {
            if s <= 0.0 {
                return 0.0;
            }
            if s >= 1.0 {
                return 1.0;
            }
            let st = s * n as f64;
            let m = (st.floor() as usize).min(n);
            let partial = if m < n {
                (st - m as f64) * residuals[m] * residuals[m]
            } else {
                0.0
            };
            ((cum[m] + partial) / total).clamp(0.0, 1.0)
        })
        .collect();
    Ok(VarianceProfile { s, rho_hat })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ProfileFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ProfileFormat::Csv),
            "json" => Ok(ProfileFormat::Json),
            _ => Err(Error::InvalidConfig(format!(
                "unknown profile format `{s}`"
            ))),
        }
    }
}

/// Columns `s`, `rho_hat` and the homoskedastic reference `reference` (= s).
pub fn emit_profile(profile: &VarianceProfile, format: ProfileFormat) -> Result<String> {
    match format {
        ProfileFormat::Json => Ok(serde_json::to_string_pretty(profile)?),
        ProfileFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["s", "rho_hat", "reference"])?;
            for (s, r) in profile.s.iter().zip(&profile.rho_hat) {
                w.write_record([s.to_string(), r.to_string(), s.to_string()])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

pub fn parse_profile_csv(text: &str) -> Result<VarianceProfile> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut p = VarianceProfile {
        s: Vec::new(),
        rho_hat: Vec::new(),
    };
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| {
            rec.get(k)
                .ok_or_else(|| Error::Parse {
                    line: i + 2,
                    message: "short row".into(),
                })?
                .parse::<f64>()
                .map_err(|e| Error::Parse {
                    line: i + 2,
                    message: e.to_string(),
                })
        };
        p.s.push(num(0)?);
        p.rho_hat.push(num(1)?);
    }
    Ok(p)
}

/// Settings of the EKC pipeline.
#[derive(Debug, Clone)]
pub struct EkcConfig {
    pub family: Family,
    /// Include c + δt (an intercept alone when false). Ignored for the
    /// smooth-transition family, which carries its own level parameter.
    pub trend: bool,
    /// Cointegration tests to run; `Bootstrap` covers both NLS and leads-lags residuals.
    pub methods: Vec<Method>,
    pub draws: usize,
    pub alpha: f64,
    pub leads_lags_k: usize,
    pub lrv: LrvConfig,
    pub block: BlockChoice,
    pub profile_points: usize,
    /// Regress the second series on the first instead.
    pub swap_orientation: bool,
    /// Spread bootstrap draws over the rayon pool (results are unchanged).
    pub parallel: bool,
    pub seed: u64,
}

impl Default for EkcConfig {
    fn default() -> Self {
        EkcConfig {
            family: Family::Polynomial(3),
            trend: true,
            methods: vec![Method::Bootstrap, Method::Subresidual],
            draws: 2000,
            alpha: 0.05,
            leads_lags_k: 1,
            lrv: LrvConfig::bartlett_auto(),
            block: BlockChoice::Auto,
            profile_points: DEFAULT_PROFILE_POINTS,
            swap_orientation: false,
            parallel: false,
            seed: 0,
        }
    }
}

impl EkcConfig {
    pub fn spec(&self) -> Result<ModelSpec> {
        let det = match (&self.family, self.trend) {
            (Family::SmoothTransition, false) => Deterministics::NONE,
            (Family::SmoothTransition, true) => {
                return Err(Error::InvalidModel(
                    "the smooth-transition family cannot take a trend".into(),
                ))
            }
            (_, true) => Deterministics::TREND,
            (_, false) => Deterministics::INTERCEPT,
        };
        ModelSpec::new(self.family.clone(), det)
    }
}

/// Estimates and test from one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub estimator: String,
    /// Deterministic coefficients first, then θ.
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub n_obs: usize,
    pub bootstrap: Option<TestOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkcReport {
    pub label: String,
    pub model: String,
    pub regressand: String,
    pub regressor: String,
    pub orientation_swapped: bool,
    pub n_obs: usize,
    pub seed: u64,
    pub nls: FitReport,
    pub leads_lags: Option<FitReport>,
    pub subresidual: Option<TestOutcome>,
    pub shin: Option<TestOutcome>,
    /// Stationarity tests on the regressand and regressor series.
    pub stationarity_regressand: TestOutcome,
    pub stationarity_regressor: TestOutcome,
    pub profile: VarianceProfile,
}

impl EkcReport {
    /// Compact rows (test, statistic, p-value) in the order of the report.
    pub fn p_value_rows(&self) -> Vec<(String, f64, f64)> {
        let mut rows = Vec::new();
        let mut push = |name: &str, o: &Option<TestOutcome>| {
            if let Some(o) = o {
                rows.push((name.to_string(), o.statistic, o.p_value));
            }
        };
        push("bootstrap_nls", &self.nls.bootstrap);
        push(
            "bootstrap_ll",
            &self.leads_lags.as_ref().and_then(|l| l.bootstrap.clone()),
        );
        push("subresidual", &self.subresidual);
        push("shin", &self.shin);
        push(
            &format!("stationarity_{}", self.regressand),
            &Some(self.stationarity_regressand.clone()),
        );
        push(
            &format!("stationarity_{}", self.regressor),
            &Some(self.stationarity_regressor.clone()),
        );
        rows
    }
}

/// Runs the EKC pipeline with `regressand` regressed on `regressor`
/// (reversed when `cfg.swap_orientation` is set).
pub fn ekc_pipeline(
    label: &str,
    (regressand_name, regressand): (&str, &[f64]),
    (regressor_name, regressor): (&str, &[f64]),
    cfg: &EkcConfig,
) -> Result<EkcReport> {
    if regressand.len() != regressor.len() {
        return Err(Error::DimensionMismatch {
            expected: regressand.len(),
            got: regressor.len(),
        });
    }
    let ((dep_name, dep), (ind_name, ind)) = if cfg.swap_orientation {
        ((regressor_name, regressor), (regressand_name, regressand))
    } else {
        ((regressand_name, regressand), (regressor_name, regressor))
    };
    let spec = cfg.spec()?;
    let boot = BootstrapConfig {
        draws: cfg.draws,
        lrv: cfg.lrv,
        parallel: cfg.parallel,
        ..Default::default()
    };
    let det = spec.deterministics();
    let series_det = if det.count() == 0 {
        Deterministics::INTERCEPT
    } else {
        det
    };

    let reg = prepare(Estimator::Nls, &spec, ind, NlsOptions::default())?;
    let fit = reg.fit(dep)?;
    let tol = f64::EPSILON * dep.len() as f64;
    if sum_sq(&fit.residuals) <= tol * tol * sum_sq(dep) {
        return Err(Error::DegenerateVariance);
    }
    let run_boot = cfg.methods.contains(&Method::Bootstrap);
    let nls_boot = if run_boot {
        Some(fixed_regressor_bootstrap_prepared(
            &reg,
            &fit,
            &boot,
            derive_seed(cfg.seed, &[0]),
        )?)
    } else {
        None
    };
    let nls = FitReport {
        estimator: Estimator::Nls.label(),
        coefficients: fit.coefficients(),
        converged: fit.converged,
        n_obs: fit.residuals.len(),
        bootstrap: nls_boot,
    };

    let leads_lags = if run_boot {
        let est = Estimator::LeadsLags {
            k: cfg.leads_lags_k,
        };
        let ll = prepare(est, &spec, ind, NlsOptions::default())?;
        let f = ll.fit(dep)?;
        let b = fixed_regressor_bootstrap_prepared(&ll, &f, &boot, derive_seed(cfg.seed, &[1]))?;
        Some(FitReport {
            estimator: est.label(),
            coefficients: f.coefficients(),
            converged: f.converged,
            n_obs: f.residuals.len(),
            bootstrap: Some(b),
        })
    } else {
        None
    };

    let subresidual = if cfg.methods.contains(&Method::Subresidual) {
        Some(bonferroni_subresidual_test(
            &fit.residuals,
            cfg.alpha,
            cfg.block,
            &cfg.lrv,
        )?)
    } else {
        None
    };
    let shin = if cfg.methods.contains(&Method::ShinCriticalValue) {
        Some(shin_critical_value_test(&spec, &fit.residuals, &cfg.lrv)?)
    } else {
        None
    };

    Ok(EkcReport {
        label: label.to_string(),
        model: spec.label(),
        regressand: dep_name.to_string(),
        regressor: ind_name.to_string(),
        orientation_swapped: cfg.swap_orientation,
        n_obs: dep.len(),
        seed: cfg.seed,
        nls,
        leads_lags,
        subresidual,
        shin,
        stationarity_regressand: stationarity_bootstrap_test(
            dep,
            series_det,
            &boot,
            derive_seed(cfg.seed, &[2]),
        )?,
        stationarity_regressor: stationarity_bootstrap_test(
            ind,
            series_det,
            &boot,
            derive_seed(cfg.seed, &[3]),
        )?,
        profile: variance_profile(&fit.residuals, cfg.profile_points)?,
    })
}
