//! `hetcoint`: Monte Carlo grids, cointegration tests on data files and
//! empirical variance profiles.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hetcoint::app::{
    ekc_pipeline, emit_profile, ingest_csv, variance_profile, EkcConfig, EkcReport, IngestOptions,
    ProfileFormat, DEFAULT_PROFILE_POINTS,
};
use hetcoint::config::{FamilyName, GridFile, LeadsLagsSection, ModelSection, TestFile};
use hetcoint::estimate::{prepare, Estimator, NlsOptions};
use hetcoint::harness::{emit_table, run_grid, RunOptions, TableFormat};
use hetcoint::hypothesis::{BlockChoice, Method};
use hetcoint::variance::{Bandwidth, LrvConfig, LrvKind};

#[derive(Parser, Debug)]
#[command(
    name = "hetcoint",
    version,
    about = "Cointegration tests robust to variance breaks"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo rejection-rate grid.
    Simulate(SimulateArgs),
    /// Test for cointegration between two columns of a CSV file.
    Test(TestArgs),
    /// Write the empirical variance profile of the cointegrating residuals.
    Profile(ProfileArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Grid description (TOML).
    #[arg(long)]
    grid: PathBuf,
    /// Output table; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Master seed, overriding `seed` in the grid file.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per cell, overriding the grid file.
    #[arg(long)]
    replications: Option<usize>,
    /// csv, json or text; inferred from the output extension by default.
    #[arg(long)]
    format: Option<String>,
    /// Append finished cells here and resume from it on restart.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Input CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Column of the dependent series.
    #[arg(long)]
    regressand: String,
    /// Column of the stochastic regressor.
    #[arg(long)]
    regressor: String,
    /// Integer time column; rows are numbered 1..T when absent from the file.
    #[arg(long, default_value = "year")]
    time_column: String,
    /// Column holding unit labels (used with --label).
    #[arg(long, requires = "label")]
    label_column: Option<String>,
    /// Keep only rows whose label column equals this value.
    #[arg(long, requires = "label_column")]
    label: Option<String>,
    /// Take natural logarithms (rows with non-positive values are dropped).
    #[arg(long)]
    log: bool,
    /// Swap the roles of regressand and regressor.
    #[arg(long)]
    swap: bool,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// linear, quadratic, cubic, polynomial or smooth_transition.
    #[arg(long)]
    model: Option<String>,
    /// Degree for --model polynomial.
    #[arg(long)]
    degree: Option<u32>,
    /// Add an intercept and a linear trend (intercept only otherwise).
    #[arg(long)]
    trend: bool,
    /// Bartlett (default) or parametric long-run variance.
    #[arg(long)]
    lrv: Option<String>,
    /// Bartlett bandwidth: auto or an integer lag.
    #[arg(long)]
    bandwidth: Option<String>,
    /// Settings file with [model], [leads_lags], [lrv] and [test] sections.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// bootstrap, subresidual or shin; repeat for several (default: bootstrap and subresidual).
    #[arg(long)]
    method: Vec<String>,
    /// Bootstrap draws.
    #[arg(long = "B")]
    draws: Option<usize>,
    /// Nominal level used for the reject/accept summary.
    #[arg(long)]
    alpha: Option<f64>,
    /// Subresidual block size: auto or an integer.
    #[arg(long)]
    block: Option<String>,
    /// Leads and lags K for the second bootstrap fit.
    #[arg(long)]
    leads_lags: Option<usize>,
    /// Seed of the bootstrap streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Points of the variance profile stored in the report.
    #[arg(long, default_value_t = DEFAULT_PROFILE_POINTS)]
    points: usize,
    /// Worker threads for the bootstrap.
    #[arg(long)]
    jobs: Option<usize>,
    /// Report file (JSON); `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Use the leads-and-lags residuals with this K instead of the plain fit.
    #[arg(long)]
    leads_lags: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_PROFILE_POINTS)]
    points: usize,
    /// csv or json; inferred from the output extension by default.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, default_value = "-")]
    out: String,
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Test(a) => test(a),
        Command::Profile(a) => profile(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn write_output(out: &str, text: &str) -> Result<()> {
    if out == "-" {
        print!("{text}");
    } else {
        fs::write(out, text).with_context(|| format!("writing {out}"))?;
    }
    Ok(())
}

fn extension(out: &str) -> Option<String> {
    Path::new(out)
        .extension()
        .map(|e| e.to_string_lossy().to_lowercase())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let text =
        fs::read_to_string(&a.grid).with_context(|| format!("reading {}", a.grid.display()))?;
    let mut file =
        GridFile::parse(&text).with_context(|| format!("parsing {}", a.grid.display()))?;
    if let Some(s) = a.seed {
        file.seed = s;
    }
    if let Some(r) = a.replications {
        file.replications = r;
    }
    let grid = file.into_grid()?;
    let format: TableFormat = match a.format.or_else(|| extension(&a.out)) {
        Some(f) if f == "txt" || f == "text" => TableFormat::Text,
        Some(f) => f.parse()?,
        None => TableFormat::Csv,
    };
    log::info!(
        "{} cells x {} replications, B = {}",
        grid.design_points().len(),
        grid.replications,
        grid.bootstrap_draws
    );
    let table = run_grid(
        &grid,
        &RunOptions {
            jobs: a.jobs,
            checkpoint: a.checkpoint,
        },
    )?;
    for flag in table.sanity_flags(grid.alpha) {
        log::warn!("{flag}");
    }
    write_output(&a.out, &emit_table(&table, format)?)
}

fn parse_lrv(kind: Option<&str>, bandwidth: Option<&str>, base: LrvConfig) -> Result<LrvConfig> {
    let mut lrv = base;
    if let Some(k) = kind {
        lrv.kind = match k {
            "parametric" => LrvKind::Parametric,
            "bartlett" => LrvKind::Bartlett,
            _ => bail!("unknown --lrv `{k}` (expected parametric or bartlett)"),
        };
    }
    if let Some(b) = bandwidth {
        lrv.bandwidth = match b {
            "auto" => Bandwidth::Auto,
            n => Bandwidth::Fixed(n.parse().with_context(|| format!("--bandwidth `{n}`"))?),
        };
    }
    Ok(lrv)
}

/// Model and long-run variance from the config file, overridden by flags.
fn resolve_model(m: &ModelArgs, file: &TestFile) -> Result<(ModelSection, LrvConfig)> {
    let mut section = file.model.clone().unwrap_or_else(|| {
        let mut s = ModelSection::new(FamilyName::Cubic);
        s.intercept = true;
        s
    });
    if let Some(name) = &m.model {
        section.family = name.parse()?;
    }
    if m.degree.is_some() {
        section.degree = m.degree;
    }
    if m.trend {
        section.trend = true;
    }
    let lrv = parse_lrv(
        m.lrv.as_deref(),
        m.bandwidth.as_deref(),
        file.lrv.unwrap_or_else(LrvConfig::bartlett_auto),
    )?;
    Ok((section, lrv))
}

fn load_test_file(path: &Option<PathBuf>) -> Result<TestFile> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            TestFile::parse(&text).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(TestFile::default()),
    }
}

fn load_data(d: &DataArgs) -> Result<(String, Vec<f64>, Vec<f64>)> {
    let header = fs::read_to_string(&d.data)
        .with_context(|| format!("reading {}", d.data.display()))?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    let has_time = header.split(',').any(|h| h.trim() == d.time_column);
    let opts = IngestOptions {
        year_column: has_time.then(|| d.time_column.clone()),
        label: d.label_column.clone().zip(d.label.clone()),
        value_columns: vec![d.regressand.clone(), d.regressor.clone()],
        log_transform: d.log,
    };
    let frame =
        ingest_csv(&d.data, &opts).with_context(|| format!("reading {}", d.data.display()))?;
    Ok((
        frame.label.clone(),
        frame.column(&d.regressand)?.to_vec(),
        frame.column(&d.regressor)?.to_vec(),
    ))
}

fn ekc_config(section: &ModelSection, lrv: LrvConfig) -> Result<EkcConfig> {
    let spec = section.spec()?;
    Ok(EkcConfig {
        family: spec.family().clone(),
        trend: section.trend,
        lrv,
        ..Default::default()
    })
}

fn test(a: TestArgs) -> Result<()> {
    let file = load_test_file(&a.model.config)?;
    let (section, lrv) = resolve_model(&a.model, &file)?;
    let mut cfg = ekc_config(&section, lrv)?;
    let tsec = file.test.clone().unwrap_or_default();
    cfg.methods = if a.method.is_empty() {
        match &file.test {
            Some(t) => t.method.to_vec(),
            None => vec![Method::Bootstrap, Method::Subresidual],
        }
    } else {
        a.method
            .iter()
            .map(|m| m.parse())
            .collect::<hetcoint::Result<_>>()?
    };
    cfg.draws = a.draws.unwrap_or(if file.test.is_some() {
        tsec.draws
    } else {
        2000
    });
    cfg.alpha = a.alpha.unwrap_or(tsec.alpha);
    cfg.block = match a.block.as_deref() {
        None => tsec.block,
        Some("auto") => BlockChoice::Auto,
        Some(n) => BlockChoice::Fixed(n.parse().with_context(|| format!("--block `{n}`"))?),
    };
    cfg.leads_lags_k = a
        .leads_lags
        .or(file.leads_lags.map(|l| l.k))
        .unwrap_or(LeadsLagsSection::default().k);
    cfg.seed = a.seed.or(file.seed).unwrap_or(0);
    cfg.profile_points = a.points;
    cfg.swap_orientation = a.data.swap;
    cfg.parallel = true;

    let (label, dep, ind) = load_data(&a.data)?;
    let run = || {
        ekc_pipeline(
            &label,
            (&a.data.regressand, &dep),
            (&a.data.regressor, &ind),
            &cfg,
        )
    };
    let report = match a.jobs {
        Some(j) => rayon_pool(j)?.install(run)?,
        None => run()?,
    };
    eprint!("{}", summary(&report, cfg.alpha));
    write_output(&a.out, &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn rayon_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?)
}

fn summary(r: &EkcReport, alpha: f64) -> String {
    let mut s = format!(
        "{}: {} on {} ({}), T = {}\n{:<28} {:>10} {:>8}\n",
        r.label, r.regressand, r.regressor, r.model, r.n_obs, "test", "stat", "p"
    );
    for (name, stat, p) in r.p_value_rows() {
        let mark = if p <= alpha { " *" } else { "" };
        s.push_str(&format!("{name:<28} {stat:>10.4} {p:>8.3}{mark}\n"));
    }
    if let Some(sub) = &r.subresidual {
        s.push_str(&format!(
            "subresidual block size {} ({} blocks)\n",
            sub.meta.block_size.unwrap_or(0),
            sub.meta.blocks.unwrap_or(0)
        ));
    }
    s
}

fn profile(a: ProfileArgs) -> Result<()> {
    let file = load_test_file(&a.model.config)?;
    let (section, _) = resolve_model(&a.model, &file)?;
    let spec = section.spec()?;
    let (_, dep, ind) = load_data(&a.data)?;
    let (dep, ind) = if a.data.swap { (ind, dep) } else { (dep, ind) };
    let estimator = match a.leads_lags {
        Some(k) => Estimator::LeadsLags { k },
        None => Estimator::Nls,
    };
    let fit = prepare(estimator, &spec, &ind, NlsOptions::default())?.fit(&dep)?;
    if !fit.converged {
        log::warn!("least-squares fit did not converge; profile uses the last iterate");
    }
    let format: ProfileFormat = match a.format.or_else(|| extension(&a.out)) {
        Some(f) => f.parse()?,
        None => ProfileFormat::Csv,
    };
    let p = variance_profile(&fit.residuals, a.points)?;
    write_output(&a.out, &emit_profile(&p, format)?)
}
