//! Command-line driver: portfolio generation, cosine-engine and Monte
//! Carlo runs, convergence sweeps and method comparisons, with CSV
//! results and JSON run manifests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ccr_cos::cos::pfe;
use ccr_cos::engine::{
    counterparty_metrics, date_grid, netting_metrics, run_dates, CosSettings, DateEngine,
    Level as EngineLevel, MetricRequest,
};
use ccr_cos::mc::{estimate_metrics, simulate_exposures, McConfig};
use ccr_cos::model::ModelParams;
use ccr_cos::portfolio::{generate, GeneratorSpec, PartitionMode, Portfolio};
use ccr_cos::report::{
    rows_from_csv, rows_to_csv, time_averaged_error_pct, InputDigest, ManifestIdentity,
    ManifestRun, Metric, RiskRow, RunManifest, CSV_SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(name = "ccr-cos", version, about = "Credit exposure metrics for IR/FX portfolios")]
struct Cli {
    /// Worker threads (default: CCR_COS_THREADS env var, then hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Netting,
    Counterparty,
}

impl From<LevelArg> for EngineLevel {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Netting => EngineLevel::Netting,
            LevelArg::Counterparty => EngineLevel::Counterparty,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PartitionArg {
    /// All trades in one netting set.
    Single,
    /// One netting set per contract type.
    ByContractType,
}

impl From<PartitionArg> for PartitionMode {
    fn from(p: PartitionArg) -> Self {
        match p {
            PartitionArg::Single => PartitionMode::SingleNettingSet,
            PartitionArg::ByContractType => PartitionMode::ByContractType,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Terms,
    Quad,
}

/// Inputs shared by the metric commands.
#[derive(Args)]
struct RunInputs {
    #[arg(long)]
    portfolio: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Settings JSON {K, J, J_mom, TOL, L, alpha, filter_p, dates};
    /// individual flags below override file values.
    #[arg(long)]
    settings: Option<PathBuf>,
    #[arg(long)]
    level: Option<LevelArg>,
    #[arg(long)]
    partition: Option<PartitionArg>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Expansion terms K.
    #[arg(long)]
    terms: Option<usize>,
    /// Quadrature points per dimension J.
    #[arg(long)]
    quad: Option<usize>,
    /// Moment-pass quadrature points.
    #[arg(long = "quad-mom")]
    quad_mom: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Support width multiplier.
    #[arg(long = "L")]
    width: Option<f64>,
    /// Spectral filter order (even).
    #[arg(long = "filter-p")]
    filter_p: Option<u32>,
    /// Number of equidistant exposure dates in [0, T_max].
    #[arg(long)]
    dates: Option<usize>,
    /// Reference results CSV; reports the time-averaged |difference| as a
    /// percentage of total notional.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random portfolio.
    GenPortfolio {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "maturity-lo", default_value_t = 1.0)]
        maturity_lo: f64,
        #[arg(long = "maturity-hi", default_value_t = 15.0)]
        maturity_hi: f64,
        #[arg(long = "notional-lo", default_value_t = 100.0)]
        notional_lo: f64,
        #[arg(long = "notional-hi", default_value_t = 3000.0)]
        notional_hi: f64,
        #[arg(long = "rate-jitter", default_value_t = 0.01)]
        rate_jitter: f64,
        #[arg(long)]
        partition: Option<PartitionArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Potential future exposure over the date grid.
    Pfe(RunInputs),
    /// Expected exposure over the date grid.
    Ee(RunInputs),
    /// EE shock-and-revalue sensitivities over the date grid.
    Sens(RunInputs),
    /// Monte Carlo baseline over the date grid.
    Mc {
        #[command(flatten)]
        inputs: RunInputs,
        #[arg(long, value_parser = parse_count, default_value = "500000")]
        nsim: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_parser = parse_count, default_value = "65536")]
        batch: usize,
    },
    /// Error-vs-settings sweep against a high-setting reference.
    Converge {
        #[command(flatten)]
        inputs: RunInputs,
        #[arg(long)]
        sweep: SweepArg,
        /// Comma-separated sweep values, e.g. 8,16,24,32.
        #[arg(long)]
        values: String,
        #[arg(long = "ref-terms", default_value_t = 150)]
        ref_terms: usize,
        #[arg(long = "ref-quad", default_value_t = 130)]
        ref_quad: usize,
        /// Exposure date; defaults to T_max / 2.
        #[arg(long)]
        t: Option<f64>,
    },
    /// COS vs MC accuracy/time table against the COS reference.
    Compare {
        #[command(flatten)]
        inputs: RunInputs,
        /// Comma-separated MC path counts, e.g. 500000,1000000.
        #[arg(long = "nsim-list", default_value = "500000")]
        nsim_list: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "ref-terms", default_value_t = 150)]
        ref_terms: usize,
        #[arg(long = "ref-quad", default_value_t = 130)]
        ref_quad: usize,
    },
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0 && v.fract() == 0.0)
        .map(|v| v as usize)
        .ok_or_else(|| format!("not a count: {s}"))
}

fn parse_count_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| parse_count(p.trim()).map_err(|e| anyhow::anyhow!(e)))
        .collect()
}

fn init_threads(requested: Option<usize>) -> usize {
    let n = requested
        .or_else(|| {
            std::env::var("CCR_COS_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    n
}

fn load_settings(inputs: &RunInputs) -> Result<CosSettings> {
    let mut s = match &inputs.settings {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading settings {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| {
                format!("parsing settings {}", path.display())
            })?
        }
        None => CosSettings::default(),
    };
    if let Some(v) = inputs.terms {
        s.terms = v;
    }
    if let Some(v) = inputs.quad {
        s.quad_points = v;
    }
    if let Some(v) = inputs.quad_mom {
        s.quad_points_moments = v;
    }
    if let Some(v) = inputs.tol {
        s.tail_tol = v;
    }
    if let Some(v) = inputs.width {
        s.width_mult = v;
    }
    if let Some(v) = inputs.alpha {
        s.alpha = v;
    }
    if let Some(v) = inputs.filter_p {
        s.filter_order = v;
    }
    if let Some(v) = inputs.dates {
        s.dates = v;
    }
    if s.dates < 2 {
        bail!("the date grid needs at least 2 points, got {}", s.dates);
    }
    Ok(s)
}

fn load_inputs(inputs: &RunInputs) -> Result<(Portfolio, ModelParams)> {
    let params = ModelParams::from_file(&inputs.model)?;
    let mut portfolio = Portfolio::from_file(&inputs.portfolio)?;
    if let Some(p) = inputs.partition {
        portfolio = portfolio.partition_counterparty(p.into());
    }
    Ok((portfolio, params))
}

struct OutputBundle {
    command: String,
    argv: Vec<String>,
    settings: serde_json::Value,
    inputs: Vec<InputDigest>,
    compute_seconds: f64,
    threads: usize,
    started: Instant,
}

impl OutputBundle {
    fn new(command: &str, settings: serde_json::Value, threads: usize) -> Self {
        OutputBundle {
            command: command.to_string(),
            argv: std::env::args().collect(),
            settings,
            inputs: Vec::new(),
            compute_seconds: 0.0,
            threads,
            started: Instant::now(),
        }
    }

    fn digest(&mut self, role: &str, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest::from_file(role, path)?);
        Ok(())
    }

    fn write(&self, out: &Path, body: &str) -> Result<()> {
        std::fs::write(out, body)
            .with_context(|| format!("writing {}", out.display()))?;
        let manifest = RunManifest {
            identity: ManifestIdentity {
                command: self.command.clone(),
                argv: self.argv.clone(),
                settings: self.settings.clone(),
                inputs: self.inputs.clone(),
                csv_schema_version: CSV_SCHEMA_VERSION,
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            run: ManifestRun {
                wall_seconds: self.started.elapsed().as_secs_f64(),
                cpu_compute_seconds: self.compute_seconds,
                threads: self.threads,
            },
        };
        let manifest_path = out.with_extension(match out.extension() {
            Some(e) => format!("{}.manifest.json", e.to_string_lossy()),
            None => "manifest.json".to_string(),
        });
        std::fs::write(&manifest_path, manifest.to_json())
            .with_context(|| format!("writing {}", manifest_path.display()))?;
        Ok(())
    }
}

fn report_reference_error(
    rows: &[RiskRow],
    reference: &Path,
    metric: Metric,
    total_notional: f64,
) -> Result<f64> {
    let text = std::fs::read_to_string(reference)
        .with_context(|| format!("reading reference {}", reference.display()))?;
    let ref_rows = rows_from_csv(&text, &reference.display().to_string())?;
    let err = time_averaged_error_pct(rows, &ref_rows, metric, total_notional)?;
    println!("time-averaged error vs reference: {err:.6e} % of total notional");
    Ok(err)
}

fn metric_command(name: &str, inputs: &RunInputs, req: MetricRequest, threads: usize) -> Result<()> {
    let settings = load_settings(inputs)?;
    let mut bundle = OutputBundle::new(name, serde_json::to_value(settings)?, threads);
    bundle.digest("model", &inputs.model)?;
    bundle.digest("portfolio", &inputs.portfolio)?;
    let (portfolio, params) = load_inputs(inputs)?;
    let level: EngineLevel = inputs.level.map(Into::into).unwrap_or(EngineLevel::Netting);
    let dates = date_grid(portfolio.t_max(), settings.dates);
    let compute = Instant::now();
    let report = run_dates(&portfolio, &params, &settings, level, &dates, req)?;
    bundle.compute_seconds = compute.elapsed().as_secs_f64();
    if report.max_cdf_excursion > 1e-6 {
        eprintln!(
            "warning: recovered CDF clamped by up to {:.3e}; consider more terms or quadrature points",
            report.max_cdf_excursion
        );
    }
    if let Some(reference) = &inputs.reference {
        let metric = if req.pfe { Metric::Pfe } else { Metric::Ee };
        report_reference_error(&report.rows, reference, metric, portfolio.total_notional())?;
    }
    bundle.write(&inputs.out, &rows_to_csv(&report.rows))?;
    println!(
        "{name}: {} rows over {} dates -> {}",
        report.rows.len(),
        dates.len(),
        inputs.out.display()
    );
    Ok(())
}

fn mc_command(
    inputs: &RunInputs,
    nsim: usize,
    seed: u64,
    batch: usize,
    threads: usize,
) -> Result<()> {
    let settings = load_settings(inputs)?;
    let cfg = McConfig {
        n_sim: nsim,
        seed,
        batch_size: batch,
    };
    let mut bundle = OutputBundle::new(
        "mc",
        serde_json::json!({
            "n_sim": nsim, "seed": seed, "batch": batch,
            "alpha": settings.alpha, "dates": settings.dates,
        }),
        threads,
    );
    bundle.digest("model", &inputs.model)?;
    bundle.digest("portfolio", &inputs.portfolio)?;
    let (portfolio, params) = load_inputs(inputs)?;
    let level: EngineLevel = inputs.level.map(Into::into).unwrap_or(EngineLevel::Netting);
    let dates = date_grid(portfolio.t_max(), settings.dates);
    let compute = Instant::now();
    let mut rows = Vec::new();
    for &t in &dates {
        let started = Instant::now();
        let paths = simulate_exposures(&portfolio, &params, t, &cfg)?;
        match level {
            EngineLevel::Netting => {
                let per_set_cpu = started.elapsed().as_secs_f64() / paths.set_ids.len() as f64;
                for (set_id, set_paths) in paths.set_ids.iter().zip(&paths.per_set) {
                    let m = estimate_metrics(set_paths, settings.alpha)?;
                    rows.push(RiskRow {
                        t,
                        level: format!("netting:{set_id}"),
                        pfe: Some(m.pfe),
                        ee: Some(m.ee),
                        sens: None,
                        cpu_seconds: per_set_cpu + m.cpu_seconds,
                        method: "MC".into(),
                    });
                }
            }
            EngineLevel::Counterparty => {
                let m = estimate_metrics(&paths.counterparty, settings.alpha)?;
                rows.push(RiskRow {
                    t,
                    level: "counterparty".into(),
                    pfe: Some(m.pfe),
                    ee: Some(m.ee),
                    sens: None,
                    cpu_seconds: started.elapsed().as_secs_f64(),
                    method: "MC".into(),
                });
            }
        }
    }
    bundle.compute_seconds = compute.elapsed().as_secs_f64();
    if let Some(reference) = &inputs.reference {
        report_reference_error(&rows, reference, Metric::Pfe, portfolio.total_notional())?;
    }
    bundle.write(&inputs.out, &rows_to_csv(&rows))?;
    println!("mc: {} rows -> {}", rows.len(), inputs.out.display());
    Ok(())
}

fn lsq_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    num / den
}

#[allow(clippy::too_many_arguments)]
fn converge_command(
    inputs: &RunInputs,
    sweep: SweepArg,
    values: &str,
    ref_terms: usize,
    ref_quad: usize,
    t_opt: Option<f64>,
    threads: usize,
) -> Result<()> {
    let base = load_settings(inputs)?;
    let values = parse_count_list(values)?;
    if values.is_empty() {
        bail!("empty sweep value list");
    }
    let mut bundle = OutputBundle::new(
        "converge",
        serde_json::json!({
            "base": serde_json::to_value(base)?,
            "sweep": match sweep { SweepArg::Terms => "terms", SweepArg::Quad => "quad" },
            "values": values,
            "ref_terms": ref_terms, "ref_quad": ref_quad,
        }),
        threads,
    );
    bundle.digest("model", &inputs.model)?;
    bundle.digest("portfolio", &inputs.portfolio)?;
    let (portfolio, params) = load_inputs(inputs)?;
    let level: EngineLevel = inputs.level.map(Into::into).unwrap_or(EngineLevel::Netting);
    let t = t_opt.unwrap_or(portfolio.t_max() / 2.0);
    let compute = Instant::now();
    let ref_settings = CosSettings {
        terms: ref_terms,
        quad_points: ref_quad,
        ..base
    };
    let ref_engine = DateEngine::new(&portfolio, &params, t, &ref_settings)?;
    let ref_pfe = level_pfe(&ref_engine, level, base.alpha)?;
    let mut out = String::from("sweep,value,pfe,ref_pfe,rel_error\n");
    let mut fit_points = Vec::new();
    let sweep_name = match sweep {
        SweepArg::Terms => "terms",
        SweepArg::Quad => "quad",
    };
    for &v in &values {
        let pfe_v = match sweep {
            SweepArg::Terms => {
                // coefficients are independent of K: truncate the
                // reference expansion built at fixed quadrature settings
                let outcome = match level {
                    EngineLevel::Netting => ref_engine.netting_outcome(0)?,
                    EngineLevel::Counterparty => ref_engine.counterparty_outcome()?,
                };
                match outcome.expansion() {
                    Some(e) => pfe(&e.truncated(v), base.alpha)?.value,
                    None => bail!("degenerate exposure date t={t}; no expansion to sweep"),
                }
            }
            SweepArg::Quad => {
                let s = CosSettings {
                    terms: ref_terms,
                    quad_points: v,
                    ..base
                };
                let engine = DateEngine::new(&portfolio, &params, t, &s)?;
                level_pfe(&engine, level, base.alpha)?
            }
        };
        let rel = (pfe_v - ref_pfe).abs() / ref_pfe.abs().max(f64::MIN_POSITIVE);
        out.push_str(&format!("{sweep_name},{v},{pfe_v:.17e},{ref_pfe:.17e},{rel:.17e}\n"));
        if rel > 0.0 {
            let x = match (sweep, level) {
                // counterparty term sweeps decay algebraically: fit in
                // log-log; everything else is exponential: semilog
                (SweepArg::Terms, EngineLevel::Counterparty) => (v as f64).ln(),
                _ => v as f64,
            };
            fit_points.push((x, rel.ln()));
        }
    }
    bundle.compute_seconds = compute.elapsed().as_secs_f64();
    let slope = if fit_points.len() >= 2 {
        lsq_slope(&fit_points)
    } else {
        f64::NAN
    };
    println!("fitted error slope ({sweep_name}, level={}): {slope:.4}", level_name(level));
    bundle.settings["fitted_slope"] = serde_json::json!(slope);
    bundle.write(&inputs.out, &out)?;
    println!("converge: {} sweep points -> {}", values.len(), inputs.out.display());
    Ok(())
}

fn level_name(level: EngineLevel) -> &'static str {
    match level {
        EngineLevel::Netting => "netting",
        EngineLevel::Counterparty => "counterparty",
    }
}

fn level_pfe(engine: &DateEngine, level: EngineLevel, alpha: f64) -> Result<f64> {
    Ok(match level {
        EngineLevel::Netting => {
            let m = netting_metrics(engine, alpha)?;
            if m.len() != 1 {
                bail!(
                    "netting-level convergence sweeps need a single netting set, found {}",
                    m.len()
                );
            }
            m[0].pfe
        }
        EngineLevel::Counterparty => counterparty_metrics(engine, alpha)?.pfe,
    })
}

#[allow(clippy::too_many_arguments)]
fn compare_command(
    inputs: &RunInputs,
    nsim_list: &str,
    seed: u64,
    ref_terms: usize,
    ref_quad: usize,
    threads: usize,
) -> Result<()> {
    let settings = load_settings(inputs)?;
    let nsims = parse_count_list(nsim_list)?;
    let mut bundle = OutputBundle::new(
        "compare",
        serde_json::json!({
            "cos": serde_json::to_value(settings)?,
            "nsim_list": nsims, "seed": seed,
            "ref_terms": ref_terms, "ref_quad": ref_quad,
        }),
        threads,
    );
    bundle.digest("model", &inputs.model)?;
    bundle.digest("portfolio", &inputs.portfolio)?;
    let (portfolio, params) = load_inputs(inputs)?;
    let level: EngineLevel = inputs.level.map(Into::into).unwrap_or(EngineLevel::Netting);
    let dates = date_grid(portfolio.t_max(), settings.dates);
    let notional = portfolio.total_notional();
    let compute = Instant::now();

    let ref_settings = CosSettings {
        terms: ref_terms,
        quad_points: ref_quad,
        ..settings
    };
    let req = MetricRequest {
        pfe: true,
        ee: false,
        sens: false,
    };
    let ref_rows = run_dates(&portfolio, &params, &ref_settings, level, &dates, req)?.rows;

    let mut table = String::from("method,cpu_seconds,time_avg_error_pct\n");
    let started = Instant::now();
    let cos_rows = run_dates(&portfolio, &params, &settings, level, &dates, req)?.rows;
    let cos_time = started.elapsed().as_secs_f64();
    let cos_err = time_averaged_error_pct(&cos_rows, &ref_rows, Metric::Pfe, notional)?;
    for &n in &nsims {
        let started = Instant::now();
        let cfg = McConfig {
            n_sim: n,
            seed,
            batch_size: 65_536,
        };
        let mut mc_rows = Vec::new();
        for &t in &dates {
            let paths = simulate_exposures(&portfolio, &params, t, &cfg)?;
            match level {
                EngineLevel::Netting => {
                    for (set_id, set_paths) in paths.set_ids.iter().zip(&paths.per_set) {
                        let m = estimate_metrics(set_paths, settings.alpha)?;
                        mc_rows.push(RiskRow {
                            t,
                            level: format!("netting:{set_id}"),
                            pfe: Some(m.pfe),
                            ee: Some(m.ee),
                            sens: None,
                            cpu_seconds: 0.0,
                            method: "MC".into(),
                        });
                    }
                }
                EngineLevel::Counterparty => {
                    let m = estimate_metrics(&paths.counterparty, settings.alpha)?;
                    mc_rows.push(RiskRow {
                        t,
                        level: "counterparty".into(),
                        pfe: Some(m.pfe),
                        ee: Some(m.ee),
                        sens: None,
                        cpu_seconds: 0.0,
                        method: "MC".into(),
                    });
                }
            }
        }
        let mc_time = started.elapsed().as_secs_f64();
        let mc_err = time_averaged_error_pct(&mc_rows, &ref_rows, Metric::Pfe, notional)?;
        table.push_str(&format!("MC({n}),{mc_time:.3},{mc_err:.6e}\n"));
        println!("MC({n}): {mc_time:.3}s, error {mc_err:.3e}%");
    }
    table.push_str(&format!("COS,{cos_time:.3},{cos_err:.6e}\n"));
    println!("COS: {cos_time:.3}s, error {cos_err:.3e}%");
    bundle.compute_seconds = compute.elapsed().as_secs_f64();
    bundle.write(&inputs.out, &table)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gen_portfolio_command(
    model: &Path,
    n: usize,
    seed: u64,
    maturity: (f64, f64),
    notional: (f64, f64),
    rate_jitter: f64,
    partition: Option<PartitionArg>,
    out: &Path,
    threads: usize,
) -> Result<()> {
    let spec = GeneratorSpec {
        n_trades: n,
        seed,
        maturity_range: maturity,
        notional_range: notional,
        rate_jitter,
        ..Default::default()
    };
    let mut bundle = OutputBundle::new("gen-portfolio", serde_json::to_value(&spec)?, threads);
    bundle.digest("model", model)?;
    let params = ModelParams::from_file(model)?;
    let compute = Instant::now();
    let mut portfolio = generate(&spec, &params)?;
    if let Some(p) = partition {
        portfolio = portfolio.partition_counterparty(p.into());
    }
    bundle.compute_seconds = compute.elapsed().as_secs_f64();
    bundle.write(out, &portfolio.to_json())?;
    println!(
        "gen-portfolio: {} trades, total notional {:.2} -> {}",
        portfolio.trades.len(),
        portfolio.total_notional(),
        out.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let threads = init_threads(cli.threads);
    match &cli.command {
        Command::GenPortfolio {
            model,
            n,
            seed,
            maturity_lo,
            maturity_hi,
            notional_lo,
            notional_hi,
            rate_jitter,
            partition,
            out,
        } => gen_portfolio_command(
            model,
            *n,
            *seed,
            (*maturity_lo, *maturity_hi),
            (*notional_lo, *notional_hi),
            *rate_jitter,
            *partition,
            out,
            threads,
        ),
        Command::Pfe(inputs) => metric_command(
            "pfe",
            inputs,
            MetricRequest {
                pfe: true,
                ee: false,
                sens: false,
            },
            threads,
        ),
        Command::Ee(inputs) => metric_command(
            "ee",
            inputs,
            MetricRequest {
                pfe: false,
                ee: true,
                sens: false,
            },
            threads,
        ),
        Command::Sens(inputs) => metric_command(
            "sens",
            inputs,
            MetricRequest {
                pfe: false,
                ee: true,
                sens: true,
            },
            threads,
        ),
        Command::Mc {
            inputs,
            nsim,
            seed,
            batch,
        } => mc_command(inputs, *nsim, *seed, *batch, threads),
        Command::Converge {
            inputs,
            sweep,
            values,
            ref_terms,
            ref_quad,
            t,
        } => converge_command(inputs, *sweep, values, *ref_terms, *ref_quad, *t, threads),
        Command::Compare {
            inputs,
            nsim_list,
            seed,
            ref_terms,
            ref_quad,
        } => compare_command(inputs, nsim_list, *seed, *ref_terms, *ref_quad, threads),
    }
}
