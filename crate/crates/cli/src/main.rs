//! `tradecast` command-line front end.
//!
//! Exit status: 0 on success, 1 for invalid arguments, configuration or
//! input, 2 when a computation fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tradecast_core::arima::{best_of, fit_candidates, forecast, FittedModel};
use tradecast_core::identify::{identify, merge_candidates, OrderCandidate, OrderSource};
use tradecast_core::ingest::{build_panel, export_panel, read_trade_csv, validate_panel, CsvSchema};
use tradecast_core::nrca::{screen_revealed, NrcaSeries, DISPLAY_SCALE};
use tradecast_core::outliers::detect;
use tradecast_core::pipeline::{
    load_series, nrca_table, read_orders_file, run_pipeline, PipelineConfig, Table, TableFormat,
};
use tradecast_core::series::{difference, Series};
use tradecast_core::sim::{cumulate, simulate_arma};
use tradecast_core::stationarity::difference_until_stationary;

#[derive(Parser, Debug)]
#[command(
    name = "tradecast",
    version,
    about = "NRCA trade-competitiveness index and Box-Jenkins forecasts"
)]
struct Cli {
    /// TOML configuration file. TRADECAST_<KEY> environment variables
    /// override individual keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for simulated input (see `--sim-n`).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Txt,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => TableFormat::Csv,
            Format::Txt => TableFormat::Txt,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read a trade CSV, build the panel, check its identities and export
    /// the aggregates.
    Ingest,
    /// NRCA table (x10^6) for the focal country.
    Nrca,
    /// Commodities with a qualifying run of positive NRCA.
    Screen,
    /// Unit-root tests and differencing order.
    Adf(Select),
    /// ESACF, SCAN and MINIC tentative orders.
    Identify(Select),
    /// Candidate fits and the minimum-AIC model.
    Fit(Select),
    /// Multi-step forecasts with 95% limits.
    Forecast(Select),
    /// Additive outliers and level shifts.
    Outliers(Select),
    /// Full pipeline: tables, plots and manifest in the output directory.
    Run,
    /// Print the tables of a finished run.
    Report,
}

#[derive(Args, Debug)]
struct Select {
    /// HS code to analyse; repeatable. Defaults to every revealed category.
    #[arg(long = "commodity", value_name = "CODE")]
    commodities: Vec<String>,

    #[command(flatten)]
    sim: Simulate,
}

/// Replace the configured input with one simulated ARIMA series.
#[derive(Args, Debug)]
struct Simulate {
    /// Length of the simulated series; setting it enables simulation.
    #[arg(long = "sim-n", value_name = "N")]
    n: Option<usize>,
    /// AR coefficients, comma separated.
    #[arg(long = "sim-ar", value_delimiter = ',', allow_negative_numbers = true)]
    ar: Vec<f64>,
    /// MA coefficients, comma separated.
    #[arg(long = "sim-ma", value_delimiter = ',', allow_negative_numbers = true)]
    ma: Vec<f64>,
    #[arg(long = "sim-constant", default_value_t = 0.0, allow_negative_numbers = true)]
    constant: f64,
    /// Number of times to integrate the simulated ARMA series.
    #[arg(long = "sim-d", default_value_t = 0)]
    d: usize,
}

/// Bad arguments or input detected by the front end itself.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<tradecast_core::Error>() {
            return if e.is_validation() { 1 } else { 2 };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let cfg = match &cli.config {
        Some(path) => {
            if !path.is_file() {
                return Err(usage(format!("config file {} not found", path.display())));
            }
            PipelineConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?
        }
        None => PipelineConfig::default(),
    };
    let mut cfg = cfg.with_env()?;
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let format = TableFormat::from(cli.format);
    let emit = |t: &Table| emit_table(t, format, cli.out.as_deref());
    match &cli.command {
        Command::Ingest => ingest(&cfg),
        Command::Nrca => emit(&nrca_table(&input_series(&cfg)?)),
        Command::Screen => emit(&screen(&cfg)?),
        Command::Adf(sel) => emit(&adf(&cfg, &targets(&cfg, sel, cli.seed)?)?),
        Command::Identify(sel) => emit(&identify_table(&cfg, &targets(&cfg, sel, cli.seed)?)?),
        Command::Fit(sel) => emit(&fit_table(&cfg, &targets(&cfg, sel, cli.seed)?)?),
        Command::Forecast(sel) => emit(&forecast_table(&cfg, &targets(&cfg, sel, cli.seed)?)?),
        Command::Outliers(sel) => emit(&outlier_table(&cfg, &targets(&cfg, sel, cli.seed)?)?),
        Command::Run => {
            let bundle = run_pipeline(&cfg, format)?;
            for w in &bundle.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} categories, {} tables, {} plots written to {}",
                bundle.categories.len(),
                bundle.tables.len(),
                bundle.plots.len(),
                bundle.out_dir.display()
            );
            Ok(())
        }
        Command::Report => report(&cfg.out_dir, format),
    }
}

/// Writes a table to stdout and, when `--out` was given, to a file there.
fn emit_table(t: &Table, format: TableFormat, out: Option<&Path>) -> Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    t.write(&mut lock, format)?;
    lock.flush()?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.{}", t.name, format.extension()));
        t.write(std::fs::File::create(&path)?, format)?;
    }
    Ok(())
}

fn table(name: &'static str, headers: &[&str]) -> Table {
    Table {
        name,
        headers: headers.iter().map(|h| h.to_string()).collect(),
        rows: Vec::new(),
    }
}

fn ingest(cfg: &PipelineConfig) -> Result<()> {
    let records = read_trade_csv(&cfg.input, &CsvSchema::default())
        .with_context(|| format!("reading {}", cfg.input.display()))?;
    let panel = build_panel(&records)?;
    let violations = validate_panel(&panel);
    for v in &violations {
        eprintln!("violation: {v:?}");
    }
    let paths = export_panel(&panel, &cfg.out_dir)?;
    println!(
        "{} records, years {}-{}, {} countries, {} commodities; {} files in {}",
        records.len(),
        panel.first_year(),
        panel.last_year(),
        panel.countries.len(),
        panel.commodities.len(),
        paths.len(),
        cfg.out_dir.display()
    );
    if violations.is_empty() {
        Ok(())
    } else {
        Err(usage(format!("panel has {} violations", violations.len())))
    }
}

fn input_series(cfg: &PipelineConfig) -> Result<Vec<NrcaSeries>> {
    let mut warnings = Vec::new();
    let series = load_series(cfg, &mut warnings).with_context(|| format!("loading {}", cfg.input.display()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(series)
}

fn screen(cfg: &PipelineConfig) -> Result<Table> {
    let found = screen_revealed(
        &input_series(cfg)?,
        (cfg.window_start, cfg.window_end),
        cfg.min_run,
        cfg.threshold,
    )?;
    let mut t = table("screen", &["category", "run_start", "run_end", "run_length", "window_mean"]);
    for r in found {
        t.rows.push(vec![
            format!("HS{}", r.commodity),
            r.run_start.to_string(),
            r.run_end.to_string(),
            r.run_length().to_string(),
            format!("{:.2}", r.window_mean * DISPLAY_SCALE),
        ]);
    }
    Ok(t)
}

/// One series to analyse: its training span and the factor its values are
/// shown with.
struct Target {
    label: String,
    train: Series,
    scale: f64,
    commodity: Option<String>,
}

fn targets(cfg: &PipelineConfig, sel: &Select, seed: u64) -> Result<Vec<Target>> {
    if let Some(n) = sel.sim.n {
        let s = &sel.sim;
        let mut y = simulate_arma(&s.ar, &s.ma, s.constant, 1.0, n, seed)?;
        for _ in 0..s.d {
            y = cumulate(&y, 0.0);
        }
        return Ok(vec![Target {
            label: format!("sim{seed}"),
            train: y,
            scale: 1.0,
            commodity: None,
        }]);
    }
    let all = input_series(cfg)?;
    let chosen: Vec<&NrcaSeries> = if sel.commodities.is_empty() {
        let revealed = screen_revealed(&all, (cfg.window_start, cfg.window_end), cfg.min_run, cfg.threshold)?;
        all.iter()
            .filter(|s| revealed.iter().any(|r| r.commodity == s.commodity))
            .collect()
    } else {
        sel.commodities
            .iter()
            .map(|code| {
                let code = code.trim_start_matches("HS");
                all.iter()
                    .find(|s| s.commodity == code)
                    .ok_or_else(|| usage(format!("commodity {code} not in input")))
            })
            .collect::<Result<_>>()?
    };
    chosen
        .into_iter()
        .map(|s| {
            let start = cfg.train_start.unwrap_or(s.series.start_year());
            Ok(Target {
                label: format!("HS{}", s.commodity),
                train: s.series.window(start, cfg.train_end)?,
                scale: DISPLAY_SCALE,
                commodity: Some(s.commodity.clone()),
            })
        })
        .collect()
}

fn adf(cfg: &PipelineConfig, targets: &[Target]) -> Result<Table> {
    let mut t = table("adf", &["category", "differences", "tau", "pr_lt_tau", "stationary"]);
    for x in targets {
        let out = difference_until_stationary(&x.train, cfg.alpha, cfg.max_d, cfg.adf_lag)
            .with_context(|| x.label.clone())?;
        for (d, r) in out.trail.iter().enumerate() {
            t.rows.push(vec![
                x.label.clone(),
                d.to_string(),
                format!("{:.2}", r.tau),
                format!("{:.4}", r.p_value),
                if r.stationary { "Yes" } else { "No" }.to_string(),
            ]);
        }
    }
    Ok(t)
}

fn differencing(cfg: &PipelineConfig, x: &Target) -> Result<usize> {
    Ok(difference_until_stationary(&x.train, cfg.alpha, cfg.max_d, cfg.adf_lag)
        .with_context(|| x.label.clone())?
        .d)
}

fn identify_table(cfg: &PipelineConfig, targets: &[Target]) -> Result<Table> {
    let mut t = table("identify", &["category", "d", "method", "p", "q", "bic"]);
    for x in targets {
        let d = differencing(cfg, x)?;
        let w = difference(&x.train, d)?;
        let id = identify(&w, cfg.p_max, cfg.q_max).with_context(|| x.label.clone())?;
        for c in id.by_method() {
            t.rows.push(vec![
                x.label.clone(),
                d.to_string(),
                c.source.to_string(),
                c.p.to_string(),
                c.q.to_string(),
                c.score
                    .map(|v| format!("{:.2}", v + 2.0 * x.scale.ln()))
                    .unwrap_or_default(),
            ]);
        }
    }
    Ok(t)
}

struct Selection {
    fits: Vec<tradecast_core::arima::CandidateFit>,
    model: FittedModel,
}

fn select(cfg: &PipelineConfig, x: &Target, orders: Option<&BTreeMap<String, Vec<(usize, usize)>>>) -> Result<Selection> {
    let d = differencing(cfg, x)?;
    let listed = x.commodity.as_ref().and_then(|c| orders.and_then(|o| o.get(c)));
    let candidates: Vec<OrderCandidate> = match listed {
        Some(list) => list
            .iter()
            .chain(std::iter::once(&(0, 0)))
            .map(|&(p, q)| OrderCandidate {
                p,
                q,
                source: OrderSource::Default,
                score: None,
            })
            .collect(),
        None => {
            let w = difference(&x.train, d)?;
            merge_candidates(&identify(&w, cfg.p_max, cfg.q_max).with_context(|| x.label.clone())?)
        }
    };
    let fits = fit_candidates(&x.train, d, &candidates, cfg.with_constant);
    let model = best_of(fits.clone()).with_context(|| x.label.clone())?;
    Ok(Selection { fits, model })
}

fn orders(cfg: &PipelineConfig) -> Result<Option<BTreeMap<String, Vec<(usize, usize)>>>> {
    Ok(cfg.orders_file.as_deref().map(read_orders_file).transpose()?)
}

fn fit_table(cfg: &PipelineConfig, targets: &[Target]) -> Result<Table> {
    let orders = orders(cfg)?;
    let mut t = table(
        "fit",
        &["category", "p", "d", "q", "aic", "converged", "selected", "constant", "ar", "ma"],
    );
    let join = |v: &[f64]| v.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(" ");
    for x in targets {
        let sel = select(cfg, x, orders.as_ref())?;
        for f in &sel.fits {
            let s = f.spec;
            let mut row = vec![x.label.clone(), s.p.to_string(), s.d.to_string(), s.q.to_string()];
            match &f.result {
                Ok(m) => row.extend([
                    format!("{:.2}", m.aic_at_scale(x.scale)),
                    if m.converged { "Yes" } else { "No" }.to_string(),
                    if m.spec == sel.model.spec { "*" } else { "" }.to_string(),
                    format!("{:.4}", m.constant * x.scale),
                    join(&m.ar),
                    join(&m.ma),
                ]),
                Err(e) => row.extend([String::new(), format!("failed: {e}"), String::new(), String::new(), String::new(), String::new()]),
            }
            t.rows.push(row);
        }
    }
    Ok(t)
}

fn forecast_table(cfg: &PipelineConfig, targets: &[Target]) -> Result<Table> {
    let orders = orders(cfg)?;
    let mut t = table(
        "forecast",
        &["category", "model", "year", "forecast", "std_error", "lower_95", "upper_95"],
    );
    for x in targets {
        let sel = select(cfg, x, orders.as_ref())?;
        for e in forecast(&sel.model, cfg.horizon)?.entries {
            t.rows.push(vec![
                x.label.clone(),
                sel.model.spec.to_string(),
                e.year.to_string(),
                format!("{:.3}", e.point * x.scale),
                format!("{:.3}", e.stderr * x.scale),
                format!("{:.3}", e.lo95 * x.scale),
                format!("{:.3}", e.hi95 * x.scale),
            ]);
        }
    }
    Ok(t)
}

fn outlier_table(cfg: &PipelineConfig, targets: &[Target]) -> Result<Table> {
    let orders = orders(cfg)?;
    let mut t = table("outliers", &["category", "model", "kind", "year", "magnitude", "t_stat"]);
    for x in targets {
        let sel = select(cfg, x, orders.as_ref())?;
        for e in detect(&sel.model, &x.train, cfg.outlier_critical, cfg.outlier_max_events)? {
            t.rows.push(vec![
                x.label.clone(),
                sel.model.spec.to_string(),
                e.kind.to_string(),
                e.year.to_string(),
                format!("{:.3}", e.magnitude * x.scale),
                format!("{:.2}", e.t_stat),
            ]);
        }
    }
    Ok(t)
}

/// Prints every table listed in a run's manifest.
fn report(dir: &Path, format: TableFormat) -> Result<()> {
    let manifest_path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|_| usage(format!("no run found in {} (missing manifest.json)", dir.display())))?;
    let manifest: serde_json::Value = serde_json::from_str(&text).context("parsing manifest.json")?;
    let names = manifest["tables"]
        .as_array()
        .ok_or_else(|| usage("manifest.json lists no tables"))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for name in names.iter().filter_map(|v| v.as_str()) {
        let path = dir.join(name);
        writeln!(out, "# {}", name.rsplit_once('.').map_or(name, |(stem, _)| stem))?;
        if name.ends_with(".csv") {
            let mut rdr = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
            let mut t = table("report", &[]);
            t.headers = rdr.headers()?.iter().map(str::to_string).collect();
            for rec in rdr.records() {
                t.rows.push(rec?.iter().map(str::to_string).collect());
            }
            t.write(&mut out, format)?;
        } else {
            out.write_all(&std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
