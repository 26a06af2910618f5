use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::arima::{
    best_of, fit_candidates, forecast, ljung_box, percent_forecast_error, CandidateFit, DiagnosticsResult,
    FittedModel, ForecastEntry, ForecastResult,
};
use crate::error::{Error, Result};
use crate::identify::{identify, merge_candidates, Identification, OrderCandidate, OrderSource};
use crate::ingest::{build_panel, is_textile_chapter, read_trade_csv, validate_panel, CsvSchema};
use crate::nrca::{nrca_series, read_nrca_table_file, screen_revealed, NrcaSeries, RevealedCategory};
use crate::outliers::{detect, OutlierEvent};
use crate::series::{difference, Series};
use crate::stationarity::{difference_until_stationary, DifferencingOutcome, DF_SURFACE_VERSION};

use super::config::{InputMode, PipelineConfig};
use super::emit::{self, TableFormat};
use super::plot::emit_forecast_plot;

/// Everything computed for one revealed category.
#[derive(Debug, Clone)]
pub struct CategoryReport {
    pub commodity: String,
    pub series: NrcaSeries,
    pub train: Series,
    pub differencing: DifferencingOutcome,
    pub identification: Option<Identification>,
    pub candidates: Vec<OrderCandidate>,
    pub fits: Vec<CandidateFit>,
    pub model: FittedModel,
    pub diagnostics: DiagnosticsResult,
    pub forecast: ForecastResult,
    pub test_actual: f64,
    pub test_forecast: ForecastEntry,
    pub percent_error: f64,
    pub events: Vec<OutlierEvent>,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub out_dir: PathBuf,
    pub tables: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub nrca: Vec<NrcaSeries>,
    pub revealed: Vec<RevealedCategory>,
    pub categories: Vec<CategoryReport>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    df_surface: &'static str,
    config: &'a PipelineConfig,
    format: TableFormat,
    input_bytes: u64,
    revealed: Vec<&'a str>,
    categories: Vec<&'a str>,
    tables: Vec<String>,
    plots: Vec<String>,
    warnings: &'a [String],
    timings_ms: BTreeMap<&'static str, f64>,
}

/// Reads `category,p,q` rows; categories may carry an `HS` prefix.
pub fn read_orders_file(path: &Path) -> Result<BTreeMap<String, Vec<(usize, usize)>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let bad = |what: &str| Error::MalformedRow {
            row,
            reason: format!("bad {what}"),
        };
        let cat = rec.get(0).ok_or_else(|| bad("category"))?;
        let cat = cat.strip_prefix("HS").unwrap_or(cat).to_string();
        let p = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| bad("p"))?;
        let q = rec.get(2).and_then(|v| v.parse().ok()).ok_or_else(|| bad("q"))?;
        let list = out.entry(cat).or_default();
        if !list.contains(&(p, q)) {
            list.push((p, q));
        }
    }
    Ok(out)
}

/// NRCA series for the configured input: read directly in NRCA mode, or
/// computed from the trade panel (panel consistency issues are appended to
/// `warnings`).
pub fn load_series(cfg: &PipelineConfig, warnings: &mut Vec<String>) -> Result<Vec<NrcaSeries>> {
    match cfg.input_mode {
        InputMode::Nrca => read_nrca_table_file(&cfg.input, &cfg.country),
        InputMode::Trade => {
            let records = read_trade_csv(&cfg.input, &CsvSchema::default())?;
            let panel = build_panel(&records)?;
            for v in validate_panel(&panel) {
                warnings.push(format!("panel: {v:?}"));
            }
            if !panel.countries.contains(&cfg.country) {
                return Err(Error::InvalidConfig(format!("country {} not in input", cfg.country)));
            }
            panel
                .commodities
                .iter()
                .filter(|c| !cfg.textile_only || is_textile_chapter(c))
                .map(|c| nrca_series(&panel, &cfg.country, c))
                .collect()
        }
    }
}

fn analyze(
    cfg: &PipelineConfig,
    series: &NrcaSeries,
    orders: Option<&Vec<(usize, usize)>>,
) -> Result<CategoryReport> {
    let cat = series.commodity.as_str();
    let s = &series.series;
    let train_start = cfg.train_start.unwrap_or(s.start_year());
    let train = s.window(train_start, cfg.train_end).map_err(|e| e.at(cat, "window"))?;
    let test_actual = s
        .at_year(cfg.test_year)
        .ok_or(Error::WindowOutOfRange {
            start: cfg.test_year,
            end: cfg.test_year,
        })
        .map_err(|e| e.at(cat, "window"))?;

    let differencing =
        difference_until_stationary(&train, cfg.alpha, cfg.max_d, cfg.adf_lag).map_err(|e| e.at(cat, "adf"))?;
    let d = differencing.d;
    let w = difference(&train, d).map_err(|e| e.at(cat, "adf"))?;

    let identification = match identify(&w, cfg.p_max, cfg.q_max) {
        Ok(id) => Some(id),
        Err(_) if orders.is_some() => None,
        Err(e) => return Err(e.at(cat, "identify")),
    };
    let candidates = match orders {
        Some(list) => {
            let score = |p: usize, q: usize| identification.as_ref().and_then(|id| id.minic.0.get(p, q));
            let mut c: Vec<OrderCandidate> = list
                .iter()
                .map(|&(p, q)| OrderCandidate {
                    p,
                    q,
                    source: OrderSource::Default,
                    score: score(p, q),
                })
                .collect();
            if !c.iter().any(|o| o.p == 0 && o.q == 0) {
                c.push(OrderCandidate {
                    p: 0,
                    q: 0,
                    source: OrderSource::Default,
                    score: score(0, 0),
                });
            }
            c
        }
        None => merge_candidates(identification.as_ref().expect("identified")),
    };

    let fits = fit_candidates(&train, d, &candidates, cfg.with_constant);
    let model = best_of(fits.clone()).map_err(|e| e.at(cat, "fit"))?;
    let diagnostics = ljung_box(&model, cfg.ljung_box_lag).map_err(|e| e.at(cat, "diagnostics"))?;
    let fc = forecast(&model, cfg.horizon).map_err(|e| e.at(cat, "forecast"))?;
    let test_forecast = *fc.at_year(cfg.test_year).ok_or_else(|| {
        Error::InvalidConfig("forecast horizon does not reach the test year".into()).at(cat, "forecast")
    })?;
    let percent_error =
        percent_forecast_error(test_actual, test_forecast.point).map_err(|e| e.at(cat, "forecast"))?;
    let events = detect(&model, &train, cfg.outlier_critical, cfg.outlier_max_events)
        .map_err(|e| e.at(cat, "outliers"))?;

    Ok(CategoryReport {
        commodity: cat.to_string(),
        series: series.clone(),
        train,
        differencing,
        identification,
        candidates,
        fits,
        model,
        diagnostics,
        forecast: fc,
        test_actual,
        test_forecast,
        percent_error,
        events,
    })
}

/// Runs the whole pipeline and writes tables T1-T9, one SVG per analysed
/// category and `manifest.json` into `cfg.out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig, format: TableFormat) -> Result<ReportBundle> {
    cfg.validate()?;
    let mut timings = BTreeMap::new();
    let mut warnings = Vec::new();
    let clock = Instant::now();

    let nrca = load_series(cfg, &mut warnings)?;
    if nrca.is_empty() {
        return Err(Error::EmptyInput);
    }
    let orders = cfg.orders_file.as_deref().map(read_orders_file).transpose()?;
    timings.insert("load", clock.elapsed().as_secs_f64() * 1e3);

    let clock = Instant::now();
    let revealed = screen_revealed(&nrca, (cfg.window_start, cfg.window_end), cfg.min_run, cfg.threshold)?;
    // Analyse in input order so tables follow the source layout.
    let chosen: Vec<&NrcaSeries> = nrca
        .iter()
        .filter(|s| revealed.iter().any(|r| r.commodity == s.commodity))
        .collect();
    timings.insert("screen", clock.elapsed().as_secs_f64() * 1e3);

    let clock = Instant::now();
    let results: Vec<Result<CategoryReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chosen
            .iter()
            .map(|s| {
                let list = orders.as_ref().and_then(|o| o.get(&s.commodity));
                scope.spawn(move || analyze(cfg, s, list))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("category worker panicked"))
            .collect()
    });
    let mut categories = Vec::new();
    for r in results {
        match r {
            Ok(c) => categories.push(c),
            Err(e) if cfg.continue_on_error => warnings.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    timings.insert("analyze", clock.elapsed().as_secs_f64() * 1e3);

    let clock = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir)?;
    let tables = emit::write_all(&cfg.out_dir, format, cfg, &nrca, &categories)?;
    let mut plots = Vec::new();
    for c in &categories {
        let path = cfg.out_dir.join(format!("forecast_HS{}.svg", c.commodity));
        emit_forecast_plot(&c.series, &c.model, &c.forecast, &c.events, &path)?;
        plots.push(path);
    }
    timings.insert("emit", clock.elapsed().as_secs_f64() * 1e3);

    let name = |p: &PathBuf| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let manifest = Manifest {
        tool: "tradecast",
        version: env!("CARGO_PKG_VERSION"),
        df_surface: DF_SURFACE_VERSION,
        config: cfg,
        format,
        input_bytes: std::fs::metadata(&cfg.input).map(|m| m.len()).unwrap_or(0),
        revealed: revealed.iter().map(|r| r.commodity.as_str()).collect(),
        categories: categories.iter().map(|c| c.commodity.as_str()).collect(),
        tables: tables.iter().map(name).collect(),
        plots: plots.iter().map(name).collect(),
        warnings: &warnings,
        timings_ms: timings,
    };
    let manifest_path = cfg.out_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;

    Ok(ReportBundle {
        out_dir: cfg.out_dir.clone(),
        tables,
        plots,
        manifest: manifest_path,
        nrca,
        revealed,
        categories,
        warnings,
    })
}
