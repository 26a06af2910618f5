mod common;

use common::*;
use tradecast_core::arima::{fit, forecast, ArimaSpec};
use tradecast_core::nrca::NrcaSeries;
use tradecast_core::outliers::{OutlierEvent, OutlierKind};
use tradecast_core::pipeline::{render_forecast_svg, run_pipeline, PipelineConfig, TableFormat};
use tradecast_core::series::Series;
use tradecast_core::Error;

fn count(svg: &str, tag: &str) -> usize {
    svg.matches(&format!("<{tag} ")).count() + svg.matches(&format!("<{tag}>")).count()
}

#[test]
fn bundled_run_writes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let b = run_pipeline(&config("table1", dir.path()), TableFormat::Csv).unwrap();
    assert_eq!(b.categories.len(), 6);
    let names: Vec<String> = b
        .tables
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for n in 1..=9 {
        assert!(names.iter().any(|f| f.starts_with(&format!("table{n}_"))), "{names:?}");
    }
    let t5 = std::fs::read_to_string(dir.path().join("table5_model_selection.csv")).unwrap();
    assert!(t5.starts_with("category,p,d,q,aic,converged\n"), "{t5}");
    let t7 = std::fs::read_to_string(dir.path().join("table7_test_forecast.csv")).unwrap();
    assert!(t7.lines().any(|l| l.starts_with("HS5201,2016,239.330,184.446,95.354")), "{t7}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["categories"].as_array().unwrap().len(), 6);
}

#[test]
fn txt_tables_are_aligned() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&config("table1_reference_orders", dir.path()), TableFormat::Txt).unwrap();
    let t = std::fs::read_to_string(dir.path().join("table9_outliers.txt")).unwrap();
    let widths: Vec<usize> = t.lines().map(|l| l.chars().count()).collect();
    assert!(widths.windows(2).all(|w| w[0] == w[1]), "{t}");
}

#[test]
fn test_year_must_follow_training() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("table1", dir.path());
    cfg.test_year = cfg.train_end;
    let err = run_pipeline(&cfg, TableFormat::Csv).unwrap_err();
    assert!(err.is_validation(), "{err}");
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn unknown_config_key_is_rejected() {
    assert!(matches!(
        PipelineConfig::from_toml_str("horizn = 3"),
        Err(e) if e.is_validation()
    ));
}

#[test]
fn trade_fixture_matches_the_bundled_table() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_pipeline(&config("trade_fixture", a.path()), TableFormat::Csv).unwrap();
    run_pipeline(&config("table1", b.path()), TableFormat::Csv).unwrap();
    let mut codes: Vec<&str> = ra.categories.iter().map(|c| c.commodity.as_str()).collect();
    codes.sort();
    let mut want = CODES.to_vec();
    want.sort();
    assert_eq!(codes, want);
    // Trade mode lists commodities by code, so compare per category.
    let columns = |dir: &std::path::Path| {
        let text = std::fs::read_to_string(dir.join("table1_nrca.csv")).unwrap();
        let rows: Vec<Vec<String>> = text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect();
        let mut cols: Vec<Vec<String>> = (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].clone()).collect()).collect();
        cols.sort();
        cols
    };
    assert_eq!(columns(a.path()), columns(b.path()));
    for t in ["table5_model_selection.csv", "table9_outliers.csv"] {
        let sorted = |dir: &std::path::Path| {
            let mut l: Vec<String> = std::fs::read_to_string(dir.join(t)).unwrap().lines().map(str::to_string).collect();
            l.sort();
            l
        };
        assert_eq!(sorted(a.path()), sorted(b.path()), "{t}");
    }
}

fn plot_for(code: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&config("table1_reference_orders", dir.path()), TableFormat::Csv).unwrap();
    std::fs::read_to_string(dir.path().join(format!("forecast_HS{code}.svg"))).unwrap()
}

#[test]
fn level_shift_plot_has_one_circle() {
    let svg = plot_for("5502");
    assert_eq!(count(&svg, "circle"), 1);
    assert_eq!(count(&svg, "rect"), 0);
    assert!(svg.contains("1997"));
}

#[test]
fn quiet_plot_has_no_markers() {
    let svg = plot_for("6309");
    assert_eq!(count(&svg, "circle") + count(&svg, "rect"), 0);
}

#[test]
fn minimal_plot_is_well_formed() {
    let y = train("6309");
    let m = fit(&y, ArimaSpec::new(0, 1, 0, true)).unwrap();
    let f = forecast(&m, 1).unwrap();
    let s = NrcaSeries {
        country: "USA".into(),
        commodity: "6309".into(),
        series: y,
    };
    let svg = render_forecast_svg(&s, &m, &f, &[]);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
}

#[test]
fn event_markers_follow_their_kinds() {
    let y = Series::new(vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 5.5, 8.0, 7.0, 9.0, 8.5, 11.0], 2000).unwrap();
    let m = fit(&y, ArimaSpec::new(0, 1, 0, true)).unwrap();
    let f = forecast(&m, 2).unwrap();
    let ev = |kind, year| OutlierEvent {
        kind,
        year,
        magnitude: 1.0,
        t_stat: 4.0,
        iteration: 1,
    };
    let s = NrcaSeries {
        country: "X".into(),
        commodity: "1234".into(),
        series: y,
    };
    let svg = render_forecast_svg(&s, &m, &f, &[ev(OutlierKind::AO, 2003), ev(OutlierKind::LS, 2007)]);
    assert_eq!(count(&svg, "rect"), 1);
    assert_eq!(count(&svg, "circle"), 1);
}

#[test]
fn validation_errors_are_distinguished() {
    assert!(Error::InvalidConfig("x".into()).is_validation());
    assert!(!Error::AllFitsFailed.is_validation());
}
