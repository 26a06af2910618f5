use std::path::PathBuf;
use std::process::{Command, Output};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn tradecast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tradecast"))
        .args(args)
        .env_remove("TRADECAST_TEST_YEAR")
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    repo().join("configs").join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn screen_lists_six_categories() {
    let o = tradecast(&["--config", &config("table1.toml"), "screen"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("category,run_start,run_end,run_length,window_mean\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn forecast_for_one_commodity() {
    let o = tradecast(&["--config", &config("table1.toml"), "forecast", "--commodity", "6309"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("HS6309,\"(0,1,0)\",2016,15.805,2.250,11.395,20.215"), "{text}");
}

#[test]
fn reference_orders_pick_ar2_for_5502() {
    let o = tradecast(&["--config", &config("table1_reference_orders.toml"), "fit", "--commodity", "HS5502"]);
    assert!(o.status.success());
    let selected: Vec<String> = stdout(&o).lines().filter(|l| l.contains(",*,")).map(str::to_string).collect();
    assert_eq!(selected.len(), 1);
    assert!(selected[0].starts_with("HS5502,2,0,0,145.49,Yes,*"), "{selected:?}");
}

#[test]
fn simulated_input_uses_the_seed() {
    let run = |seed: &str| stdout(&tradecast(&["--seed", seed, "adf", "--sim-n", "200", "--sim-ar", "0.5"]));
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
    assert!(run("4").contains("sim4,0,"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(tradecast(&["--frobnicate"]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let o = tradecast(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("report"));
}

#[test]
fn invalid_config_exits_with_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_tradecast"))
        .args(["--config", &config("table1.toml"), "run"])
        .env("TRADECAST_TEST_YEAR", "2015")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("test_year"));
}

#[test]
fn unknown_override_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_tradecast"))
        .args(["--config", &config("table1.toml"), "screen"])
        .env("TRADECAST_NOT_A_KEY", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_config_file() {
    assert_eq!(tradecast(&["--config", "/nonexistent/x.toml", "screen"]).status.code(), Some(1));
}

#[test]
fn non_stationary_simulation_is_a_runtime_failure() {
    // A doubly integrated walk stays non-stationary with max_d = 1.
    let o = Command::new(env!("CARGO_BIN_EXE_tradecast"))
        .args(["adf", "--sim-n", "300", "--sim-d", "2", "--sim-constant", "1"])
        .env("TRADECAST_MAX_D", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = tradecast(&["--config", &config("table1.toml"), "--out", &out, "run"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("manifest.json").is_file());
    assert!(dir.path().join("forecast_HS5201.svg").is_file());
    let r = tradecast(&["--config", &config("table1.toml"), "--out", &out, "--format", "txt", "report"]);
    assert!(r.status.success());
    let text = stdout(&r);
    assert!(text.contains("# table9_outliers"));
    assert!(text.contains("HS5603"));
}

#[test]
fn report_without_run_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tradecast(&["--out", &dir.path().to_string_lossy(), "report"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ingest_exports_panel_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let o = tradecast(&["--config", &config("trade_fixture.toml"), "--out", &dir.path().to_string_lossy(), "ingest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("panel_e_ij.csv").is_file());
}
