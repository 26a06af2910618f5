//! Pipeline configuration: TOML file, then `TRADECAST_*` environment
//! overrides, then validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prefix of environment variables that override config keys, e.g.
/// `TRADECAST_TRAIN_END=2014`.
pub const ENV_PREFIX: &str = "TRADECAST_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Product-level export records (`reporter,year,hs_code,export_value`).
    Trade,
    /// A years x commodities table of NRCA values multiplied by 1e6.
    Nrca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input_mode: InputMode,
    pub input: PathBuf,
    pub country: String,
    /// Emit only commodities in HS chapters 50-67 (trade mode). World and
    /// country totals always use every commodity.
    pub textile_only: bool,
    pub window_start: i32,
    pub window_end: i32,
    pub min_run: usize,
    pub threshold: f64,
    /// First training year; defaults to the first data year.
    pub train_start: Option<i32>,
    pub train_end: i32,
    pub test_year: i32,
    pub horizon: usize,
    pub alpha: f64,
    pub adf_lag: usize,
    pub max_d: usize,
    pub p_max: usize,
    pub q_max: usize,
    pub with_constant: bool,
    pub ljung_box_lag: usize,
    pub outlier_critical: f64,
    pub outlier_max_events: usize,
    /// Optional CSV `category,p,q` of candidate orders used instead of the
    /// identification output.
    pub orders_file: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Report per-category failures as warnings instead of aborting.
    pub continue_on_error: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input_mode: InputMode::Nrca,
            input: PathBuf::from("table1_nrca.csv"),
            country: "USA".into(),
            textile_only: false,
            window_start: 2010,
            window_end: 2016,
            min_run: 3,
            threshold: 0.0,
            train_start: None,
            train_end: 2015,
            test_year: 2016,
            horizon: 3,
            alpha: 0.05,
            adf_lag: 0,
            max_d: 2,
            p_max: 5,
            q_max: 5,
            with_constant: true,
            ljung_box_lag: 6,
            outlier_critical: 2.5,
            outlier_max_events: 1,
            orders_file: None,
            out_dir: PathBuf::from("out"),
            continue_on_error: false,
        }
    }
}

impl PipelineConfig {
    /// Parses TOML text. Missing keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Reads a TOML file; relative paths inside it are resolved against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input);
        fix(&mut self.out_dir);
        if let Some(p) = self.orders_file.as_mut() {
            fix(p);
        }
    }

    /// Applies overrides from `vars` (name, value) pairs whose names start
    /// with [`ENV_PREFIX`]. Values are parsed with the type of the key they
    /// replace.
    pub fn apply_overrides<I>(self, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = toml::Table::try_from(&self).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let known: Vec<String> = field_names();
        for (name, raw) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = key.to_ascii_lowercase();
            if !known.contains(&key) {
                return Err(Error::InvalidConfig(format!("unknown override {name}")));
            }
            let value = parse_like(table.get(&key), &key, &raw)?;
            table.insert(key, value);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))
    }

    /// Overrides from the process environment.
    pub fn with_env(self) -> Result<Self> {
        let mut vars: Vec<(String, String)> = std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        vars.sort();
        self.apply_overrides(vars)
    }

    /// Checks the cross-field invariants before any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.test_year <= self.train_end {
            return bad(format!(
                "test_year {} must be after train_end {}",
                self.test_year, self.train_end
            ));
        }
        if self.window_start > self.window_end {
            return bad("window_start is after window_end".into());
        }
        if let Some(s) = self.train_start {
            if s >= self.train_end {
                return bad("train_start must precede train_end".into());
            }
        }
        if (self.test_year - self.train_end) as usize > self.horizon {
            return bad("horizon does not reach the test year".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)".into());
        }
        if self.min_run == 0 || self.max_d == 0 || self.outlier_max_events == 0 {
            return bad("min_run, max_d and outlier_max_events must be at least 1".into());
        }
        if !(self.outlier_critical > 0.0) {
            return bad("outlier_critical must be positive".into());
        }
        if self.ljung_box_lag == 0 {
            return bad("ljung_box_lag must be at least 1".into());
        }
        if self.country.is_empty() {
            return bad("country is empty".into());
        }
        Ok(())
    }
}

fn field_names() -> Vec<String> {
    // Option fields are absent from the serialized table when unset, so
    // list them explicitly alongside the always-present ones.
    let mut names: Vec<String> = toml::Table::try_from(PipelineConfig::default())
        .map(|t| t.keys().cloned().collect())
        .unwrap_or_default();
    for extra in ["train_start", "orders_file"] {
        if !names.iter().any(|n| n == extra) {
            names.push(extra.to_string());
        }
    }
    names
}

fn parse_like(current: Option<&toml::Value>, key: &str, raw: &str) -> Result<toml::Value> {
    let err = || Error::InvalidConfig(format!("cannot parse `{raw}` for {key}"));
    Ok(match current {
        Some(toml::Value::Integer(_)) => toml::Value::Integer(raw.trim().parse().map_err(|_| err())?),
        Some(toml::Value::Float(_)) => toml::Value::Float(raw.trim().parse().map_err(|_| err())?),
        Some(toml::Value::Boolean(_)) => toml::Value::Boolean(raw.trim().parse().map_err(|_| err())?),
        None if key == "train_start" => toml::Value::Integer(raw.trim().parse().map_err(|_| err())?),
        _ => toml::Value::String(raw.to_string()),
    })
}
