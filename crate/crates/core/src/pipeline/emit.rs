//! Table emitters. Values are carried at full precision and rounded only
//! here; NRCA-valued columns are shown multiplied by 1e6.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::identify::OrderCandidate;
use crate::nrca::{NrcaSeries, DISPLAY_SCALE};
use crate::outliers::OutlierKind;

use super::config::PipelineConfig;
use super::run::CategoryReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    /// Space-aligned plain text.
    Txt,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Txt => "txt",
        }
    }
}

/// A rendered table: fixed headers and preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, headers: &[&str]) -> Self {
        Table {
            name,
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write<W: Write>(&self, out: W, format: TableFormat) -> Result<()> {
        match format {
            TableFormat::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
                w.write_record(&self.headers)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
            TableFormat::Txt => {
                let mut out = out;
                let ncol = self.headers.len();
                let width: Vec<usize> = (0..ncol)
                    .map(|c| {
                        self.rows
                            .iter()
                            .map(|r| r[c].chars().count())
                            .chain(std::iter::once(self.headers[c].chars().count()))
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&width)
                        .map(|(s, w)| format!("{s:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(&self.headers))?;
                for r in &self.rows {
                    writeln!(out, "{}", line(r))?;
                }
            }
        }
        Ok(())
    }
}

fn hs(code: &str) -> String {
    format!("HS{code}")
}

fn f(v: f64, decimals: usize) -> String {
    // Avoid printing "-0.00".
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn yes_no(b: bool) -> String {
    if b { "Yes" } else { "No" }.to_string()
}

/// `▲` when `current` exceeds `previous`, `▼` when below, `■` when the two
/// agree at two decimals.
pub fn direction_glyph(previous: f64, current: f64) -> &'static str {
    let a = f(previous, 2);
    let b = f(current, 2);
    if a == b {
        "■"
    } else if current > previous {
        "▲"
    } else {
        "▼"
    }
}

pub fn table1(nrca: &[NrcaSeries]) -> Table {
    let mut headers = vec!["year".to_string()];
    headers.extend(nrca.iter().map(|s| s.commodity.clone()));
    let mut t = Table {
        name: "table1_nrca",
        headers,
        rows: Vec::new(),
    };
    let first = nrca.iter().map(|s| s.series.start_year()).min().unwrap_or(0);
    let last = nrca.iter().map(|s| s.series.end_year()).max().unwrap_or(-1);
    for y in first..=last {
        let mut row = vec![y.to_string()];
        row.extend(
            nrca.iter()
                .map(|s| s.series.at_year(y).map_or(String::new(), |v| f(v * DISPLAY_SCALE, 2))),
        );
        t.rows.push(row);
    }
    t
}

pub fn table2(cats: &[CategoryReport]) -> Table {
    let mut t = Table::new("table2_adf_levels", &["category", "tau", "pr_lt_tau", "stationary"]);
    for c in cats {
        let r = &c.differencing.trail[0];
        t.rows.push(vec![hs(&c.commodity), f(r.tau, 2), f(r.p_value, 4), yes_no(r.stationary)]);
    }
    t
}

pub fn table3(cats: &[CategoryReport]) -> Table {
    let mut t = Table::new(
        "table3_adf_differenced",
        &["category", "tau", "pr_lt_tau", "stationary", "differencing_period"],
    );
    for c in cats {
        for (d, r) in c.differencing.trail.iter().enumerate().skip(1) {
            t.rows.push(vec![
                hs(&c.commodity),
                f(r.tau, 2),
                f(r.p_value, 4),
                yes_no(r.stationary),
                d.to_string(),
            ]);
        }
    }
    t
}

/// BIC shift for reporting on the display scale: sigma2 scales by 1e12.
fn display_bic(v: f64) -> f64 {
    v + 2.0 * DISPLAY_SCALE.ln()
}

pub fn table4(cats: &[CategoryReport]) -> Table {
    let mut t = Table::new("table4_identification", &["category", "method", "p", "q", "bic"]);
    for c in cats {
        let Some(id) = &c.identification else {
            continue;
        };
        let row = |cand: &OrderCandidate| {
            vec![
                hs(&c.commodity),
                cand.source.to_string(),
                cand.p.to_string(),
                cand.q.to_string(),
                cand.score.map_or("NA".to_string(), |v| f(display_bic(v), 2)),
            ]
        };
        for cand in id.by_method() {
            t.rows.push(row(&cand));
        }
    }
    t
}

pub fn table5(cats: &[CategoryReport]) -> Table {
    let mut t = Table::new("table5_model_selection", &["category", "p", "d", "q", "aic", "converged"]);
    for c in cats {
        let m = &c.model;
        t.rows.push(vec![
            hs(&c.commodity),
            m.spec.p.to_string(),
            m.spec.d.to_string(),
            m.spec.q.to_string(),
            f(m.aic_at_scale(DISPLAY_SCALE), 2),
            yes_no(m.converged),
        ]);
    }
    t
}

pub fn table6(cats: &[CategoryReport]) -> Table {
    let mut t = Table::new(
        "table6_residual_check",
        &["category", "model", "to_lag", "chi_square", "df", "pr_gt_chisq"],
    );
    for c in cats {
        let d = &c.diagnostics;
        t.rows.push(vec![
            hs(&c.commodity),
            c.model.spec.to_string(),
            d.to_lag.to_string(),
            f(d.chi_square, 2),
            d.df.to_string(),
            f(d.p_value, 4),
        ]);
    }
    t
}

pub fn table7(cats: &[CategoryReport]) -> Table {
    let mut t = Table::new(
        "table7_test_forecast",
        &["category", "year", "actual", "forecast", "std_error", "lower_95", "upper_95", "percent_error"],
    );
    for c in cats {
        let e = &c.test_forecast;
        let s = DISPLAY_SCALE;
        t.rows.push(vec![
            hs(&c.commodity),
            e.year.to_string(),
            f(c.test_actual * s, 3),
            f(e.point * s, 3),
            f(e.stderr * s, 3),
            f(e.lo95 * s, 3),
            f(e.hi95 * s, 3),
            f(c.percent_error, 2),
        ]);
    }
    t
}

pub fn table8(cats: &[CategoryReport], test_year: i32) -> Table {
    let mut t = Table::new(
        "table8_ahead_forecast",
        &["category", "year", "forecast", "direction", "std_error", "lower_95", "upper_95"],
    );
    let s = DISPLAY_SCALE;
    for c in cats {
        let mut prev = c.test_actual * s;
        for e in c.forecast.entries.iter().filter(|e| e.year > test_year) {
            let cur = e.point * s;
            t.rows.push(vec![
                hs(&c.commodity),
                e.year.to_string(),
                f(cur, 2),
                direction_glyph(prev, cur).to_string(),
                f(e.stderr * s, 2),
                f(e.lo95 * s, 2),
                f(e.hi95 * s, 2),
            ]);
            prev = cur;
        }
    }
    t
}

pub fn table9(cats: &[CategoryReport]) -> Table {
    let mut t = Table::new("table9_outliers", &["category", "additive_outlier", "level_shift"]);
    for c in cats {
        let years = |k: OutlierKind| {
            let v: Vec<String> = c
                .events
                .iter()
                .filter(|e| e.kind == k)
                .map(|e| e.year.to_string())
                .collect();
            if v.is_empty() {
                "-".to_string()
            } else {
                v.join(";")
            }
        };
        t.rows.push(vec![hs(&c.commodity), years(OutlierKind::AO), years(OutlierKind::LS)]);
    }
    t
}

pub fn all_tables(cfg: &PipelineConfig, nrca: &[NrcaSeries], cats: &[CategoryReport]) -> Vec<Table> {
    vec![
        table1(nrca),
        table2(cats),
        table3(cats),
        table4(cats),
        table5(cats),
        table6(cats),
        table7(cats),
        table8(cats, cfg.test_year),
        table9(cats),
    ]
}

pub(crate) fn write_all(
    dir: &Path,
    format: TableFormat,
    cfg: &PipelineConfig,
    nrca: &[NrcaSeries],
    cats: &[CategoryReport],
) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for t in all_tables(cfg, nrca, cats) {
        let path = dir.join(format!("{}.{}", t.name, format.extension()));
        let file = std::fs::File::create(&path)?;
        let mut buf = std::io::BufWriter::new(file);
        t.write(&mut buf, format)?;
        buf.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
