//! Product-level export CSV parsing and yearly trade panel construction.
//!
//! Aggregates follow the NRCA notation: `e_ij` is country i's export of
//! commodity j, `e_j` the world export of j, `e_i` country i's total export
//! and `e` world total export. World figures are sums over the reporters in
//! the file; a `World` pseudo-reporter is kept aside and only cross-checked.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reporter code treated as a world aggregate row rather than a country.
pub const WORLD_REPORTER: &str = "World";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub reporter: String,
    pub year: i32,
    pub hs_code: String,
    pub export_value: f64,
}

/// Column names to read the four record fields from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub reporter: String,
    pub year: String,
    pub hs_code: String,
    pub export_value: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            reporter: "reporter".into(),
            year: "year".into(),
            hs_code: "hs_code".into(),
            export_value: "export_value".into(),
        }
    }
}

/// Parses a headed CSV stream. Row numbers in errors count the header as
/// row 1.
pub fn parse_trade_csv<R: Read>(source: R, schema: &CsvSchema) -> Result<Vec<TradeRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ci_rep, ci_year, ci_code, ci_val) = (
        col(&schema.reporter)?,
        col(&schema.year)?,
        col(&schema.hs_code)?,
        col(&schema.export_value)?,
    );

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let bad = |reason: String| Error::MalformedRow { row, reason };

        let reporter = field(ci_rep).to_string();
        if reporter.is_empty() {
            return Err(bad("empty reporter".into()));
        }
        let year: i32 = field(ci_year)
            .parse()
            .map_err(|_| bad(format!("bad year `{}`", field(ci_year))))?;
        let hs_code = field(ci_code).to_string();
        if !(4..=6).contains(&hs_code.len()) || !hs_code.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(format!("bad HS code `{hs_code}`")));
        }
        let export_value: f64 = field(ci_val)
            .parse()
            .map_err(|_| bad(format!("bad export value `{}`", field(ci_val))))?;
        if !export_value.is_finite() {
            return Err(bad("export value is not finite".into()));
        }
        out.push(TradeRecord {
            reporter,
            year,
            hs_code,
            export_value,
        });
    }
    Ok(out)
}

pub fn read_trade_csv(path: &Path, schema: &CsvSchema) -> Result<Vec<TradeRecord>> {
    let f = std::fs::File::open(path)?;
    parse_trade_csv(std::io::BufReader::new(f), schema)
}

/// Yearly export aggregates over countries and 4-digit commodities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradePanel {
    pub years: Vec<i32>,
    pub countries: BTreeSet<String>,
    pub commodities: BTreeSet<String>,
    pub e_ij: BTreeMap<(i32, String, String), f64>,
    pub e_j: BTreeMap<(i32, String), f64>,
    pub e_i: BTreeMap<(i32, String), f64>,
    pub e: BTreeMap<i32, f64>,
    /// Totals reported by a `World` pseudo-reporter, per year, if present.
    pub reported_world: BTreeMap<i32, f64>,
}

impl TradePanel {
    pub fn first_year(&self) -> i32 {
        self.years[0]
    }

    pub fn last_year(&self) -> i32 {
        self.years[self.years.len() - 1]
    }

    pub fn cell(&self, year: i32, country: &str, commodity: &str) -> Option<f64> {
        self.e_ij
            .get(&(year, country.to_string(), commodity.to_string()))
            .copied()
    }
}

/// Builds a panel at the 4-digit HS level. Longer codes are truncated and
/// summed; aggregation runs over sorted keys so the result does not depend
/// on record order.
pub fn build_panel(records: &[TradeRecord]) -> Result<TradePanel> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    // Collect raw cell values per sorted key first, then sum in key order.
    let mut cells: BTreeMap<(i32, String, String), Vec<f64>> = BTreeMap::new();
    let mut world: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    let mut year_set = BTreeSet::new();
    for r in records {
        if r.export_value < 0.0 {
            return Err(Error::NegativeValue {
                year: r.year,
                reporter: r.reporter.clone(),
                hs_code: r.hs_code.clone(),
            });
        }
        year_set.insert(r.year);
        if r.reporter == WORLD_REPORTER {
            world.entry(r.year).or_default().push(r.export_value);
            continue;
        }
        let code4: String = r.hs_code.chars().take(4).collect();
        cells
            .entry((r.year, r.reporter.clone(), code4))
            .or_default()
            .push(r.export_value);
    }
    let first = *year_set.iter().next().expect("non-empty");
    let last = *year_set.iter().next_back().expect("non-empty");
    let cell_years: BTreeSet<i32> = cells.keys().map(|k| k.0).collect();
    for y in first..=last {
        if !cell_years.contains(&y) {
            return Err(Error::GapInYears(y));
        }
    }

    let mut e_ij = BTreeMap::new();
    let mut countries = BTreeSet::new();
    let mut commodities = BTreeSet::new();
    for (key, mut vals) in cells {
        vals.sort_by(f64::total_cmp);
        countries.insert(key.1.clone());
        commodities.insert(key.2.clone());
        e_ij.insert(key, vals.iter().sum::<f64>());
    }
    let years: Vec<i32> = (first..=last).collect();

    let mut e_j = BTreeMap::new();
    let mut e_i = BTreeMap::new();
    let mut e = BTreeMap::new();
    for &y in &years {
        let mut total = 0.0;
        for i in &countries {
            let s: f64 = commodities
                .iter()
                .filter_map(|j| e_ij.get(&(y, i.clone(), j.clone())))
                .sum();
            e_i.insert((y, i.clone()), s);
        }
        for j in &commodities {
            let s: f64 = countries
                .iter()
                .filter_map(|i| e_ij.get(&(y, i.clone(), j.clone())))
                .sum();
            e_j.insert((y, j.clone()), s);
            total += s;
        }
        e.insert(y, total);
    }
    let reported_world = world
        .into_iter()
        .map(|(y, mut v)| {
            v.sort_by(f64::total_cmp);
            (y, v.iter().sum())
        })
        .collect();

    Ok(TradePanel {
        years,
        countries,
        commodities,
        e_ij,
        e_j,
        e_i,
        e,
        reported_world,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// A world or country aggregate disagrees with the sum of its cells.
    AggregateMismatch {
        year: i32,
        identity: String,
        expected: f64,
        found: f64,
    },
    NegativeValue {
        year: i32,
        cell: String,
    },
    YearGap {
        after: i32,
        next: i32,
    },
    /// A `World` reporter row disagrees with the summed world total.
    WorldRowMismatch {
        year: i32,
        reported: f64,
        computed: f64,
    },
}

const REL_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Checks every aggregate identity of the panel. An empty report means the
/// panel is consistent.
pub fn validate_panel(panel: &TradePanel) -> Vec<Violation> {
    let mut out = Vec::new();
    for w in panel.years.windows(2) {
        if w[1] != w[0] + 1 {
            out.push(Violation::YearGap {
                after: w[0],
                next: w[1],
            });
        }
    }
    for ((y, i, j), v) in &panel.e_ij {
        if *v < 0.0 {
            out.push(Violation::NegativeValue {
                year: *y,
                cell: format!("e_ij({i},{j})"),
            });
        }
    }
    for ((y, j), v) in &panel.e_j {
        if *v < 0.0 {
            out.push(Violation::NegativeValue {
                year: *y,
                cell: format!("e_j({j})"),
            });
        }
    }
    for ((y, i), v) in &panel.e_i {
        if *v < 0.0 {
            out.push(Violation::NegativeValue {
                year: *y,
                cell: format!("e_i({i})"),
            });
        }
    }
    for (y, v) in &panel.e {
        if *v < 0.0 {
            out.push(Violation::NegativeValue {
                year: *y,
                cell: "e".into(),
            });
        }
    }

    for &y in &panel.years {
        let mut mismatch = |identity: String, expected: f64, found: f64| {
            if !close(expected, found) {
                out.push(Violation::AggregateMismatch {
                    year: y,
                    identity,
                    expected,
                    found,
                });
            }
        };
        let total = panel.e.get(&y).copied().unwrap_or(0.0);
        let mut sum_cells = 0.0;
        for j in &panel.commodities {
            let s: f64 = panel
                .countries
                .iter()
                .filter_map(|i| panel.e_ij.get(&(y, i.clone(), j.clone())))
                .sum();
            sum_cells += s;
            let ej = panel.e_j.get(&(y, j.clone())).copied().unwrap_or(0.0);
            mismatch(format!("e_j({j}) = sum_i e_ij"), s, ej);
        }
        for i in &panel.countries {
            let s: f64 = panel
                .commodities
                .iter()
                .filter_map(|j| panel.e_ij.get(&(y, i.clone(), j.clone())))
                .sum();
            let ei = panel.e_i.get(&(y, i.clone())).copied().unwrap_or(0.0);
            mismatch(format!("e_i({i}) = sum_j e_ij"), s, ei);
        }
        let sum_ej: f64 = panel
            .commodities
            .iter()
            .filter_map(|j| panel.e_j.get(&(y, j.clone())))
            .sum();
        let sum_ei: f64 = panel
            .countries
            .iter()
            .filter_map(|i| panel.e_i.get(&(y, i.clone())))
            .sum();
        if !(close(sum_ej, total) && close(sum_ei, total) && close(sum_cells, total)) {
            let found = [sum_ej, sum_ei, sum_cells]
                .into_iter()
                .find(|s| !close(*s, total))
                .unwrap_or(sum_cells);
            out.push(Violation::AggregateMismatch {
                year: y,
                identity: "e = sum_j e_j = sum_i e_i = sum_ij e_ij".into(),
                expected: found,
                found: total,
            });
        }
        if let Some(&reported) = panel.reported_world.get(&y) {
            if !close(reported, total) {
                out.push(Violation::WorldRowMismatch {
                    year: y,
                    reported,
                    computed: total,
                });
            }
        }
    }
    out
}

/// True when a 4-digit code falls in HS chapters 50-67 (textiles, apparel,
/// footwear, headgear).
pub fn is_textile_chapter(code: &str) -> bool {
    code.get(..2)
        .and_then(|c| c.parse::<u32>().ok())
        .is_some_and(|ch| (50..=67).contains(&ch))
}

/// Writes the four aggregate maps as CSV files into `dir`.
pub fn export_panel(panel: &TradePanel, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();

    let p = dir.join("panel_e_ij.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["year", "country", "commodity", "value"])?;
    for ((y, i, j), v) in &panel.e_ij {
        w.write_record([y.to_string(), i.clone(), j.clone(), v.to_string()])?;
    }
    w.flush()?;
    paths.push(p);

    let p = dir.join("panel_e_j.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["year", "commodity", "value"])?;
    for ((y, j), v) in &panel.e_j {
        w.write_record([y.to_string(), j.clone(), v.to_string()])?;
    }
    w.flush()?;
    paths.push(p);

    let p = dir.join("panel_e_i.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["year", "country", "value"])?;
    for ((y, i), v) in &panel.e_i {
        w.write_record([y.to_string(), i.clone(), v.to_string()])?;
    }
    w.flush()?;
    paths.push(p);

    let p = dir.join("panel_e.csv");
    let mut w = csv::Writer::from_path(&p)?;
    w.write_record(["year", "value"])?;
    for (y, v) in &panel.e {
        w.write_record([y.to_string(), v.to_string()])?;
    }
    w.flush()?;
    paths.push(p);

    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(r: &str, y: i32, c: &str, v: f64) -> TradeRecord {
        TradeRecord {
            reporter: r.into(),
            year: y,
            hs_code: c.into(),
            export_value: v,
        }
    }

    #[test]
    fn header_only_is_empty() {
        let out = parse_trade_csv(
            "reporter,year,hs_code,export_value\n".as_bytes(),
            &CsvSchema::default(),
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn parses_a_row() {
        let out = parse_trade_csv(
            "reporter,year,hs_code,export_value\nUSA,1996,5201,474000000\n".as_bytes(),
            &CsvSchema::default(),
        )
        .unwrap();
        assert_eq!(out, vec![rec("USA", 1996, "5201", 4.74e8)]);
    }

    #[test]
    fn six_digit_codes_kept_verbatim() {
        let out = parse_trade_csv(
            "reporter,year,hs_code,export_value\nUSA,1996,520100,1\n".as_bytes(),
            &CsvSchema::default(),
        )
        .unwrap();
        assert_eq!(out[0].hs_code, "520100");
    }

    #[test]
    fn bad_value_reports_row() {
        let err = parse_trade_csv(
            "reporter,year,hs_code,export_value\nUSA,1996,5201,abc\n".as_bytes(),
            &CsvSchema::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 2, .. }));
    }

    #[test]
    fn bad_year_reports_row() {
        let err = parse_trade_csv(
            "reporter,year,hs_code,export_value\nUSA,1996,5201,1\nUSA,19x6,5201,1\n".as_bytes(),
            &CsvSchema::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 3, .. }));
    }

    #[test]
    fn custom_schema_and_missing_column() {
        let schema = CsvSchema {
            reporter: "rep".into(),
            year: "yr".into(),
            hs_code: "cmd".into(),
            export_value: "usd".into(),
        };
        let out = parse_trade_csv("yr,rep,usd,cmd\n2001,FRA,3.5,6309\n".as_bytes(), &schema).unwrap();
        assert_eq!(out, vec![rec("FRA", 2001, "6309", 3.5)]);
        let err = parse_trade_csv("rep,usd,cmd\nFRA,3.5,6309\n".as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "yr"));
    }

    #[test]
    fn truncation_and_sum() {
        let p = build_panel(&[rec("A", 2000, "520100", 10.0), rec("A", 2000, "520190", 5.0)]).unwrap();
        assert_eq!(p.cell(2000, "A", "5201"), Some(15.0));
    }

    #[test]
    fn one_cell_world() {
        let p = build_panel(&[rec("A", 2000, "5201", 10.0)]).unwrap();
        assert_eq!(p.e[&2000], 10.0);
        assert_eq!(p.e_j[&(2000, "5201".to_string())], 10.0);
        assert_eq!(p.e_i[&(2000, "A".to_string())], 10.0);
        assert_eq!(p.cell(2000, "A", "5201"), Some(10.0));
    }

    #[test]
    fn gap_in_years() {
        let err = build_panel(&[rec("A", 2000, "5201", 1.0), rec("A", 2002, "5201", 1.0)]).unwrap_err();
        assert!(matches!(err, Error::GapInYears(2001)));
    }

    #[test]
    fn negative_value_rejected() {
        let err = build_panel(&[rec("A", 2000, "5201", -1.0)]).unwrap_err();
        assert!(matches!(err, Error::NegativeValue { .. }));
    }

    fn two_by_two() -> TradePanel {
        build_panel(&[
            rec("A", 2000, "5201", 10.0),
            rec("A", 2000, "6309", 20.0),
            rec("B", 2000, "5201", 20.0),
            rec("B", 2000, "6309", 40.0),
        ])
        .unwrap()
    }

    #[test]
    fn consistent_panel_validates() {
        assert!(validate_panel(&two_by_two()).is_empty());
    }

    #[test]
    fn edited_total_is_flagged() {
        let mut p = two_by_two();
        p.e.insert(2000, 95.0);
        let v = validate_panel(&p);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::AggregateMismatch { year: 2000, .. }));
    }

    #[test]
    fn negative_cell_is_flagged() {
        let mut p = two_by_two();
        // Keep the aggregates consistent so only the sign is reported.
        p.e_ij.insert((2000, "A".into(), "5201".into()), -10.0);
        p.e_ij.insert((2000, "A".into(), "6309".into()), 40.0);
        p.e_ij.insert((2000, "B".into(), "5201".into()), 40.0);
        p.e_ij.insert((2000, "B".into(), "6309".into()), 20.0);
        let v = validate_panel(&p);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(matches!(v[0], Violation::NegativeValue { year: 2000, .. }));
    }

    #[test]
    fn world_reporter_is_excluded_and_checked() {
        let mut recs = vec![
            rec("A", 2000, "5201", 10.0),
            rec("B", 2000, "5201", 30.0),
            rec(WORLD_REPORTER, 2000, "5201", 40.0),
        ];
        let p = build_panel(&recs).unwrap();
        assert_eq!(p.e[&2000], 40.0);
        assert!(!p.countries.contains(WORLD_REPORTER));
        assert!(validate_panel(&p).is_empty());
        recs[2].export_value = 45.0;
        let v = validate_panel(&build_panel(&recs).unwrap());
        assert!(matches!(v[..], [Violation::WorldRowMismatch { year: 2000, .. }]));
    }

    #[test]
    fn chapter_filter() {
        assert!(is_textile_chapter("5201"));
        assert!(is_textile_chapter("6702"));
        assert!(!is_textile_chapter("6801"));
        assert!(!is_textile_chapter("2709"));
    }
}
