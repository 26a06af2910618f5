//! Normalized revealed comparative advantage and the revealed-category
//! screen.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TradePanel;
use crate::series::Series;

/// NRCA values are tiny; tables print them multiplied by this factor.
pub const DISPLAY_SCALE: f64 = 1e6;

/// One country-commodity NRCA series (raw, unscaled values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NrcaSeries {
    pub country: String,
    pub commodity: String,
    pub series: Series,
}

impl NrcaSeries {
    pub fn years(&self) -> Vec<i32> {
        self.series.years().collect()
    }

    pub fn values(&self) -> &[f64] {
        self.series.values()
    }

    /// Values multiplied by [`DISPLAY_SCALE`].
    pub fn display_values(&self) -> Vec<f64> {
        self.values().iter().map(|v| v * DISPLAY_SCALE).collect()
    }
}

/// `e_ij/e - e_j*e_i/(e*e)` for one cell of the panel.
pub fn nrca_value(panel: &TradePanel, country: &str, commodity: &str, year: i32) -> Result<f64> {
    let missing = || Error::MissingCell {
        year,
        country: country.to_string(),
        commodity: commodity.to_string(),
    };
    let e = *panel.e.get(&year).ok_or_else(missing)?;
    if e <= 0.0 {
        return Err(Error::ZeroWorldTrade(year));
    }
    if !panel.countries.contains(country) || !panel.commodities.contains(commodity) {
        return Err(missing());
    }
    // A country that did not export a commodity has e_ij = 0.
    let e_ij = panel.cell(year, country, commodity).unwrap_or(0.0);
    let e_j = *panel
        .e_j
        .get(&(year, commodity.to_string()))
        .ok_or_else(missing)?;
    let e_i = *panel
        .e_i
        .get(&(year, country.to_string()))
        .ok_or_else(missing)?;
    Ok(e_ij / e - (e_j / e) * (e_i / e))
}

pub fn nrca_series(panel: &TradePanel, country: &str, commodity: &str) -> Result<NrcaSeries> {
    if panel.years.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: panel.years.len(),
        });
    }
    let values = panel
        .years
        .iter()
        .map(|&y| nrca_value(panel, country, commodity, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(NrcaSeries {
        country: country.to_string(),
        commodity: commodity.to_string(),
        series: Series::new(values, panel.first_year())?,
    })
}

/// A commodity that passed the screen, with its longest qualifying run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevealedCategory {
    pub commodity: String,
    pub run_start: i32,
    pub run_end: i32,
    pub window_mean: f64,
}

impl RevealedCategory {
    pub fn run_length(&self) -> usize {
        (self.run_end - self.run_start + 1) as usize
    }
}

/// Commodities whose NRCA exceeds `threshold` for at least `min_run`
/// consecutive years inside `window`, sorted by mean NRCA over the window
/// (descending).
pub fn screen_revealed(
    series_set: &[NrcaSeries],
    window: (i32, i32),
    min_run: usize,
    threshold: f64,
) -> Result<Vec<RevealedCategory>> {
    let (start, end) = window;
    if min_run == 0 {
        return Err(Error::InvalidConfig("min_run must be at least 1".into()));
    }
    let mut out = Vec::new();
    for s in series_set {
        let w = s.series.window(start, end)?;
        let mut best: Option<(i32, i32)> = None;
        let mut run_start: Option<i32> = None;
        for (year, &v) in w.years().zip(w.values()) {
            if v > threshold {
                let rs = *run_start.get_or_insert(year);
                let len = year - rs + 1;
                if best.map_or(true, |(a, b)| len > b - a + 1) {
                    best = Some((rs, year));
                }
            } else {
                run_start = None;
            }
        }
        if let Some((a, b)) = best {
            if (b - a + 1) as usize >= min_run {
                out.push(RevealedCategory {
                    commodity: s.commodity.clone(),
                    run_start: a,
                    run_end: b,
                    window_mean: w.mean(),
                });
            }
        }
    }
    out.sort_by(|a, b| {
        b.window_mean
            .total_cmp(&a.window_mean)
            .then_with(|| a.commodity.cmp(&b.commodity))
    });
    Ok(out)
}

/// Reads a years x commodities table of display-scaled NRCA values (first
/// column `year`, one column per HS code) into raw series.
pub fn read_nrca_table<R: Read>(source: R, country: &str) -> Result<Vec<NrcaSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("year") {
        return Err(Error::MissingColumn("year".into()));
    }
    let codes: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut years = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); codes.len()];
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let year: i32 = rec[0].parse().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("bad year `{}`", &rec[0]),
        })?;
        if let Some(&prev) = years.last() {
            if year != prev + 1 {
                return Err(Error::GapInYears(prev + 1));
            }
        }
        years.push(year);
        for (j, col) in cols.iter_mut().enumerate() {
            let raw = rec.get(j + 1).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::MalformedRow {
                row,
                reason: format!("bad value `{raw}` for {}", codes[j]),
            })?;
            col.push(v / DISPLAY_SCALE);
        }
    }
    if years.is_empty() {
        return Err(Error::EmptyInput);
    }
    codes
        .into_iter()
        .zip(cols)
        .map(|(commodity, values)| {
            Ok(NrcaSeries {
                country: country.to_string(),
                commodity,
                series: Series::new(values, years[0])?,
            })
        })
        .collect()
}

pub fn read_nrca_table_file(path: &Path, country: &str) -> Result<Vec<NrcaSeries>> {
    read_nrca_table(std::io::BufReader::new(std::fs::File::open(path)?), country)
}

/// Writes series as a years x commodities table, values x10^6 with two
/// decimals. All series must share the same years.
pub fn write_nrca_table<W: Write>(out: W, series: &[NrcaSeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["year".to_string()];
    header.extend(series.iter().map(|s| s.commodity.clone()));
    w.write_record(&header)?;
    if let Some(first) = series.first() {
        for (k, year) in first.series.years().enumerate() {
            let mut row = vec![year.to_string()];
            for s in series {
                if s.series.start_year() != first.series.start_year() || s.series.len() != first.series.len() {
                    return Err(Error::InvalidConfig("series cover different years".into()));
                }
                row.push(format!("{:.2}", s.values()[k] * DISPLAY_SCALE));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{build_panel, TradeRecord};

    fn rec(r: &str, y: i32, c: &str, v: f64) -> TradeRecord {
        TradeRecord {
            reporter: r.into(),
            year: y,
            hs_code: c.into(),
            export_value: v,
        }
    }

    #[test]
    fn identical_share_structure_is_neutral() {
        let p = build_panel(&[
            rec("A", 2000, "5201", 10.0),
            rec("A", 2000, "6309", 20.0),
            rec("B", 2000, "5201", 20.0),
            rec("B", 2000, "6309", 40.0),
        ])
        .unwrap();
        for c in ["A", "B"] {
            for j in ["5201", "6309"] {
                assert!(nrca_value(&p, c, j, 2000).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_share_series_is_zero() {
        let mut recs = Vec::new();
        for (k, y) in (2000..2005).enumerate() {
            let f = 1.0 + k as f64;
            recs.push(rec("A", y, "5201", 10.0 * f));
            recs.push(rec("A", y, "6309", 30.0 * f));
            recs.push(rec("B", y, "5201", 5.0 * f));
            recs.push(rec("B", y, "6309", 15.0 * f));
        }
        let p = build_panel(&recs).unwrap();
        let s = nrca_series(&p, "A", "5201").unwrap();
        assert_eq!(s.values().len(), 5);
        assert!(s.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn missing_country_errors() {
        let p = build_panel(&[rec("A", 2000, "5201", 1.0), rec("A", 2001, "5201", 1.0)]).unwrap();
        assert!(matches!(
            nrca_value(&p, "Z", "5201", 2000),
            Err(Error::MissingCell { .. })
        ));
    }

    #[test]
    fn zero_world_trade_errors() {
        let p = build_panel(&[rec("A", 2000, "5201", 0.0)]).unwrap();
        assert!(matches!(
            nrca_value(&p, "A", "5201", 2000),
            Err(Error::ZeroWorldTrade(2000))
        ));
    }

    fn series(code: &str, start: i32, v: &[f64]) -> NrcaSeries {
        NrcaSeries {
            country: "USA".into(),
            commodity: code.into(),
            series: Series::new(v.to_vec(), start).unwrap(),
        }
    }

    #[test]
    fn two_isolated_positive_years_do_not_qualify() {
        let s = series("1111", 2010, &[-1.0, 1.0, -1.0, 1.0, -1.0, -1.0, -1.0]);
        assert!(screen_revealed(&[s], (2010, 2016), 3, 0.0).unwrap().is_empty());
    }

    #[test]
    fn longest_run_and_ordering() {
        let a = series("1111", 2010, &[1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0]);
        let b = series("2222", 2010, &[5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0]);
        let out = screen_revealed(&[a, b], (2010, 2016), 3, 0.0).unwrap();
        assert_eq!(out[0].commodity, "2222");
        assert_eq!(out[1].commodity, "1111");
        assert_eq!((out[1].run_start, out[1].run_end), (2010, 2012));
    }

    #[test]
    fn threshold_filters_small_values() {
        let s = series("1111", 2010, &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(screen_revealed(&[s.clone()], (2010, 2013), 3, 0.0).unwrap().len(), 1);
        assert!(screen_revealed(&[s], (2010, 2013), 3, 1.0).unwrap().is_empty());
    }

    #[test]
    fn window_outside_series() {
        let s = series("1111", 2010, &[1.0, 1.0, 1.0]);
        assert!(matches!(
            screen_revealed(&[s], (2009, 2012), 3, 0.0),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn table_roundtrip_keeps_two_decimals() {
        let s = vec![series("5201", 1996, &[474.32e-6, 420.97e-6]), series("6309", 1996, &[23.11e-6, 22.84e-6])];
        let mut buf = Vec::new();
        write_nrca_table(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "year,5201,6309\n1996,474.32,23.11\n1997,420.97,22.84\n");
        let back = read_nrca_table(&buf[..], "USA").unwrap();
        assert!((back[0].values()[0] - 474.32e-6).abs() < 1e-15);
    }
}
