//! SVG forecast chart. Level shifts are drawn as `<circle>` and additive
//! outliers as `<rect>`; no other element uses those tags, so markers can
//! be counted by tag.

use std::fmt::Write as _;
use std::path::Path;

use crate::arima::{FittedModel, ForecastResult};
use crate::error::Result;
use crate::nrca::{NrcaSeries, DISPLAY_SCALE};
use crate::outliers::{OutlierEvent, OutlierKind};

const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the observed series (training and later years), forecasts with
/// their 95% band, and outlier markers at the affected observations.
pub fn render_forecast_svg(
    series: &NrcaSeries,
    model: &FittedModel,
    forecasts: &ForecastResult,
    events: &[OutlierEvent],
) -> String {
    let s = DISPLAY_SCALE;
    let obs: Vec<(i32, f64)> = series
        .series
        .years()
        .zip(series.values())
        .map(|(y, v)| (y, v * s))
        .collect();
    let fc: Vec<(i32, f64, f64, f64)> = forecasts
        .entries
        .iter()
        .map(|e| (e.year, e.point * s, e.lo95 * s, e.hi95 * s))
        .collect();

    let x0 = obs.iter().map(|o| o.0).chain(fc.iter().map(|f| f.0)).min().unwrap_or(0);
    let x1 = obs.iter().map(|o| o.0).chain(fc.iter().map(|f| f.0)).max().unwrap_or(1);
    let vals = obs
        .iter()
        .map(|o| o.1)
        .chain(fc.iter().flat_map(|f| [f.1, f.2, f.3]));
    let (mut y0, mut y1) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(y1 > y0) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    let span_x = f64::from((x1 - x0).max(1));
    let px = |year: i32| LEFT + f64::from(year - x0) / span_x * (W - LEFT - RIGHT);
    let py = |v: f64| TOP + (y1 - v) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="18" font-family="sans-serif" font-size="13" text-anchor="middle">HS{} NRCA x 1e6, ARIMA{}</text>"#,
        W / 2.0,
        escape(&series.commodity),
        model.spec
    );
    // Axes.
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM
    );
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}" stroke="black"/>"#, H - BOTTOM);
    let step = if x1 - x0 > 12 { 4 } else { 1 };
    for year in (x0..=x1).filter(|y| (y - x0) % step == 0) {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{year}</text>"#,
            px(year),
            H - BOTTOM + 14.0
        );
    }
    for k in 0..=4 {
        let v = y0 + (y1 - y0) * f64::from(k) / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.1}</text>"#,
            LEFT - 4.0,
            py(v) + 3.0
        );
    }

    if !fc.is_empty() {
        let mut band = String::new();
        for f in &fc {
            let _ = write!(band, "{:.2},{:.2} ", px(f.0), py(f.3));
        }
        for f in fc.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(f.0), py(f.2));
        }
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="steelblue" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );
    }
    let line = |pts: &[(f64, f64)]| {
        pts.iter()
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let hist: Vec<(f64, f64)> = obs.iter().map(|o| (px(o.0), py(o.1))).collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        line(&hist)
    );
    // Forecast path starts from the last training observation.
    let origin = model.observed.end_year();
    let mut fpath: Vec<(f64, f64)> = obs
        .iter()
        .filter(|o| o.0 == origin)
        .map(|o| (px(o.0), py(o.1)))
        .collect();
    fpath.extend(fc.iter().map(|f| (px(f.0), py(f.1))));
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5" stroke-dasharray="5,3"/>"#,
        line(&fpath)
    );
    for f in &fc {
        let (x, y) = (px(f.0), py(f.1));
        let _ = writeln!(
            out,
            r#"<path d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z" fill="steelblue"/>"#,
            x,
            y - 4.0,
            x + 4.0,
            y,
            x,
            y + 4.0,
            x - 4.0,
            y
        );
    }
    for e in events {
        let Some(&(_, v)) = obs.iter().find(|o| o.0 == e.year) else {
            continue;
        };
        let (x, y) = (px(e.year), py(v));
        match e.kind {
            OutlierKind::LS => {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="7" fill="none" stroke="firebrick" stroke-width="2"><title>LS {}</title></circle>"#,
                    e.year
                );
            }
            OutlierKind::AO => {
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="none" stroke="darkorange" stroke-width="2"><title>AO {}</title></rect>"#,
                    x - 6.0,
                    y - 6.0,
                    e.year
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_forecast_plot(
    series: &NrcaSeries,
    model: &FittedModel,
    forecasts: &ForecastResult,
    events: &[OutlierEvent],
    path: &Path,
) -> Result<()> {
    std::fs::write(path, render_forecast_svg(series, model, forecasts, events))?;
    Ok(())
}
