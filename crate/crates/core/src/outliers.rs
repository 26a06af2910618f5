//! Iterative detection of additive outliers (AO) and permanent level
//! shifts (LS) against a fitted ARIMA model with fixed parameters.

use serde::{Deserialize, Serialize};

use crate::arima::FittedModel;
use crate::error::{Error, Result};
use crate::series::Series;

/// Series shorter than this use the model sigma instead of the robust one.
pub const ROBUST_SIGMA_MIN_N: usize = 15;
/// Normal-consistency factor for the median absolute deviation.
const MAD_SCALE: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutlierKind {
    AO,
    LS,
}

impl std::fmt::Display for OutlierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutlierKind::AO => "AO",
            OutlierKind::LS => "LS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierEvent {
    pub kind: OutlierKind,
    pub year: i32,
    /// Estimated effect in series units.
    pub magnitude: f64,
    pub t_stat: f64,
    /// Detection round, starting at 1.
    pub iteration: usize,
}

/// Location of the largest |t| across both kinds. At equal nonzero |t| on
/// the same index the level shift wins; otherwise the earliest index wins.
pub fn classify_max(t_ao: &[f64], t_ls: &[f64]) -> Result<(OutlierKind, usize, f64)> {
    if t_ao.is_empty() || t_ao.len() != t_ls.len() {
        return Err(Error::EmptyInput);
    }
    let mut best = (OutlierKind::AO, 0, t_ao[0]);
    for i in 0..t_ao.len() {
        for (kind, t) in [(OutlierKind::AO, t_ao[i]), (OutlierKind::LS, t_ls[i])] {
            let (bk, bi, bt) = best;
            let better = t.abs() > bt.abs()
                || (t.abs() == bt.abs() && t != 0.0 && bi == i && kind == OutlierKind::LS && bk == OutlierKind::AO);
            if better {
                best = (kind, i, t);
            }
        }
    }
    Ok(best)
}

/// 1.4826 * median(|e|): the MAD taken about zero, since model residuals
/// have mean zero by construction.
fn robust_sigma(e: &[f64]) -> f64 {
    let mut a: Vec<f64> = e.iter().map(|v| v.abs()).collect();
    a.sort_by(f64::total_cmp);
    let m = a.len();
    let med = if m % 2 == 1 {
        a[m / 2]
    } else {
        0.5 * (a[m / 2 - 1] + a[m / 2])
    };
    MAD_SCALE * med
}

fn indicator(n: usize, at: usize, kind: OutlierKind) -> Vec<f64> {
    (0..n)
        .map(|t| match kind {
            OutlierKind::AO => f64::from(u8::from(t == at)),
            OutlierKind::LS => f64::from(u8::from(t >= at)),
        })
        .collect()
}

/// Runs the AO/LS search. `series` holds the levels the model was fitted
/// on; each round estimates every (kind, year) effect by least squares on
/// the pi-weight-filtered signature, records the largest |t| if it reaches
/// `critical`, removes that effect and repeats.
pub fn detect(model: &FittedModel, series: &Series, critical: f64, max_events: usize) -> Result<Vec<OutlierEvent>> {
    if !(critical > 0.0) || max_events == 0 {
        return Err(Error::InvalidConfig(
            "outlier critical must be positive and max_events at least 1".into(),
        ));
    }
    let n = series.len();
    let mut y = series.values().to_vec();
    let mut events = Vec::new();
    // Signatures depend only on the fixed model, so filter them once.
    let sigs: Vec<[Option<(Vec<f64>, f64)>; 2]> = (0..n)
        .map(|at| {
            [OutlierKind::AO, OutlierKind::LS].map(|kind| {
                if kind == OutlierKind::LS && at == 0 {
                    return None;
                }
                let x = model.filter_signal(&indicator(n, at, kind));
                let sxx: f64 = x.iter().map(|v| v * v).sum();
                (sxx > 1e-12).then_some((x, sxx))
            })
        })
        .collect();

    for iteration in 1..=max_events {
        let e = model.residuals_for(&y);
        let mut sigma = if n >= ROBUST_SIGMA_MIN_N { robust_sigma(&e) } else { 0.0 };
        if !(sigma > 0.0) {
            sigma = model.sigma();
        }
        let mut t = [vec![0.0; n], vec![0.0; n]];
        let mut omega = [vec![0.0; n], vec![0.0; n]];
        for (at, pair) in sigs.iter().enumerate() {
            for (k, sig) in pair.iter().enumerate() {
                if let Some((x, sxx)) = sig {
                    let w = x.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / sxx;
                    omega[k][at] = w;
                    t[k][at] = w * sxx.sqrt() / sigma;
                }
            }
        }
        let (kind, at, tmax) = classify_max(&t[0], &t[1])?;
        if !(tmax.abs() >= critical) {
            break;
        }
        let k = usize::from(kind == OutlierKind::LS);
        let w = omega[k][at];
        for (yv, s) in y.iter_mut().zip(indicator(n, at, kind)) {
            *yv -= w * s;
        }
        events.push(OutlierEvent {
            kind,
            year: series.start_year() + at as i32,
            magnitude: w,
            t_stat: tmax,
            iteration,
        });
    }
    Ok(events)
}
