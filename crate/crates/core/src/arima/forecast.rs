use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::difference_slice;

use super::poly::{integrated_ar, psi_weights};
use super::FittedModel;

/// Gaussian multiplier for 95% limits.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub h: usize,
    pub year: i32,
    pub point: f64,
    pub stderr: f64,
    pub lo95: f64,
    pub hi95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub entries: Vec<ForecastEntry>,
}

impl ForecastResult {
    pub fn at_year(&self, year: i32) -> Option<&ForecastEntry> {
        self.entries.iter().find(|e| e.year == year)
    }
}

/// Multi-step forecasts from the end of the training sample, integrated
/// back to levels, with psi-weight standard errors.
pub fn forecast(model: &FittedModel, horizon: usize) -> Result<ForecastResult> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let d = model.spec.d;
    let levels = model.observed.values();
    let w = difference_slice(levels, d);
    let e = model.residuals.values();
    let mu = model.constant;

    // Deviations from the mean, extended with forecasts; innovations
    // extended with zeros.
    let mut x: Vec<f64> = w.iter().map(|v| v - mu).collect();
    let mut eps: Vec<f64> = e.to_vec();
    let n = x.len();
    for h in 0..horizon {
        let t = n + h;
        let mut v = 0.0;
        for (i, phi) in model.ar.iter().enumerate() {
            if t > i {
                v += phi * x[t - 1 - i];
            }
        }
        for (j, theta) in model.ma.iter().enumerate() {
            if t > j {
                v += theta * eps[t - 1 - j];
            }
        }
        x.push(v);
        eps.push(0.0);
    }

    // Undo the differencing one order at a time: level_t = w_t + sum of
    // binomial-weighted lagged levels.
    let binom: Vec<f64> = integrated_ar(&[], d);
    let mut hist: Vec<f64> = levels.to_vec();
    let mut points = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let mut v = x[n + h] + mu;
        for (i, c) in binom.iter().enumerate() {
            v += c * hist[hist.len() - 1 - i];
        }
        hist.push(v);
        points.push(v);
    }

    let psi = psi_weights(&integrated_ar(&model.ar, d), &model.ma, horizon);
    let sigma = model.sigma();
    let mut cum = 0.0;
    let last_year = model.observed.end_year();
    let entries = points
        .into_iter()
        .enumerate()
        .map(|(i, point)| {
            cum += psi[i] * psi[i];
            let stderr = sigma * cum.sqrt();
            ForecastEntry {
                h: i + 1,
                year: last_year + i as i32 + 1,
                point,
                stderr,
                lo95: point - Z95 * stderr,
                hi95: point + Z95 * stderr,
            }
        })
        .collect();
    Ok(ForecastResult { entries })
}

/// `100 * |actual - forecast| / |actual|`.
pub fn percent_forecast_error(actual: f64, forecast: f64) -> Result<f64> {
    if actual == 0.0 {
        return Err(Error::ZeroActual);
    }
    Ok(100.0 * (actual - forecast).abs() / actual.abs())
}
