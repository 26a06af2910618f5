//! Shared series primitives: differencing, sample moments, autocorrelation
//! and least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equally spaced annual observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    start_year: i32,
}

impl Series {
    pub fn new(values: Vec<f64>, start_year: i32) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Series { values, start_year })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start_year + i as i32)
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value observed in `year`, if covered.
    pub fn at_year(&self, year: i32) -> Option<f64> {
        let idx = year.checked_sub(self.start_year)?;
        usize::try_from(idx).ok().and_then(|i| self.values.get(i).copied())
    }

    /// Observations from `start_year` through `end_year` inclusive.
    pub fn window(&self, start_year: i32, end_year: i32) -> Result<Series> {
        if start_year < self.start_year || end_year > self.end_year() || end_year < start_year {
            return Err(Error::WindowOutOfRange {
                start: start_year,
                end: end_year,
            });
        }
        let a = (start_year - self.start_year) as usize;
        let b = (end_year - self.start_year) as usize;
        Series::new(self.values[a..=b].to_vec(), start_year)
    }

    /// Affine transform `a + b * x`, used mostly by invariance tests.
    pub fn affine(&self, a: f64, b: f64) -> Series {
        Series {
            values: self.values.iter().map(|v| a + b * v).collect(),
            start_year: self.start_year,
        }
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// d-th order differences. `start_year` advances by `d`.
pub fn difference(series: &Series, d: usize) -> Result<Series> {
    if series.len() <= d {
        return Err(Error::TooShort {
            needed: d + 1,
            got: series.len(),
        });
    }
    let mut values = series.values.clone();
    for _ in 0..d {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(Series {
        values,
        start_year: series.start_year + d as i32,
    })
}

/// Plain-slice differencing for internal signal construction.
pub(crate) fn difference_slice(x: &[f64], d: usize) -> Vec<f64> {
    let mut values = x.to_vec();
    for _ in 0..d {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    values
}

/// Sample autocorrelations r_1..r_max_lag with the biased (divide by the
/// lag-0 sum) estimator.
pub fn sample_acf(series: &Series, max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= series.len() {
        return Err(Error::TooShort {
            needed: max_lag + 1,
            got: series.len(),
        });
    }
    let m = series.mean();
    let centered: Vec<f64> = series.values.iter().map(|v| v - m).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if denom <= 0.0 || denom <= 1e-28 * series.values.iter().map(|v| v * v).sum::<f64>() {
        return Err(Error::ConstantSeries);
    }
    Ok((1..=max_lag).map(|k| lagged_sum(&centered, k) / denom).collect())
}

/// Autocorrelations of a zero-mean sequence without re-centering
/// (residual convention for portmanteau tests). Returns zeros for an
/// all-zero input.
pub fn uncentered_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let denom: f64 = x.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return vec![0.0; max_lag];
    }
    (1..=max_lag).map(|k| lagged_sum(x, k) / denom).collect()
}

fn lagged_sum(x: &[f64], k: usize) -> f64 {
    if k >= x.len() {
        return 0.0;
    }
    x[..x.len() - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum()
}

/// Result of an ordinary least squares regression.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// SSE / (n - k).
    pub residual_variance: f64,
    pub sse: f64,
}

impl OlsFit {
    pub fn t_stat(&self, i: usize) -> f64 {
        self.coefficients[i] / self.std_errors[i]
    }
}

const RANK_TOL: f64 = 1e-10;

/// Least squares via the singular value decomposition. Columns are rejected
/// as rank deficient when a singular value falls below `1e-10` times the
/// largest.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidConfig(format!(
            "design has {n} rows but response has {} values",
            y.len()
        )));
    }
    if n <= k {
        return Err(Error::TooShort {
            needed: k + 1,
            got: n,
        });
    }
    if k == 0 {
        let sse = y.iter().map(|v| v * v).sum::<f64>();
        return Ok(OlsFit {
            coefficients: vec![],
            residuals: y.to_vec(),
            std_errors: vec![],
            residual_variance: sse / n as f64,
            sse,
        });
    }
    // Scale columns to unit norm so the rank test is not fooled by units.
    let norms: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    if norms.iter().any(|&c| c == 0.0 || !c.is_finite()) {
        return Err(Error::RankDeficient);
    }
    let mut xs = x.clone();
    for (j, c) in norms.iter().enumerate() {
        xs.column_mut(j).scale_mut(1.0 / c);
    }
    let svd = xs.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.max();
    if s.iter().any(|&v| v <= RANK_TOL * smax) {
        return Err(Error::RankDeficient);
    }
    let u = svd.u.as_ref().ok_or(Error::RankDeficient)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::RankDeficient)?;
    let yv = DVector::from_column_slice(y);
    let uty = u.transpose() * &yv;
    let z = DVector::from_iterator(k, uty.iter().zip(s.iter()).map(|(a, b)| a / b));
    let beta_s = v_t.transpose() * z;
    let fitted = &xs * &beta_s;
    let residuals: Vec<f64> = yv.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let residual_variance = sse / (n - k) as f64;
    // (X'X)^-1 for scaled columns is V S^-2 V'.
    let std_errors: Vec<f64> = (0..k)
        .map(|j| {
            let var: f64 = (0..k).map(|i| (v_t[(i, j)] / s[i]).powi(2)).sum();
            (var * residual_variance).sqrt() / norms[j]
        })
        .collect();
    let coefficients: Vec<f64> = beta_s.iter().zip(&norms).map(|(b, c)| b / c).collect();
    Ok(OlsFit {
        coefficients,
        residuals,
        std_errors,
        residual_variance,
        sse,
    })
}
