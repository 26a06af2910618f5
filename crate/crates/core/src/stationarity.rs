//! Augmented Dickey-Fuller (single mean) unit-root test and the
//! difference-until-stationary loop.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::series::{difference, ols, Series};

/// Finite-sample quantile response surfaces of the constant-only
/// Dickey-Fuller tau. Regenerate with `scripts/gen_df_surface.py`.
const DF_SURFACE: &str = include_str!("../data/df_tau_constant.csv");
pub const DF_SURFACE_VERSION: &str = "df_tau_constant/v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub tau: f64,
    pub p_value: f64,
    pub lag_order: usize,
    /// Observations in the test regression.
    pub nobs: usize,
    pub stationary: bool,
}

struct SurfaceRow {
    prob: f64,
    z: f64,
    coef: [f64; 4],
}

fn surface() -> &'static [SurfaceRow] {
    static ROWS: OnceLock<Vec<SurfaceRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        DF_SURFACE
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("prob") && !l.trim().is_empty())
            .map(|l| {
                let f: Vec<f64> = l
                    .split(',')
                    .map(|x| x.trim().parse().expect("numeric surface entry"))
                    .collect();
                SurfaceRow {
                    prob: f[0],
                    z: normal.inverse_cdf(f[0]),
                    coef: [f[1], f[2], f[3], f[4]],
                }
            })
            .collect()
    })
}

/// Smallest sample size the response surface was fitted on.
const SURFACE_MIN_NOBS: usize = 10;

/// P(tau_T < tau) under the unit-root null for a regression with `nobs`
/// observations. Interpolates linearly in normal-quantile space between the
/// tabulated probabilities and extrapolates from the outermost pair.
pub fn df_pvalue(tau: f64, nobs: usize) -> f64 {
    let rows = surface();
    let t = nobs.max(SURFACE_MIN_NOBS) as f64;
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let q = r.coef[0] + r.coef[1] / t + r.coef[2] / (t * t) + r.coef[3] / (t * t * t);
            (q, r.z)
        })
        .collect();
    // Quantiles must be increasing in probability.
    for i in 1..pts.len() {
        if pts[i].0 <= pts[i - 1].0 {
            pts[i].0 = pts[i - 1].0 + 1e-9;
        }
    }
    let interp = |a: (f64, f64), b: (f64, f64)| a.1 + (tau - a.0) * (b.1 - a.1) / (b.0 - a.0);
    let n = pts.len();
    let z = if tau <= pts[0].0 {
        interp(pts[0], pts[1])
    } else if tau >= pts[n - 1].0 {
        interp(pts[n - 2], pts[n - 1])
    } else {
        let k = pts.partition_point(|p| p.0 <= tau);
        interp(pts[k - 1], pts[k])
    };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.cdf(z).clamp(0.0, 1.0)
}

/// Tabulated probabilities, mainly for diagnostics.
pub fn df_surface_probs() -> Vec<f64> {
    surface().iter().map(|r| r.prob).collect()
}

/// Fits `dy_t = a + rho*y_{t-1} + sum_i phi_i*dy_{t-i} + e_t` and tests
/// rho = 0 against rho < 0.
pub fn adf_test(series: &Series, lag_order: usize, alpha: f64) -> Result<AdfResult> {
    let y = series.values();
    let n = y.len();
    if n < lag_order + 10 {
        return Err(Error::TooShort {
            needed: lag_order + 10,
            got: n,
        });
    }
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    // dy[t-1] = y[t] - y[t-1]; usable t runs over lag_order+1 ..= n-1.
    let rows: Vec<usize> = (lag_order + 1..n).collect();
    let k = 2 + lag_order;
    let x = DMatrix::from_fn(rows.len(), k, |r, c| {
        let t = rows[r];
        match c {
            0 => 1.0,
            1 => y[t - 1],
            _ => dy[t - 1 - (c - 1)],
        }
    });
    let resp: Vec<f64> = rows.iter().map(|&t| dy[t - 1]).collect();
    let fit = ols(&x, &resp)?;
    let tau = fit.t_stat(1);
    let nobs = rows.len();
    let p_value = df_pvalue(tau, nobs);
    Ok(AdfResult {
        tau,
        p_value,
        lag_order,
        nobs,
        stationary: p_value <= alpha,
    })
}

/// Outcome of repeated ADF testing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferencingOutcome {
    pub d: usize,
    /// One result per differencing order tried, starting at d = 0.
    pub trail: Vec<AdfResult>,
}

/// Smallest d <= max_d whose d-times differenced series rejects a unit root.
pub fn difference_until_stationary(
    series: &Series,
    alpha: f64,
    max_d: usize,
    lag_order: usize,
) -> Result<DifferencingOutcome> {
    if max_d == 0 {
        return Err(Error::InvalidConfig("max_d must be at least 1".into()));
    }
    let mut trail = Vec::new();
    for d in 0..=max_d {
        let r = adf_test(&difference(series, d)?, lag_order, alpha)?;
        trail.push(r);
        if r.stationary {
            return Ok(DifferencingOutcome { d, trail });
        }
    }
    Err(Error::StillNonStationary(max_d))
}
