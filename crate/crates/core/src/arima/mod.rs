//! ARIMA(p,d,q) estimation, AIC selection, residual diagnostics and
//! forecasting.
//!
//! Estimation is conditional least squares on the differenced series:
//! pre-sample deviations and innovations are zero, the innovation variance
//! is `SSE / (n - k)` with `k` estimated mean/ARMA parameters, and
//! `AIC = -2 loglik + 2k` with the log-likelihood evaluated at `SSE / n`.

mod diagnostics;
mod estimate;
mod forecast;
pub mod poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::OrderCandidate;
use crate::series::{difference, mean, Series};

pub use diagnostics::{ljung_box, ljung_box_residuals, DiagnosticsResult};
pub use forecast::{forecast, percent_forecast_error, ForecastEntry, ForecastResult};

pub(crate) use estimate::{arma_residuals, yule_walker_with_variance};
use estimate::{levenberg_marquardt, starting_points, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    /// Drift when d = 1, mean when d = 0.
    pub with_constant: bool,
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize, with_constant: bool) -> Self {
        ArimaSpec {
            p,
            d,
            q,
            with_constant,
        }
    }

    /// Mean/ARMA parameters estimated (innovation variance excluded).
    pub fn n_params(&self) -> usize {
        self.p + self.q + usize::from(self.with_constant)
    }

    fn layout(&self) -> Layout {
        Layout {
            p: self.p,
            q: self.q,
            with_mean: self.with_constant,
        }
    }
}

impl std::fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub constant: f64,
    /// SSE / (n - k).
    pub sigma2: f64,
    pub sse: f64,
    pub loglik: f64,
    pub aic: f64,
    /// One residual per differenced observation.
    pub residuals: Series,
    /// False when the optimizer hit its iteration cap or the estimate lies
    /// outside the stationary/invertible region.
    pub converged: bool,
    pub iterations: usize,
    pub stationary: bool,
    pub invertible: bool,
    /// Training observations (levels) the model was fitted on.
    pub observed: Series,
}

impl FittedModel {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Observations after differencing.
    pub fn n_eff(&self) -> usize {
        self.residuals.len()
    }

    /// AIC the model would report on data multiplied by `scale`: the fit is
    /// scale-equivariant, so only the log-likelihood shifts.
    pub fn aic_at_scale(&self, scale: f64) -> f64 {
        self.aic + 2.0 * self.n_eff() as f64 * scale.ln()
    }

    /// Residuals of the fitted recursion applied to another series of the
    /// same length (used for outlier screening with fixed parameters).
    pub fn residuals_for(&self, levels: &[f64]) -> Vec<f64> {
        let w = crate::series::difference_slice(levels, self.spec.d);
        arma_residuals(&w, self.constant, &self.ar, &self.ma)
    }

    /// Applies the pi-weight filter `phi(B)(1-B)^d / theta(B)` to a signal
    /// with zero pre-sample values, leaving out the constant.
    pub fn filter_signal(&self, signal: &[f64]) -> Vec<f64> {
        let w = crate::series::difference_slice(signal, self.spec.d);
        arma_residuals(&w, 0.0, &self.ar, &self.ma)
    }
}

const MA_BOUNDARY_TOL: f64 = 1e-4;

/// Fits ARIMA(p,d,q) by conditional least squares.
pub fn fit(series: &Series, spec: ArimaSpec) -> Result<FittedModel> {
    let w_series = difference(series, spec.d)?;
    let w = w_series.values();
    let n = w.len();
    let k = spec.n_params();
    if n <= k + 1 {
        return Err(Error::TooShort {
            needed: spec.d + k + 2,
            got: series.len(),
        });
    }
    let layout = spec.layout();

    let (beta, iterations, lm_converged) = if spec.p == 0 && spec.q == 0 {
        let mu = if spec.with_constant { mean(w) } else { 0.0 };
        (layout.join(mu, &[], &[]), 0, true)
    } else {
        let spread = {
            let m = mean(w);
            (w.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let mut typical = vec![1.0; layout.len()];
        if spec.with_constant {
            typical[0] = mean(w).abs().max(spread).max(f64::MIN_POSITIVE);
        }
        // MA estimates are confined to the invertible region; outside it the
        // conditional residual recursion is not a valid innovation filter.
        let run = |start: Vec<f64>| {
            levenberg_marquardt(
                |b| {
                    let (mu, ar, ma) = layout.split(b);
                    if !poly::is_invertible(ma) {
                        return vec![f64::INFINITY; n];
                    }
                    arma_residuals(w, mu, ar, ma)
                },
                start,
                &typical,
            )
        };
        let mut best = None::<estimate::LmOutcome>;
        for start in starting_points(w, layout) {
            let out = run(start);
            if out.sse.is_finite() && best.as_ref().map_or(true, |b| out.sse < b.sse) {
                best = Some(out);
            }
        }
        let best = best.ok_or(Error::AllFitsFailed)?;
        (best.beta, best.iterations, best.converged)
    };

    let (mu, ar, ma) = layout.split(&beta);
    let residuals = arma_residuals(w, mu, ar, ma);
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let scale: f64 = w.iter().map(|v| v * v).sum();
    if sse <= f64::EPSILON * f64::EPSILON * scale || sse == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let sigma2 = sse / (n - k) as f64;
    let nf = n as f64;
    let loglik = -0.5 * nf * ((2.0 * std::f64::consts::PI * sse / nf).ln() + 1.0);
    let aic = -2.0 * loglik + 2.0 * k as f64;
    let stationary = poly::is_stationary(ar);
    let invertible = poly::is_invertible(ma);
    // The invertibility constraint is active: the estimate sits on the edge
    // of the admissible region rather than at an interior optimum.
    let on_ma_boundary = poly::max_ma_inverse_root(ma) > 1.0 - MA_BOUNDARY_TOL;

    Ok(FittedModel {
        spec,
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        constant: mu,
        sigma2,
        sse,
        loglik,
        aic,
        residuals: Series::new(residuals, w_series.start_year())?,
        converged: lm_converged && stationary && invertible && !on_ma_boundary,
        iterations,
        stationary,
        invertible,
        observed: series.clone(),
    })
}

/// Outcome of fitting one candidate order.
#[derive(Debug, Clone)]
pub struct CandidateFit {
    pub spec: ArimaSpec,
    pub result: std::result::Result<FittedModel, String>,
}

/// Fits every distinct candidate order with differencing `d`.
pub fn fit_candidates(
    series: &Series,
    d: usize,
    candidates: &[OrderCandidate],
    with_constant: bool,
) -> Vec<CandidateFit> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for c in candidates {
        let spec = ArimaSpec::new(c.p, d, c.q, with_constant);
        if seen.contains(&spec) {
            continue;
        }
        seen.push(spec);
        out.push(CandidateFit {
            spec,
            result: fit(series, spec).map_err(|e| e.to_string()),
        });
    }
    out
}

/// Minimum-AIC model among the candidates. Ties go to the smaller p+q, then
/// the smaller q. Non-converged fits take part and keep their flag.
pub fn select_best(
    series: &Series,
    d: usize,
    candidates: &[OrderCandidate],
    with_constant: bool,
) -> Result<FittedModel> {
    if candidates.is_empty() {
        return Err(Error::EmptyVector);
    }
    best_of(fit_candidates(series, d, candidates, with_constant))
}

/// Picks the minimum-AIC fit from already fitted candidates.
pub fn best_of(fits: Vec<CandidateFit>) -> Result<FittedModel> {
    fits.into_iter()
        .filter_map(|c| c.result.ok())
        .min_by(|a, b| {
            let key = |m: &FittedModel| (m.spec.p + m.spec.q, m.spec.q);
            if (a.aic - b.aic).abs() <= 1e-9 * a.aic.abs().max(1.0) {
                key(a).cmp(&key(b))
            } else {
                a.aic.total_cmp(&b.aic)
            }
        })
        .ok_or(Error::AllFitsFailed)
}
