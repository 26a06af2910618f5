use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::series::uncentered_acf;

use super::FittedModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsResult {
    pub to_lag: usize,
    pub chi_square: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Ljung-Box portmanteau test on the model residuals, with degrees of
/// freedom reduced by the number of ARMA coefficients.
pub fn ljung_box(model: &FittedModel, to_lag: usize) -> Result<DiagnosticsResult> {
    let params = model.spec.p + model.spec.q;
    let e = model.residuals.values();
    ljung_box_residuals(e, to_lag, params)
}

/// Ljung-Box on a raw residual vector. Residual autocorrelations are taken
/// about zero, not the sample mean.
pub fn ljung_box_residuals(e: &[f64], to_lag: usize, params: usize) -> Result<DiagnosticsResult> {
    let n = e.len();
    if to_lag <= params || to_lag >= n {
        return Err(Error::InsufficientLag { to_lag, params, n });
    }
    let r = uncentered_acf(e, to_lag);
    let nf = n as f64;
    let q: f64 = nf
        * (nf + 2.0)
        * r.iter()
            .enumerate()
            .map(|(i, rk)| rk * rk / (nf - (i + 1) as f64))
            .sum::<f64>();
    let df = to_lag - params;
    let chi = ChiSquared::new(df as f64).expect("positive df");
    Ok(DiagnosticsResult {
        to_lag,
        chi_square: q,
        df,
        p_value: chi.sf(q).clamp(0.0, 1.0),
    })
}
