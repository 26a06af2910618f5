//! Conditional least squares for ARMA(p,q) with an optional mean.
//!
//! Residuals follow `x_t = sum phi_i x_{t-i} + e_t + sum theta_j e_{t-j}`
//! with `x_t = w_t - mu`, pre-sample deviations and innovations set to
//! zero, so every observation contributes a residual.

use nalgebra::{DMatrix, DVector};

use crate::series::{mean, ols};

use super::poly;

/// Parameter layout: `[mu?, phi_1..phi_p, theta_1..theta_q]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub p: usize,
    pub q: usize,
    pub with_mean: bool,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.p + self.q + usize::from(self.with_mean)
    }

    pub fn split<'a>(&self, beta: &'a [f64]) -> (f64, &'a [f64], &'a [f64]) {
        let o = usize::from(self.with_mean);
        let mu = if self.with_mean { beta[0] } else { 0.0 };
        (mu, &beta[o..o + self.p], &beta[o + self.p..])
    }

    pub fn join(&self, mu: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        if self.with_mean {
            v.push(mu);
        }
        v.extend_from_slice(ar);
        v.extend_from_slice(ma);
        v
    }
}

/// One-step residuals of the ARMA recursion.
pub(crate) fn arma_residuals(w: &[f64], mu: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut e = vec![0.0; n];
    for t in 0..n {
        let mut v = w[t] - mu;
        for (i, phi) in ar.iter().enumerate() {
            if t > i {
                v -= phi * (w[t - 1 - i] - mu);
            }
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                v -= theta * e[t - 1 - j];
            }
        }
        e[t] = v;
    }
    e
}

/// Yule-Walker AR coefficients by Levinson-Durbin on the biased
/// autocovariances of `x` (already centered). Returns zeros when the
/// recursion breaks down.
pub(crate) fn yule_walker(x: &[f64], p: usize) -> Vec<f64> {
    yule_walker_with_variance(x, p)
        .map(|(phi, _)| phi)
        .unwrap_or_else(|| vec![0.0; p])
}

/// Levinson-Durbin coefficients with the final prediction-error variance.
/// `None` for a zero-variance input or a reflection coefficient outside
/// (-1, 1).
pub(crate) fn yule_walker_with_variance(x: &[f64], p: usize) -> Option<(Vec<f64>, f64)> {
    let n = x.len();
    let gamma: Vec<f64> = (0..=p)
        .map(|k| {
            if k >= n {
                0.0
            } else {
                x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
            }
        })
        .collect();
    if !(gamma[0] > 0.0) {
        return None;
    }
    let mut phi = vec![0.0; p];
    let mut var = gamma[0];
    for k in 0..p {
        let mut num = gamma[k + 1];
        for j in 0..k {
            num -= phi[j] * gamma[k - j];
        }
        let refl = num / var;
        if !refl.is_finite() || refl.abs() >= 1.0 {
            return None;
        }
        let prev = phi.clone();
        phi[k] = refl;
        for j in 0..k {
            phi[j] = prev[j] - refl * prev[k - 1 - j];
        }
        var *= 1.0 - refl * refl;
    }
    Some((phi, var))
}

/// Hannan-Rissanen two-stage starting values for (phi, theta) on a
/// centered series. `None` when the regressions cannot be formed.
pub(crate) fn hannan_rissanen(x: &[f64], p: usize, q: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let long = (p + q + 2).max(((n as f64).ln() * 2.0).ceil() as usize).min(n / 3);
    if long == 0 || long <= p.max(q) {
        return None;
    }
    let a = yule_walker(x, long);
    let e = arma_residuals(x, 0.0, &a, &[]);
    let start = long + q.max(p);
    if n <= start + p + q + 1 {
        return None;
    }
    let rows = n - start;
    let design = DMatrix::from_fn(rows, p + q, |r, c| {
        let t = start + r;
        if c < p {
            x[t - 1 - c]
        } else {
            e[t - 1 - (c - p)]
        }
    });
    let resp: Vec<f64> = (start..n).map(|t| x[t]).collect();
    let fit = ols(&design, &resp).ok()?;
    let ar = fit.coefficients[..p].to_vec();
    let ma = fit.coefficients[p..].to_vec();
    Some((ar, ma))
}

pub(crate) struct LmOutcome {
    pub beta: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-8;

/// Levenberg-Marquardt on the residual vector with a forward-difference
/// Jacobian. `typical` gives per-parameter magnitudes for step sizes and
/// the relative convergence test.
pub(crate) fn levenberg_marquardt<F>(residuals: F, start: Vec<f64>, typical: &[f64]) -> LmOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let k = start.len();
    let sse_of = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut beta = start;
    let mut r = residuals(&beta);
    let mut sse = sse_of(&r);
    let mut lambda = 1e-3;
    let scale = |i: usize, b: &[f64]| b[i].abs().max(typical[i]);

    for iter in 1..=MAX_ITER {
        let n = r.len();
        let mut jac = DMatrix::zeros(n, k);
        for i in 0..k {
            let mut h = 1e-7 * scale(i, &beta);
            let mut b = beta.clone();
            b[i] += h;
            let mut rh = residuals(&b);
            if rh.iter().any(|v| !v.is_finite()) {
                // Forward step left the admissible region; difference backward.
                h = -h;
                b[i] = beta[i] + h;
                rh = residuals(&b);
            }
            for t in 0..n {
                jac[(t, i)] = (rh[t] - r[t]) / h;
            }
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);

        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..k {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
            let rc = residuals(&cand);
            let sc = sse_of(&rc);
            if sc.is_finite() && sc <= sse {
                let rel = (0..k)
                    .map(|i| step[i].abs() / scale(i, &beta))
                    .fold(0.0, f64::max);
                beta = cand;
                r = rc;
                sse = sc;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < REL_TOL {
                    return LmOutcome {
                        beta,
                        sse,
                        iterations: iter,
                        converged: true,
                    };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left at machine precision.
            return LmOutcome {
                beta,
                sse,
                iterations: iter,
                converged: true,
            };
        }
    }
    LmOutcome {
        beta,
        sse,
        iterations: MAX_ITER,
        converged: false,
    }
}

/// Starting vectors for the optimizer: Hannan-Rissanen when available,
/// Yule-Walker AR with zero MA otherwise, plus an all-zero ARMA start.
pub(crate) fn starting_points(w: &[f64], layout: Layout) -> Vec<Vec<f64>> {
    let mu = if layout.with_mean { mean(w) } else { 0.0 };
    let x: Vec<f64> = w.iter().map(|v| v - mu).collect();
    let mut starts = Vec::new();
    if layout.q > 0 {
        if let Some((ar, ma)) = hannan_rissanen(&x, layout.p, layout.q) {
            let ar = if poly::is_stationary(&ar) { ar } else { yule_walker(&x, layout.p) };
            let ma = if poly::is_invertible(&ma) { ma } else { poly::reflect_ma(&ma) };
            if ar.iter().chain(&ma).all(|v| v.is_finite()) {
                starts.push(layout.join(mu, &ar, &ma));
            }
        }
    }
    let yw = yule_walker(&x, layout.p);
    starts.push(layout.join(mu, &yw, &vec![0.0; layout.q]));
    if layout.p + layout.q > 0 {
        starts.push(layout.join(mu, &vec![0.0; layout.p], &vec![0.0; layout.q]));
    }
    starts
}
