//! Tentative ARMA order identification on a stationary series: extended
//! sample autocorrelations (ESACF), smallest canonical correlations (SCAN)
//! and the minimum information criterion (MINIC).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::arima::{arma_residuals, yule_walker_with_variance};
use crate::error::{Error, Result};
use crate::series::{ols, Series};

/// Two-sided 5% normal quantile used for ESACF bands.
const Z_975: f64 = 1.959963984540054;
/// Significance level for SCAN cells and ESACF bands.
pub const IDENT_ALPHA: f64 = 0.05;
/// ESACF/SCAN pattern vertices reported per method, smallest p+q first.
pub const MAX_PATTERN_CANDIDATES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrderSource {
    Esacf,
    Scan,
    Minic,
    /// The white-noise order, always offered.
    Default,
}

impl std::fmt::Display for OrderSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrderSource::Esacf => "ESACF",
            OrderSource::Scan => "SCAN",
            OrderSource::Minic => "MINIC",
            OrderSource::Default => "DEFAULT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderCandidate {
    pub p: usize,
    pub q: usize,
    pub source: OrderSource,
    /// MINIC BIC of the (p,q) cell when computable.
    pub score: Option<f64>,
}

/// Statistics laid out as rows p = 0..=p_max and columns q = 0..=q_max.
/// `None` marks cells that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationTable {
    pub method: OrderSource,
    pub p_max: usize,
    pub q_max: usize,
    pub grid: Vec<Vec<Option<f64>>>,
}

impl IdentificationTable {
    pub fn get(&self, p: usize, q: usize) -> Option<f64> {
        self.grid.get(p).and_then(|r| r.get(q)).copied().flatten()
    }
}

fn check_len(series: &Series, p_max: usize, q_max: usize) -> Result<()> {
    let needed = p_max + q_max + 5;
    if series.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: series.len(),
        });
    }
    Ok(())
}

fn centered(series: &Series) -> Vec<f64> {
    let m = series.mean();
    series.values().iter().map(|v| v - m).collect()
}

/// Biased autocorrelation at `lag` after removing the mean.
fn acf_at(x: &[f64], lag: usize) -> Option<f64> {
    let n = x.len();
    if lag >= n {
        return None;
    }
    let m = x.iter().sum::<f64>() / n as f64;
    let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if den <= 0.0 {
        return None;
    }
    let num: f64 = (0..n - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum();
    Some(num / den)
}

/// OLS AR(k) coefficients without intercept on a centered series.
fn ar_ols(z: &[f64], k: usize) -> Option<Vec<f64>> {
    let n = z.len();
    if n <= 2 * k {
        return None;
    }
    let x = DMatrix::from_fn(n - k, k, |r, c| z[k + r - 1 - c]);
    let y: Vec<f64> = z[k..].to_vec();
    ols(&x, &y).ok().map(|f| f.coefficients)
}

/// Minimal vertices `(p,q)` of regions of insignificant cells: a cell
/// qualifies when every cell of `region(p, q)` is insignificant (or not
/// computable), and is dropped when it lies inside the region of another
/// qualifying cell. Ordered by p+q, then p.
fn pattern_vertices<F>(p_max: usize, q_max: usize, insignificant: &dyn Fn(usize, usize) -> Option<bool>, region: F) -> Vec<(usize, usize)>
where
    F: Fn(usize, usize) -> Vec<(usize, usize)>,
{
    let mut valid = Vec::new();
    for p in 0..=p_max {
        for q in 0..=q_max {
            if insignificant(p, q) != Some(true) {
                continue;
            }
            let cells = region(p, q);
            if cells.iter().all(|&(a, b)| insignificant(a, b) != Some(false)) {
                valid.push(((p, q), cells));
            }
        }
    }
    let mut out: Vec<(usize, usize)> = valid
        .iter()
        .filter(|(v, _)| !valid.iter().any(|(u, cells)| u != v && cells.contains(v)))
        .map(|(v, _)| *v)
        .collect();
    out.sort_by_key(|&(p, q)| (p + q, p));
    out.truncate(MAX_PATTERN_CANDIDATES);
    out
}

/// Extended sample autocorrelation table and the vertices of its
/// triangles of insignificant entries.
pub fn esacf(series: &Series, p_max: usize, q_max: usize) -> Result<(IdentificationTable, Vec<OrderCandidate>)> {
    check_len(series, p_max, q_max)?;
    let z = centered(series);
    let n = z.len();
    let top = p_max + q_max + 1;

    // coef[j][k] = j-th iterated AR(k) coefficients (k >= 1).
    let mut coef: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; top + 1]];
    for k in 1..=top {
        coef[0][k] = ar_ols(&z, k);
    }
    for j in 1..=q_max {
        let prev = &coef[j - 1];
        let mut next = vec![None; top + 1];
        for k in 1..=top.saturating_sub(j) {
            let (Some(a), Some(b)) = (&prev[k], &prev[k + 1]) else {
                continue;
            };
            let pivot = a[k - 1];
            if pivot.abs() < 1e-12 {
                continue;
            }
            let ratio = b[k] / pivot;
            let v: Vec<f64> = (0..k)
                .map(|l| {
                    let lagged = if l == 0 { -1.0 } else { a[l - 1] };
                    b[l] - lagged * ratio
                })
                .collect();
            next[k] = Some(v);
        }
        coef.push(next);
    }

    let mut grid = vec![vec![None; q_max + 1]; p_max + 1];
    for (k, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = if k == 0 {
                acf_at(&z, j + 1)
            } else {
                coef[j][k].as_ref().and_then(|phi| {
                    let w: Vec<f64> = (k..n)
                        .map(|t| z[t] - (0..k).map(|l| phi[l] * z[t - 1 - l]).sum::<f64>())
                        .collect();
                    acf_at(&w, j + 1)
                })
            };
        }
    }
    let table = IdentificationTable {
        method: OrderSource::Esacf,
        p_max,
        q_max,
        grid,
    };
    let insig = |k: usize, j: usize| -> Option<bool> {
        let v = table.get(k, j)?;
        // Bartlett variance from the lower-lag entries of the same row.
        let inflate: f64 = (0..j).map(|i| table.get(k, i).unwrap_or(0.0).powi(2)).sum();
        let band = Z_975 * ((1.0 + 2.0 * inflate) / (n - k - j) as f64).sqrt();
        Some(v.abs() <= band)
    };
    let verts = pattern_vertices(p_max, q_max, &insig, |p, q| {
        let mut cells = Vec::new();
        for r in p..=p_max {
            for c in (q + (r - p)).min(q_max + 1)..=q_max {
                cells.push((r, c));
            }
        }
        cells
    });
    let cands = verts
        .into_iter()
        .map(|(p, q)| OrderCandidate {
            p,
            q,
            source: OrderSource::Esacf,
            score: None,
        })
        .collect();
    Ok((table, cands))
}

/// Smallest squared canonical correlation between (z_t..z_{t-m}) and
/// (z_{t-j-1}..z_{t-j-1-m}) with its chi-square(1) p-value.
fn scan_cell(z: &[f64], m: usize, j: usize) -> Option<(f64, f64)> {
    let n = z.len();
    let start = m + j + 1;
    if n <= start + m + 2 {
        return None;
    }
    let rows = n - start;
    let dim = m + 1;
    let y = DMatrix::from_fn(rows, dim, |r, c| z[start + r - c]);
    let x = DMatrix::from_fn(rows, dim, |r, c| z[start + r - j - 1 - c]);
    let syy = y.transpose() * &y;
    let sxx = x.transpose() * &x;
    let sxy = x.transpose() * &y;
    let chol_y = syy.clone().cholesky()?;
    let sxx_inv_sxy = sxx.cholesky()?.solve(&sxy);
    let inner = sxy.transpose() * sxx_inv_sxy; // Syx Sxx^-1 Sxy
    let l = chol_y.l();
    let l_inv = l.clone().try_inverse()?;
    let mut mat = &l_inv * inner * l_inv.transpose();
    mat = (&mat + mat.transpose()) * 0.5;
    let eig = SymmetricEigen::new(mat);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let lambda = lambda.clamp(0.0, 1.0 - 1e-12);
    let v = eig.eigenvectors.column(idx).into_owned();
    let a = l_inv.transpose() * v;
    // Autocorrelation correction from the implied AR(m) filter.
    let dcorr = if j == 0 || a[0].abs() < 1e-12 {
        1.0
    } else {
        let w: Vec<f64> = (m..n)
            .map(|t| (0..dim).map(|c| a[c] / a[0] * z[t - c]).sum())
            .collect();
        1.0 + 2.0 * (1..=j).map(|i| acf_at(&w, i).unwrap_or(0.0).powi(2)).sum::<f64>()
    };
    let ratio = (lambda / dcorr).min(1.0 - 1e-12);
    let stat = -((n - m - j) as f64) * (1.0 - ratio).ln();
    let chi = ChiSquared::new(1.0).expect("df 1");
    Some((stat, chi.sf(stat)))
}

/// SCAN table of p-values and vertices of rectangles of insignificant
/// cells.
pub fn scan(series: &Series, p_max: usize, q_max: usize) -> Result<(IdentificationTable, Vec<OrderCandidate>)> {
    check_len(series, p_max, q_max)?;
    let z = centered(series);
    let mut grid = vec![vec![None; q_max + 1]; p_max + 1];
    for (m, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = scan_cell(&z, m, j).map(|(_, p)| p);
        }
    }
    let table = IdentificationTable {
        method: OrderSource::Scan,
        p_max,
        q_max,
        grid,
    };
    let insig = |m: usize, j: usize| table.get(m, j).map(|p| p > IDENT_ALPHA);
    let verts = pattern_vertices(p_max, q_max, &insig, |p, q| {
        let mut cells = Vec::new();
        for r in p..=p_max {
            for c in q..=q_max {
                cells.push((r, c));
            }
        }
        cells
    });
    let cands = verts
        .into_iter()
        .map(|(p, q)| OrderCandidate {
            p,
            q,
            source: OrderSource::Scan,
            score: None,
        })
        .collect();
    Ok((table, cands))
}

/// Residual sum of squares of the least-squares projection of `y` on the
/// columns of `x`. Collinear columns are dropped rather than rejected: when
/// p exceeds the long-AR order the lagged innovations are exact filters of
/// the lagged series, yet the projection stays unique.
fn projection_sse(x: DMatrix<f64>, y: &[f64]) -> Option<f64> {
    let svd = x.clone().svd(true, true);
    let top = svd.singular_values.max();
    if !(top > 0.0) {
        return None;
    }
    let b = DVector::from_column_slice(y);
    let beta = svd.solve(&b, top * 1e-10).ok()?;
    let r = b - x * beta;
    Some(r.norm_squared())
}

/// MINIC: a long autoregression (order by AIC up to ceil(n/4)) supplies
/// innovation estimates with zero pre-sample values; each (p,q) cell
/// regresses z_t on p lags of z and q lags of the innovations over
/// t >= max(p,q) and reports BIC = ln(sigma2) + (p+q) ln(n)/n.
pub fn minic(series: &Series, p_max: usize, q_max: usize) -> Result<(IdentificationTable, OrderCandidate)> {
    check_len(series, p_max, q_max)?;
    let z = centered(series);
    let n = z.len();
    let nf = n as f64;
    let max_long = n.div_ceil(4).max(1);
    let long = (1..=max_long)
        .filter_map(|k| {
            let (_, var) = yule_walker_with_variance(&z, k)?;
            Some((k, nf * var.ln() + 2.0 * k as f64))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .ok_or(Error::ConstantSeries)?;
    let (a, _) = yule_walker_with_variance(&z, long).ok_or(Error::ConstantSeries)?;
    let innov = arma_residuals(&z, 0.0, &a, &[]);
    let scale: f64 = z.iter().map(|v| v * v).sum::<f64>() / nf;

    let mut grid = vec![vec![None; q_max + 1]; p_max + 1];
    for (p, row) in grid.iter_mut().enumerate() {
        for (q, cell) in row.iter_mut().enumerate() {
            let start = p.max(q);
            let rows = n - start;
            let k = p + q;
            if rows <= k {
                continue;
            }
            let sse = if k == 0 {
                z.iter().map(|v| v * v).sum::<f64>()
            } else {
                let x = DMatrix::from_fn(rows, k, |r, c| {
                    let t = start + r;
                    if c < p {
                        z[t - 1 - c]
                    } else {
                        innov[t - 1 - (c - p)]
                    }
                });
                match projection_sse(x, &z[start..]) {
                    Some(v) => v,
                    None => continue,
                }
            };
            let sigma2 = sse / rows as f64;
            if !(sigma2 > 1e-12 * scale) {
                continue;
            }
            *cell = Some(sigma2.ln() + k as f64 * nf.ln() / nf);
        }
    }
    let table = IdentificationTable {
        method: OrderSource::Minic,
        p_max,
        q_max,
        grid,
    };
    let mut best: Option<(usize, usize, f64)> = None;
    for p in 0..=p_max {
        for q in 0..=q_max {
            if let Some(v) = table.get(p, q) {
                if best.map_or(true, |b| v < b.2) {
                    best = Some((p, q, v));
                }
            }
        }
    }
    let (p, q, v) = best.ok_or(Error::RankDeficient)?;
    Ok((
        table,
        OrderCandidate {
            p,
            q,
            source: OrderSource::Minic,
            score: Some(v),
        },
    ))
}

/// Per-method identification output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub esacf: (IdentificationTable, Vec<OrderCandidate>),
    pub scan: (IdentificationTable, Vec<OrderCandidate>),
    pub minic: (IdentificationTable, OrderCandidate),
}

impl Identification {
    /// All method candidates with their MINIC scores attached.
    pub fn by_method(&self) -> Vec<OrderCandidate> {
        let minic = &self.minic.0;
        self.esacf
            .1
            .iter()
            .chain(self.scan.1.iter())
            .chain(std::iter::once(&self.minic.1))
            .map(|c| OrderCandidate {
                score: minic.get(c.p, c.q),
                ..*c
            })
            .collect()
    }
}

pub fn identify(series: &Series, p_max: usize, q_max: usize) -> Result<Identification> {
    Ok(Identification {
        esacf: esacf(series, p_max, q_max)?,
        scan: scan(series, p_max, q_max)?,
        minic: minic(series, p_max, q_max)?,
    })
}

/// Union of ESACF, SCAN and MINIC candidates, deduplicated on (p,q) in that
/// source order, always including (0,0). `series` must already be
/// differenced `d` times.
pub fn tentative_orders(series: &Series, d: usize, p_max: usize, q_max: usize) -> Result<Vec<OrderCandidate>> {
    let _ = d;
    let ident = identify(series, p_max, q_max)?;
    Ok(merge_candidates(&ident))
}

pub fn merge_candidates(ident: &Identification) -> Vec<OrderCandidate> {
    let mut out: Vec<OrderCandidate> = Vec::new();
    let white = OrderCandidate {
        p: 0,
        q: 0,
        source: OrderSource::Default,
        score: ident.minic.0.get(0, 0),
    };
    for c in ident.by_method().into_iter().chain(std::iter::once(white)) {
        if !out.iter().any(|o| o.p == c.p && o.q == c.q) {
            out.push(c);
        }
    }
    out
}
