//! Seeded simulation of ARMA processes, for self-tests and calibration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::Series;

const BURN_IN: usize = 200;

/// Gaussian ARMA path `x_t = c + sum phi_i x_{t-i} + e_t + sum theta_j
/// e_{t-j}` of length `n` after a burn-in, starting in year 1.
pub fn simulate_arma(ar: &[f64], ma: &[f64], constant: f64, sigma: f64, n: usize, seed: u64) -> Result<Series> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n + BURN_IN;
    let mut x = vec![0.0; total];
    let mut e = vec![0.0; total];
    for t in 0..total {
        e[t] = normal.sample(&mut rng);
        let mut v = constant + e[t];
        for (i, phi) in ar.iter().enumerate() {
            if t > i {
                v += phi * x[t - 1 - i];
            }
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                v += theta * e[t - 1 - j];
            }
        }
        x[t] = v;
    }
    Series::new(x[BURN_IN..].to_vec(), 1)
}

/// Partial sums of `steps`, starting from `origin`.
pub fn cumulate(steps: &Series, origin: f64) -> Series {
    let mut acc = origin;
    let v: Vec<f64> = steps
        .values()
        .iter()
        .map(|s| {
            acc += s;
            acc
        })
        .collect();
    Series::new(v, steps.start_year()).expect("finite partial sums")
}
