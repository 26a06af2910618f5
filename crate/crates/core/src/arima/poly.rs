//! Lag-polynomial helpers: root checks via companion matrices, root
//! reflection, and products.

use nalgebra::{Complex, DMatrix};

/// Eigenvalues of the companion matrix of `1 - c_1 z - ... - c_k z^k`.
/// These are the reciprocals of the polynomial roots, so the polynomial has
/// all roots outside the unit circle iff every eigenvalue has modulus < 1.
pub(crate) fn inverse_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let k = c.len();
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![Complex::new(c[0], 0.0)];
    }
    let m = DMatrix::from_fn(k, k, |i, j| {
        if i == 0 {
            c[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    // The unbounded Schur iteration can stall on near-defective inputs, so
    // cap it and report an explosive root when it does not settle.
    match m.try_schur(f64::EPSILON, SCHUR_MAX_ITER) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => vec![Complex::new(f64::INFINITY, 0.0)],
    }
}

const SCHUR_MAX_ITER: usize = 10_000;

/// Largest inverse-root modulus; below 1 means stationary (AR) or
/// invertible (MA, after sign flip).
pub(crate) fn max_inverse_root(c: &[f64]) -> f64 {
    inverse_roots(c).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// AR polynomial `1 - sum phi_i B^i` has all roots outside the unit circle.
pub fn is_stationary(ar: &[f64]) -> bool {
    max_inverse_root(ar) < 1.0
}

/// Largest inverse-root modulus of `1 + sum theta_j B^j`.
pub(crate) fn max_ma_inverse_root(ma: &[f64]) -> f64 {
    let neg: Vec<f64> = ma.iter().map(|t| -t).collect();
    max_inverse_root(&neg)
}

/// MA polynomial `1 + sum theta_j B^j` has all roots outside the unit circle.
pub fn is_invertible(ma: &[f64]) -> bool {
    max_ma_inverse_root(ma) < 1.0
}

/// Reflects roots of `1 + sum theta_j B^j` that lie inside the unit circle
/// to their reciprocal conjugates, giving the invertible polynomial with the
/// same autocorrelation structure.
pub fn reflect_ma(ma: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = ma.iter().map(|t| -t).collect();
    let lambdas: Vec<Complex<f64>> = inverse_roots(&neg)
        .into_iter()
        .map(|l| {
            let r = l.norm();
            if r > 1.0 {
                (Complex::new(1.0, 0.0) / l).conj()
            } else {
                l
            }
        })
        .collect();
    // prod_k (1 - lambda_k z)
    let mut coef = vec![Complex::new(1.0, 0.0)];
    for l in lambdas {
        let mut next = vec![Complex::new(0.0, 0.0); coef.len() + 1];
        for (i, c) in coef.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * l;
        }
        coef = next;
    }
    coef.iter().skip(1).map(|c| c.re).collect()
}

/// Coefficients of `phi(B) (1-B)^d` written as `1 - sum c_i B^i`.
pub(crate) fn integrated_ar(ar: &[f64], d: usize) -> Vec<f64> {
    // Full polynomial with leading 1.
    let mut poly: Vec<f64> = std::iter::once(1.0).chain(ar.iter().map(|a| -a)).collect();
    for _ in 0..d {
        let mut next = vec![0.0; poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c;
        }
        poly = next;
    }
    poly.iter().skip(1).map(|c| -c).collect()
}

/// MA(infinity) weights psi_0..psi_{n-1} of `phi*(B) x_t = theta(B) e_t`,
/// with `phi*` given in `1 - sum c_i B^i` form.
pub(crate) fn psi_weights(ar_full: &[f64], ma: &[f64], n: usize) -> Vec<f64> {
    let mut psi = vec![0.0; n];
    if n == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for j in 1..n {
        let mut v = if j <= ma.len() { ma[j - 1] } else { 0.0 };
        for (i, c) in ar_full.iter().enumerate().take(j) {
            v += c * psi[j - 1 - i];
        }
        psi[j] = v;
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_stationarity() {
        assert!(is_stationary(&[0.5]));
        assert!(!is_stationary(&[1.0002]));
        assert!(is_stationary(&[0.5, 0.3]));
        assert!(!is_stationary(&[0.7, 0.4]));
    }

    #[test]
    fn ma1_reflection() {
        assert!(!is_invertible(&[2.0]));
        let r = reflect_ma(&[2.0]);
        assert!((r[0] - 0.5).abs() < 1e-12);
        assert!(is_invertible(&r));
    }

    #[test]
    fn ma2_reflection_keeps_invertible_part() {
        // (1 + 0.5B)(1 + 4B) = 1 + 4.5B + 2B^2 -> (1 + 0.5B)(1 + 0.25B)
        let r = reflect_ma(&[4.5, 2.0]);
        assert!((r[0] - 0.75).abs() < 1e-10, "{r:?}");
        assert!((r[1] - 0.125).abs() < 1e-10);
    }

    #[test]
    fn integrated_random_walk() {
        assert_eq!(integrated_ar(&[], 1), vec![1.0]);
        assert_eq!(integrated_ar(&[], 2), vec![2.0, -1.0]);
        let c = integrated_ar(&[0.5], 1);
        assert!((c[0] - 1.5).abs() < 1e-15 && (c[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn psi_of_ar1() {
        let psi = psi_weights(&[0.5], &[], 4);
        assert_eq!(psi, vec![1.0, 0.5, 0.25, 0.125]);
        let psi = psi_weights(&[], &[0.4], 3);
        assert_eq!(psi, vec![1.0, 0.4, 0.0]);
    }
}
