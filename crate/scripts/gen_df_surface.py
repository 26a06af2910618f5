"""Generate the finite-sample Dickey-Fuller tau (constant, no trend) quantile table.

For each sample size T (observations in the test regression) the null
distribution of tau is simulated from Gaussian random walks, quantiles are
taken on a fixed probability grid, and for each probability a response
surface q(T) = b0 + b1/T + b2/T^2 + b3/T^3 is fitted by least squares.
Output: crates/core/data/df_tau_constant.csv
"""
import sys
import numpy as np

SIZES = [10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 22, 25, 30, 35, 40, 50, 60,
         80, 100, 150, 200, 300, 500, 1000]
PROBS = [0.0001, 0.0002, 0.0005, 0.001, 0.002, 0.005, 0.01, 0.015, 0.02, 0.025,
         0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.125, 0.15, 0.175, 0.20,
         0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80,
         0.85, 0.90, 0.925, 0.95, 0.975, 0.98, 0.99, 0.995, 0.999, 0.9995, 0.9999]
REPS = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
CHUNK = 50_000


def taus(rng, nobs, reps):
    e = rng.standard_normal((reps, nobs + 1))
    y = np.cumsum(e, axis=1)
    dy = np.diff(y, axis=1)
    yl = y[:, :-1]
    ylc = yl - yl.mean(1, keepdims=True)
    dyc = dy - dy.mean(1, keepdims=True)
    sxx = (ylc ** 2).sum(1)
    rho = (ylc * dyc).sum(1) / sxx
    res = dyc - rho[:, None] * ylc
    s2 = (res ** 2).sum(1) / (nobs - 2)
    return rho / np.sqrt(s2 / sxx)


def main():
    rng = np.random.default_rng(20240611)
    quant = np.zeros((len(SIZES), len(PROBS)))
    for i, t in enumerate(SIZES):
        chunk = max(1000, min(CHUNK, 20_000_000 // t))
        parts = []
        done = 0
        while done < REPS:
            k = min(chunk, REPS - done)
            parts.append(taus(rng, t, k))
            done += k
        tau = np.concatenate(parts)
        quant[i] = np.quantile(tau, PROBS)
        print(f"T={t} done", file=sys.stderr)
    inv = 1.0 / np.array(SIZES, dtype=float)
    design = np.column_stack([np.ones_like(inv), inv, inv ** 2, inv ** 3])
    with open("crates/core/data/df_tau_constant.csv", "w") as f:
        f.write(f"# Dickey-Fuller tau, constant no trend; {REPS} replications per size; sizes {SIZES[0]}..{SIZES[-1]}\n")
        f.write("prob,b0,b1,b2,b3\n")
        for j, p in enumerate(PROBS):
            coef, *_ = np.linalg.lstsq(design, quant[:, j], rcond=None)
            f.write(f"{p},{coef[0]:.6f},{coef[1]:.5f},{coef[2]:.4f},{coef[3]:.3f}\n")
            fitted = design @ coef
            err = np.abs(fitted - quant[:, j]).max()
            print(f"p={p} max abs fit err {err:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
