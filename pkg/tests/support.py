"""Shared oracle helpers: grid-integrated CDFs and KS distances."""

import numpy as np
from scipy.integrate import cumulative_trapezoid


def grid_cdf(grid: np.ndarray, log_density) -> np.ndarray:
    """Normalized CDF of an unnormalized log-density integrated on a grid."""
    logd = np.asarray(log_density(grid), dtype=np.float64)
    dens = np.exp(logd - logd.max())
    cdf = cumulative_trapezoid(dens, grid, initial=0.0)
    return cdf / cdf[-1]


def ks_distance(samples: np.ndarray, grid: np.ndarray, log_density) -> float:
    """Kolmogorov-Smirnov distance between draws and a grid-integrated density.

    The density callable returns the unnormalized log density; it is the
    independent route against which a sampler is checked.
    """
    cdf = grid_cdf(grid, log_density)
    xs = np.sort(np.asarray(samples))
    f_at = np.interp(xs, grid, cdf)
    n = xs.size
    upper = np.max(np.arange(1, n + 1) / n - f_at)
    lower = np.max(f_at - np.arange(0, n) / n)
    return float(max(upper, lower))


def gaussian_log_density(mean: float, precision: float):
    return lambda x: -0.5 * precision * (x - mean) ** 2


def gamma_log_density(shape: float, rate: float):
    return lambda x: (shape - 1.0) * np.log(x) - rate * x


def gig_half_log_density(a: float, b: float):
    """Order-1/2 generalized inverse Gaussian: x^(-1/2) exp(-(a x + b/x)/2)."""
    return lambda x: -0.5 * np.log(x) - 0.5 * (a * x + b / x)
