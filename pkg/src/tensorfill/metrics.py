"""Recovery-quality metrics: relative reconstruction error, PSNR, SSIM."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .tensors import DenseTensor

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass
class MetricReport:
    rre: float
    psnr: float
    ssim: float


def _as_array(t) -> np.ndarray:
    return t.data if isinstance(t, DenseTensor) else np.asarray(t, dtype=np.float64)


def rre(truth, estimate) -> float:
    """Frobenius norm of the error over the Frobenius norm of the truth."""
    a, b = _as_array(truth), _as_array(estimate)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    denom = np.linalg.norm(a)
    if denom == 0:
        raise ValueError("truth tensor has zero norm, relative error undefined")
    return float(np.linalg.norm(b - a) / denom)


def psnr(truth, estimate, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE) in decibels; infinity when the error is zero."""
    a, b = _as_array(truth), _as_array(estimate)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))


def _gaussian_kernel() -> np.ndarray:
    half = SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * SSIM_SIGMA**2))
    return k / k.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    half = kernel.size // 2
    out = correlate1d(img, kernel, axis=0, mode="constant")
    out = correlate1d(out, kernel, axis=1, mode="constant")
    return out[half:-half, half:-half]


def _ssim_single(a: np.ndarray, b: np.ndarray) -> float:
    # pad tiny images symmetrically so at least one window position exists
    if min(a.shape) < SSIM_WINDOW:
        pw = [(0, max(0, SSIM_WINDOW - s)) for s in a.shape]
        a = np.pad(a, pw, mode="symmetric")
        b = np.pad(b, pw, mode="symmetric")
    k = _gaussian_kernel()
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_a = _filter_valid(a, k)
    mu_b = _filter_valid(b, k)
    var_a = _filter_valid(a * a, k) - mu_a * mu_a
    var_b = _filter_valid(b * b, k) - mu_b * mu_b
    cov = _filter_valid(a * b, k) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(truth, estimate) -> float:
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), dynamic
    range 1.  Multi-channel images average per-channel SSIM; 4-mode stacks
    average over the trailing frame mode as well."""
    a, b = _as_array(truth), _as_array(estimate)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.ndim == 2:
        return _ssim_single(a, b)
    if a.ndim == 3:
        return float(np.mean([_ssim_single(a[:, :, c], b[:, :, c])
                              for c in range(a.shape[2])]))
    if a.ndim == 4:
        return float(np.mean([ssim(a[:, :, :, t], b[:, :, :, t])
                              for t in range(a.shape[3])]))
    raise ValueError(f"ssim expects 2-4 mode arrays, got {a.ndim}")


def report(truth, estimate, peak: float = 1.0) -> MetricReport:
    return MetricReport(rre(truth, estimate), psnr(truth, estimate, peak),
                        ssim(truth, estimate))


def write_metric_rows(path, rows: list[dict]) -> None:
    """Append metric rows to a CSV, creating the header on first write."""
    fields = ["dataset", "missing_ratio", "rre", "psnr", "ssim", "seconds", "seed"]
    new_file = not os.path.exists(os.fspath(path))
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        if new_file:
            writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in fields})
