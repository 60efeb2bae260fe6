"""Gibbs conditionals for the low-rank structure.

Covers the weight vector, its two-level shrinkage hyperparameters, the factor
matrices and their Gaussian-Gamma hyperparameters.  The weight prior is a
zero-mean Gaussian with per-component variance gamma_r, gamma_r carries a
Gamma hyperprior governed by kappa_r, and the marginal over the weights is a
reweighted L1 penalty whose per-component shrink strength sqrt(kappa_r)
decreases with the weight magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream
from .tensors import CPFactors, DenseTensor, ObservationMask, component_values, cp_at_observed

# collapsed components are pruned by the engine; the floor only guards the
# 1/gamma and 1/kappa divisions in the meantime
SHRINKAGE_FLOOR = 1e-12


@dataclass
class HyperParams:
    """Shared conjugate hyperparameters plus the observation noise precision."""

    mu0: float = 0.0
    beta0: float = 1e-6
    a0: float = 1e-6
    b0: float = 1e-6
    tau0: float = 1e3

    def __post_init__(self):
        for name in ("beta0", "a0", "b0", "tau0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class LowRankState:
    """Current CP factors plus every low-rank hyperparameter."""

    cp: CPFactors
    gamma: np.ndarray
    kappa: np.ndarray
    factor_mean: np.ndarray       # one Gaussian mean per mode
    factor_precision: np.ndarray  # one Gaussian precision per mode

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=np.float64)
        self.kappa = np.asarray(self.kappa, dtype=np.float64)
        self.factor_mean = np.asarray(self.factor_mean, dtype=np.float64)
        self.factor_precision = np.asarray(self.factor_precision, dtype=np.float64)
        if self.gamma.shape != (self.cp.R,) or self.kappa.shape != (self.cp.R,):
            raise ValueError("gamma and kappa must have one entry per component")
        if np.any(self.gamma <= 0) or np.any(self.kappa <= 0):
            raise ValueError("gamma and kappa must be strictly positive")
        if np.any(self.factor_precision <= 0):
            raise ValueError("factor precisions must be strictly positive")

    @classmethod
    def initial(cls, dims, r: int) -> "LowRankState":
        """All-ones factors and weights, unit hyperparameters, zero means."""
        cp = CPFactors(np.ones(r), [np.ones((n, r)) for n in dims])
        return cls(cp, np.ones(r), np.ones(r), np.zeros(len(dims)), np.ones(len(dims)))


# -- posterior-parameter helpers (shared by entry samplers and the engine) ---

def lambda_site(gamma_r: float, tau0: float, b: np.ndarray, ytilde: np.ndarray):
    """Posterior precision and mean of one weight given its component values
    b over observed entries and the matching partial residuals."""
    prec = 1.0 / gamma_r + tau0 * float(b @ b)
    mean = tau0 * float(b @ ytilde) / prec
    return prec, mean


def factor_rows_site(fprec: float, fmean: float, tau0: float, rows: np.ndarray,
                     n_rows: int, c: np.ndarray, ytilde: np.ndarray,
                     eta0: float = 0.0, neighbor: np.ndarray | None = None):
    """Posterior precisions and means for every row of one factor column.

    rows holds the mode-k coordinate of each observed entry, c the per-entry
    coefficient (weight times the other modes' factors).  With a spatial
    prior, eta0 adds precision and pulls each row toward its neighborhood
    reconstruction.
    """
    prec = fprec + tau0 * np.bincount(rows, weights=c * c, minlength=n_rows)
    mean = tau0 * np.bincount(rows, weights=c * ytilde, minlength=n_rows) + fprec * fmean
    if neighbor is not None:
        prec = prec + eta0
        mean = mean + eta0 * neighbor
    return prec, mean / prec


def factor_mean_site(u: np.ndarray, fprec: float, hyper: HyperParams):
    n, r = u.shape
    prec = fprec * (hyper.beta0 + n * r)
    mean = fprec * (u.sum() + hyper.beta0 * hyper.mu0) / prec
    return prec, mean


def factor_precision_site(u: np.ndarray, fmean: float, hyper: HyperParams):
    n, r = u.shape
    shape = hyper.a0 + (n * r + 1) / 2.0
    rate = hyper.b0 + (((u - fmean) ** 2).sum() + hyper.beta0 * (fmean - hyper.mu0) ** 2) / 2.0
    return shape, rate


# -- entry-level samplers -----------------------------------------------------

def _observed_arrays(y: DenseTensor, e: DenseTensor, mask: ObservationMask):
    obs = mask.observed_indices()
    midx = mask.mode_indices()
    return obs, midx, y.flat[obs], e.flat[obs]


def sample_lambda_entry(state: LowRankState, r: int, y: DenseTensor, e: DenseTensor,
                        mask: ObservationMask, hyper: HyperParams, rng: RngStream) -> float:
    """Redraw weight r from its Gaussian conditional and store it."""
    _, midx, y_obs, e_obs = _observed_arrays(y, e, mask)
    b = component_values(state.cp, r, midx)
    others = cp_at_observed(state.cp, midx) - state.cp.lam[r] * b
    prec, mean = lambda_site(state.gamma[r], hyper.tau0, b, y_obs - e_obs - others)
    draw = rng.gaussian(mean, prec)
    state.cp.lam[r] = draw
    return draw


def sample_gamma_entry(state: LowRankState, r: int, rng: RngStream) -> float:
    """Redraw the prior variance of weight r.

    The conditional is generalized inverse Gaussian of order 1/2 with
    a = kappa_r and b = lam_r^2; its mean is |lam_r|/sqrt(kappa_r) + 1/kappa_r.
    """
    draw = max(rng.gig_half(state.kappa[r], state.cp.lam[r] ** 2), SHRINKAGE_FLOOR)
    state.gamma[r] = draw
    return draw


def sample_kappa_entry(state: LowRankState, r: int, rng: RngStream) -> float:
    """Redraw the reweighting parameter of component r.

    Conditional density is proportional to kappa * exp(-gamma_r kappa / 2),
    a Gamma with shape 2 and rate gamma_r / 2 (mean 4 / gamma_r).
    """
    draw = max(rng.gamma(2.0, state.gamma[r] / 2.0), SHRINKAGE_FLOOR)
    state.kappa[r] = draw
    return draw


def sample_factor_entry(state: LowRankState, k: int, i: int, r: int, y: DenseTensor,
                        e: DenseTensor, mask: ObservationMask, hyper: HyperParams,
                        rng: RngStream, spatial=None) -> float:
    """Redraw one factor-matrix entry from its Gaussian conditional.

    spatial, when given, must expose eta0 and a per-mode weight list; mode k's
    weight matrix ties row i toward the weighted combination of other rows.
    """
    _, midx, y_obs, e_obs = _observed_arrays(y, e, mask)
    in_slice = midx[k] == i
    sidx = [m[in_slice] for m in midx]
    u_col = state.cp.factors[k][:, r]
    c = state.cp.lam[r] * np.ones(int(in_slice.sum()))
    for s in range(state.cp.K):
        if s != k:
            c = c * state.cp.factors[s][sidx[s], r]
    others = cp_at_observed(state.cp, sidx) - c * u_col[i]
    ytilde = y_obs[in_slice] - e_obs[in_slice] - others

    eta0, neighbor = 0.0, None
    if spatial is not None and spatial.weights[k] is not None:
        eta0 = spatial.eta0
        neighbor = np.array([spatial.weights[k][:, i] @ u_col])
    prec, mean = factor_rows_site(
        state.factor_precision[k], state.factor_mean[k], hyper.tau0,
        np.zeros(ytilde.size, dtype=np.int64), 1, c, ytilde, eta0, neighbor)
    draw = rng.gaussian(mean[0], prec[0])
    state.cp.factors[k][i, r] = draw
    return draw


def sample_factor_mean(state: LowRankState, k: int, hyper: HyperParams, rng: RngStream) -> float:
    prec, mean = factor_mean_site(state.cp.factors[k], state.factor_precision[k], hyper)
    draw = rng.gaussian(mean, prec)
    state.factor_mean[k] = draw
    return draw


def sample_factor_precision(state: LowRankState, k: int, hyper: HyperParams,
                            rng: RngStream) -> float:
    shape, rate = factor_precision_site(state.cp.factors[k], state.factor_mean[k], hyper)
    draw = rng.gamma(shape, rate)
    state.factor_precision[k] = draw
    return draw
