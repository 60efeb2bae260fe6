"""Gibbs conditionals for the mixture-of-Gaussians residual structure.

Each tensor entry owns a residual value and an integer component label; the
one-hot indicator formulation is recovered implicitly from the labels, which
avoids storing N x D booleans.  Component responsibilities are always computed
in log domain with max-subtraction because the fitted precisions span several
orders of magnitude and direct density products underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lowrank import HyperParams
from .rng import RngStream
from .tensors import DenseTensor


@dataclass
class MixtureState:
    """Component parameters, per-entry labels and the residual tensor."""

    means: np.ndarray
    precisions: np.ndarray
    proportions: np.ndarray
    indicators: np.ndarray
    residual: DenseTensor

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64)
        self.precisions = np.asarray(self.precisions, dtype=np.float64)
        self.proportions = np.asarray(self.proportions, dtype=np.float64)
        self.indicators = np.asarray(self.indicators, dtype=np.int64)
        d = self.means.size
        if self.precisions.size != d or self.proportions.size != d:
            raise ValueError("component parameter vectors must share one length")
        if np.any(self.precisions <= 0):
            raise ValueError("precisions must be strictly positive")
        if np.any(self.proportions < 0) or abs(self.proportions.sum() - 1.0) > 1e-9:
            raise ValueError("proportions must be nonnegative and sum to 1")
        if self.indicators.size != self.residual.size:
            raise ValueError("one indicator per tensor entry required")
        if self.indicators.min(initial=0) < 0 or self.indicators.max(initial=0) >= d:
            raise ValueError("indicator out of component range")

    @property
    def D(self) -> int:
        return self.means.size

    @classmethod
    def initial(cls, dims, d: int, rng: RngStream) -> "MixtureState":
        """Unit precisions, zero means, uniform proportions, multinomial labels."""
        residual = DenseTensor.zeros(dims)
        props = np.full(d, 1.0 / d)
        labels = rng.categorical_rows(np.tile(props, (residual.size, 1)))
        return cls(np.zeros(d), np.ones(d), props, labels, residual)

    def counts(self) -> np.ndarray:
        return np.bincount(self.indicators, minlength=self.D)


def responsibilities(e_values: np.ndarray, means: np.ndarray, precisions: np.ndarray,
                     proportions: np.ndarray) -> np.ndarray:
    """Posterior component probabilities for each residual value, log-domain."""
    e_values = np.atleast_1d(np.asarray(e_values, dtype=np.float64))
    dev = e_values[:, None] - means[None, :]
    with np.errstate(divide="ignore"):
        logp = np.log(proportions)[None, :] + 0.5 * np.log(precisions)[None, :] \
            - 0.5 * precisions[None, :] * dev * dev
    logp -= logp.max(axis=1, keepdims=True)
    p = np.exp(logp)
    p /= p.sum(axis=1, keepdims=True)
    return p


def responsibilities_direct(e_value: float, means, precisions, proportions) -> np.ndarray:
    """Literal normalized density products; underflows for extreme precisions,
    kept as the reference path for the log-domain computation."""
    dens = proportions * np.sqrt(precisions / (2.0 * np.pi)) \
        * np.exp(-0.5 * precisions * (e_value - means) ** 2)
    return dens / dens.sum()


def residual_site(tau_z: float, mu_z: float, observed: bool, tau0: float, data_residual: float):
    """Posterior precision and mean of one residual entry given its label."""
    prec = tau_z + (tau0 if observed else 0.0)
    mean = (tau_z * mu_z + (tau0 * data_residual if observed else 0.0)) / prec
    return prec, mean


def sample_residual_entry(mix: MixtureState, index: int, y_entry: float, x_entry: float,
                          observed: bool, tau0: float, rng: RngStream) -> float:
    """Redraw the residual at one flat index; unobserved entries draw from
    their assigned component."""
    d = int(mix.indicators[index])
    prec, mean = residual_site(mix.precisions[d], mix.means[d], observed, tau0,
                               y_entry - x_entry)
    draw = rng.gaussian(mean, prec)
    mix.residual.flat[index] = draw
    return draw


def component_mean_site(e_members: np.ndarray, tau_d: float, hyper: HyperParams):
    n_d = e_members.size
    prec = tau_d * (n_d + hyper.beta0)
    mean = tau_d * (e_members.sum() + hyper.beta0 * hyper.mu0) / prec
    return prec, mean


def component_precision_site(e_members: np.ndarray, mu_d: float, hyper: HyperParams):
    shape = hyper.a0 + (e_members.size + 1) / 2.0
    rate = hyper.b0 + (((e_members - mu_d) ** 2).sum()
                       + hyper.beta0 * (mu_d - hyper.mu0) ** 2) / 2.0
    return shape, rate


def sample_component_mean(mix: MixtureState, d: int, hyper: HyperParams,
                          rng: RngStream) -> float:
    members = mix.residual.flat[mix.indicators == d]
    prec, mean = component_mean_site(members, mix.precisions[d], hyper)
    draw = rng.gaussian(mean, prec)
    mix.means[d] = draw
    return draw


def sample_component_precision(mix: MixtureState, d: int, hyper: HyperParams,
                               rng: RngStream) -> float:
    members = mix.residual.flat[mix.indicators == d]
    shape, rate = component_precision_site(members, mix.means[d], hyper)
    draw = rng.gamma(shape, rate)
    mix.precisions[d] = draw
    return draw


def sample_indicator(mix: MixtureState, e_entry: float, rng: RngStream) -> int:
    """Draw a component label for one residual value."""
    p = responsibilities(np.array([e_entry]), mix.means, mix.precisions, mix.proportions)
    return int(rng.categorical_rows(p)[0])


def sample_proportions(mix: MixtureState, alpha0: np.ndarray, rng: RngStream) -> np.ndarray:
    """Redraw the mixing proportions from their Dirichlet conditional."""
    alpha0 = np.asarray(alpha0, dtype=np.float64)
    if alpha0.size != mix.D:
        raise ValueError("one concentration per component required")
    draw = rng.dirichlet(mix.counts() + alpha0)
    mix.proportions = draw
    return draw


def select_components(counts: np.ndarray, total: int, min_weight: float) -> np.ndarray:
    """Indices of components worth keeping: occupancy at least min_weight,
    or the single best-occupied component when none qualifies."""
    keep = np.flatnonzero(counts / total >= min_weight)
    if keep.size == 0:
        keep = np.array([int(np.argmax(counts))])
    return keep


def tune_component_count(mix: MixtureState, max_d: int, min_weight: float,
                         rng: RngStream) -> MixtureState:
    """Drop starved components and reassign every label; D never grows."""
    if max_d < 1:
        raise ValueError("max_d must be at least 1")
    keep = select_components(mix.counts(), mix.residual.size, min_weight)
    if keep.size == mix.D:
        return mix
    props = mix.proportions[keep]
    props = props / props.sum()
    p = responsibilities(mix.residual.flat, mix.means[keep], mix.precisions[keep], props)
    labels = rng.categorical_rows(p)
    return MixtureState(mix.means[keep], mix.precisions[keep], props, labels, mix.residual)
