"""Seeded random streams and the distribution samplers used by the Gibbs chain.

A stream wraps a counter-based Philox generator, so identical seeds give
identical sequences across platforms, parallel workers can split substreams
with the documented ``jumped`` method, and the generator state can be
serialized and restored exactly.
"""

from __future__ import annotations

import numpy as np

_TINY = np.finfo(np.float64).tiny  # smallest positive normal double


class RngStream:
    """One deterministic random stream."""

    def __init__(self, seed: int | None = None, _bitgen=None):
        if _bitgen is None:
            _bitgen = np.random.Philox(seed)
        self._bitgen = _bitgen
        self._gen = np.random.Generator(_bitgen)

    def jumped(self, jumps: int = 1) -> "RngStream":
        """Independent substream 2^128 * jumps draws ahead (Philox jump)."""
        return RngStream(_bitgen=self._bitgen.jumped(jumps))

    def get_state(self) -> dict:
        return self._bitgen.state

    def set_state(self, state: dict) -> None:
        self._bitgen.state = state

    # -- base draws ---------------------------------------------------------

    def uniform(self, size=None):
        return self._gen.random(size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    # -- distributions ------------------------------------------------------

    def gaussian(self, mean, precision, size=None):
        """Normal draw parametrized by mean and precision (inverse variance)."""
        mean = np.asarray(mean, dtype=np.float64)
        precision = np.asarray(precision, dtype=np.float64)
        if np.any(precision <= 0):
            raise ValueError("precision must be positive")
        scalar = mean.ndim == 0 and precision.ndim == 0 and size is None
        if size is None:
            size = np.broadcast_shapes(mean.shape, precision.shape)
        z = self.standard_normal(None if scalar else size)
        out = mean + z / np.sqrt(precision)
        return float(out) if scalar else out

    def gamma(self, shape, rate, size=None):
        """Gamma draw with density proportional to x^(shape-1) exp(-rate x).

        Marsaglia-Tsang squeeze for shape >= 1; smaller shapes are boosted
        through a shape+1 draw times U^(1/shape), evaluated in log space so
        that near-flat hyperpriors (shape ~ 1e-6) never round to exactly 0.
        """
        shape = np.asarray(shape, dtype=np.float64)
        rate = np.asarray(rate, dtype=np.float64)
        if np.any(shape <= 0) or np.any(rate <= 0):
            raise ValueError("gamma shape and rate must be positive")
        scalar = shape.ndim == 0 and rate.ndim == 0 and size is None
        if size is None:
            size = np.broadcast_shapes(shape.shape, rate.shape)
        shape_b = np.broadcast_to(shape, size).reshape(-1)
        rate_b = np.broadcast_to(rate, size).reshape(-1)

        boosted = shape_b < 1.0
        alpha = np.where(boosted, shape_b + 1.0, shape_b)
        draws = self._standard_gamma_ge1(alpha)
        if boosted.any():
            u = self.uniform(int(boosted.sum()))
            logx = np.log(draws[boosted]) + np.log(u) / shape_b[boosted]
            draws[boosted] = np.maximum(np.exp(logx), _TINY)
        out = np.maximum(draws / rate_b, _TINY).reshape(size)
        return float(out) if scalar else out

    def _standard_gamma_ge1(self, alpha: np.ndarray) -> np.ndarray:
        """Marsaglia-Tsang (2000) rejection sampler, all alpha >= 1."""
        d = alpha - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(alpha.shape[0])
        pending = np.arange(alpha.shape[0])
        while pending.size:
            x = self.standard_normal(pending.size)
            v = (1.0 + c[pending] * x) ** 3
            u = self.uniform(pending.size)
            ok = v > 0
            sq = np.zeros_like(v)
            np.log(v, out=sq, where=ok)
            accept = ok & (
                (u < 1.0 - 0.0331 * x**4)
                | (np.log(u) < 0.5 * x**2 + d[pending] * (1.0 - v + sq))
            )
            hit = pending[accept]
            out[hit] = d[hit] * v[accept]
            pending = pending[~accept]
        return out

    def gig_half(self, a, b, size=None):
        """Generalized inverse Gaussian draw of order 1/2.

        Density proportional to x^(-1/2) exp(-(a x + b / x) / 2) with a > 0,
        b >= 0.  The reciprocal is inverse-Gaussian distributed, which the
        Michael-Schucany-Haas transform samples exactly; b = 0 degenerates to
        Gamma(1/2, a/2).  The mean is sqrt(b/a) + 1/a.
        """
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if np.any(a <= 0):
            raise ValueError("gig parameter a must be positive")
        if np.any(b < 0):
            raise ValueError("gig parameter b must be nonnegative")
        scalar = a.ndim == 0 and b.ndim == 0 and size is None
        if size is None:
            size = np.broadcast_shapes(a.shape, b.shape)
        a_b = np.broadcast_to(a, size).reshape(-1)
        b_b = np.broadcast_to(b, size).reshape(-1)

        out = np.empty(a_b.shape[0])
        zero = b_b == 0.0
        if zero.any():
            out[zero] = self.gamma(0.5, a_b[zero] / 2.0, size=int(zero.sum()))
        pos = ~zero
        if pos.any():
            ap, bp = a_b[pos], b_b[pos]
            mu = np.sqrt(ap / bp)     # reciprocal ~ InverseGaussian(mu, lam=a)
            lam = ap
            y = self.standard_normal(int(pos.sum())) ** 2
            w = mu + mu * mu * y / (2.0 * lam) \
                - (mu / (2.0 * lam)) * np.sqrt(4.0 * mu * lam * y + (mu * y) ** 2)
            w = np.maximum(w, _TINY)
            u = self.uniform(int(pos.sum()))
            flip = u > mu / (mu + w)
            w[flip] = (mu[flip] ** 2) / w[flip]
            out[pos] = np.maximum(1.0 / w, _TINY)
        out = out.reshape(size)
        return float(out) if scalar else out

    def dirichlet(self, alpha) -> np.ndarray:
        """Dirichlet draw from a vector of positive concentrations."""
        alpha = np.asarray(alpha, dtype=np.float64)
        if alpha.ndim != 1 or alpha.size < 1:
            raise ValueError("alpha must be a nonempty vector")
        if np.any(alpha <= 0):
            raise ValueError("all Dirichlet concentrations must be positive")
        g = self.gamma(alpha, 1.0)
        return g / g.sum()

    def categorical(self, pi) -> np.ndarray:
        """One-hot draw from a probability vector."""
        pi = np.asarray(pi, dtype=np.float64)
        if np.any(pi < 0):
            raise ValueError("probabilities must be nonnegative")
        total = pi.sum()
        if total <= 0 or abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {total}")
        idx = self._pick(np.cumsum(pi), self.uniform())
        out = np.zeros(pi.size)
        out[idx] = 1.0
        return out

    def categorical_rows(self, probs: np.ndarray) -> np.ndarray:
        """Row-wise categorical labels for a (n, D) matrix of probabilities."""
        cum = np.cumsum(probs, axis=1)
        u = self.uniform(probs.shape[0]) * cum[:, -1]
        return np.minimum((cum < u[:, None]).sum(axis=1), probs.shape[1] - 1)

    @staticmethod
    def _pick(cum: np.ndarray, u: float) -> int:
        return min(int(np.searchsorted(cum, u * cum[-1], side="right")), cum.size - 1)
