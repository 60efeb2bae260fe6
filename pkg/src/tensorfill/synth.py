"""Synthetic benchmark data: low-rank tensors, residual regimes, noise, masks.

The five residual regimes place exact entry counts (nearest-integer rounding,
assignment by random permutation) rather than per-entry Bernoulli draws, and
the generator records which population produced each entry so that fitted
mixture parameters can be compared against the ground truth mechanically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream
from .tensors import CPFactors, DenseTensor, ObservationMask, cp_reconstruct

DEGENERATE_PRECISION = 1e12  # reference precision for exactly-zero populations


@dataclass
class Population:
    """One residual population: a fraction of entries and their law."""

    fraction: float
    dist: str  # "zero" | "uniform" | "gaussian"
    params: tuple = ()

    def reference_mean(self) -> float:
        if self.dist == "zero":
            return 0.0
        if self.dist == "uniform":
            lo, hi = self.params
            return (lo + hi) / 2.0
        return self.params[0]

    def reference_precision(self) -> float:
        if self.dist == "zero":
            return DEGENERATE_PRECISION
        if self.dist == "uniform":
            lo, hi = self.params
            return 12.0 / (hi - lo) ** 2
        return 1.0 / self.params[1]

    def draw(self, rng: RngStream, n: int) -> np.ndarray:
        if self.dist == "zero":
            return np.zeros(n)
        if self.dist == "uniform":
            lo, hi = self.params
            return lo + (hi - lo) * rng.uniform(n)
        mean, var = self.params
        return mean + np.sqrt(var) * rng.standard_normal(n)


@dataclass
class ResidualSpec:
    kind: str
    populations: list[Population] = field(default_factory=list)

    def __post_init__(self):
        total = sum(p.fraction for p in self.populations)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"population fractions must sum to 1, got {total}")

    @classmethod
    def preset(cls, kind: str) -> "ResidualSpec":
        """The five benchmark regimes, by name."""
        presets = {
            "zero": [Population(1.0, "zero")],
            "gaussian": [Population(1.0, "gaussian", (0.0, 0.01))],
            "sparse": [Population(0.1, "uniform", (-2.0, 2.0)),
                       Population(0.9, "zero")],
            "mixture_zero_mean": [Population(0.1, "uniform", (-2.0, 2.0)),
                                  Population(0.3, "gaussian", (0.0, 0.1)),
                                  Population(0.6, "gaussian", (0.0, 0.005))],
            "mixture_nonzero_mean": [Population(0.1, "uniform", (-1.0, 4.0)),
                                     Population(0.2, "gaussian", (0.1, 0.1)),
                                     Population(0.7, "gaussian", (-0.1, 1.0 / 300.0))],
        }
        if kind not in presets:
            raise ValueError(f"unknown residual kind {kind!r}; choose from {sorted(presets)}")
        return cls(kind, presets[kind])


@dataclass
class ResidualDraw:
    tensor: DenseTensor
    assignments: np.ndarray  # population index per entry, flat order
    spec: ResidualSpec


def population_counts(n: int, fractions) -> np.ndarray:
    """Nearest-integer population sizes, largest population absorbs rounding."""
    counts = np.array([round(f * n) for f in fractions], dtype=np.int64)
    counts[int(np.argmax(counts))] += n - counts.sum()
    return counts


def _lowrank_from_stream(dims, true_rank: int, rng: RngStream):
    if true_rank < 1 or true_rank > min(dims):
        raise ValueError(f"true_rank must be in [1, {min(dims)}]")
    lam = -2.0 + 4.0 * rng.uniform(true_rank)
    factors = [rng.standard_normal((n, true_rank)) for n in dims]
    cp = CPFactors(lam, factors)
    return cp, cp_reconstruct(cp)


def _residual_from_stream(dims, spec: ResidualSpec, rng: RngStream) -> ResidualDraw:
    n = int(np.prod(dims))
    counts = population_counts(n, [p.fraction for p in spec.populations])
    perm = rng.permutation(n)
    values = np.zeros(n)
    assignments = np.zeros(n, dtype=np.int64)
    start = 0
    for idx, (pop, cnt) in enumerate(zip(spec.populations, counts)):
        chosen = perm[start:start + cnt]
        values[chosen] = pop.draw(rng, cnt)
        assignments[chosen] = idx
        start += cnt
    return ResidualDraw(DenseTensor(values.reshape(dims), copy=False), assignments, spec)


def _corrupt_from_stream(tensor: DenseTensor, noise_var: float, missing_ratio: float,
                         rng: RngStream):
    if not 0.0 <= missing_ratio < 1.0:
        raise ValueError("missing_ratio must be in [0, 1)")
    if noise_var < 0:
        raise ValueError("noise_var must be nonnegative")
    noisy = tensor.data.copy()
    if noise_var > 0:
        noisy += np.sqrt(noise_var) * rng.standard_normal(tensor.dims)
    n = tensor.size
    observed = round((1.0 - missing_ratio) * n)
    flags = np.zeros(n, dtype=bool)
    flags[rng.permutation(n)[:observed]] = True
    return DenseTensor(noisy, copy=False), ObservationMask(flags.reshape(tensor.dims), copy=False)


def gen_lowrank(dims, true_rank: int, seed: int) -> tuple[CPFactors, DenseTensor]:
    """Low-rank tensor with standard-normal factor entries and weights drawn
    uniformly from [-2, 2]."""
    return _lowrank_from_stream(dims, true_rank, RngStream(seed))


def gen_residual(dims, spec: ResidualSpec, seed: int) -> ResidualDraw:
    """Residual tensor with exact population counts assigned by permutation."""
    return _residual_from_stream(dims, spec, RngStream(seed))


def corrupt_and_mask(tensor: DenseTensor, noise_var: float, missing_ratio: float,
                     seed: int) -> tuple[DenseTensor, ObservationMask]:
    """Add Gaussian observation noise and pick an exact-count uniform mask."""
    return _corrupt_from_stream(tensor, noise_var, missing_ratio, RngStream(seed))


@dataclass
class Benchmark:
    """One synthetic problem instance plus its ground truth."""

    truth: DenseTensor          # low-rank part plus residual
    lowrank: DenseTensor
    cp: CPFactors
    residual: ResidualDraw
    observed: DenseTensor       # noisy tensor (all entries carry values)
    mask: ObservationMask
    seed: int
    noise_var: float
    missing_ratio: float

    def ground_truth_dict(self) -> dict:
        return {
            "dims": list(self.truth.dims),
            "true_rank": self.cp.R,
            "lambda": self.cp.lam.tolist(),
            "seed": self.seed,
            "noise_var": self.noise_var,
            "missing_ratio": self.missing_ratio,
            "observed_count": self.mask.observed_count,
            "residual": {
                "kind": self.residual.spec.kind,
                "populations": [
                    {"fraction": p.fraction, "dist": p.dist, "params": list(p.params),
                     "mean": p.reference_mean(), "precision": p.reference_precision()}
                    for p in self.residual.spec.populations
                ],
            },
        }


def make_benchmark(dims, true_rank: int, residual_kind: str, missing_ratio: float,
                   seed: int, noise_var: float = 0.001) -> Benchmark:
    """Full benchmark pipeline; each stage draws from its own jumped substream
    of the master seed, so stages are individually reproducible."""
    base = RngStream(seed)
    cp, lowrank = _lowrank_from_stream(dims, true_rank, base.jumped(1))
    residual = _residual_from_stream(dims, ResidualSpec.preset(residual_kind), base.jumped(2))
    truth = DenseTensor(lowrank.data + residual.tensor.data, copy=False)
    observed, mask = _corrupt_from_stream(truth, noise_var, missing_ratio, base.jumped(3))
    return Benchmark(truth, lowrank, cp, residual, observed, mask,
                     seed, noise_var, missing_ratio)
