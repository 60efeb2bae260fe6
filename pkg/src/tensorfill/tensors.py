"""Dense K-mode tensors, observation masks and CP factor primitives."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def validate_dims(dims) -> tuple[int, ...]:
    """Check a mode-size tuple: at least two modes, all sizes positive."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError(f"need at least 2 modes, got {len(dims)}")
    if any(d < 1 for d in dims):
        raise ValueError(f"all mode sizes must be positive, got {dims}")
    return dims


class DenseTensor:
    """Dense real tensor stored row-major (C order) over the listed mode order.

    Entries are float64; Gibbs precision updates accumulate sums over up to N
    terms and 32-bit accumulation drifts.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray, copy: bool = True):
        arr = np.array(data, dtype=np.float64, copy=copy, order="C")
        validate_dims(arr.shape)
        self.data = arr

    @classmethod
    def zeros(cls, dims) -> "DenseTensor":
        return cls(np.zeros(validate_dims(dims)), copy=False)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def flat(self) -> np.ndarray:
        """Flat row-major view of the entries."""
        return self.data.reshape(-1)

    def check_finite(self) -> "DenseTensor":
        if not np.isfinite(self.data).all():
            raise ValueError("tensor contains non-finite entries")
        return self

    def copy(self) -> "DenseTensor":
        return DenseTensor(self.data, copy=True)

    def __repr__(self):
        return f"DenseTensor(dims={self.dims})"


class ObservationMask:
    """Boolean indicator tensor marking which entries are observed."""

    __slots__ = ("flags",)

    def __init__(self, flags: np.ndarray, copy: bool = True):
        arr = np.array(flags, dtype=bool, copy=copy, order="C")
        validate_dims(arr.shape)
        self.flags = arr

    @classmethod
    def full(cls, dims) -> "ObservationMask":
        return cls(np.ones(validate_dims(dims), dtype=bool), copy=False)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.flags.shape

    @property
    def observed_count(self) -> int:
        return int(self.flags.sum())

    @property
    def flat(self) -> np.ndarray:
        return self.flags.reshape(-1)

    def observed_indices(self) -> np.ndarray:
        """Flat row-major indices of the observed entries."""
        return np.flatnonzero(self.flat)

    def mode_indices(self) -> list[np.ndarray]:
        """Per-mode coordinates of the observed entries, one array per mode."""
        return list(np.unravel_index(self.observed_indices(), self.dims))

    def __repr__(self):
        return f"ObservationMask(dims={self.dims}, observed={self.observed_count})"


@dataclass
class CPFactors:
    """Weight vector plus one factor matrix per mode.

    factors[k] has one row per index along mode k and one column per
    rank-one component; all factor matrices share the column count R.
    """

    lam: np.ndarray
    factors: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=np.float64).reshape(-1)
        self.factors = [np.asarray(u, dtype=np.float64) for u in self.factors]
        if self.lam.size < 1:
            raise ValueError("need at least one component")
        if len(self.factors) < 2:
            raise ValueError("need at least 2 factor matrices")
        for k, u in enumerate(self.factors):
            if u.ndim != 2 or u.shape[1] != self.R:
                raise ValueError(f"factor {k} must have {self.R} columns, got shape {u.shape}")

    @property
    def R(self) -> int:
        return self.lam.size

    @property
    def K(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    def copy(self) -> "CPFactors":
        return CPFactors(self.lam.copy(), [u.copy() for u in self.factors])


def cp_entry(factors: CPFactors, index) -> float:
    """Evaluate the CP model at one multi-index: sum_r lam_r * prod_k U_k[i_k, r]."""
    index = tuple(int(i) for i in index)
    if len(index) != factors.K:
        raise IndexError(f"index has {len(index)} coordinates for a {factors.K}-mode model")
    for k, (i, n) in enumerate(zip(index, factors.dims)):
        if not 0 <= i < n:
            raise IndexError(f"coordinate {i} out of bounds for mode {k} of size {n}")
    prod = factors.lam.copy()
    for k, i in enumerate(index):
        prod *= factors.factors[k][i]
    return float(prod.sum())


def cp_reconstruct(factors: CPFactors) -> DenseTensor:
    """Materialize the full tensor of the CP model."""
    letters = "abcdefghijklmnopqrstuvwxy"
    if factors.K > len(letters):
        raise ValueError("too many modes")
    subs = ",".join(f"{letters[k]}z" for k in range(factors.K))
    out = np.einsum(f"{subs},z->{''.join(letters[: factors.K])}",
                    *factors.factors, factors.lam, optimize=True)
    return DenseTensor(np.ascontiguousarray(out), copy=False)


def cp_at_observed(factors: CPFactors, mode_idx: list[np.ndarray]) -> np.ndarray:
    """Evaluate the CP model at a set of entries given per-mode coordinate arrays."""
    total = np.zeros(mode_idx[0].shape[0])
    for r in range(factors.R):
        total += factors.lam[r] * component_values(factors, r, mode_idx)
    return total


def component_values(factors: CPFactors, r: int, mode_idx: list[np.ndarray]) -> np.ndarray:
    """Per-entry product of factor-column r over all modes (weight excluded)."""
    b = factors.factors[0][mode_idx[0], r].copy()
    for k in range(1, factors.K):
        b *= factors.factors[k][mode_idx[k], r]
    return b


def residual_observation(y: float, e: float, factors: CPFactors, index, excluded_r: int) -> float:
    """Observation minus residual minus every CP component except excluded_r."""
    if not 0 <= excluded_r < factors.R:
        raise IndexError(f"component {excluded_r} out of range for R={factors.R}")
    total = cp_entry(factors, index)
    index = tuple(int(i) for i in index)
    term = factors.lam[excluded_r]
    for k, i in enumerate(index):
        term *= factors.factors[k][i, excluded_r]
    return float(y - e - (total - term))
