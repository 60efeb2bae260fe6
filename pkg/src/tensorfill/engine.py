"""Gibbs-sampling engine: initialization, sweeps, aggregation and diagnostics.

One sweep draws, in order: every weight, the shrinkage hyperparameters, every
factor-matrix column, the factor hyperparameters, then the residual tensor,
mixture means, precisions, labels and proportions.  After burn-in the chain
collects samples whose means form the completed-tensor estimate.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lowrank import (SHRINKAGE_FLOOR, HyperParams, LowRankState,
                      factor_mean_site, factor_precision_site)
from .mixture import MixtureState, responsibilities, select_components
from .rng import RngStream
from .tensors import CPFactors, DenseTensor, ObservationMask, cp_reconstruct

# two mixture components count as one when their precisions are within this
# factor and their means differ by less than this many standard deviations;
# the benchmark regimes keep true components at precision ratios >= 13
MIXTURE_MERGE_TAU_RATIO = 4.0
MIXTURE_MERGE_MEAN_SIGMA = 2.0


@dataclass
class SpatialOptions:
    """Spatial-coherence settings; weight matrices get built per run."""

    eta0: float = 1e3
    modes: tuple[int, ...] | None = None  # None enables every mode with >= 2 rows

    def __post_init__(self):
        if self.eta0 < 0:
            raise ValueError("eta0 must be nonnegative")


@dataclass
class SpatialPrior:
    """Materialized spatial prior: one row-similarity matrix per mode (or None)."""

    eta0: float
    weights: list


def build_spatial_weights(n: int, missing_ratio: float) -> np.ndarray:
    """Row-similarity weights: w_ji proportional to exp(-2 rho (i-j)^2) with
    rho the observed fraction, zero diagonal, each column normalized to 1."""
    if n < 2:
        raise ValueError("need at least 2 rows for a spatial prior")
    if not 0.0 <= missing_ratio <= 1.0:
        raise ValueError("missing_ratio must be in [0, 1]")
    rho = 1.0 - missing_ratio
    idx = np.arange(n, dtype=np.float64)
    w = np.exp(-2.0 * rho * (idx[:, None] - idx[None, :]) ** 2)
    np.fill_diagonal(w, 0.0)
    return w / w.sum(axis=0, keepdims=True)


def materialize_spatial(options: SpatialOptions, dims, missing_ratio: float) -> SpatialPrior:
    weights = []
    for k, n in enumerate(dims):
        enabled = options.modes is None or k in options.modes
        weights.append(build_spatial_weights(n, missing_ratio) if enabled and n >= 2 else None)
    return SpatialPrior(options.eta0, weights)


@dataclass
class GibbsConfig:
    """Everything one chain needs; identical configs give identical results.

    The chain cold-starts from an uninformed state, so the observation
    precision is warmed up geometrically from tau0_start to its target over
    the first tau0_ramp sweeps (burn-in only); with the target precision
    applied from sweep one, the residual mixture absorbs the entire signal
    before the low-rank part can lock on.  warm_start_factors randomizes the
    factor init (unit-variance draws), which breaks the all-equal-column
    symmetry of an all-ones start.
    """

    r_init: int = 20
    burn_in: int = 500
    samples: int = 100
    hyper: HyperParams = field(default_factory=HyperParams)
    alpha0: float = 1e-6
    max_components: int = 6
    seed: int = 0
    rank_threshold: float = 1e-5
    spatial: SpatialOptions | None = None
    collect_reconstructions: bool = True
    aggregate: str = "factor"  # "factor" or "reconstruction"
    min_component_weight: float = 1e-3
    component_tune_interval: int = 20
    rank_prune_patience: int = 50
    tau0_start: float = 1.0
    tau0_ramp: int | None = None  # None: half the burn-in
    warm_start_factors: bool = True
    merge_interval: int = 50
    merge_similarity: float = 0.9
    lambda_update: str = "auto"  # "auto", "blocked" or "entrywise"
    keep_samples: bool = False

    def __post_init__(self):
        if self.r_init < 1:
            raise ValueError("r_init must be at least 1")
        if self.burn_in < 0 or self.samples < 1:
            raise ValueError("need burn_in >= 0 and samples >= 1")
        if self.max_components < 1:
            raise ValueError("max_components must be at least 1")
        if self.rank_threshold <= 0:
            raise ValueError("rank_threshold must be positive")
        if self.aggregate not in ("factor", "reconstruction"):
            raise ValueError(f"unknown aggregate mode {self.aggregate!r}")
        if self.aggregate == "reconstruction" and not self.collect_reconstructions:
            raise ValueError("reconstruction aggregation requires collect_reconstructions")
        if self.tau0_start <= 0:
            raise ValueError("tau0_start must be positive")
        if self.lambda_update not in ("auto", "blocked", "entrywise"):
            raise ValueError(f"unknown lambda_update mode {self.lambda_update!r}")
        if not 0.0 < self.merge_similarity <= 1.0:
            raise ValueError("merge_similarity must be in (0, 1]")


@dataclass
class TraceRow:
    iteration: int
    rre: float | None
    active_rank: int
    components: int
    seconds: float


def trace_to_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "rre", "active_rank", "D", "seconds"])
        for row in trace:
            writer.writerow([row.iteration,
                             "" if row.rre is None else f"{row.rre:.8f}",
                             row.active_rank, row.components, f"{row.seconds:.6f}"])


@dataclass
class MixtureSummary:
    proportions: np.ndarray
    means: np.ndarray
    precisions: np.ndarray


@dataclass
class SampleBank:
    """Raw collected draws, for aggregation experiments and small runs."""

    dims: tuple
    lambdas: list = field(default_factory=list)
    factors: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    def __len__(self):
        return len(self.lambdas)

    def add(self, lam, factor_list, e_flat):
        self.lambdas.append(lam)
        self.factors.append(factor_list)
        self.residuals.append(e_flat)

    def reconstruction(self, t: int) -> np.ndarray:
        """Flat reconstruction of sample t (low-rank part plus residual)."""
        cp = CPFactors(self.lambdas[t], self.factors[t])
        return cp_reconstruct(cp).flat + self.residuals[t]


def estimate_rank(lambda_mean: np.ndarray, threshold: float) -> int:
    """Number of aggregated weights strictly above the threshold in magnitude."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return int((np.abs(np.asarray(lambda_mean)) > threshold).sum())


def mmse_aggregate(bank: SampleBank, mode: str = "factor"):
    """Aggregate collected draws into (mean CP factors, completed tensor).

    factor mode averages weights, factor matrices and residuals element-wise
    and reconstructs from the averages; reconstruction mode averages the
    per-sample reconstructions, which is invariant to per-sample sign and
    permutation flips of the factorization.
    """
    if len(bank) < 1:
        raise ValueError("need at least one collected sample")
    lam_bar = np.mean(bank.lambdas, axis=0)
    factors_bar = [np.mean([f[k] for f in bank.factors], axis=0)
                   for k in range(len(bank.factors[0]))]
    cp_bar = CPFactors(lam_bar, factors_bar)
    e_bar = np.mean(bank.residuals, axis=0)
    if mode == "factor":
        completed = cp_reconstruct(cp_bar).data + e_bar.reshape(bank.dims)
    elif mode == "reconstruction":
        acc = np.zeros(int(np.prod(bank.dims)))
        for t in range(len(bank)):
            acc += bank.reconstruction(t)
        completed = (acc / len(bank)).reshape(bank.dims)
    else:
        raise ValueError(f"unknown aggregate mode {mode!r}")
    return cp_bar, DenseTensor(completed)


def per_entry_uncertainty(bank: SampleBank) -> DenseTensor:
    """Entry-wise sample standard deviation (divisor n-1) of the collected
    reconstructions."""
    if len(bank) < 2:
        raise ValueError("need at least two samples for uncertainty")
    recon = np.stack([bank.reconstruction(t) for t in range(len(bank))])
    return DenseTensor(recon.std(axis=0, ddof=1).reshape(bank.dims))


@dataclass
class CompletionResult:
    completed: DenseTensor
    lowrank_mean: CPFactors
    residual_mean: DenseTensor
    estimated_rank: int
    entry_uncertainty: DenseTensor | None
    mixture_summary: MixtureSummary
    trace: list
    samples: SampleBank | None = None


class _Chain:
    """One Gibbs chain on flattened observed-entry arrays."""

    def __init__(self, y: DenseTensor, mask: ObservationMask, cfg: GibbsConfig,
                 truth: DenseTensor | None = None, rng: RngStream | None = None):
        self.cfg = cfg
        self.hyper = cfg.hyper
        self.dims = y.dims
        self.n_entries = y.size
        self.rng = rng if rng is not None else RngStream(cfg.seed)

        self.obs = mask.observed_indices()
        self.midx = [m.astype(np.int64) for m in mask.mode_indices()]
        self.y_obs = y.flat[self.obs]

        self.low = LowRankState.initial(self.dims, cfg.r_init)
        if cfg.warm_start_factors:
            for k, n in enumerate(self.dims):
                self.low.cp.factors[k] = self.rng.standard_normal((n, cfg.r_init))
        self.mix = MixtureState.initial(self.dims, cfg.max_components, self.rng)
        self.e = self.mix.residual.flat  # view, mutated in place
        self.e_obs = self.e[self.obs]
        self.alpha0 = np.full(cfg.max_components, cfg.alpha0, dtype=np.float64)

        self.spatial = None
        if cfg.spatial is not None:
            missing_ratio = 1.0 - len(self.obs) / self.n_entries
            self.spatial = materialize_spatial(cfg.spatial, self.dims, missing_ratio)

        self.truth_flat = truth.flat if truth is not None else None
        self.truth_norm = float(np.linalg.norm(self.truth_flat)) if truth is not None else 0.0

        self.below_count = np.zeros(cfg.r_init, dtype=np.int64)
        self.trace: list[TraceRow] = []
        self.bank = SampleBank(self.dims) if cfg.keep_samples else None
        self._n_collected = 0
        self._lam_sum = None
        self._u_sums = None
        self._e_sum = np.zeros(self.n_entries)
        self._props_sum = None
        self._means_sum = None
        self._precs_sum = None
        self._recon_sum = np.zeros(self.n_entries) if cfg.collect_reconstructions else None
        self._recon_sq = np.zeros(self.n_entries) if cfg.collect_reconstructions else None
        self._t0 = time.perf_counter()

    # -- helpers --------------------------------------------------------------

    def _ramp_end(self) -> int:
        ramp = self.cfg.tau0_ramp
        return int(0.7 * self.cfg.burn_in) if ramp is None else ramp

    def _tau0(self, t: int) -> float:
        """Observation precision at sweep t: geometric warm-up during burn-in."""
        target = self.hyper.tau0
        ramp = self._ramp_end()
        if ramp <= 0 or t >= ramp or self.cfg.tau0_start >= target:
            return target
        return float(self.cfg.tau0_start * (target / self.cfg.tau0_start) ** (t / ramp))

    def _component_matrix(self) -> np.ndarray:
        """Per-observed-entry factor products, one column per component."""
        u = self.low.cp.factors
        b = u[0][self.midx[0], :].copy()
        for k in range(1, len(self.dims)):
            b *= u[k][self.midx[k], :]
        return b

    def _coeff(self, k: int, r: int) -> np.ndarray:
        """Weight times the other modes' factor values, per observed entry."""
        u = self.low.cp.factors
        c = np.full(self.obs.size, self.low.cp.lam[r])
        for s in range(len(self.dims)):
            if s != k:
                c *= u[s][self.midx[s], r]
        return c

    def _cp_full(self) -> np.ndarray:
        return cp_reconstruct(self.low.cp).flat

    def _blocked(self, r_count: int) -> bool:
        mode = self.cfg.lambda_update
        if mode == "auto":
            return self.obs.size * r_count <= 50_000_000
        return mode == "blocked"

    # -- one sweep --------------------------------------------------------------

    def sweep(self, t: int) -> None:
        cfg, hyper, rng = self.cfg, self.hyper, self.rng
        low = self.low
        lam, u = low.cp.lam, low.cp.factors
        tau0 = self._tau0(t)
        r_count = low.cp.R
        k_count = len(self.dims)

        b_mat = self._component_matrix()
        cp_obs = b_mat @ lam
        data_resid = self.y_obs - self.e_obs

        if self._blocked(r_count):
            # joint weight draw; mixes across redundant components, which the
            # one-at-a-time scan leaves frozen in sign-flipped pairs
            m = tau0 * (b_mat.T @ b_mat)
            m[np.diag_indices_from(m)] += 1.0 / low.gamma
            chol = np.linalg.cholesky(m)
            mean = np.linalg.solve(m, tau0 * (b_mat.T @ data_resid))
            lam = mean + np.linalg.solve(chol.T, rng.standard_normal(r_count))
            low.cp.lam = lam
            cp_obs = b_mat @ lam
        else:
            for r in range(r_count):
                b = b_mat[:, r]
                ytilde = data_resid - cp_obs + lam[r] * b
                prec = 1.0 / low.gamma[r] + tau0 * float(b @ b)
                mean = tau0 * float(b @ ytilde) / prec
                new = mean + rng.standard_normal() / np.sqrt(prec)
                cp_obs += (new - lam[r]) * b
                lam[r] = new

        low.gamma = np.maximum(rng.gig_half(low.kappa, lam**2), SHRINKAGE_FLOOR)
        low.kappa = np.maximum(rng.gamma(2.0, low.gamma / 2.0), SHRINKAGE_FLOOR)

        # factor matrices, column by column; rows of one column are
        # conditionally independent and drawn together
        for k in range(k_count):
            rows = self.midx[k]
            n_k = self.dims[k]
            w_k = self.spatial.weights[k] if self.spatial is not None else None
            fp, fm = low.factor_precision[k], low.factor_mean[k]
            for r in range(r_count):
                c = self._coeff(k, r)
                ug = u[k][rows, r]
                ytilde = self.y_obs - self.e_obs - cp_obs + c * ug
                prec = fp + tau0 * np.bincount(rows, weights=c * c, minlength=n_k)
                num = tau0 * np.bincount(rows, weights=c * ytilde, minlength=n_k) + fp * fm
                if w_k is not None:
                    prec = prec + self.spatial.eta0
                    num = num + self.spatial.eta0 * (w_k.T @ u[k][:, r])
                newcol = num / prec + rng.standard_normal(n_k) / np.sqrt(prec)
                cp_obs += c * (newcol[rows] - ug)
                u[k][:, r] = newcol

        for k in range(k_count):
            prec, mean = factor_mean_site(u[k], low.factor_precision[k], hyper)
            low.factor_mean[k] = mean + rng.standard_normal() / np.sqrt(prec)
        for k in range(k_count):
            shape, rate = factor_precision_site(u[k], low.factor_mean[k], hyper)
            low.factor_precision[k] = rng.gamma(shape, rate)

        # residual tensor, all entries at once
        mix = self.mix
        z = mix.indicators
        tau_z = mix.precisions[z]
        prec_e = tau_z.copy()
        prec_e[self.obs] += tau0
        num_e = tau_z * mix.means[z]
        num_e[self.obs] += tau0 * (self.y_obs - cp_obs)
        self.e[:] = num_e / prec_e + rng.standard_normal(self.n_entries) / np.sqrt(prec_e)
        self.e_obs = self.e[self.obs]

        counts = np.bincount(z, minlength=mix.D)
        sums = np.bincount(z, weights=self.e, minlength=mix.D)
        prec_mu = mix.precisions * (counts + hyper.beta0)
        mean_mu = mix.precisions * (sums + hyper.beta0 * hyper.mu0) / prec_mu
        mix.means = mean_mu + rng.standard_normal(mix.D) / np.sqrt(prec_mu)

        ss = np.bincount(z, weights=(self.e - mix.means[z]) ** 2, minlength=mix.D)
        mix.precisions = rng.gamma(hyper.a0 + (counts + 1) / 2.0,
                                   hyper.b0 + (ss + hyper.beta0 * (mix.means - hyper.mu0) ** 2) / 2.0)

        probs = responsibilities(self.e, mix.means, mix.precisions, mix.proportions)
        mix.indicators = rng.categorical_rows(probs)
        mix.proportions = rng.dirichlet(
            np.bincount(mix.indicators, minlength=mix.D) + self.alpha0)

        if t <= cfg.burn_in:
            self._prune_rank()
            if cfg.merge_interval and t % cfg.merge_interval == 0:
                self._merge_components()
            if cfg.component_tune_interval and t % cfg.component_tune_interval == 0:
                # equivalent components can only be told apart once the
                # observation precision has reached its target
                self._tune_mixture(allow_merge=t >= self._ramp_end())

        rre = None
        full = None
        if self.truth_flat is not None:
            full = self._cp_full()
            rre = float(np.linalg.norm(full + self.e - self.truth_flat) / self.truth_norm)
        self.trace.append(TraceRow(
            t, rre, estimate_rank(self.low.cp.lam, cfg.rank_threshold),
            self.mix.D, time.perf_counter() - self._t0))

        if t > cfg.burn_in:
            self._collect(full)

    # -- burn-in maintenance ------------------------------------------------

    def _prune_rank(self) -> None:
        cfg = self.cfg
        lam = self.low.cp.lam
        small = np.abs(lam) < cfg.rank_threshold
        self.below_count = np.where(small, self.below_count + 1, 0)
        kill = self.below_count >= cfg.rank_prune_patience
        if not kill.any():
            return
        keep = ~kill
        if not keep.any():
            keep[int(np.argmax(np.abs(lam)))] = True
        self.low.cp = CPFactors(lam[keep], [u[:, keep] for u in self.low.cp.factors])
        self.low.gamma = self.low.gamma[keep]
        self.low.kappa = self.low.kappa[keep]
        self.below_count = self.below_count[keep]

    def _merge_components(self) -> None:
        """Fold near-parallel rank-one components together.

        The scan-order weight updates leave redundant components frozen in
        near-duplicate pairs that each carry real weight; folding the weaker
        one into the stronger lets the survivor refit cleanly.  Burn-in only.
        """
        cp = self.low.cp
        if cp.R < 2:
            return
        sim = np.ones((cp.R, cp.R))
        scales = np.ones((cp.R, cp.R))
        for uk in cp.factors:
            norms = np.linalg.norm(uk, axis=0)
            norms[norms == 0] = 1.0
            gram = uk.T @ uk
            sim *= gram / np.outer(norms, norms)
            scales *= gram / (norms * norms)[:, None]  # per-mode LS scale of col j on col i
        order = np.argsort(-np.abs(cp.lam))
        alive = np.ones(cp.R, dtype=bool)
        merged_any = False
        for pos, i in enumerate(order):
            if not alive[i]:
                continue
            for j in order[pos + 1:]:
                if alive[j] and abs(sim[i, j]) >= self.cfg.merge_similarity:
                    cp.lam[i] += cp.lam[j] * scales[i, j]
                    alive[j] = False
                    merged_any = True
        if not merged_any:
            return
        keep = np.flatnonzero(alive)
        self.low.cp = CPFactors(cp.lam[keep], [uk[:, keep] for uk in cp.factors])
        self.low.gamma = self.low.gamma[keep]
        self.low.kappa = self.low.kappa[keep]
        self.below_count = self.below_count[keep]

    def _tune_mixture(self, allow_merge: bool = True) -> None:
        """Drop starved mixture components and coalesce indistinguishable ones.

        Starting from the maximum component count, populations get split
        across several components with matching parameters; the split is
        self-sustaining under label resampling, so equivalents are folded
        (burn-in only, the count never grows back).
        """
        mix = self.mix
        keep = select_components(mix.counts(), self.n_entries, self.cfg.min_component_weight)
        if keep.size < mix.D:
            mix.means = mix.means[keep]
            mix.precisions = mix.precisions[keep]
            props = mix.proportions[keep]
            mix.proportions = props / props.sum()
            self.alpha0 = self.alpha0[keep]
            probs = responsibilities(self.e, mix.means, mix.precisions, mix.proportions)
            mix.indicators = self.rng.categorical_rows(probs)
        if allow_merge:
            self._coalesce_mixture()

    def _coalesce_mixture(self) -> bool:
        mix = self.mix
        if mix.D < 2:
            return False
        counts = mix.counts()
        order = np.argsort(-counts)
        target = np.arange(mix.D)
        for pos, d in enumerate(order):
            if target[d] != d:
                continue
            for d2 in order[pos + 1:]:
                if target[d2] != d2:
                    continue
                ratio = max(mix.precisions[d], mix.precisions[d2]) \
                    / min(mix.precisions[d], mix.precisions[d2])
                sigma = 1.0 / np.sqrt(min(mix.precisions[d], mix.precisions[d2]))
                if ratio <= MIXTURE_MERGE_TAU_RATIO and \
                        abs(mix.means[d] - mix.means[d2]) <= MIXTURE_MERGE_MEAN_SIGMA * sigma:
                    target[d2] = d
        if (target == np.arange(mix.D)).all():
            return False
        keep = np.flatnonzero(target == np.arange(mix.D))
        relabel = np.zeros(mix.D, dtype=np.int64)
        props = np.zeros(keep.size)
        for new_idx, d in enumerate(keep):
            members = np.flatnonzero(target == d)
            relabel[members] = new_idx
            props[new_idx] = mix.proportions[members].sum()
        mix.means = mix.means[keep]
        mix.precisions = mix.precisions[keep]
        mix.proportions = props / props.sum()
        self.alpha0 = self.alpha0[keep]
        mix.indicators = relabel[mix.indicators]
        return True

    # -- collection -----------------------------------------------------------

    def _collect(self, full: np.ndarray | None) -> None:
        low, mix = self.low, self.mix
        if self._lam_sum is None:
            self._lam_sum = np.zeros_like(low.cp.lam)
            self._u_sums = [np.zeros_like(uk) for uk in low.cp.factors]
            self._props_sum = np.zeros(mix.D)
            self._means_sum = np.zeros(mix.D)
            self._precs_sum = np.zeros(mix.D)
        self._n_collected += 1
        self._lam_sum += low.cp.lam
        for k, uk in enumerate(low.cp.factors):
            self._u_sums[k] += uk
        self._e_sum += self.e
        self._props_sum += mix.proportions
        self._means_sum += mix.means
        self._precs_sum += mix.precisions
        if self._recon_sum is not None:
            if full is None:
                full = self._cp_full()
            recon = full + self.e
            self._recon_sum += recon
            self._recon_sq += recon * recon
        if self.bank is not None:
            self.bank.add(low.cp.lam.copy(), [uk.copy() for uk in low.cp.factors],
                          self.e.copy())

    def result(self) -> CompletionResult:
        ns = self._n_collected
        lam_bar = self._lam_sum / ns
        u_bar = [s / ns for s in self._u_sums]
        lowrank_mean = CPFactors(lam_bar, u_bar)
        residual_mean = DenseTensor((self._e_sum / ns).reshape(self.dims), copy=False)
        if self.cfg.aggregate == "factor":
            completed = cp_reconstruct(lowrank_mean).data + residual_mean.data
        else:
            completed = (self._recon_sum / ns).reshape(self.dims)
        uncertainty = None
        if self._recon_sum is not None and ns >= 2:
            mean = self._recon_sum / ns
            var = np.maximum(self._recon_sq - ns * mean * mean, 0.0) / (ns - 1)
            uncertainty = DenseTensor(np.sqrt(var).reshape(self.dims), copy=False)
        summary = MixtureSummary(self._props_sum / ns, self._means_sum / ns,
                                 self._precs_sum / ns)
        return CompletionResult(
            completed=DenseTensor(completed, copy=False),
            lowrank_mean=lowrank_mean,
            residual_mean=residual_mean,
            estimated_rank=estimate_rank(lam_bar, self.cfg.rank_threshold),
            entry_uncertainty=uncertainty,
            mixture_summary=summary,
            trace=self.trace,
            samples=self.bank,
        )


def _check_inputs(y: DenseTensor, mask: ObservationMask, truth: DenseTensor | None):
    if y.dims != mask.dims:
        raise ValueError(f"observation dims {y.dims} do not match mask dims {mask.dims}")
    if mask.observed_count < 1:
        raise ValueError("need at least one observed entry")
    if not np.isfinite(y.flat[mask.observed_indices()]).all():
        raise ValueError("observed entries contain non-finite values")
    if truth is not None and truth.dims != y.dims:
        raise ValueError(f"truth dims {truth.dims} do not match observation dims {y.dims}")


def run(y: DenseTensor, mask: ObservationMask, config: GibbsConfig,
        truth: DenseTensor | None = None) -> CompletionResult:
    """Run one chain to completion."""
    _check_inputs(y, mask, truth)
    chain = _Chain(y, mask, config, truth)
    for t in range(1, config.burn_in + config.samples + 1):
        chain.sweep(t)
    return chain.result()


def run_chains(y: DenseTensor, mask: ObservationMask, config: GibbsConfig,
               chains: int, truth: DenseTensor | None = None) -> list[CompletionResult]:
    """Run several independent chains concurrently.

    Chain 0 uses the seed stream itself, chain i the stream jumped i times,
    so a single chain reproduces run() exactly.
    """
    _check_inputs(y, mask, truth)
    if chains < 1:
        raise ValueError("need at least one chain")

    def one(i: int) -> CompletionResult:
        base = RngStream(config.seed)
        stream = base if i == 0 else base.jumped(i)
        chain = _Chain(y, mask, config, truth, rng=stream)
        for t in range(1, config.burn_in + config.samples + 1):
            chain.sweep(t)
        return chain.result()

    if chains == 1:
        return [one(0)]
    with ThreadPoolExecutor(max_workers=chains) as pool:
        return list(pool.map(one, range(chains)))
