"""Bayesian tensor completion with automatic rank determination.

The model splits a latent tensor into a CP low-rank part, whose component
budget is shrunk by a reweighted-Laplace prior on the weights, and a
mixture-of-Gaussians residual part, inferred jointly by Gibbs sampling; the
completed tensor is the posterior mean over collected samples.
"""

from .containers import read_mask, read_tensor, write_mask, write_tensor
from .engine import (CompletionResult, GibbsConfig, SampleBank, SpatialOptions,
                     SpatialPrior, build_spatial_weights, estimate_rank,
                     mmse_aggregate, per_entry_uncertainty, run, run_chains,
                     trace_to_csv)
from .lowrank import HyperParams, LowRankState
from .metrics import MetricReport, psnr, report, rre, ssim
from .mixture import MixtureState
from .rng import RngStream
from .synth import Benchmark, ResidualSpec, corrupt_and_mask, gen_lowrank, \
    gen_residual, make_benchmark
from .tensors import (CPFactors, DenseTensor, ObservationMask, cp_entry,
                      cp_reconstruct, residual_observation)

__version__ = "0.1.0"

__all__ = [
    "Benchmark", "CPFactors", "CompletionResult", "DenseTensor", "GibbsConfig",
    "HyperParams", "LowRankState", "MetricReport", "MixtureState",
    "ObservationMask", "ResidualSpec", "RngStream", "SampleBank",
    "SpatialOptions", "SpatialPrior", "build_spatial_weights", "corrupt_and_mask",
    "cp_entry", "cp_reconstruct", "estimate_rank", "gen_lowrank", "gen_residual",
    "make_benchmark", "mmse_aggregate", "per_entry_uncertainty", "psnr",
    "read_mask", "read_tensor", "report", "residual_observation", "rre", "run",
    "run_chains", "ssim", "trace_to_csv", "write_mask", "write_tensor",
]
