"""Command-line entry points for the benchmark and completion applications.

Exit codes: 0 success, 2 usage error, 3 input error, 4 runtime failure.
Every run writes a manifest JSON capturing arguments, resolved sampler
settings, input digests and timings, sufficient to reproduce the outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .containers import ContainerError, read_mask, read_tensor, write_mask, write_tensor
from .engine import (CompletionResult, GibbsConfig, SpatialOptions, run,
                     run_chains, trace_to_csv)
from .images import (InputError, load_frames, load_image, load_mask_image,
                     save_frames, save_image)
from .lowrank import HyperParams
from .metrics import report, write_metric_rows
from .rng import RngStream
from .synth import make_benchmark
from .tensors import DenseTensor, ObservationMask

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RUNTIME = 4


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir, command, args_dict, config, inputs, outputs, seconds):
    manifest = {
        "tool": "tensorfill",
        "version": __version__,
        "command": command,
        "arguments": args_dict,
        "config": None if config is None else _config_dict(config),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "seconds": seconds,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _config_dict(config: GibbsConfig) -> dict:
    d = {
        "r_init": config.r_init, "burn_in": config.burn_in, "samples": config.samples,
        "alpha0": config.alpha0, "max_components": config.max_components,
        "seed": config.seed, "rank_threshold": config.rank_threshold,
        "aggregate": config.aggregate,
        "hyper": {"mu0": config.hyper.mu0, "beta0": config.hyper.beta0,
                  "a0": config.hyper.a0, "b0": config.hyper.b0,
                  "tau0": config.hyper.tau0},
        "spatial": None,
    }
    if config.spatial is not None:
        d["spatial"] = {"eta0": config.spatial.eta0,
                        "modes": None if config.spatial.modes is None
                        else list(config.spatial.modes)}
    return d


def _add_sampler_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rank-init", type=int, default=None,
                        help="initial component budget (default 20, 100 for visual data)")
    parser.add_argument("--burn-in", type=int, default=500)
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--tau0", type=float, default=1e3,
                        help="observation noise precision")
    parser.add_argument("--max-components", type=int, default=6)
    parser.add_argument("--rank-threshold", type=float, default=1e-5)
    parser.add_argument("--spatial", choices=["on", "off"], default="off")
    parser.add_argument("--spatial-eta0", type=float, default=1e3)
    parser.add_argument("--aggregate", choices=["factor", "reconstruction"],
                        default="factor")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--chains", type=int, default=1)
    parser.add_argument("--trace", default=None, help="override trace CSV path")


def _build_config(args, default_rank: int) -> GibbsConfig:
    spatial = SpatialOptions(eta0=args.spatial_eta0) if args.spatial == "on" else None
    return GibbsConfig(
        r_init=args.rank_init if args.rank_init is not None else default_rank,
        burn_in=args.burn_in,
        samples=args.samples,
        hyper=HyperParams(tau0=args.tau0),
        max_components=args.max_components,
        seed=args.seed,
        rank_threshold=args.rank_threshold,
        spatial=spatial,
        aggregate=args.aggregate,
    )


def _run_completion(y, mask, config, args, truth=None):
    if args.chains > 1:
        results = run_chains(y, mask, config, args.chains, truth)
        return results[0], results
    result = run(y, mask, config, truth)
    return result, [result]


def _write_completion_outputs(out_dir, result: CompletionResult, args, trace_path=None):
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    completed_path = os.path.join(out_dir, "completed.dtc")
    write_tensor(completed_path, result.completed)
    outputs.append(completed_path)
    if result.entry_uncertainty is not None:
        unc_path = os.path.join(out_dir, "uncertainty.dtc")
        write_tensor(unc_path, result.entry_uncertainty)
        outputs.append(unc_path)
    lam_path = os.path.join(out_dir, "lambda_mean.json")
    with open(lam_path, "w") as fh:
        json.dump({"lambda_mean": result.lowrank_mean.lam.tolist(),
                   "estimated_rank": result.estimated_rank}, fh, indent=2)
        fh.write("\n")
    outputs.append(lam_path)
    mix_path = os.path.join(out_dir, "mixture_summary.json")
    with open(mix_path, "w") as fh:
        json.dump({"proportions": result.mixture_summary.proportions.tolist(),
                   "means": result.mixture_summary.means.tolist(),
                   "precisions": result.mixture_summary.precisions.tolist(),
                   "spatial": args.spatial == "on"}, fh, indent=2)
        fh.write("\n")
    outputs.append(mix_path)
    if trace_path is None:
        trace_path = args.trace or os.path.join(out_dir, "trace.csv")
    trace_to_csv(result.trace, trace_path)
    outputs.append(trace_path)
    return outputs


# -- subcommands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    if not 0.0 <= args.missing < 1.0:
        raise UsageError("--missing must be in [0, 1)")
    dims = tuple(int(d) for d in args.dims.split(","))
    bench = make_benchmark(dims, args.rank, _residual_kind_of(args.residual),
                           args.missing, args.seed, args.noise_var)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()
    truth_path = os.path.join(args.out, "truth.dtc")
    observed_path = os.path.join(args.out, "observed.dtc")
    mask_path = os.path.join(args.out, "mask.dtm")
    gt_path = os.path.join(args.out, "ground_truth.json")
    write_tensor(truth_path, bench.truth)
    # unobserved entries are zeroed in the file so the observation container
    # carries no information outside the mask
    observed = bench.observed.data * bench.mask.flags
    write_tensor(observed_path, DenseTensor(observed, copy=False))
    write_mask(mask_path, bench.mask)
    with open(gt_path, "w") as fh:
        json.dump(bench.ground_truth_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs = [truth_path, observed_path, mask_path, gt_path]
    _write_manifest(args.out, "synth", _args_dict(args), None, [], outputs,
                    time.perf_counter() - t0)
    print(f"wrote {len(outputs)} files to {args.out}")
    return EXIT_OK


def cmd_complete(args) -> int:
    y = read_tensor(args.observed)
    mask = read_mask(args.mask)
    truth = read_tensor(args.truth) if args.truth else None
    config = _build_config(args, default_rank=20)
    t0 = time.perf_counter()
    result, all_results = _run_completion(y, mask, config, args, truth)
    seconds = time.perf_counter() - t0
    outputs = _write_completion_outputs(args.out, result, args)
    if len(all_results) > 1:
        pooled = np.mean([r.completed.data for r in all_results], axis=0)
        pooled_path = os.path.join(args.out, "pooled_completed.dtc")
        write_tensor(pooled_path, DenseTensor(pooled, copy=False))
        outputs.append(pooled_path)
        print(f"per-chain ranks: {[r.estimated_rank for r in all_results]}")
        if truth is not None:
            m = report(truth, pooled)
            print(f"pooled rre: {m.rre:.6f}  psnr: {m.psnr:.4f}  ssim: {m.ssim:.6f}")
    inputs = [args.observed, args.mask] + ([args.truth] if args.truth else [])
    _write_manifest(args.out, "complete", _args_dict(args), config, inputs,
                    outputs, seconds)
    print(f"estimated rank: {result.estimated_rank}")
    if truth is not None:
        m = report(truth, result.completed)
        print(f"rre: {m.rre:.6f}  psnr: {m.psnr:.4f}  ssim: {m.ssim:.6f}")
    return EXIT_OK


def _apply_random_missing(tensor: DenseTensor, ratio: float, seed: int) -> ObservationMask:
    rng = RngStream(seed).jumped(101)
    n = tensor.size
    observed = round((1.0 - ratio) * n)
    flags = np.zeros(n, dtype=bool)
    flags[rng.permutation(n)[:observed]] = True
    return ObservationMask(flags.reshape(tensor.dims), copy=False)


def cmd_inpaint(args) -> int:
    image = load_image(args.image)
    h, w, c = image.dims
    truth = None
    if args.mask_image:
        missing = load_mask_image(args.mask_image, image.dims)
        flags = np.repeat(~missing[:, :, None], c, axis=2)
        mask = ObservationMask(flags)
        observed = DenseTensor(image.data * mask.flags, copy=False)
    elif args.marker_color:
        rgb = np.array([int(v) for v in args.marker_color.split(",")]) / 255.0
        if rgb.size != c:
            raise InputError(f"marker color has {rgb.size} channels, image has {c}")
        missing = np.all(np.abs(image.data - rgb[None, None, :]) < 1e-6, axis=2)
        mask = ObservationMask(np.repeat(~missing[:, :, None], c, axis=2))
        observed = DenseTensor(image.data * mask.flags, copy=False)
    else:
        if args.missing is None:
            raise UsageError("one of --missing, --mask-image, --marker-color is required")
        mask = _apply_random_missing(image, args.missing, args.seed)
        observed = DenseTensor(image.data * mask.flags, copy=False)
        truth = image
    if args.truth:
        truth = load_image(args.truth)

    config = _build_config(args, default_rank=100)
    t0 = time.perf_counter()
    result, _ = _run_completion(observed, mask, config, args, truth)
    seconds = time.perf_counter() - t0

    os.makedirs(args.out, exist_ok=True)
    out_image = os.path.join(args.out, "completed.png")
    save_image(out_image, DenseTensor(np.clip(result.completed.data, 0.0, 1.0), copy=False))
    outputs = [out_image] + _write_completion_outputs(args.out, result, args)
    row = {"dataset": os.path.basename(str(args.image)),
           "missing_ratio": 1.0 - mask.observed_count / image.size,
           "seconds": f"{seconds:.3f}", "seed": args.seed}
    if truth is not None:
        m = report(truth, result.completed)
        row.update(rre=f"{m.rre:.6f}", psnr=f"{m.psnr:.4f}", ssim=f"{m.ssim:.6f}")
        print(f"rre: {m.rre:.6f}  psnr: {m.psnr:.4f}  ssim: {m.ssim:.6f}")
    metrics_path = os.path.join(args.out, "metrics.csv")
    write_metric_rows(metrics_path, [row])
    outputs.append(metrics_path)
    inputs = [args.image] + ([args.mask_image] if args.mask_image else []) \
        + ([args.truth] if args.truth else [])
    _write_manifest(args.out, "inpaint", _args_dict(args), config, inputs,
                    outputs, seconds)
    print(f"estimated rank: {result.estimated_rank}")
    return EXIT_OK


def cmd_video(args) -> int:
    video = load_frames(args.frames)
    h, w, c, t_count = video.dims
    truth = None
    if args.mask_frames:
        from .images import list_frames
        mask_paths = list_frames(args.mask_frames)
        if len(mask_paths) != t_count:
            raise InputError(f"{len(mask_paths)} mask frames for {t_count} video frames")
        missing = np.stack(
            [load_mask_image(p, (h, w)) for p in mask_paths], axis=-1)
        flags = np.repeat(~missing[:, :, None, :], c, axis=2)
        mask = ObservationMask(flags)
        observed = DenseTensor(video.data * mask.flags, copy=False)
    else:
        if args.missing is None:
            raise UsageError("one of --missing, --mask-frames is required")
        mask = _apply_random_missing(video, args.missing, args.seed)
        observed = DenseTensor(video.data * mask.flags, copy=False)
        truth = video
    if args.truth_frames:
        truth = load_frames(args.truth_frames)

    config = _build_config(args, default_rank=100)
    t0 = time.perf_counter()
    result, _ = _run_completion(observed, mask, config, args, truth)
    seconds = time.perf_counter() - t0

    os.makedirs(args.out, exist_ok=True)
    clipped = DenseTensor(np.clip(result.completed.data, 0.0, 1.0), copy=False)
    frame_paths = save_frames(os.path.join(args.out, "frames"), clipped)
    outputs = frame_paths + _write_completion_outputs(args.out, result, args)
    row = {"dataset": os.path.basename(str(args.frames)),
           "missing_ratio": 1.0 - mask.observed_count / video.size,
           "seconds": f"{seconds:.3f}", "seed": args.seed}
    if truth is not None:
        m = report(truth, result.completed)
        row.update(rre=f"{m.rre:.6f}", psnr=f"{m.psnr:.4f}", ssim=f"{m.ssim:.6f}")
        print(f"rre: {m.rre:.6f}  psnr: {m.psnr:.4f}  ssim: {m.ssim:.6f}")
    metrics_path = os.path.join(args.out, "metrics.csv")
    write_metric_rows(metrics_path, [row])
    outputs.append(metrics_path)
    _write_manifest(args.out, "video", _args_dict(args), config, [args.frames],
                    outputs, seconds)
    print(f"estimated rank: {result.estimated_rank}")
    return EXIT_OK


# -- wiring ---------------------------------------------------------------------

class UsageError(ValueError):
    pass


def _args_dict(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func" and v is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensorfill",
        description="Bayesian tensor completion with automatic rank determination")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark instance")
    p.add_argument("--dims", default="30,30,30")
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--residual", default="mixture_nonzero",
                   choices=["zero", "gaussian", "sparse", "mixture_zero",
                            "mixture_nonzero"])
    p.add_argument("--missing", type=float, required=True)
    p.add_argument("--noise-var", type=float, default=0.001)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("complete", help="complete a tensor from containers")
    p.add_argument("--observed", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("inpaint", help="complete missing pixels of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--missing", type=float, default=None)
    p.add_argument("--mask-image", default=None,
                   help="image whose nonzero pixels mark missing entries")
    p.add_argument("--marker-color", default=None,
                   help="R,G,B value (0-255) treated as missing")
    p.add_argument("--truth", default=None)
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_inpaint)

    p = sub.add_parser("video", help="complete a frame-directory video tensor")
    p.add_argument("--frames", required=True)
    p.add_argument("--missing", type=float, default=None)
    p.add_argument("--mask-frames", default=None,
                   help="directory of per-frame mask images")
    p.add_argument("--truth-frames", default=None)
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_video)

    return parser


def _residual_kind_of(name: str) -> str:
    return {"zero": "zero", "gaussian": "gaussian", "sparse": "sparse",
            "mixture_zero": "mixture_zero_mean",
            "mixture_nonzero": "mixture_nonzero_mean"}[name]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ContainerError, InputError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
