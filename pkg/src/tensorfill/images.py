"""Image and frame-stack ingestion for the inpainting and video paths.

8-bit PNG and PPM inputs are rescaled to [0, 1] by dividing by 255; outputs
round back to 8 bits, so a load/save round trip is exact up to quantization.
Grayscale inputs become single-channel 3-mode tensors.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .tensors import DenseTensor


class InputError(ValueError):
    """Unreadable or inconsistent user-supplied input."""


def load_image(path) -> DenseTensor:
    """Load an image as a (height, width, channels) tensor on [0, 1]."""
    try:
        with Image.open(path) as img:
            if img.mode not in ("RGB", "L"):
                img = img.convert("RGB")
            arr = np.asarray(img, dtype=np.float64)
    except (OSError, SyntaxError) as exc:
        raise InputError(f"cannot read image {path}: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return DenseTensor(arr / 255.0, copy=False)


def save_image(path, tensor: DenseTensor) -> None:
    arr = tensor.data
    if arr.ndim != 3:
        raise ValueError(f"expected a 3-mode image tensor, got {arr.ndim} modes")
    quantized = np.clip(np.round(arr * 255.0), 0, 255).astype(np.uint8)
    if quantized.shape[2] == 1:
        quantized = quantized[:, :, 0]
    Image.fromarray(quantized).save(path, format="PNG")


def load_mask_image(path, shape) -> np.ndarray:
    """Boolean missing-pixel map from a mask image: nonzero pixels mark
    missing entries.  Returned with the target (h, w) shape."""
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"))
    except (OSError, SyntaxError) as exc:
        raise InputError(f"cannot read mask image {path}: {exc}") from exc
    if arr.shape != shape[:2]:
        raise InputError(f"mask image shape {arr.shape} does not match image {shape[:2]}")
    return arr > 127


def list_frames(directory) -> list[str]:
    """Sorted frame files (PNG/PPM) of a directory."""
    try:
        names = sorted(os.listdir(directory))
    except OSError as exc:
        raise InputError(f"cannot list frame directory {directory}: {exc}") from exc
    frames = [os.path.join(directory, n) for n in names
              if n.lower().endswith((".png", ".ppm", ".pgm"))]
    if not frames:
        raise InputError(f"no PNG/PPM frames found in {directory}")
    return frames


def load_frames(directory) -> DenseTensor:
    """Stack ordered frames into a (height, width, channels, time) tensor."""
    arrays = []
    for path in list_frames(directory):
        arrays.append(load_image(path).data)
        if arrays[-1].shape != arrays[0].shape:
            raise InputError(
                f"frame {path} has shape {arrays[-1].shape}, expected {arrays[0].shape}")
    return DenseTensor(np.stack(arrays, axis=-1), copy=False)


def save_frames(directory, tensor: DenseTensor) -> list[str]:
    if tensor.data.ndim != 4:
        raise ValueError("expected a (h, w, c, t) tensor")
    os.makedirs(directory, exist_ok=True)
    paths = []
    for t in range(tensor.dims[3]):
        path = os.path.join(directory, f"frame_{t:04d}.png")
        save_image(path, DenseTensor(tensor.data[:, :, :, t], copy=False))
        paths.append(path)
    return paths
