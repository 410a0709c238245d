"""Deterministic PNG heatmaps of record channels.

Each heatmap is normalized to its own [min, max]; the range is written to a
``<image>.range.txt`` sidecar so absolute values stay recoverable. Images are
encoded through Pillow with nearest-neighbor upscaling, which keeps output
bytes identical across runs for identical inputs and options.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib import colormaps
from PIL import Image

from .errors import ParameterError

DEFAULT_COLORMAP = "viridis"


def render_channel(field, path, colormap: str = DEFAULT_COLORMAP, scale: int = 4,
                   write_range: bool = True) -> tuple[float, float]:
    """Render one m x m field to a PNG; returns the (min, max) range used."""
    field = np.asarray(field, dtype=float)
    if field.ndim != 2:
        raise ParameterError(f"heatmap field must be 2-D, got shape {field.shape}")
    if scale < 1:
        raise ParameterError(f"scale must be >= 1, got {scale}")
    lo, hi = float(field.min()), float(field.max())
    normalized = np.zeros_like(field) if hi == lo else (field - lo) / (hi - lo)
    rgba = colormaps[colormap](normalized)
    rgb = np.round(rgba[..., :3] * 255.0).astype(np.uint8)
    image = Image.fromarray(rgb)
    if scale > 1:
        image = image.resize((field.shape[1] * scale, field.shape[0] * scale),
                             Image.NEAREST)
    path = Path(path)
    image.save(path, format="PNG")
    if write_range:
        path.with_name(path.name + ".range.txt").write_text(f"{lo!r} {hi!r}\n")
    return lo, hi
