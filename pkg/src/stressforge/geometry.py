"""Seeded procedural generators for the two dataset families.

The fine family emits 128 x 128 masks (plates with rectangular or circular
cutouts, L-shapes, tapered plates) plus eight boundary-condition patterns and
ten load-position patterns, each instantiated against a concrete mask. The
coarse family emits 32 x 32 cantilever beams in six categories (rectangular,
trapezoidal, parabola-contour, each with and without a cellular opening),
clamped on the left end and loaded on the right end.

Everything is a pure function of (seed, index); the same seed reproduces the
same library bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .errors import ParameterError, ValidationError
from .fea import ConstraintSet, GridMesh

FINE_M = 128
COARSE_M = 32

COARSE_CATEGORIES = (
    "rectangular",
    "rectangular_opening",
    "trapezoidal",
    "trapezoidal_opening",
    "parabola",
    "parabola_opening",
)
OPENING_CATEGORIES = tuple(c for c in COARSE_CATEGORIES if c.endswith("_opening"))
PARABOLA_CATEGORIES = tuple(c for c in COARSE_CATEGORIES if c.startswith("parabola"))

_MAX_MASK_ATTEMPTS = 32


@dataclass(frozen=True)
class GeometryLibrary:
    """Meshes plus the per-geometry BC and load-pattern instantiations."""

    family: str
    m: int
    element_size: float
    meshes: tuple
    categories: tuple
    bc_sets: tuple    # bc_sets[g][b] -> ConstraintSet
    load_edges: tuple # load_edges[g][l] -> tuple of (i, j, side)

    @property
    def n_geometries(self) -> int:
        return len(self.meshes)

    @property
    def n_bc_patterns(self) -> int:
        return len(self.bc_sets[0])

    @property
    def n_load_patterns(self) -> int:
        return len(self.load_edges[0])


def _connected(mask: np.ndarray) -> bool:
    if not mask.any():
        return False
    _, n = scipy.ndimage.label(mask)
    return n == 1


def _mask_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return rows[0], rows[-1], cols[0], cols[-1]


# ---------------------------------------------------------------------------
# fine-family masks
# ---------------------------------------------------------------------------

def _fine_plate(rng, m):
    mask = np.zeros((m, m), dtype=bool)
    r0 = int(rng.integers(0, m // 8))
    r1 = int(rng.integers(m - m // 8, m))
    c0 = int(rng.integers(0, m // 8))
    c1 = int(rng.integers(m - m // 8, m))
    mask[r0:r1 + 1, c0:c1 + 1] = True
    return mask


def _punch_rect(rng, mask):
    r0, r1, c0, c1 = _mask_bbox(mask)
    height, width = r1 - r0 + 1, c1 - c0 + 1
    hh = int(rng.integers(height // 6, height // 3 + 1))
    hw = int(rng.integers(width // 6, width // 3 + 1))
    margin = 3
    hr = int(rng.integers(r0 + margin, r1 - margin - hh + 1))
    hc = int(rng.integers(c0 + margin, c1 - margin - hw + 1))
    mask = mask.copy()
    mask[hr:hr + hh, hc:hc + hw] = False
    return mask


def _punch_circle(rng, mask):
    r0, r1, c0, c1 = _mask_bbox(mask)
    radius = int(rng.integers(min(r1 - r0, c1 - c0) // 10 + 2,
                              min(r1 - r0, c1 - c0) // 4 + 1))
    margin = radius + 3
    cr = int(rng.integers(r0 + margin, r1 - margin + 1))
    cc = int(rng.integers(c0 + margin, c1 - margin + 1))
    i, j = np.meshgrid(np.arange(mask.shape[0]), np.arange(mask.shape[1]), indexing="ij")
    mask = mask.copy()
    mask[(i - cr) ** 2 + (j - cc) ** 2 <= radius**2] = False
    return mask


def _fine_l_shape(rng, m):
    mask = _fine_plate(rng, m)
    r0, r1, c0, c1 = _mask_bbox(mask)
    cut_h = int(rng.integers((r1 - r0) // 3, (r1 - r0) * 3 // 5))
    cut_w = int(rng.integers((c1 - c0) // 3, (c1 - c0) * 3 // 5))
    corner = int(rng.integers(0, 4))
    mask = mask.copy()
    if corner == 0:
        mask[r0:r0 + cut_h, c0:c0 + cut_w] = False
    elif corner == 1:
        mask[r0:r0 + cut_h, c1 - cut_w + 1:c1 + 1] = False
    elif corner == 2:
        mask[r1 - cut_h + 1:r1 + 1, c0:c0 + cut_w] = False
    else:
        mask[r1 - cut_h + 1:r1 + 1, c1 - cut_w + 1:c1 + 1] = False
    return mask


def _fine_tapered(rng, m):
    c0 = int(rng.integers(0, m // 8))
    c1 = int(rng.integers(m - m // 8, m))
    h_left = int(rng.integers(m * 3 // 4, m + 1))
    h_right = int(rng.integers(m // 4, m // 2))
    mask = np.zeros((m, m), dtype=bool)
    cols = np.arange(c0, c1 + 1)
    heights = np.round(h_left + (h_right - h_left) * (cols - c0) / max(c1 - c0, 1)).astype(int)
    for j, h in zip(cols, heights):
        top = (m - h) // 2
        mask[top:top + h, j] = True
    return mask


_FINE_KINDS = (
    ("plate", lambda rng, m: _fine_plate(rng, m)),
    ("plate_rect_hole", lambda rng, m: _punch_rect(rng, _fine_plate(rng, m))),
    ("plate_circle_hole", lambda rng, m: _punch_circle(rng, _fine_plate(rng, m))),
    ("l_shape", _fine_l_shape),
    ("tapered", _fine_tapered),
)


def _generate_mask(seed_key, builder, m):
    for attempt in range(_MAX_MASK_ATTEMPTS):
        rng = np.random.default_rng(seed_key + [attempt])
        mask = builder(rng, m)
        if _connected(mask):
            return mask
    raise ValidationError(f"could not generate a connected mask for key {seed_key}")


# ---------------------------------------------------------------------------
# boundary profiles and face-node helpers
# ---------------------------------------------------------------------------

def right_profile(mask):
    """Right-most solid element of every occupied row, top to bottom."""
    return tuple((int(i), int(np.flatnonzero(mask[i])[-1]), "right")
                 for i in np.flatnonzero(mask.any(axis=1)))


def left_profile(mask):
    return tuple((int(i), int(np.flatnonzero(mask[i])[0]), "left")
                 for i in np.flatnonzero(mask.any(axis=1)))


def top_profile(mask):
    """Top-most solid element of every occupied column, left to right."""
    return tuple((int(np.flatnonzero(mask[:, j])[0]), int(j), "top")
                 for j in np.flatnonzero(mask.any(axis=0)))


def bottom_profile(mask):
    return tuple((int(np.flatnonzero(mask[:, j])[-1]), int(j), "bottom")
                 for j in np.flatnonzero(mask.any(axis=0)))


_EDGE_NODE_OFFSETS = {
    "left": ((0, 0), (1, 0)),
    "right": ((0, 1), (1, 1)),
    "top": ((0, 0), (0, 1)),
    "bottom": ((1, 0), (1, 1)),
}


def _face_node_mask(m, edges):
    nodes = np.zeros((m + 1, m + 1), dtype=bool)
    for i, j, side in edges:
        for di, dj in _EDGE_NODE_OFFSETS[side]:
            nodes[i + di, j + dj] = True
    return nodes


def _element_node_mask(m, elements):
    nodes = np.zeros((m + 1, m + 1), dtype=bool)
    for i, j in elements:
        nodes[i:i + 2, j:j + 2] = True
    return nodes


def _middle_segment(entries, fraction=3):
    k = max(1, len(entries) // fraction)
    start = (len(entries) - k) // 2
    return entries[start:start + k]


def _column_elements(mask, col):
    return [(int(i), col) for i in np.flatnonzero(mask[:, col])]


def _row_elements(mask, row):
    return [(row, int(j)) for j in np.flatnonzero(mask[row])]


# ---------------------------------------------------------------------------
# fine-family BC patterns
# ---------------------------------------------------------------------------

def _bc_clamp_face(mask, which):
    """Clamp the full boundary profile on one side; following the staircase
    of an irregular outline keeps slender shapes well supported."""
    profile = {"left": left_profile, "right": right_profile,
               "top": top_profile, "bottom": bottom_profile}[which]
    nodes = _face_node_mask(mask.shape[0], profile(mask))
    return ConstraintSet(nodes, nodes)


def _bc_corners(mask):
    m = mask.shape[0]
    r0, r1, c0, c1 = _mask_bbox(mask)
    solid = np.argwhere(mask)
    picked = []
    for cr, cc in ((r0, c0), (r0, c1), (r1, c0), (r1, c1)):
        dist = np.abs(solid[:, 0] - cr) + np.abs(solid[:, 1] - cc)
        picked.append(tuple(solid[int(np.argmin(dist))]))
    nodes = _element_node_mask(m, picked)
    return ConstraintSet(nodes, nodes)


def _bc_mixed_axes(mask):
    m = mask.shape[0]
    fix_x = _face_node_mask(m, left_profile(mask))
    fix_y = _face_node_mask(m, bottom_profile(mask))
    # anchor one node in both axes so a corner-only contact cannot rotate
    anchor = np.argwhere(fix_x)[-1]
    fix_y[anchor[0], anchor[1]] = True
    return ConstraintSet(fix_x, fix_y)


def _bc_partial_left(mask):
    profile = left_profile(mask)
    lower = profile[len(profile) // 2:]
    nodes = _face_node_mask(mask.shape[0], lower)
    return ConstraintSet(nodes, nodes)


FINE_BC_BUILDERS = (
    lambda mask: _bc_clamp_face(mask, "left"),
    lambda mask: _bc_clamp_face(mask, "right"),
    lambda mask: _bc_clamp_face(mask, "bottom"),
    lambda mask: _bc_clamp_face(mask, "top"),
    lambda mask: ConstraintSet(
        _bc_clamp_face(mask, "left").fix_x | _bc_clamp_face(mask, "right").fix_x,
        _bc_clamp_face(mask, "left").fix_y | _bc_clamp_face(mask, "right").fix_y,
    ),
    _bc_corners,
    _bc_mixed_axes,
    _bc_partial_left,
)


# ---------------------------------------------------------------------------
# fine-family load patterns
# ---------------------------------------------------------------------------

def _dedupe_elements(edges):
    seen, out = set(), []
    for i, j, side in edges:
        if (i, j) not in seen:
            seen.add((i, j))
            out.append((i, j, side))
    return tuple(out)


def _interior_patch(mask):
    solid = np.argwhere(mask)
    centroid = solid.mean(axis=0)
    dist = np.abs(solid[:, 0] - centroid[0]) + np.abs(solid[:, 1] - centroid[1])
    ci, cj = solid[int(np.argmin(dist))]
    edges = []
    for i in range(ci, min(ci + 4, mask.shape[0])):
        if not mask[i, cj]:
            break
        edges.append((int(i), int(cj), "right"))
    return tuple(edges)


def _corner_segment(profile, which, fraction=6):
    k = max(1, len(profile) // fraction)
    return profile[:k] if which == "first" else profile[-k:]


FINE_LOAD_BUILDERS = (
    lambda mask: _dedupe_elements(_middle_segment(right_profile(mask))),
    lambda mask: _dedupe_elements(right_profile(mask)),
    lambda mask: _dedupe_elements(_middle_segment(top_profile(mask))),
    lambda mask: _dedupe_elements(top_profile(mask)),
    lambda mask: _dedupe_elements(_middle_segment(bottom_profile(mask))),
    lambda mask: _dedupe_elements(_middle_segment(left_profile(mask))),
    lambda mask: _dedupe_elements(_corner_segment(right_profile(mask), "first")),
    lambda mask: _dedupe_elements(_corner_segment(right_profile(mask), "last")),
    _interior_patch,
    lambda mask: _dedupe_elements(
        _corner_segment(right_profile(mask), "first") + _corner_segment(right_profile(mask), "last")
    ),
)


def build_fine_library(seed: int, n_geometries: int = 60, n_bc: int = 8,
                       n_load: int = 10, m: int = FINE_M,
                       element_size: float = 1.0) -> GeometryLibrary:
    """Fine-family library: default 60 masks, 8 BC and 10 load patterns."""
    if n_bc > len(FINE_BC_BUILDERS):
        raise ParameterError(f"at most {len(FINE_BC_BUILDERS)} fine BC patterns available")
    if n_load > len(FINE_LOAD_BUILDERS):
        raise ParameterError(f"at most {len(FINE_LOAD_BUILDERS)} fine load patterns available")
    meshes, categories, bc_sets, load_edges = [], [], [], []
    for g in range(n_geometries):
        kind_name, builder = _FINE_KINDS[g % len(_FINE_KINDS)]
        mask = _generate_mask([int(seed), 0, g], builder, m)
        meshes.append(GridMesh(m, element_size, mask))
        categories.append(kind_name)
        bc_sets.append(tuple(FINE_BC_BUILDERS[b](mask) for b in range(n_bc)))
        load_edges.append(tuple(FINE_LOAD_BUILDERS[l](mask) for l in range(n_load)))
    return GeometryLibrary("fine", m, element_size, tuple(meshes), tuple(categories),
                           tuple(bc_sets), tuple(load_edges))


# ---------------------------------------------------------------------------
# coarse-family cantilever beams
# ---------------------------------------------------------------------------

def _beam_mask_from_heights(m, heights):
    mask = np.zeros((m, m), dtype=bool)
    for j, h in enumerate(heights):
        top = (m - int(h)) // 2
        mask[top:top + int(h), j] = True
    return mask


def _coarse_heights(rng, m, category):
    if category.startswith("rectangular"):
        h = int(rng.integers(12, m + 1))
        return np.full(m, h)
    h_left = int(rng.integers(m * 5 // 8, m + 1))
    h_right = int(rng.integers(8, h_left // 2 + 1))
    t = np.arange(m) / (m - 1)
    if category.startswith("trapezoidal"):
        heights = h_left + (h_right - h_left) * t
    else:
        heights = h_left + (h_right - h_left) * t**2
    return np.round(heights).astype(int)


def _coarse_mask(rng, m, category):
    heights = _coarse_heights(rng, m, category)
    mask = _beam_mask_from_heights(m, heights)
    if category in OPENING_CATEGORIES:
        cj = int(rng.integers(m // 4, m // 2))
        local_h = int(heights[cj])
        radius = min(int(rng.integers(2, 5)), local_h // 2 - 2)
        if radius < 2:
            radius = 2
        i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        mask[(i - m // 2) ** 2 + (j - cj) ** 2 <= radius**2] = False
    return mask


def _coarse_bc(mask):
    m = mask.shape[0]
    edges = [(i, j, "left") for i, j in _column_elements(mask, 0)]
    nodes = _face_node_mask(m, edges)
    return ConstraintSet(nodes, nodes)


def _coarse_load(mask):
    m = mask.shape[0]
    return tuple((i, j, "right") for i, j in _column_elements(mask, m - 1))


def coarse_category_counts(n_geometries: int) -> list[int]:
    """Even-as-possible split of geometries across the six categories."""
    base, extra = divmod(n_geometries, len(COARSE_CATEGORIES))
    return [base + (1 if k < extra else 0) for k in range(len(COARSE_CATEGORIES))]


def build_coarse_library(seed: int, n_geometries: int = 80, m: int = COARSE_M,
                         element_size: float = 1.0) -> GeometryLibrary:
    """Coarse-family library: cantilevers fixed on the left, loaded on the
    right, one BC pattern and one load pattern per geometry."""
    meshes, categories, bc_sets, load_edges = [], [], [], []
    counts = coarse_category_counts(n_geometries)
    g = 0
    for category, count in zip(COARSE_CATEGORIES, counts):
        for _ in range(count):
            mask = _generate_mask([int(seed), 1, g],
                                  lambda rng, mm: _coarse_mask(rng, mm, category), m)
            meshes.append(GridMesh(m, element_size, mask))
            categories.append(category)
            bc_sets.append((_coarse_bc(mask),))
            load_edges.append((_coarse_load(mask),))
            g += 1
    return GeometryLibrary("coarse", m, element_size, tuple(meshes), tuple(categories),
                           tuple(bc_sets), tuple(load_edges))
