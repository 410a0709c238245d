"""Translate cases to and from the 3-channel input / 1-channel target images.

The combined geometry + boundary-condition channel uses integer codes per
element pixel:

* 0 - void
* 1 - free solid
* 2 - fixed horizontally
* 3 - fixed vertically
* 4 - fixed in both directions

An element receives a constraint code when any of its four nodes carries that
constraint; an element whose nodes mix x-only and y-only fixes also maps to
code 4. The two load channels hold the traction components (N/mm^2) of each
loaded element. Load angles are measured counterclockwise from the +x axis;
row 0 of every image is the top row of the physical model (y up).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, ValidationError
from .fea import ConstraintSet, GridMesh, StressField

VOID, FREE, FIX_X, FIX_Y, FIX_BOTH = 0, 1, 2, 3, 4
LEGAL_CODES = frozenset((VOID, FREE, FIX_X, FIX_Y, FIX_BOTH))

# decode picks the first exposed side in this order when reconstructing a
# loaded element's edge; the image format itself does not store edge identity
DECODE_SIDE_PRIORITY = ("right", "top", "left", "bottom")


@dataclass(frozen=True)
class LoadPatch:
    """One traction applied over a set of element edges."""

    edges: tuple
    qx: float
    qy: float

    def __post_init__(self):
        edges = tuple((int(i), int(j), str(side)) for i, j, side in self.edges)
        if len(set(edges)) != len(edges):
            raise ValidationError("load patch repeats an element edge")
        object.__setattr__(self, "edges", edges)

    def magnitude(self) -> float:
        return float(np.hypot(self.qx, self.qy))


@dataclass(frozen=True)
class CaseTags:
    """Provenance of a generated case."""

    geometry_id: int
    bc_id: int
    load_id: int
    orientation: float
    magnitude: float


@dataclass(frozen=True)
class CaseSpec:
    """One problem instance: geometry, constraints, and load patches."""

    mesh: GridMesh
    constraints: ConstraintSet
    patches: tuple
    tags: CaseTags | None = None

    def __post_init__(self):
        object.__setattr__(self, "patches", tuple(self.patches))
        n = self.mesh.m + 1
        if self.constraints.fix_x.shape != (n, n):
            raise ShapeError(
                f"constraints shaped {self.constraints.fix_x.shape}, mesh needs {(n, n)}"
            )
        if self.tags is not None and not 0.0 <= self.tags.orientation < 360.0:
            raise ValidationError(f"orientation {self.tags.orientation} outside [0, 360)")
        for patch in self.patches:
            for i, j, side in patch.edges:
                if not (0 <= i < self.mesh.m and 0 <= j < self.mesh.m):
                    raise ValidationError(f"patch edge ({i}, {j}, {side}) outside grid")
                if not self.mesh.solid_mask[i, j]:
                    raise ValidationError(f"patch edge ({i}, {j}, {side}) on void element")


@dataclass
class ChannelStack:
    """3-channel input image plus the optional 1-channel target."""

    geom_bc: np.ndarray
    load_x: np.ndarray
    load_y: np.ndarray
    target: np.ndarray | None = None

    def __post_init__(self):
        self.geom_bc = np.asarray(self.geom_bc)
        m = self.geom_bc.shape[0]
        if self.geom_bc.shape != (m, m):
            raise ShapeError(f"geom_bc must be square, got {self.geom_bc.shape}")
        self.load_x = np.asarray(self.load_x, dtype=float)
        self.load_y = np.asarray(self.load_y, dtype=float)
        if self.load_x.shape != (m, m) or self.load_y.shape != (m, m):
            raise ShapeError("load channels must match geom_bc shape")
        if self.target is not None:
            self.target = np.asarray(self.target, dtype=float)
            if self.target.shape != (m, m):
                raise ShapeError("target channel must match geom_bc shape")

    @property
    def m(self) -> int:
        return self.geom_bc.shape[0]

    def validate(self):
        codes = np.unique(self.geom_bc)
        illegal = [int(c) for c in codes if int(c) not in LEGAL_CODES or c != int(c)]
        if illegal:
            raise ValidationError(f"illegal geometry/BC codes {illegal}")
        if not (self.geom_bc > 0).any():
            raise ValidationError("stack has no solid element")
        void = self.geom_bc == VOID
        if self.load_x[void].any() or self.load_y[void].any():
            raise ValidationError("load channels must be zero on void pixels")
        if self.target is not None and self.target[void].any():
            raise ValidationError("target channel must be zero on void pixels")


def _elements_with_any_node(node_mask: np.ndarray) -> np.ndarray:
    """Element mask: true where any of the 4 corner nodes is set."""
    return (node_mask[:-1, :-1] | node_mask[:-1, 1:]
            | node_mask[1:, :-1] | node_mask[1:, 1:])


def _nodes_of_elements(elem_mask: np.ndarray) -> np.ndarray:
    """Node mask: true at every node touching a set element."""
    m = elem_mask.shape[0]
    nodes = np.zeros((m + 1, m + 1), dtype=bool)
    nodes[:-1, :-1] |= elem_mask
    nodes[:-1, 1:] |= elem_mask
    nodes[1:, :-1] |= elem_mask
    nodes[1:, 1:] |= elem_mask
    return nodes


def encode_input(case: CaseSpec) -> ChannelStack:
    """Build the 3-channel input image from a case."""
    mask = case.mesh.solid_mask
    has_x = _elements_with_any_node(case.constraints.fix_x)
    has_y = _elements_with_any_node(case.constraints.fix_y)
    geom_bc = np.where(mask, 1 + has_x + 2 * has_y, VOID).astype(np.int8)

    m = case.mesh.m
    load_x = np.zeros((m, m))
    load_y = np.zeros((m, m))
    assigned = np.zeros((m, m), dtype=bool)
    for patch in case.patches:
        for i, j, _side in patch.edges:
            if assigned[i, j] and (load_x[i, j] != patch.qx or load_y[i, j] != patch.qy):
                raise ValidationError(
                    f"element ({i}, {j}) carries conflicting load values"
                )
            load_x[i, j] = patch.qx
            load_y[i, j] = patch.qy
            assigned[i, j] = True
    return ChannelStack(geom_bc, load_x, load_y)


def encode_target(stress: StressField) -> np.ndarray:
    """Target channel: the per-element von Mises field."""
    vm = np.asarray(stress.von_mises, dtype=float)
    if vm.ndim != 2 or vm.shape[0] != vm.shape[1]:
        raise ShapeError(f"von Mises field must be square, got {vm.shape}")
    return vm.copy()


def encode_case(case: CaseSpec, stress: StressField) -> ChannelStack:
    """Input channels plus solved target in one stack."""
    stack = encode_input(case)
    target = encode_target(stress)
    if target.shape != stack.geom_bc.shape:
        raise ShapeError("stress field does not match case mesh size")
    stack.target = np.where(stack.geom_bc == VOID, 0.0, target)
    return stack


def _recover_axis_constraints(geom_bc: np.ndarray, required_codes, forbidding_codes) -> np.ndarray:
    """Node fix flags for one axis, maximal among assignments that re-encode
    to the same element codes."""
    required = np.isin(geom_bc, required_codes)
    forbidding = np.isin(geom_bc, forbidding_codes)
    allowed = ~_nodes_of_elements(forbidding)
    fixed = _nodes_of_elements(required) & allowed
    covered = _elements_with_any_node(fixed)
    missing = required & ~covered
    if missing.any():
        i, j = np.argwhere(missing)[0]
        raise ValidationError(
            f"constraint codes are unrealizable: element ({i}, {j}) requires a "
            "fixed node but all its nodes border elements that forbid one"
        )
    return fixed


def _exposed_side(mask: np.ndarray, i: int, j: int, side: str) -> bool:
    m = mask.shape[0]
    di, dj = {"left": (0, -1), "right": (0, 1), "top": (-1, 0), "bottom": (1, 0)}[side]
    ni, nj = i + di, j + dj
    if not (0 <= ni < m and 0 <= nj < m):
        return True
    return not mask[ni, nj]


def _canonical_edge(mask: np.ndarray, i: int, j: int) -> tuple[int, int, str]:
    for side in DECODE_SIDE_PRIORITY:
        if _exposed_side(mask, i, j, side):
            return (i, j, side)
    return (i, j, DECODE_SIDE_PRIORITY[0])


def _group_loaded_elements(mask, load_x, load_y):
    """Connected groups (4-neighborhood) of equal-valued loaded pixels."""
    loaded = (load_x != 0.0) | (load_y != 0.0)
    m = mask.shape[0]
    seen = np.zeros((m, m), dtype=bool)
    groups = []
    for i, j in np.argwhere(loaded):
        if seen[i, j]:
            continue
        qx, qy = load_x[i, j], load_y[i, j]
        stack, members = [(i, j)], []
        seen[i, j] = True
        while stack:
            ci, cj = stack.pop()
            members.append((ci, cj))
            for ni, nj in ((ci - 1, cj), (ci + 1, cj), (ci, cj - 1), (ci, cj + 1)):
                if (0 <= ni < m and 0 <= nj < m and loaded[ni, nj] and not seen[ni, nj]
                        and load_x[ni, nj] == qx and load_y[ni, nj] == qy):
                    seen[ni, nj] = True
                    stack.append((ni, nj))
        members.sort()
        groups.append((members, qx, qy))
    groups.sort(key=lambda g: g[0][0])
    return groups


def decode_input(stack: ChannelStack, element_size: float = 1.0) -> CaseSpec:
    """Reconstruct a case from input channels.

    ``encode_input(decode_input(s))`` reproduces ``s`` bit-exactly. Node
    constraints come back as the maximal set consistent with the codes, and
    each loaded element is assigned its first exposed edge in the order
    right, top, left, bottom (edge identity is not stored in the channels).
    """
    stack.validate()
    geom_bc = np.asarray(stack.geom_bc).astype(np.int64)
    mesh = GridMesh(stack.m, element_size, geom_bc != VOID)
    fix_x = _recover_axis_constraints(geom_bc, (FIX_X, FIX_BOTH), (FREE, FIX_Y))
    fix_y = _recover_axis_constraints(geom_bc, (FIX_Y, FIX_BOTH), (FREE, FIX_X))
    patches = tuple(
        LoadPatch(tuple(_canonical_edge(mesh.solid_mask, i, j) for i, j in members), qx, qy)
        for members, qx, qy in _group_loaded_elements(mesh.solid_mask, stack.load_x, stack.load_y)
    )
    return CaseSpec(mesh, ConstraintSet(fix_x, fix_y), patches)


_EXACT_AXIS_DIRECTIONS = {0: (1.0, 0.0), 90: (0.0, 1.0), 180: (-1.0, 0.0), 270: (0.0, -1.0)}


def unit_direction(degrees: float) -> tuple[float, float]:
    """(cos, sin) of an angle in degrees, exact on the four axis directions."""
    key = degrees % 360.0
    if key == int(key) and int(key) in _EXACT_AXIS_DIRECTIONS:
        return _EXACT_AXIS_DIRECTIONS[int(key)]
    rad = np.deg2rad(degrees)
    return float(np.cos(rad)), float(np.sin(rad))
