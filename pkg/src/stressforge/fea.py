"""Linear plane-stress FEA on regular grids of 4-node quadrilateral elements.

Grid conventions used throughout the package:

* Element fields are ``m x m`` arrays in image order: row 0 is the *top* row.
* Nodal fields are ``(m+1) x (m+1)`` arrays, node ``(r, c)`` sits at physical
  coordinates ``x = c*h``, ``y = (m - r)*h`` with the y axis pointing up.
* Node ``(r, c)`` has id ``r*(m+1) + c``; its x/y degrees of freedom are
  ``2*id`` and ``2*id + 1``.
* Element ``(i, j)`` touches nodes ``(i, j)``, ``(i, j+1)``, ``(i+1, j)``,
  ``(i+1, j+1)``; the local connectivity runs counterclockwise from the
  bottom-left corner.

Void elements participate in the assembly with a Young's modulus scaled by
``VOID_STIFFNESS_RATIO`` so the global matrix stays positive definite; their
recovered stresses are forced to exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage
import scipy.sparse
import scipy.sparse.linalg

from .errors import (
    NumericalError,
    ParameterError,
    ShapeError,
    UnderConstrainedError,
    ValidationError,
)

VOID_STIFFNESS_RATIO = 1e-6
SOLVE_RTOL = 1e-10

EDGE_SIDES = ("left", "right", "top", "bottom")


@dataclass(frozen=True)
class Material:
    """Isotropic plane-stress material (units: MPa, mm)."""

    youngs_modulus: float = 200_000.0
    poissons_ratio: float = 0.3
    thickness: float = 1.0

    def __post_init__(self):
        if not self.youngs_modulus > 0:
            raise ParameterError(f"youngs_modulus must be > 0, got {self.youngs_modulus}")
        if not 0.0 <= self.poissons_ratio < 0.5:
            raise ParameterError(f"poissons_ratio must be in [0, 0.5), got {self.poissons_ratio}")
        if not self.thickness > 0:
            raise ParameterError(f"thickness must be > 0, got {self.thickness}")

    def elasticity_matrix(self) -> np.ndarray:
        """3x3 plane-stress constitutive matrix relating strain to stress."""
        e, nu = self.youngs_modulus, self.poissons_ratio
        return e / (1.0 - nu**2) * np.array(
            [[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1.0 - nu) / 2.0]]
        )


def _frozen_array(values, dtype, shape, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape != shape:
        raise ShapeError(f"{name} must have shape {shape}, got {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GridMesh:
    """Regular grid of square elements with a solid/void mask."""

    m: int
    element_size: float
    solid_mask: np.ndarray

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError(f"m must be >= 1, got {self.m}")
        if not self.element_size > 0:
            raise ParameterError(f"element_size must be > 0, got {self.element_size}")
        mask = _frozen_array(self.solid_mask, bool, (self.m, self.m), "solid_mask")
        object.__setattr__(self, "solid_mask", mask)
        if not mask.any():
            raise ValidationError("solid_mask has no solid element")
        _, n_components = scipy.ndimage.label(mask)
        if n_components != 1:
            raise ValidationError(
                f"solid region must be one 4-connected component, found {n_components}"
            )

    @property
    def n_nodes(self) -> int:
        return (self.m + 1) ** 2

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    def node_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical (x, y) of every node, each shaped (m+1, m+1), y up."""
        h = self.element_size
        r, c = np.meshgrid(np.arange(self.m + 1), np.arange(self.m + 1), indexing="ij")
        return c * h, (self.m - r) * h


@dataclass(frozen=True)
class ConstraintSet:
    """Per-node axis-fix flags over the (m+1) x (m+1) node grid."""

    fix_x: np.ndarray
    fix_y: np.ndarray

    def __post_init__(self):
        fx = np.asarray(self.fix_x, dtype=bool)
        if fx.ndim != 2 or fx.shape[0] != fx.shape[1]:
            raise ShapeError(f"constraint grids must be square 2-D, got {fx.shape}")
        fy = _frozen_array(self.fix_y, bool, fx.shape, "fix_y")
        fx = _frozen_array(fx, bool, fx.shape, "fix_x")
        object.__setattr__(self, "fix_x", fx)
        object.__setattr__(self, "fix_y", fy)

    @classmethod
    def none(cls, m: int) -> "ConstraintSet":
        shape = (m + 1, m + 1)
        return cls(np.zeros(shape, dtype=bool), np.zeros(shape, dtype=bool))

    def fixed_dof_mask(self) -> np.ndarray:
        """Boolean mask over the 2*(m+1)^2 interleaved x/y DOFs."""
        mask = np.empty(2 * self.fix_x.size, dtype=bool)
        mask[0::2] = self.fix_x.ravel()
        mask[1::2] = self.fix_y.ravel()
        return mask


@dataclass(frozen=True)
class LoadField:
    """Consistent nodal forces (N) on the (m+1) x (m+1) node grid."""

    fx: np.ndarray
    fy: np.ndarray

    def __post_init__(self):
        fx = np.asarray(self.fx, dtype=float)
        fy = _frozen_array(self.fy, float, fx.shape, "fy")
        fx = _frozen_array(fx, float, fx.shape, "fx")
        object.__setattr__(self, "fx", fx)
        object.__setattr__(self, "fy", fy)

    def dof_vector(self) -> np.ndarray:
        vec = np.empty(2 * self.fx.size)
        vec[0::2] = self.fx.ravel()
        vec[1::2] = self.fy.ravel()
        return vec


@dataclass(frozen=True)
class DisplacementField:
    """Nodal displacements (mm); exactly zero on constrained axes."""

    ux: np.ndarray
    uy: np.ndarray


@dataclass(frozen=True)
class StressField:
    """Per-element stress tensor components and von Mises stress (MPa)."""

    sigma_x: np.ndarray
    sigma_y: np.ndarray
    tau_xy: np.ndarray
    von_mises: np.ndarray


def von_mises(sigma_x, sigma_y, tau_xy):
    """2-D von Mises equivalent stress; total function, always >= 0."""
    sx = np.asarray(sigma_x, dtype=float)
    sy = np.asarray(sigma_y, dtype=float)
    txy = np.asarray(tau_xy, dtype=float)
    squared = sx * sx + sy * sy - sx * sy + 3.0 * txy * txy
    return np.sqrt(np.maximum(squared, 0.0))


def _shape_gradients(xi: float, eta: float) -> np.ndarray:
    """dN/d(xi,eta) for the bilinear quad, local nodes counterclockwise
    from the bottom-left corner. Shape (2, 4)."""
    return 0.25 * np.array(
        [
            [-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)],
            [-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)],
        ]
    )


def _b_matrix(xi: float, eta: float, element_size: float) -> np.ndarray:
    """Strain-displacement matrix (3x8) for a square element of side h.

    The isoparametric map is a pure scaling, J = (h/2) I.
    """
    dn = (2.0 / element_size) * _shape_gradients(xi, eta)
    b = np.zeros((3, 8))
    b[0, 0::2] = dn[0]
    b[1, 1::2] = dn[1]
    b[2, 0::2] = dn[1]
    b[2, 1::2] = dn[0]
    return b


_GAUSS_POINTS = [
    (-1.0 / np.sqrt(3.0), -1.0 / np.sqrt(3.0)),
    (1.0 / np.sqrt(3.0), -1.0 / np.sqrt(3.0)),
    (1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0)),
    (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0)),
]


def element_stiffness(material: Material, element_size: float) -> np.ndarray:
    """8x8 stiffness of one square bilinear quad, 2x2 Gauss quadrature."""
    if not element_size > 0:
        raise ParameterError(f"element_size must be > 0, got {element_size}")
    d = material.elasticity_matrix()
    det_j = element_size**2 / 4.0
    ke = np.zeros((8, 8))
    for xi, eta in _GAUSS_POINTS:
        b = _b_matrix(xi, eta, element_size)
        ke += b.T @ d @ b * det_j
    return ke * material.thickness


def element_dof_matrix(m: int) -> np.ndarray:
    """DOF indices per element, shape (m*m, 8), elements in row-major image
    order, local nodes counterclockwise from the bottom-left corner."""
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    n1 = (i + 1) * (m + 1) + j
    n2 = (i + 1) * (m + 1) + j + 1
    n3 = i * (m + 1) + j + 1
    n4 = i * (m + 1) + j
    nodes = np.stack([n1, n2, n3, n4], axis=1)
    edof = np.empty((m * m, 8), dtype=np.int64)
    edof[:, 0::2] = 2 * nodes
    edof[:, 1::2] = 2 * nodes + 1
    return edof


def edge_nodes(i: int, j: int, side: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two node-grid coordinates of one element edge."""
    if side == "left":
        return (i, j), (i + 1, j)
    if side == "right":
        return (i, j + 1), (i + 1, j + 1)
    if side == "top":
        return (i, j), (i, j + 1)
    if side == "bottom":
        return (i + 1, j), (i + 1, j + 1)
    raise ValidationError(f"unknown element side {side!r}")


def nodal_loads_from_patches(mesh: GridMesh, patches, thickness: float) -> LoadField:
    """Convert traction patches (N/mm^2 on element edges) to nodal forces.

    Each loaded edge lumps ``q * edge_length * thickness`` equally onto its
    two end nodes, per axis.
    """
    fx = np.zeros((mesh.m + 1, mesh.m + 1))
    fy = np.zeros((mesh.m + 1, mesh.m + 1))
    half = 0.5 * mesh.element_size * thickness
    for patch in patches:
        for i, j, side in patch.edges:
            if not (0 <= i < mesh.m and 0 <= j < mesh.m):
                raise ValidationError(f"edge ({i}, {j}, {side}) outside {mesh.m}x{mesh.m} grid")
            if not mesh.solid_mask[i, j]:
                raise ValidationError(f"load edge ({i}, {j}, {side}) lies on a void element")
            for r, c in edge_nodes(i, j, side):
                fx[r, c] += patch.qx * half
                fy[r, c] += patch.qy * half
    return LoadField(fx, fy)


class MeshSystem:
    """Assembled FE state: reduced stiffness, load vector, constraint set.

    Immutable after construction. The sparse factorization is computed on
    first solve and shared by systems derived via :meth:`with_loads`, so a
    geometry/constraint pair factors once across many load cases.
    """

    def __init__(self, mesh: GridMesh, material: Material, constraints: ConstraintSet,
                 loads: LoadField, k_reduced, free_dofs: np.ndarray,
                 shared: dict | None = None):
        self.mesh = mesh
        self.material = material
        self.constraints = constraints
        self.loads = loads
        self.k_reduced = k_reduced
        self.free_dofs = free_dofs
        self.f_reduced = loads.dof_vector()[free_dofs]
        self._shared = {"factor": None, "k_longdouble": None} if shared is None else shared

    def factor(self):
        if self._shared["factor"] is None:
            try:
                self._shared["factor"] = scipy.sparse.linalg.splu(self.k_reduced)
            except RuntimeError as exc:
                raise UnderConstrainedError(f"reduced stiffness factorization failed: {exc}") from exc
        return self._shared["factor"]

    def k_longdouble(self):
        """Extended-precision copy of the reduced stiffness, for residual
        computation when the double-precision floor is above tolerance."""
        if self._shared["k_longdouble"] is None:
            self._shared["k_longdouble"] = self.k_reduced.astype(np.longdouble)
        return self._shared["k_longdouble"]

    def with_loads(self, loads: LoadField) -> "MeshSystem":
        """New system sharing this one's stiffness and factorization."""
        return MeshSystem(self.mesh, self.material, self.constraints, loads,
                          self.k_reduced, self.free_dofs, self._shared)


def _check_rigid_modes_constrained(mesh: GridMesh, constraints: ConstraintSet):
    """The three in-plane rigid modes must all be blocked by the fixed DOFs."""
    x, y = mesh.node_coordinates()
    rows = []
    if constraints.fix_x.any():
        fx, fy_coord = x[constraints.fix_x], y[constraints.fix_x]
        rows.append(np.stack([np.ones_like(fx), np.zeros_like(fx), -fy_coord], axis=1))
    if constraints.fix_y.any():
        gx, gy = x[constraints.fix_y], y[constraints.fix_y]
        rows.append(np.stack([np.zeros_like(gx), np.ones_like(gx), gx], axis=1))
    if not rows:
        raise UnderConstrainedError("no constrained degrees of freedom")
    modes = np.concatenate(rows, axis=0)
    if np.linalg.matrix_rank(modes) < 3:
        raise UnderConstrainedError(
            "constraints leave a rigid-body mode free (rank "
            f"{np.linalg.matrix_rank(modes)} of 3 required)"
        )


def assemble_global(mesh: GridMesh, material: Material):
    """Unreduced global stiffness (2*(m+1)^2 square, CSC). Void elements
    contribute with their stiffness scaled by ``VOID_STIFFNESS_RATIO``."""
    ke = element_stiffness(material, mesh.element_size)
    edof = element_dof_matrix(mesh.m)
    factors = np.where(mesh.solid_mask.ravel(), 1.0, VOID_STIFFNESS_RATIO)
    rows = np.repeat(edof, 8, axis=1).ravel()
    cols = np.tile(edof, (1, 8)).ravel()
    vals = (factors[:, None] * ke.ravel()[None, :]).ravel()
    return scipy.sparse.coo_matrix((vals, (rows, cols)),
                                   shape=(mesh.n_dofs, mesh.n_dofs)).tocsc()


def assemble(mesh: GridMesh, material: Material, loads: LoadField,
             constraints: ConstraintSet) -> MeshSystem:
    """Scatter-add element matrices, then eliminate constrained DOFs by
    deleting their rows and columns."""
    n = mesh.m + 1
    if constraints.fix_x.shape != (n, n):
        raise ShapeError(f"constraints shaped {constraints.fix_x.shape}, mesh needs {(n, n)}")
    if loads.fx.shape != (n, n):
        raise ShapeError(f"loads shaped {loads.fx.shape}, mesh needs {(n, n)}")
    _check_rigid_modes_constrained(mesh, constraints)

    k_full = assemble_global(mesh, material)
    free = np.flatnonzero(~constraints.fixed_dof_mask())
    k_reduced = k_full[free][:, free]
    return MeshSystem(mesh, material, constraints, loads, k_reduced, free)


def solve_displacements(system: MeshSystem) -> DisplacementField:
    """Solve the reduced system; constrained DOFs come back exactly zero."""
    m = system.mesh.m
    full = np.zeros(system.mesh.n_dofs)
    f_norm = np.linalg.norm(system.f_reduced)
    if f_norm > 0.0:
        factor = system.factor()
        q = factor.solve(system.f_reduced)
        if not np.all(np.isfinite(q)):
            raise UnderConstrainedError("solution contains non-finite values")
        residual = np.linalg.norm(system.k_reduced @ q - system.f_reduced) / f_norm
        if residual > SOLVE_RTOL:
            # iterative refinement with extended-precision defects; the plain
            # double-precision residual bottoms out near eps * ||K|| ||q|| / ||F||,
            # which the soft void stiffness can push above tolerance
            k_ld = system.k_longdouble()
            f_ld = system.f_reduced.astype(np.longdouble)
            for _ in range(4):
                defect = f_ld - k_ld @ q.astype(np.longdouble)
                residual = float(np.linalg.norm(defect.astype(np.float64)) / f_norm)
                if residual <= SOLVE_RTOL:
                    break
                q = q + factor.solve(defect.astype(np.float64))
        if residual > SOLVE_RTOL:
            raise NumericalError(
                f"relative residual {residual:.3e} exceeds {SOLVE_RTOL:.1e}", residual
            )
        full[system.free_dofs] = q
    shape = (m + 1, m + 1)
    return DisplacementField(full[0::2].reshape(shape), full[1::2].reshape(shape))


def recover_stress(mesh: GridMesh, material: Material,
                   displacements: DisplacementField) -> StressField:
    """Centroid stress tensor per element, sigma = D B q; voids forced to 0."""
    n = mesh.m + 1
    if displacements.ux.shape != (n, n) or displacements.uy.shape != (n, n):
        raise ShapeError(
            f"displacement grids shaped {displacements.ux.shape}, mesh needs {(n, n)}"
        )
    vec = np.empty(mesh.n_dofs)
    vec[0::2] = np.asarray(displacements.ux, dtype=float).ravel()
    vec[1::2] = np.asarray(displacements.uy, dtype=float).ravel()
    db = material.elasticity_matrix() @ _b_matrix(0.0, 0.0, mesh.element_size)
    q_elems = vec[element_dof_matrix(mesh.m)]
    sigma = q_elems @ db.T
    shape = (mesh.m, mesh.m)
    solid = mesh.solid_mask
    sx = np.where(solid, sigma[:, 0].reshape(shape), 0.0)
    sy = np.where(solid, sigma[:, 1].reshape(shape), 0.0)
    txy = np.where(solid, sigma[:, 2].reshape(shape), 0.0)
    return StressField(sx, sy, txy, von_mises(sx, sy, txy))


def solve_case(case, material: Material) -> StressField:
    """End-to-end solve of one case: assemble, displace, recover stress.

    ``case`` is any object exposing ``mesh``, ``constraints`` and ``patches``
    (see :class:`stressforge.encoding.CaseSpec`).
    """
    loads = nodal_loads_from_patches(case.mesh, case.patches, material.thickness)
    system = assemble(case.mesh, material, loads, case.constraints)
    displacements = solve_displacements(system)
    return recover_stress(case.mesh, material, displacements)
