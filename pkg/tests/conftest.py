import numpy as np
import pytest
import scipy.ndimage

from stressforge import CaseSpec, ConstraintSet, GridMesh, LoadPatch, Material


def make_patch_case(m, q=1.0, nu=0.3, element_size=1.0, e_mod=200_000.0):
    """All-solid square plate, left edge fixed in x, bottom-left node fixed
    in y, uniform traction q_x on the right edge: exact solution is a uniform
    uniaxial stress state sigma_x = q."""
    mesh = GridMesh(m, element_size, np.ones((m, m), dtype=bool))
    fix_x = np.zeros((m + 1, m + 1), dtype=bool)
    fix_y = np.zeros((m + 1, m + 1), dtype=bool)
    fix_x[:, 0] = True
    fix_y[m, 0] = True
    edges = tuple((i, m - 1, "right") for i in range(m))
    case = CaseSpec(mesh, ConstraintSet(fix_x, fix_y), (LoadPatch(edges, q, 0.0),))
    return case, Material(youngs_modulus=e_mod, poissons_ratio=nu)


def random_case(rng, m=8):
    """Small random connected case with a left-face clamp and a random
    traction on the right boundary profile."""
    while True:
        mask = np.ones((m, m), dtype=bool)
        for _ in range(int(rng.integers(0, 3))):
            hr = int(rng.integers(1, m - 2))
            hc = int(rng.integers(1, m - 2))
            mask[hr:hr + int(rng.integers(1, 3)), hc:hc + int(rng.integers(1, 3))] = False
        labeled, n = scipy.ndimage.label(mask)
        if n == 1:
            break
    mesh = GridMesh(m, 1.0, mask)

    fix_x = np.zeros((m + 1, m + 1), dtype=bool)
    fix_y = np.zeros((m + 1, m + 1), dtype=bool)
    for i in range(m):
        row = np.flatnonzero(mask[i])
        if row.size:
            j = row[0]
            fix_x[i:i + 2, j] = True
            fix_y[i:i + 2, j] = True

    edges = []
    for i in range(m):
        row = np.flatnonzero(mask[i])
        if row.size:
            edges.append((i, int(row[-1]), "right"))
    qx = float(rng.uniform(-10, 10))
    qy = float(rng.uniform(-10, 10))
    if qx == 0.0 and qy == 0.0:
        qx = 1.0
    case = CaseSpec(mesh, ConstraintSet(fix_x, fix_y), (LoadPatch(tuple(edges), qx, qy),))
    return case, Material()


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)
