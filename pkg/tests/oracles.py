"""Independent brute-force implementations used as test oracles.

Everything here is written as plain loops against textbook formulas,
deliberately sharing no code with the production path: dense assembly from
nodal coordinates through the isoparametric Jacobian, dense factorization
with numpy, centroid stress recovery, and elementwise metric definitions.
"""

import numpy as np

VOID_RATIO = 1e-6


def _gauss_points():
    a = 1.0 / np.sqrt(3.0)
    return [(-a, -a), (a, -a), (a, a), (-a, a)]


def _shape_derivatives(xi, eta):
    # local nodes counterclockwise from bottom-left: N1..N4
    dn_dxi = np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)]) / 4.0
    dn_deta = np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)]) / 4.0
    return dn_dxi, dn_deta


def _constitutive(e_mod, nu):
    return e_mod / (1.0 - nu * nu) * np.array(
        [[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1.0 - nu) / 2.0]]
    )


def _b_from_coords(coords, xi, eta):
    dn_dxi, dn_deta = _shape_derivatives(xi, eta)
    jac = np.zeros((2, 2))
    for a in range(4):
        jac[0, 0] += dn_dxi[a] * coords[a, 0]
        jac[0, 1] += dn_dxi[a] * coords[a, 1]
        jac[1, 0] += dn_deta[a] * coords[a, 0]
        jac[1, 1] += dn_deta[a] * coords[a, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    inv = np.array([[jac[1, 1], -jac[0, 1]], [-jac[1, 0], jac[0, 0]]]) / det
    b = np.zeros((3, 8))
    for a in range(4):
        dndx = inv[0, 0] * dn_dxi[a] + inv[0, 1] * dn_deta[a]
        dndy = inv[1, 0] * dn_dxi[a] + inv[1, 1] * dn_deta[a]
        b[0, 2 * a] = dndx
        b[1, 2 * a + 1] = dndy
        b[2, 2 * a] = dndy
        b[2, 2 * a + 1] = dndx
    return b, det


def _element_nodes(i, j, m):
    """Node ids counterclockwise from the bottom-left corner (image rows)."""
    return [
        (i + 1) * (m + 1) + j,
        (i + 1) * (m + 1) + j + 1,
        i * (m + 1) + j + 1,
        i * (m + 1) + j,
    ]


def _node_xy(node_id, m, h):
    r, c = divmod(node_id, m + 1)
    return c * h, (m - r) * h


def dense_solve(case, material):
    """Dense assemble-and-factor reference solution.

    Returns (u_x, u_y, sigma) with nodal displacement grids shaped
    (m+1, m+1) and sigma shaped (m, m, 3) with voids zeroed.
    """
    mesh = case.mesh
    m, h = mesh.m, mesh.element_size
    n_nodes = (m + 1) ** 2
    ndof = 2 * n_nodes
    d_solid = _constitutive(material.youngs_modulus, material.poissons_ratio)

    k = np.zeros((ndof, ndof))
    for i in range(m):
        for j in range(m):
            nodes = _element_nodes(i, j, m)
            coords = np.array([_node_xy(n, m, h) for n in nodes])
            scale = 1.0 if mesh.solid_mask[i, j] else VOID_RATIO
            ke = np.zeros((8, 8))
            for xi, eta in _gauss_points():
                b, det = _b_from_coords(coords, xi, eta)
                ke += b.T @ (scale * d_solid) @ b * det * material.thickness
            dofs = []
            for n in nodes:
                dofs.extend([2 * n, 2 * n + 1])
            for a in range(8):
                for bb in range(8):
                    k[dofs[a], dofs[bb]] += ke[a, bb]

    f = np.zeros(ndof)
    for patch in case.patches:
        for i, j, side in patch.edges:
            nodes = _element_nodes(i, j, m)
            pairs = {"left": (3, 0), "right": (2, 1), "top": (3, 2), "bottom": (0, 1)}[side]
            for local in pairs:
                n = nodes[local]
                f[2 * n] += patch.qx * h * material.thickness / 2.0
                f[2 * n + 1] += patch.qy * h * material.thickness / 2.0

    fixed = []
    for r in range(m + 1):
        for c in range(m + 1):
            n = r * (m + 1) + c
            if case.constraints.fix_x[r, c]:
                fixed.append(2 * n)
            if case.constraints.fix_y[r, c]:
                fixed.append(2 * n + 1)
    keep = np.array([d for d in range(ndof) if d not in set(fixed)])
    u = np.zeros(ndof)
    u[keep] = np.linalg.solve(k[np.ix_(keep, keep)], f[keep])

    sigma = np.zeros((m, m, 3))
    for i in range(m):
        for j in range(m):
            if not mesh.solid_mask[i, j]:
                continue
            nodes = _element_nodes(i, j, m)
            coords = np.array([_node_xy(n, m, h) for n in nodes])
            b, _ = _b_from_coords(coords, 0.0, 0.0)
            q = np.zeros(8)
            for a, n in enumerate(nodes):
                q[2 * a] = u[2 * n]
                q[2 * a + 1] = u[2 * n + 1]
            sigma[i, j] = d_solid @ (b @ q)

    u_x = u[0::2].reshape((m + 1, m + 1))
    u_y = u[1::2].reshape((m + 1, m + 1))
    return u_x, u_y, sigma


# ---------------------------------------------------------------------------
# metric oracles: elementwise loops straight from the definitions
# ---------------------------------------------------------------------------

def mae_loop(truth, pred):
    total = 0.0
    count = 0
    for y, yhat in zip(np.asarray(truth).ravel(), np.asarray(pred).ravel()):
        total += abs(y - yhat)
        count += 1
    return total / count


def mse_loop(truth, pred):
    total = 0.0
    count = 0
    for y, yhat in zip(np.asarray(truth).ravel(), np.asarray(pred).ravel()):
        total += (y - yhat) ** 2
        count += 1
    return total / count


def pmae_loop(truth, pred):
    values = np.asarray(truth).ravel()
    lo, hi = min(values), max(values)
    return mae_loop(truth, pred) / (hi - lo) * 100.0


def pae_loop(truth, pred):
    return abs(max(np.asarray(truth).ravel()) - max(np.asarray(pred).ravel()))


def ppae_loop(truth, pred):
    return pae_loop(truth, pred) / max(np.asarray(truth).ravel()) * 100.0
