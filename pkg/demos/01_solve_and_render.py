"""Solve one plane-stress case by hand and render its channels.

Builds a square plate with a circular hole, clamps the left boundary, pulls
on the right edge at 30 degrees, solves for the von Mises field, and writes
PNG heatmaps plus a single-record SGF1 file.
"""

import numpy as np

from stressforge import (
    CaseSpec, ConstraintSet, GridMesh, LoadPatch, Material,
    encode_case, solve_case, unit_direction,
)
from stressforge.render import render_channel
from stressforge.sgfio import RecordWriter

m = 64
mask = np.ones((m, m), dtype=bool)
ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
mask[(ii - m // 2) ** 2 + (jj - m // 2) ** 2 <= (m // 8) ** 2] = False
mesh = GridMesh(m, 1.0, mask)

fix = np.zeros((m + 1, m + 1), dtype=bool)
fix[:, 0] = True
constraints = ConstraintSet(fix, fix)

q, theta = 50.0, 30.0
dx, dy = unit_direction(theta)
edges = tuple((i, m - 1, "right") for i in range(m))
case = CaseSpec(mesh, constraints, (LoadPatch(edges, q * dx, q * dy),))

material = Material()
field = solve_case(case, material)
print(f"solved {m}x{m} plate with hole: peak von Mises "
      f"{field.von_mises.max():.1f} MPa at q={q} N/mm^2, theta={theta} deg")

stack = encode_case(case, field)
with RecordWriter("demo_case.sgf1", m, 4) as writer:
    writer.write(0, np.stack([stack.geom_bc.astype(np.float32),
                              stack.load_x.astype(np.float32),
                              stack.load_y.astype(np.float32),
                              stack.target.astype(np.float32)]))
print("wrote demo_case.sgf1")

for name, channel in (("geom_bc", stack.geom_bc), ("von_mises", stack.target)):
    lo, hi = render_channel(channel, f"demo_{name}.png", scale=6)
    print(f"rendered demo_{name}.png  range [{lo:.3g}, {hi:.3g}]")
