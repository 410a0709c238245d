"""JSON case descriptions consumed by ``stressforge solve``.

Schema (see docs/formats.md for the full description)::

    {
      "m": 8,
      "element_size": 1.0,                      # optional, default 1.0
      "material": {"youngs_modulus": ..., "poissons_ratio": ..., "thickness": ...},
      "solid_mask": "full" | [[0/1, ...], ...], # m rows of m values, row 0 = top
      "fix_x_nodes": [[r, c], ...],             # node-grid coordinates
      "fix_y_nodes": [[r, c], ...],
      "patches": [{"edges": [[i, j, "right"], ...], "qx": 1.0, "qy": 0.0}]
    }
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .encoding import CaseSpec, LoadPatch
from .errors import ValidationError
from .fea import ConstraintSet, GridMesh, Material


def _node_flags(entries, m: int, name: str) -> np.ndarray:
    flags = np.zeros((m + 1, m + 1), dtype=bool)
    for entry in entries or []:
        r, c = int(entry[0]), int(entry[1])
        if not (0 <= r <= m and 0 <= c <= m):
            raise ValidationError(f"{name} node ({r}, {c}) outside the (m+1) node grid")
        flags[r, c] = True
    return flags


def case_from_dict(data: dict) -> tuple[CaseSpec, Material]:
    try:
        m = int(data["m"])
    except KeyError as exc:
        raise ValidationError("case description must set 'm'") from exc
    element_size = float(data.get("element_size", 1.0))
    material = Material(**data.get("material", {}))

    mask_spec = data.get("solid_mask", "full")
    if isinstance(mask_spec, str):
        if mask_spec != "full":
            raise ValidationError(f"unknown solid_mask shorthand {mask_spec!r}")
        mask = np.ones((m, m), dtype=bool)
    else:
        mask = np.asarray(mask_spec, dtype=bool)
    mesh = GridMesh(m, element_size, mask)

    constraints = ConstraintSet(
        _node_flags(data.get("fix_x_nodes"), m, "fix_x_nodes"),
        _node_flags(data.get("fix_y_nodes"), m, "fix_y_nodes"),
    )
    patches = tuple(
        LoadPatch(tuple((int(i), int(j), str(side)) for i, j, side in patch["edges"]),
                  float(patch.get("qx", 0.0)), float(patch.get("qy", 0.0)))
        for patch in data.get("patches", [])
    )
    return CaseSpec(mesh, constraints, patches), material


def case_to_dict(case: CaseSpec, material: Material) -> dict:
    return {
        "m": case.mesh.m,
        "element_size": case.mesh.element_size,
        "material": {
            "youngs_modulus": material.youngs_modulus,
            "poissons_ratio": material.poissons_ratio,
            "thickness": material.thickness,
        },
        "solid_mask": case.mesh.solid_mask.astype(int).tolist(),
        "fix_x_nodes": np.argwhere(case.constraints.fix_x).tolist(),
        "fix_y_nodes": np.argwhere(case.constraints.fix_y).tolist(),
        "patches": [
            {"edges": [list(edge) for edge in patch.edges], "qx": patch.qx, "qy": patch.qy}
            for patch in case.patches
        ],
    }


def load_case_file(path) -> tuple[CaseSpec, Material]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid case JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: case description must be a JSON object")
    return case_from_dict(data)


def save_case_file(path, case: CaseSpec, material: Material):
    Path(path).write_text(json.dumps(case_to_dict(case, material), indent=2) + "\n")
