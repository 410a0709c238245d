"""Dataset generation, load normalization, and train/test splits.

A generation config pins the family, pattern counts, orientation and
magnitude grids, normalization mode, and seed; together these determine
every byte of the output. Cases are ordered by
(geometry, bc, load, orientation, magnitude) and the flat enumeration index
is the case id.

Unit normalization removes the load-scale axis: the magnitude grid collapses
to the single unit magnitude, which is what makes the coarse-family
generalization splits small (80 geometries x 72 orientations).
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import fea
from .encoding import CaseSpec, CaseTags, LoadPatch, encode_case, unit_direction
from .errors import ParameterError, StressforgeError, ValidationError
from .geometry import (
    COARSE_M,
    FINE_M,
    OPENING_CATEGORIES,
    PARABOLA_CATEGORIES,
    GeometryLibrary,
    build_coarse_library,
    build_fine_library,
)
from .sgfio import DATASET_CHANNELS, DatasetManifest, RecordWriter, dataset_paths

FINE_ORIENTATIONS = tuple(float(t) for t in range(0, 360, 45))
COARSE_ORIENTATIONS = tuple(float(t) for t in range(0, 360, 5))
COARSE_MAGNITUDES = tuple(float(q) for q in range(0, 101, 5))

GENERALIZATION_MODES = ("cross-parabola", "cross-opening", "cross-orientation")


@dataclass(frozen=True)
class GenerationConfig:
    """Everything needed to reproduce one dataset family."""

    family: str
    m: int
    element_size: float
    n_geometries: int
    n_bc_patterns: int
    n_load_patterns: int
    orientations: tuple
    magnitudes: tuple
    normalization: str
    seed: int
    material: fea.Material = fea.Material()

    def __post_init__(self):
        if self.family not in ("fine", "coarse"):
            raise ParameterError(f"family must be 'fine' or 'coarse', got {self.family!r}")
        if self.normalization not in ("unit", "passthrough"):
            raise ParameterError(f"unknown normalization mode {self.normalization!r}")
        if self.normalization == "unit" and tuple(self.magnitudes) != (1.0,):
            raise ParameterError(
                "unit normalization collapses the magnitude axis; magnitudes must be (1.0,)"
            )
        if min(self.n_geometries, self.n_bc_patterns, self.n_load_patterns) < 1:
            raise ParameterError("pattern counts must all be >= 1")
        if not self.orientations or not self.magnitudes:
            raise ParameterError("orientation and magnitude grids must be nonempty")
        for theta in self.orientations:
            if not 0.0 <= theta < 360.0:
                raise ParameterError(f"orientation {theta} outside [0, 360)")

    @classmethod
    def fine(cls, seed: int, normalization: str = "unit",
             magnitudes: tuple = (1.0,)) -> "GenerationConfig":
        return cls("fine", FINE_M, 1.0, 60, 8, 10, FINE_ORIENTATIONS,
                   tuple(magnitudes), normalization, seed)

    @classmethod
    def coarse(cls, seed: int, normalization: str = "passthrough") -> "GenerationConfig":
        magnitudes = (1.0,) if normalization == "unit" else COARSE_MAGNITUDES
        return cls("coarse", COARSE_M, 1.0, 80, 1, 1, COARSE_ORIENTATIONS,
                   magnitudes, normalization, seed)

    @property
    def total_cases(self) -> int:
        return (self.n_geometries * self.n_bc_patterns * self.n_load_patterns
                * len(self.orientations) * len(self.magnitudes))


def generate_geometries(config: GenerationConfig) -> GeometryLibrary:
    """Build the seeded geometry/BC/load library for a config."""
    if config.family == "fine":
        return build_fine_library(config.seed, config.n_geometries, config.n_bc_patterns,
                                  config.n_load_patterns, config.m, config.element_size)
    if config.n_bc_patterns != 1 or config.n_load_patterns != 1:
        raise ParameterError("coarse family has exactly one BC and one load pattern")
    return build_coarse_library(config.seed, config.n_geometries, config.m,
                                config.element_size)


def enumerate_cases(config: GenerationConfig,
                    library: GeometryLibrary | None = None) -> list[CaseSpec]:
    """All cases of a config in (geometry, bc, load, orientation, magnitude)
    order; the list index is the case id."""
    if library is None:
        library = generate_geometries(config)
    if (library.family != config.family or library.n_geometries != config.n_geometries
            or library.m != config.m):
        raise ValidationError("geometry library does not match the generation config")
    cases = []
    for g in range(config.n_geometries):
        mesh = library.meshes[g]
        for b in range(config.n_bc_patterns):
            constraints = library.bc_sets[g][b]
            for l in range(config.n_load_patterns):
                edges = library.load_edges[g][l]
                for theta in config.orientations:
                    dx, dy = unit_direction(theta)
                    for mag in config.magnitudes:
                        patch = LoadPatch(edges, mag * dx, mag * dy)
                        tags = CaseTags(g, b, l, float(theta), float(mag))
                        cases.append(CaseSpec(mesh, constraints, (patch,), tags))
    return cases


def normalize_loads(case: CaseSpec, mode: str) -> CaseSpec:
    """Scale each patch to unit traction magnitude (zero patches pass
    through); the original magnitude stays recorded in the tags."""
    if mode == "passthrough":
        return case
    if mode != "unit":
        raise ParameterError(f"unknown normalization mode {mode!r}")
    patches = []
    for patch in case.patches:
        magnitude = patch.magnitude()
        if magnitude == 0.0:
            patches.append(patch)
        else:
            patches.append(replace(patch, qx=patch.qx / magnitude, qy=patch.qy / magnitude))
    return replace(case, patches=tuple(patches))


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------

@dataclass
class SolveSummary:
    n_written: int
    failures: list  # rows (case_id, message)

    @property
    def n_failed(self) -> int:
        return len(self.failures)


def _case_planes(case: CaseSpec, stress) -> np.ndarray:
    stack = encode_case(case, stress)
    return np.stack([
        stack.geom_bc.astype(np.float32),
        stack.load_x.astype(np.float32),
        stack.load_y.astype(np.float32),
        stack.target.astype(np.float32),
    ])


def _solve_group(material: fea.Material, group: list) -> tuple[list, list]:
    """Solve cases sharing one (mesh, constraints) pair, reusing the
    stiffness factorization. Returns (written rows, failure rows)."""
    written, failures = [], []
    system = None
    for case_id, case in group:
        try:
            loads = fea.nodal_loads_from_patches(case.mesh, case.patches,
                                                 material.thickness)
            if system is None:
                system = fea.assemble(case.mesh, material, loads, case.constraints)
            else:
                system = system.with_loads(loads)
            stress = fea.recover_stress(case.mesh, material,
                                        fea.solve_displacements(system))
            written.append((case_id, _case_planes(case, stress)))
        except StressforgeError as exc:
            failures.append((case_id, str(exc)))
    return written, failures


def _solve_group_payload(payload):
    material, group = payload
    return _solve_group(material, group)


def solve_all(cases, material: fea.Material, writer: RecordWriter,
              case_ids=None, workers: int = 1) -> SolveSummary:
    """Solve every case and stream records to the writer in case order.

    Cases are grouped by shared (mesh, constraints) so each group factors its
    stiffness once; groups fan out to a process pool when ``workers > 1``,
    and results are written in submission order regardless of pool size.
    """
    if case_ids is None:
        case_ids = range(len(cases))
    pairs = list(zip(case_ids, cases))
    groups = [list(members) for _, members in itertools.groupby(
        pairs, key=lambda pair: (id(pair[1].mesh), id(pair[1].constraints)))]

    failures = []
    n_written = 0
    if workers <= 1:
        results = (_solve_group(material, group) for group in groups)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_solve_group_payload,
                           [(material, group) for group in groups])
    try:
        for written, failed in results:
            for case_id, planes in written:
                writer.write(case_id, planes)
                n_written += 1
            failures.extend(failed)
    finally:
        if workers > 1:
            pool.shutdown()
    failures.sort(key=lambda row: row[0])
    return SolveSummary(n_written, failures)


def build_manifest(config: GenerationConfig, cases, name: str,
                   case_ids=None, failures=None, categories=()) -> DatasetManifest:
    """Manifest rows for the given cases (ids default to list positions)."""
    if case_ids is None:
        case_ids = range(len(cases))
    failed = {case_id for case_id, _ in (failures or [])}
    provenance = [
        [int(case_id), case.tags.geometry_id, case.tags.bc_id, case.tags.load_id,
         case.tags.orientation, case.tags.magnitude]
        for case_id, case in zip(case_ids, cases) if case_id not in failed
    ]
    return DatasetManifest(
        name=name,
        family=config.family,
        m=config.m,
        element_size=config.element_size,
        material={
            "youngs_modulus": config.material.youngs_modulus,
            "poissons_ratio": config.material.poissons_ratio,
            "thickness": config.material.thickness,
        },
        seed=config.seed,
        normalization=config.normalization,
        counts={
            "geometries": config.n_geometries,
            "bc_patterns": config.n_bc_patterns,
            "load_patterns": config.n_load_patterns,
            "orientations": len(config.orientations),
            "magnitudes": len(config.magnitudes),
        },
        total_enumerated=config.total_cases,
        case_count=len(provenance),
        categories=list(categories),
        provenance=provenance,
        failures=[[int(i), msg] for i, msg in (failures or [])],
    )


def generate_dataset(config: GenerationConfig, out_dir, name: str | None = None,
                     limit: int | None = None, workers: int = 1):
    """Generate, solve, and persist a dataset directory.

    Returns (manifest, summary). ``limit`` truncates to the first N cases of
    the deterministic enumeration order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    library = generate_geometries(config)
    cases = enumerate_cases(config, library)
    if limit is not None:
        cases = cases[:limit]
    records_path, manifest_path = dataset_paths(out_dir)
    with RecordWriter(records_path, config.m, DATASET_CHANNELS) as writer:
        summary = solve_all(cases, config.material, writer, workers=workers)
    manifest = build_manifest(config, cases, name or f"{config.family}-{config.seed}",
                              failures=summary.failures, categories=library.categories)
    manifest.save(manifest_path)
    return manifest, summary


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

def split_random(manifest: DatasetManifest, ratio: float, seed: int):
    """Seeded uniform shuffle; |train| = round(ratio * N)."""
    if not 0.0 < ratio < 1.0:
        raise ParameterError(f"split ratio must be in (0, 1), got {ratio}")
    ids = np.array(sorted(manifest.case_ids()), dtype=np.int64)
    order = np.random.default_rng(seed).permutation(len(ids))
    n_train = int(round(ratio * len(ids)))
    train = ids[order[:n_train]]
    test = ids[order[n_train:]]
    return sorted(int(i) for i in train), sorted(int(i) for i in test)


def orientation_quadrant(orientation: float) -> int:
    """Quadrant i covers [90(i-1), 90i) degrees, returned 0-based."""
    return int(orientation // 90.0) % 4


def split_generalization(manifest: DatasetManifest, mode: str, seed: int | None = None):
    """Category or orientation holdout splits for the coarse family.

    All three modes operate on unit-normalized manifests, mirroring the
    magnitude normalization applied before the generalization experiments.
    """
    if mode not in GENERALIZATION_MODES:
        raise ValidationError(f"unknown generalization mode {mode!r}")
    if manifest.family != "coarse":
        raise ValidationError("generalization splits require a coarse-family manifest")
    if manifest.normalization != "unit":
        raise ValidationError("generalization splits require unit-normalized loads")
    if not manifest.categories:
        raise ValidationError("manifest lacks per-geometry category tags")

    rows = manifest.provenance
    if mode == "cross-orientation":
        if seed is None:
            raise ValidationError("cross-orientation split requires a seed")
        train_quadrants = set(
            int(q) for q in np.random.default_rng(seed).choice(4, size=3, replace=False)
        )
        in_train = lambda row: orientation_quadrant(float(row[4])) in train_quadrants
    elif mode == "cross-parabola":
        in_train = lambda row: manifest.categories[int(row[1])] not in PARABOLA_CATEGORIES
    else:  # cross-opening
        in_train = lambda row: manifest.categories[int(row[1])] not in OPENING_CATEGORIES

    train = sorted(int(row[0]) for row in rows if in_train(row))
    test = sorted(int(row[0]) for row in rows if not in_train(row))
    return train, test
