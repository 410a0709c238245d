"""stressforge: plane-stress FEA dataset toolchain for von Mises
stress-field surrogate experiments on regular grids."""

from .dataset import (
    GenerationConfig,
    enumerate_cases,
    generate_dataset,
    generate_geometries,
    normalize_loads,
    solve_all,
    split_generalization,
    split_random,
)
from .encoding import (
    CaseSpec,
    CaseTags,
    ChannelStack,
    LoadPatch,
    decode_input,
    encode_case,
    encode_input,
    encode_target,
    unit_direction,
)
from .fea import (
    ConstraintSet,
    DisplacementField,
    GridMesh,
    LoadField,
    Material,
    MeshSystem,
    StressField,
    assemble,
    element_stiffness,
    nodal_loads_from_patches,
    recover_stress,
    solve_case,
    solve_displacements,
    von_mises,
)
from .metrics import aggregate, evaluate_case, mae, mse, pae, pmae, ppae
from .sgfio import DatasetManifest, Record, RecordWriter, read_dataset, read_records

__version__ = "0.1.0"
