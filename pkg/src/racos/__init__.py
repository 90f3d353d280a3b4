"""Randomized two-step outlier-column detection for noisy and incomplete low-rank matrices."""

from .errors import EmptySample, InvalidInput, NoSeparation, RacosError
from .linalg import (
    ColumnIncoherence,
    CompactSVD,
    MaskedMatrix,
    MatrixNorms,
    ObservationMask,
    RowIncoherence,
    alpha_from_energy_fraction,
    apply_mask,
    column_incoherence,
    column_residuals,
    compact_svd,
    hard_threshold_svd,
    norms,
    project_complement,
    row_incoherence,
)
from .pipelines import (
    OutlierReport,
    RacosIParams,
    RacosNParams,
    racos_i,
    racos_n,
    select_epsilon2,
    separation_success,
)
from .sampling import (
    ColumnSet,
    RngSeed,
    bernoulli_select,
    gaussian_jl,
    jl_tail_constant,
    sample_mask,
    selector_matrix,
    trim_columns,
)
from .solvers import (
    DecompositionResult,
    SolverOptions,
    lambda_mp_theory,
    lambda_op_theory,
    manipulator_pursuit,
    outlier_pursuit_noisy,
    prox_l12,
    prox_nuclear,
)

__version__ = "0.1.0"
