"""Numerical tools for time-reversed discrete symplectic systems.

The system ``z_k = (S_k + lam V_k) z_{k+1}`` with ``V_k = -J Psi_k S_k`` is
handled on a finite horizon ``[0, N]``: structural validation, solution
propagation, Gram-matrix definiteness tests, Weyl disks and Green functions,
nonhomogeneous solves with norm bounds, and deficiency diagnostics.
"""

from .definiteness import (
    GramMatrix,
    check_block_sufficient_condition,
    gram_phi,
    is_definite,
    kernel_lambda_independence,
    maximal_rank_interval,
)
from .errors import (
    BoundaryConditionError,
    DimensionError,
    DomainError,
    HorizonError,
    NumericalWarning,
    PreconditionError,
    PropagationError,
    SingularCoefficientError,
    StructureError,
    SympkitError,
)
from .propagation import (
    FundamentalMatrix,
    LagrangeReport,
    apply_L,
    fundamental_matrix,
    lagrange_residual,
    solve_ivp_nonhom,
    transfer,
    wronskian_residual,
)
from .relations import (
    DeficiencyReport,
    KMap,
    deficiency_consistency,
    k_map,
    k_map_range_check,
    multivalued_witness,
    preimage_construction,
)
from .system_model import (
    CoefficientSequence,
    SymplecticSystem,
    ToleranceConfig,
    TrajectorySequence,
    build_V,
    from_sturm_liouville,
    make_J,
    s_lambda,
    s_lambda_inverse,
    semi_inner,
    semi_norm,
    validate_hypotheses,
)
from .weyl_green import (
    AlphaMatrix,
    GreenTable,
    WeylState,
    approx_half_line_M,
    build_green_table,
    count_square_summable,
    crossed_wronskian_residual,
    disk_indicator,
    green,
    natural_fundamental,
    weyl_solution,
    yhat,
    zhat,
)

__version__ = "0.1.0"
