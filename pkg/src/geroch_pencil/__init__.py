"""Constraint-aware hyperbolicity analysis of constant coefficient first order systems."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .tensor_core import (  # noqa: F401
    DEFAULT_TOL, Foliation, GramForm, PrincipalSymbol, WaveCovector, build_symbol,
    check_condition_N0, check_no_algebraic_constraints, contract, foliation, identity_gram,
    wave_covector,
)
from .geroch import (  # noqa: F401
    GerochBasis, check_condition_v, geroch_basis, project_M, solve_geroch_space, split_basis,
)
from .reduction import (  # noqa: F401
    ReductionFamily, ReductionPair, apply_family, base_reduction, evolution_symbol, make_pair,
    reduction_family,
)
from .pencil import (  # noqa: F401
    KernelDims, KroneckerStructure, Sampling, canonical_angles, generalized_eigens, kernel_dims,
    kronecker_structure, sample_sphere, sh_sweep,
)
from .subsidiary import (  # noqa: F401
    assign_constraint_velocities, constraint_of_constraints_check, subsidiary_kronecker,
    subsidiary_sh_sweep, subsidiary_symbol, verify_intertwining,
)
from . import catalog  # noqa: F401
