"""Numerical laboratory for entropic uncertainty relations between the number
operator and a normal two-mode extension of the annihilation operator."""

from .basis import BasisTable, basis_table, hermite_fn, hermite_functions
from .entropy import (
    alpha_log,
    auto_grid,
    norm_functional_continuous,
    renyi_continuous,
    renyi_discrete,
    tsallis_continuous,
    tsallis_discrete,
)
from .moments import MomentSet, check_tracing, density_moments, fock_moments
from .probability import (
    BinPartition,
    DiscreteDist,
    bin_probs,
    number_dist,
    parse_partition,
    uniform_partition,
)
from .relations import (
    ConjugatePair,
    RelationReport,
    check_binned_relations,
    check_renyi_relation,
    check_riesz,
    check_tsallis_relation,
    conjugate,
    minimize_entropy_sum,
    tsallis_min_oracle,
)
from .states import (
    FockVector,
    MixedState,
    coherent_state,
    fock_state,
    load_state,
    mixed,
    parse_state,
    random_mixture,
    random_state,
)
from .transform import (
    PhaseDensity,
    PhaseGrid,
    TransformField,
    default_grid,
    density,
    eta_estimate,
    transform_basis,
    transform_state,
)

__version__ = "0.1.0"
