"""Entanglement of superpositions of bipartite pure states."""

from .entanglement import (
    BoundReport,
    SchmidtSpectrum,
    assess,
    binary_entropy,
    check_biorthogonal_equality,
    check_general_bound,
    check_mixing_inequalities,
    check_orthogonal_bound,
    classify,
    entanglement,
    gain,
    is_biorthogonal,
    is_orthogonal,
    multi_term_bound,
    ratio,
    schmidt_rank,
    schmidt_spectrum,
    upsilon,
    von_neumann_entropy,
)
from .families import (
    FamilyInstance,
    family_biorthogonal,
    family_high_fidelity,
    family_nonorthogonal,
    family_orthogonal_d,
    family_qubit_ratio,
)
from .search import SearchConfig, SearchResult, objective, optimize, parametrize, verify_result
from .states import (
    DensityMatrix,
    NearZeroNorm,
    StateVector,
    Superposition,
    ancilla_extension,
    fidelity,
    inner,
    make_rng,
    make_state,
    mix,
    norm,
    normalize,
    random_state,
    reduced_density,
    superpose,
)

__version__ = "0.1.0"
