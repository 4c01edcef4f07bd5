"""Finite-dimensional *-algebras, GNS representations, local modifications
of states, spatial derivations, commutants, and quantum spin chains."""

from .algebra import (
    AlgebraElement,
    FullMatrixAlgebra,
    PositiveFunctional,
    RepresentabilityReport,
    StarAlgebra,
    apply_functional,
    check_representable,
    functional_from_values,
    involution,
    make_full_matrix_algebra,
    make_tensor_algebra,
    multiply,
    state_from_density_matrix,
)
from .commutant import (
    CommutantBasis,
    check_commutant_equality,
    decompose_direct_sum,
    projection_in_commutant,
    self_adjoint_element_check,
    weak_commutant,
)
from .derivations import (
    Derivation,
    EffectiveHamiltonian,
    check_derivation,
    estimate_bound_constant,
    heisenberg_evolve,
    induced_derivation,
    inner_derivation,
    relate_effective_hamiltonians,
    solve_spatial,
    verify_modified_bound,
)
from .errors import QStarError
from .gns import (
    GNSTriple,
    check_seminorm_domination,
    gns_construct,
    gns_residuals,
    lambda_of,
    represent_operator,
)
from .lattice import (
    LatticeSystem,
    PauliAlgebra,
    Region,
    check_1lm,
    check_2lm,
    check_almost_clustering,
    modification_demo,
    embed,
    flipped_vector,
    pauli_operator,
    product_state,
    sigma_dot_n,
    support_of,
)
from .modifications import (
    Intertwiner,
    SubRepSubspace,
    approximate_modifier_sequence,
    build_intertwiner,
    local_modify,
    search_modifier,
    solve_modifier,
    sub_rep_projection,
    verify_unitary_equivalence,
)

__version__ = "0.1.0"
