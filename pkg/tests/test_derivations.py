import warnings

import numpy as np
import pytest
from hypothesis import given

from conftest import matrix_unit
from strategies import rngs

from qstar.algebra import StarAlgebra, make_full_matrix_algebra, state_from_density_matrix
from qstar.commutant import commutation_residual, weak_commutant
from qstar.derivations import (
    check_derivation,
    estimate_bound_constant,
    heisenberg_evolve,
    induced_derivation,
    inner_derivation,
    relate_effective_hamiltonians,
    richardson_derivative,
    solve_spatial,
    spatial_residual,
    derivation_images,
    verify_modified_bound,
)
from qstar.errors import DimensionMismatchError, NotHermitianError, NotWellDefinedError
from qstar.gns import gns_construct, represent_operator
from qstar.lattice import LatticeSystem, heisenberg_chain, product_state
from qstar.sampling import random_density, random_element, random_hermitian

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA3 = np.diag([1.0, -1.0]).astype(complex)


@pytest.fixture
def trace(m2):
    return state_from_density_matrix(m2, np.eye(2) / 2)


def _block_sum_algebra():
    """M2 + M2 embedded block-diagonally in M4."""
    basis = []
    for off in (0, 2):
        for i in range(2):
            for j in range(2):
                basis.append(matrix_unit(4, off + i, off + j))
    return StarAlgebra(np.array(basis))


# -- axioms -----------------------------------------------------------------


def test_unit_generates_zero_derivation(m2):
    delta = inner_derivation(m2, np.eye(2))
    np.testing.assert_allclose(delta.map_matrix, 0, atol=1e-15)
    assert delta.is_valid


def test_sigma3_on_e01(m2):
    delta = inner_derivation(m2, SIGMA3)
    np.testing.assert_allclose(delta(m2.basis_element(1)).matrix, 2j * matrix_unit(2, 0, 1), atol=1e-14)


@given(rngs())
def test_inner_derivations_satisfy_axioms(rng):
    A = make_full_matrix_algebra(3)
    delta = inner_derivation(A, random_hermitian(3, rng))
    assert delta.is_valid
    assert delta.leibniz_defect < 1e-10 and delta.star_defect < 1e-10


def test_zero_map_is_derivation(m2):
    assert check_derivation(m2, np.zeros((4, 4))).is_valid


def test_identity_map_breaks_leibniz(m2):
    delta = check_derivation(m2, np.eye(4))
    assert delta.verified_star
    assert not delta.verified_leibniz


def test_non_hermitian_generator_rejected(m2):
    with pytest.raises(NotHermitianError):
        inner_derivation(m2, matrix_unit(2, 0, 1))


def test_commutator_without_i_breaks_star(m2):
    # a -> [k, a] with k Hermitian is a derivation but [k, a]^dagger = -[k, a^dagger]
    k = SIGMA1
    comm = k[None] @ m2.basis - m2.basis @ k[None]
    delta = check_derivation(m2, m2.coords(comm).T)
    assert delta.verified_leibniz and not delta.verified_star


# -- induced derivation -----------------------------------------------------


def test_faithful_state_has_trivial_kernel(m2, trace):
    ind = induced_derivation(gns_construct(m2, trace), inner_derivation(m2, SIGMA3))
    assert ind.kernel_dim == 0 and ind.certificate == 0.0


def test_pure_state_on_simple_algebra(m2):
    # M2 is simple, so even the pure-state representation has trivial kernel
    g = gns_construct(m2, state_from_density_matrix(m2, matrix_unit(2, 0, 0)))
    ind = induced_derivation(g, inner_derivation(m2, SIGMA1))
    assert ind.kernel_dim == 0
    np.testing.assert_allclose(ind(g.rep[1]), ind.on_element(m2.basis_element(1)), atol=1e-12)


def test_kernel_preserved_by_block_derivation():
    A = _block_sum_algebra()
    g = gns_construct(A, state_from_density_matrix(A, np.diag([0.5, 0.5, 0, 0])))
    assert g.hilbert_dim == 4
    h = np.zeros((4, 4), dtype=complex)
    h[:2, :2], h[2:, 2:] = SIGMA1, SIGMA3
    ind = induced_derivation(g, inner_derivation(A, h))
    assert ind.kernel_dim == 4 and ind.certificate < 1e-12


def test_block_swap_is_not_well_defined():
    A = _block_sum_algebra()
    g = gns_construct(A, state_from_density_matrix(A, np.diag([0.5, 0.5, 0, 0])))
    swap = np.zeros((8, 8))
    swap[:4, 4:] = swap[4:, :4] = np.eye(4)
    with pytest.raises(NotWellDefinedError) as err:
        induced_derivation(g, check_derivation(A, swap))
    assert err.value.certificate > 0.5
    # the witness lives in ker(pi)
    assert np.linalg.norm(represent_operator(g, err.value.witness)) < 1e-9


def test_zero_derivation_always_well_defined():
    A = _block_sum_algebra()
    g = gns_construct(A, state_from_density_matrix(A, np.diag([1.0, 0, 0, 0])))
    assert induced_derivation(g, check_derivation(A, np.zeros((8, 8)))).certificate == 0.0


# -- spatial ----------------------------------------------------------------


def test_zero_derivation_gives_zero_hamiltonian(m2, trace):
    H = solve_spatial(gns_construct(m2, trace), check_derivation(m2, np.zeros((4, 4))))
    np.testing.assert_allclose(H.matrix, 0, atol=1e-14)
    assert H.residual == 0.0 and H.spatial


def test_trace_sigma3_recovery(m2, trace):
    g = gns_construct(m2, trace)
    H = solve_spatial(g, inner_derivation(m2, SIGMA3))
    assert H.spatial and H.residual < 1e-10
    diff = H.matrix - represent_operator(g, m2.from_matrix(SIGMA3))
    assert commutation_residual(diff, g.rep) < 1e-10
    assert weak_commutant(g.rep).contains(diff)
    np.testing.assert_allclose(H.matrix, H.matrix.conj().T, atol=1e-12)
    assert abs(H.gauge["cyclic_expectation"]) < 1e-12


def test_heisenberg_chain_is_spatial():
    system = LatticeSystem(3)
    h = heisenberg_chain(system)
    omega = product_state([[0, 0, 1], [1, 0, 0], [0, 1, 0]], system)
    g = gns_construct(system.algebra, omega)
    assert g.hilbert_dim == 8
    H = solve_spatial(g, inner_derivation(system.algebra, h))
    assert H.spatial and H.residual < 1e-8


@given(rngs())
def test_gauge_invariance_of_verdict(rng):
    A = make_full_matrix_algebra(2)
    g = gns_construct(A, state_from_density_matrix(A, random_density(2, rng, floor=0.05)))
    delta = inner_derivation(A, random_hermitian(2, rng))
    H = solve_spatial(g, delta)
    comm = weak_commutant(g.rep)
    c = np.tensordot(rng.normal(size=comm.dimension), comm.basis, axes=1)
    c = 0.5 * (c + c.conj().T)
    targets = derivation_images(g, delta)
    assert abs(spatial_residual(g.rep, targets, H.matrix + c) - H.residual) < 1e-10


@given(rngs())
def test_inner_recovery_modulo_commutant(rng):
    A = make_full_matrix_algebra(3)
    g = gns_construct(A, state_from_density_matrix(A, random_density(3, rng, floor=0.05)))
    h = random_hermitian(3, rng)
    H = solve_spatial(g, inner_derivation(A, h))
    assert H.residual < 1e-8
    assert commutation_residual(H.matrix - represent_operator(g, A.from_matrix(h)), g.rep) < 1e-8


# -- bound constants --------------------------------------------------------


def test_zero_derivation_bounds(m2, trace):
    report = estimate_bound_constant(m2, trace, check_derivation(m2, np.zeros((4, 4))))
    assert report.c_lower == 0.0 and report.c_upper == 0.0
    assert report.kappa == pytest.approx(1.0)


def test_trace_sigma3_sandwich(m2, trace):
    report = estimate_bound_constant(m2, trace, inner_derivation(m2, SIGMA3))
    assert np.isfinite(report.c_upper)
    assert report.c_lower <= report.c_upper + 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_sandwich_sweep(n):
    A = make_full_matrix_algebra(n)
    rng = np.random.default_rng(n)
    for _ in range(10):
        omega = state_from_density_matrix(A, random_density(n, rng, floor=0.05))
        report = estimate_bound_constant(A, omega, inner_derivation(A, random_hermitian(n, rng)), seed=5)
        assert report.c_lower <= report.c_upper + 1e-9
        assert report.c_lower > 0


def test_zero_functional_bound_rejected(m2):
    from qstar.algebra import PositiveFunctional
    from qstar.errors import DegenerateGeneratorError

    with pytest.raises(DegenerateGeneratorError):
        estimate_bound_constant(m2, PositiveFunctional(m2, np.zeros(4)), inner_derivation(m2, SIGMA3))


def test_modified_bound_example(m2, trace):
    delta = inner_derivation(m2, SIGMA1)
    C = estimate_bound_constant(m2, trace, delta).c_upper
    b = m2.from_matrix(np.diag([1.0, 0.5]))
    report = verify_modified_bound(m2, trace, b, delta, C, samples=200)
    assert report.violations == 0
    assert report.identity_residual < 1e-12


def test_modified_bound_with_unit_reduces_to_original(m2, trace):
    delta = inner_derivation(m2, SIGMA1)
    C = estimate_bound_constant(m2, trace, delta).c_upper
    report = verify_modified_bound(m2, trace, m2.identity(), delta, C)
    # ||pi(e)|| = 1 and delta(e) = 0
    assert report.modified_constant == pytest.approx(C)
    assert report.violations == 0


def test_modified_bound_zero_derivation(m2, trace, rng):
    report = verify_modified_bound(m2, trace, random_element(m2, rng), check_derivation(m2, np.zeros((4, 4))), 0.0)
    assert report.violations == 0 and report.max_ratio == 0.0


# -- effective-Hamiltonian relation ----------------------------------------


def test_relation_with_unit(m2, rng):
    omega = state_from_density_matrix(m2, random_density(2, rng, floor=0.05))
    rel = relate_effective_hamiltonians(m2, omega, m2.identity(), inner_derivation(m2, random_hermitian(2, rng)))
    assert rel.commutation_residual < 1e-10


def test_relation_trace_e00(m2, trace):
    rel = relate_effective_hamiltonians(m2, trace, m2.basis_element(0), inner_derivation(m2, SIGMA3))
    assert rel.commutation_residual < 1e-9
    assert rel.transferred_residual < 1e-9


@given(rngs())
def test_relation_property(rng):
    from qstar.serialize import algebra_from_spec

    A = algebra_from_spec("M2xM2") if rng.random() < 0.3 else make_full_matrix_algebra(2)
    n = A.ambient_dim
    omega = state_from_density_matrix(A, random_density(n, rng, floor=0.05))
    rel = relate_effective_hamiltonians(A, omega, random_element(A, rng), inner_derivation(A, random_hermitian(n, rng)))
    assert rel.commutation_residual < 1e-8


# -- dynamics ---------------------------------------------------------------


def test_evolve_at_zero(rng):
    h, X = random_hermitian(4, rng), rng.normal(size=(4, 4))
    np.testing.assert_allclose(heisenberg_evolve(h, X, 0.0), X, atol=1e-14)


def test_derivative_second_order(rng):
    h = random_hermitian(4, rng)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    exact = 1j * (h @ X - X @ h)
    forward = (heisenberg_evolve(h, X, 1e-4) - X) / 1e-4
    assert np.linalg.norm(forward - exact) < 1e-2
    assert np.linalg.norm(richardson_derivative(h, X) - exact) < 1e-6


@given(rngs())
def test_unitary_invariants(rng):
    h = random_hermitian(4, rng)
    X = random_hermitian(4, rng)
    t = float(rng.normal())
    Y = heisenberg_evolve(h, X, t)
    np.testing.assert_allclose(np.linalg.eigvalsh(Y), np.linalg.eigvalsh(X), atol=1e-10)
    assert np.linalg.norm(Y) == pytest.approx(np.linalg.norm(X), rel=1e-12)
    s = float(rng.normal())
    np.testing.assert_allclose(
        heisenberg_evolve(h, heisenberg_evolve(h, X, t), s), heisenberg_evolve(h, X, s + t), atol=1e-9
    )


def test_evolve_input_errors(rng):
    with pytest.raises(NotHermitianError):
        heisenberg_evolve(matrix_unit(2, 0, 1), np.eye(2), 1.0)
    with pytest.raises(DimensionMismatchError):
        heisenberg_evolve(np.eye(2), np.eye(3), 1.0)


def test_conditioning_warning_is_attached_not_silent(m2, trace):
    g = gns_construct(m2, trace)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        H = solve_spatial(g, inner_derivation(m2, SIGMA3))
    assert H.conditioning_warning is None
