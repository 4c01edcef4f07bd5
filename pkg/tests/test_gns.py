import numpy as np
import pytest
from hypothesis import given

from conftest import matrix_unit
from strategies import rngs

from qstar.algebra import PositiveFunctional, make_full_matrix_algebra, state_from_density_matrix
from qstar.errors import RepresentabilityError
from qstar.gns import (
    check_seminorm_domination,
    gns_construct,
    gns_residuals,
    lambda_of,
    represent_operator,
    seminorm_domination_bounds,
)
from qstar.linalg import dagger
from qstar.modifications import local_modify, verify_unitary_equivalence
from qstar.sampling import random_density, random_element, random_state


def test_trace_gives_faithful_left_regular_rep(m2):
    g = gns_construct(m2, state_from_density_matrix(m2, np.eye(2) / 2))
    assert g.hilbert_dim == 4
    flat = g.rep.reshape(4, -1)
    assert np.linalg.matrix_rank(flat) == 4
    # oracle: the Gram form is I/2, so sqrt(2) Lambda is a unitary carrying the
    # left-regular representation (built from the mult_table) onto pi
    left_regular = np.transpose(m2.mult_table, (0, 2, 1))
    res = verify_unitary_equivalence(left_regular, g.rep, np.sqrt(2) * g.lambda_matrix)
    assert res["residual"] < 1e-12 and res["unitarity_defect"] < 1e-12


def test_pure_state_gives_defining_rep(m2):
    g = gns_construct(m2, state_from_density_matrix(m2, matrix_unit(2, 0, 0)))
    assert g.hilbert_dim == 2
    # lambda(e_i0) are orthonormal; in that basis pi acts as the defining rep
    W = np.stack([lambda_of(g, m2.basis_element(0)), lambda_of(g, m2.basis_element(2))], axis=1)
    res = verify_unitary_equivalence(m2.basis, g.rep, W)
    assert res["residual"] < 1e-12 and res["unitarity_defect"] < 1e-12


def test_cyclic_vector_has_unit_norm(m3, rng):
    g = gns_construct(m3, random_state(m3, rng))
    assert np.linalg.norm(g.cyclic_vector) == pytest.approx(1.0)
    np.testing.assert_allclose(lambda_of(g, m3.identity()), g.cyclic_vector)


def test_null_vector_maps_to_zero(m2):
    g = gns_construct(m2, state_from_density_matrix(m2, matrix_unit(2, 0, 0)))
    # omega(e01^dagger e01) = omega(e11) = 0
    assert np.linalg.norm(lambda_of(g, m2.basis_element(1))) < 1e-9


def test_identity_represented_by_identity(m3, rng):
    g = gns_construct(m3, random_state(m3, rng, rank=2))
    np.testing.assert_allclose(represent_operator(g, m3.identity()), np.eye(g.hilbert_dim), atol=1e-12)


def test_non_representable_rejected(m2):
    with pytest.raises(RepresentabilityError):
        gns_construct(m2, PositiveFunctional(m2, [-1, 0, 0, 0]))


def test_zero_functional_gives_zero_space(m2):
    g = gns_construct(m2, PositiveFunctional(m2, np.zeros(4)))
    assert g.hilbert_dim == 0


def test_closure_and_adjoint_are_trivial(m2):
    g = gns_construct(m2, state_from_density_matrix(m2, np.eye(2) / 2))
    assert g.closure() is g and g.adjoint() is g


def test_deterministic_construction(m2m2, rng):
    omega = random_state(m2m2, rng, rank=3)
    g1, g2 = gns_construct(m2m2, omega), gns_construct(m2m2, omega)
    np.testing.assert_array_equal(g1.lambda_matrix, g2.lambda_matrix)
    np.testing.assert_array_equal(g1.rep, g2.rep)


@given(rngs())
def test_gns_invariants(rng):
    A = make_full_matrix_algebra(3)
    omega = random_state(A, rng, rank=int(rng.integers(1, 4)))
    g = gns_construct(A, omega)
    res = gns_residuals(g)
    assert res["reconstruction"] < 1e-9
    assert res["inner_product"] < 1e-9
    assert res["star"] < 1e-9
    assert res["cyclic_rank"] == g.hilbert_dim
    x, y = random_element(A, rng), random_element(A, rng)
    px, py = represent_operator(g, x), represent_operator(g, y)
    np.testing.assert_allclose(px @ py, represent_operator(g, x @ y), atol=1e-9)
    np.testing.assert_allclose(represent_operator(g, x.dag), dagger(px), atol=1e-9)
    la = lambda_of(g, y)
    assert np.vdot(la, la).real == pytest.approx(omega.quadratic(y.coeffs), abs=1e-9)
    np.testing.assert_allclose(px @ la, lambda_of(g, x @ y), atol=1e-9)


@given(rngs())
def test_rank_monotone_under_modification(rng):
    A = make_full_matrix_algebra(3)
    omega = random_state(A, rng, rank=int(rng.integers(1, 4)))
    b = random_element(A, rng)
    m = gns_construct(A, omega).hilbert_dim
    assert gns_construct(A, local_modify(A, omega, b)).hilbert_dim <= m


def test_faithful_state_rep_injective(m3, rng):
    g = gns_construct(m3, state_from_density_matrix(m3, random_density(3, rng)))
    assert g.hilbert_dim == 9
    assert np.linalg.matrix_rank(g.rep.reshape(9, -1)) == 9


def test_basis_permutation_gives_equivalent_triples(m2, rng):
    from qstar.algebra import StarAlgebra

    perm = [3, 1, 0, 2]
    B = StarAlgebra(m2.basis[perm])
    rho = random_density(2, rng)
    g1 = gns_construct(m2, state_from_density_matrix(m2, rho))
    g2 = gns_construct(B, state_from_density_matrix(B, rho))
    # lambda_2(a) = U lambda_1(a) defines the unitary between the two spaces
    U = g2.lambda_matrix[:, np.argsort(perm)] @ np.linalg.pinv(g1.lambda_matrix)
    res = verify_unitary_equivalence(g1.rep, g2.rep[np.argsort(perm)], U)
    assert res["residual"] < 1e-9 and res["unitarity_defect"] < 1e-9


# -- seminorm domination ----------------------------------------------------


def test_state_kappa_is_one(m3, rng):
    assert check_seminorm_domination(m3, random_state(m3, rng)) == pytest.approx(1.0)


def test_scaled_trace_kappa(m2):
    omega = state_from_density_matrix(m2, np.eye(2))
    assert check_seminorm_domination(m2, omega) == pytest.approx(np.sqrt(2))


def test_unnormalized_kappa_certificate(m3, rng):
    omega = state_from_density_matrix(m3, 3.7 * random_density(3, rng))
    bounds = seminorm_domination_bounds(m3, omega)
    assert bounds.lower <= bounds.kappa + 1e-9
    assert bounds.kappa == pytest.approx(np.sqrt(3.7))
    # the unit saturates the bound
    assert bounds.lower == pytest.approx(bounds.kappa, rel=1e-9)


def test_lambda_bounded_by_kappa(m3, rng):
    omega = random_state(m3, rng)
    g = gns_construct(m3, omega)
    kappa = check_seminorm_domination(m3, omega)
    for _ in range(20):
        a = random_element(m3, rng)
        assert np.linalg.norm(lambda_of(g, a)) <= kappa * a.norm() + 1e-9
