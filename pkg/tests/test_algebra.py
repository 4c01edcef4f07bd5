import math

import numpy as np
import pytest
from hypothesis import given

from conftest import matrix_unit
from strategies import rngs

from qstar.algebra import (
    PositiveFunctional,
    StarAlgebra,
    apply_functional,
    check_representable,
    involution,
    make_full_matrix_algebra,
    multiply,
    state_from_density_matrix,
)
from qstar.errors import ClosureError, DimensionMismatchError, PositivityError, SizeError
from qstar.linalg import dagger
from qstar.sampling import random_density, random_element


# -- construction ---------------------------------------------------------


def test_scalars():
    A = make_full_matrix_algebra(1)
    assert A.dim == 1
    np.testing.assert_allclose(A.unit, [1.0])


def test_m2_matrix_units(m2):
    assert m2.dim == 4
    for k, (i, j) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        np.testing.assert_array_equal(m2.basis[k], matrix_unit(2, i, j))
    prod = multiply(m2, m2.basis_element(1), m2.basis_element(2))
    np.testing.assert_allclose(prod.coeffs, [1, 0, 0, 0])


@pytest.mark.parametrize("n", [0, 65])
def test_size_bounds(n):
    with pytest.raises(SizeError):
        make_full_matrix_algebra(n)


def test_mult_table_matches_dense_products():
    A = make_full_matrix_algebra(4)
    rng = np.random.default_rng(0)
    for _ in range(10):
        i, j = rng.integers(A.dim, size=2)
        expected = A.basis[i] @ A.basis[j]
        got = np.tensordot(A.mult_table[i, j], A.basis, axes=1)
        np.testing.assert_allclose(got, expected, atol=1e-12)


def test_generic_basis_mult_table_matches_full(m2):
    generic = StarAlgebra(m2.basis.copy())
    np.testing.assert_allclose(generic.mult_table, m2.mult_table, atol=1e-12)
    np.testing.assert_allclose(generic.star_table, m2.star_table, atol=1e-12)


def test_tensor_algebra_dimensions(m2m2):
    assert m2m2.dim == 16 and m2m2.ambient_dim == 4
    np.testing.assert_allclose(m2m2.matrix(m2m2.unit), np.eye(4), atol=1e-12)


def test_dependent_basis_rejected():
    basis = np.array([np.eye(2), 2 * np.eye(2)])
    with pytest.raises(ClosureError):
        StarAlgebra(basis)


def test_span_not_closed_rejected():
    # span{I, e01} is not closed under the adjoint
    with pytest.raises(ClosureError):
        StarAlgebra(np.array([np.eye(2), matrix_unit(2, 0, 1)]))


def test_diagonal_subalgebra_is_valid():
    A = StarAlgebra(np.array([matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)]))
    np.testing.assert_allclose(A.unit, [1, 1])
    assert not A.is_full


# -- multiply / involution --------------------------------------------------


def test_unit_law(m3, rng):
    a = random_element(m3, rng)
    np.testing.assert_allclose(multiply(m3, m3.identity(), a).coeffs, a.coeffs, atol=1e-12)
    np.testing.assert_allclose(multiply(m3, a, m3.identity()).coeffs, a.coeffs, atol=1e-12)


def test_multiply_matches_projection_oracle(m3, rng):
    a, b = random_element(m3, rng), random_element(m3, rng)
    flat = m3.basis.reshape(m3.dim, -1).T
    oracle = np.linalg.lstsq(flat, (a.matrix @ b.matrix).reshape(-1), rcond=None)[0]
    np.testing.assert_allclose(multiply(m3, a, b).coeffs, oracle, atol=1e-12)


def test_malformed_algebra_signals_closure_error():
    # span{e00, e01}: closed under products but not under the adjoint
    A = StarAlgebra(np.array([matrix_unit(2, 0, 0), matrix_unit(2, 0, 1)]), verify=False)
    with pytest.raises(ClosureError):
        involution(A, A.basis_element(1))
    # span{e01, e10}: products leave the span
    B = StarAlgebra(np.array([matrix_unit(2, 0, 1), matrix_unit(2, 1, 0)]), verify=False)
    with pytest.raises(ClosureError):
        multiply(B, B.basis_element(0), B.basis_element(1))


def test_elements_of_different_algebras_rejected(m2, m3):
    with pytest.raises(DimensionMismatchError):
        multiply(m2, m3.identity(), m3.identity())


def test_involution_examples(m2):
    np.testing.assert_allclose(involution(m2, m2.identity()).coeffs, m2.unit)
    np.testing.assert_allclose(involution(m2, m2.basis_element(1)).coeffs, [0, 0, 1, 0])


@given(rngs())
def test_involution_is_involutive_anti_automorphism(rng):
    A = make_full_matrix_algebra(3)
    a, b = random_element(A, rng), random_element(A, rng)
    np.testing.assert_allclose(involution(A, involution(A, a)).coeffs, a.coeffs, atol=1e-12)
    lhs = involution(A, multiply(A, a, b))
    rhs = multiply(A, involution(A, b), involution(A, a))
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-10)
    assert math.isclose(a.norm(), involution(A, a).norm(), rel_tol=1e-10)


@given(rngs())
def test_multiply_associative(rng):
    A = make_full_matrix_algebra(3)
    a, b, c = (random_element(A, rng) for _ in range(3))
    np.testing.assert_allclose((a @ (b @ c)).coeffs, ((a @ b) @ c).coeffs, atol=1e-10)


# -- functionals ------------------------------------------------------------


def test_trace_functional(m2):
    tr = state_from_density_matrix(m2, np.eye(2) / 2)
    assert tr.is_state
    assert apply_functional(tr, m2.identity()) == pytest.approx(1.0)
    assert apply_functional(tr, m2.basis_element(0)) == pytest.approx(0.5)


def test_pure_state_reads_entry(m2, rng):
    omega = state_from_density_matrix(m2, matrix_unit(2, 0, 0))
    x = random_element(m2, rng)
    assert omega(x) == pytest.approx(x.matrix[0, 0])


def test_functional_matches_density_trace(m3, rng):
    rho = random_density(3, rng)
    omega = state_from_density_matrix(m3, rho)
    x = random_element(m3, rng)
    assert omega(x) == pytest.approx(np.trace(rho @ x.matrix), abs=1e-12)


def test_random_density_gram_is_psd(m3, rng):
    omega = state_from_density_matrix(m3, random_density(3, rng))
    assert np.linalg.eigvalsh(omega.gram)[0] >= -1e-10


def test_gram_matches_definition(m2m2, rng):
    omega = state_from_density_matrix(m2m2, random_density(4, rng))
    B = m2m2.basis
    oracle = np.array([[np.trace(omega.density @ dagger(bi) @ bj) for bj in B] for bi in B])
    np.testing.assert_allclose(omega.gram, oracle, atol=1e-12)


def test_negative_density_rejected(m2):
    with pytest.raises(PositivityError):
        state_from_density_matrix(m2, np.diag([1.5, -0.5]))


def test_non_hermitian_density_rejected(m2):
    with pytest.raises(PositivityError):
        state_from_density_matrix(m2, matrix_unit(2, 0, 1))


def test_unnormalized_functional_is_not_state(m2):
    omega = state_from_density_matrix(m2, np.eye(2))
    assert not omega.is_state
    assert check_representable(m2, omega).ok


def test_wrong_value_count(m2):
    with pytest.raises(DimensionMismatchError):
        PositiveFunctional(m2, [1, 0, 0])


# -- representability -------------------------------------------------------


def test_trace_is_representable(m2):
    tr = state_from_density_matrix(m2, np.eye(2) / 2)
    np.testing.assert_allclose(np.linalg.eigvalsh(tr.gram), 0.5)
    report = check_representable(m2, tr)
    assert report.l1_ok and report.l2_ok and report.l3_ok
    assert all(math.isfinite(g) for g in report.gamma.values())


def test_zero_functional_is_representable(m2):
    report = check_representable(m2, PositiveFunctional(m2, np.zeros(4)))
    assert report.l1_ok and report.l2_ok and report.l3_ok
    assert all(g == 0.0 for g in report.gamma.values())


def test_negative_functional_fails_l1(m2):
    report = check_representable(m2, PositiveFunctional(m2, [-1, 0, 0, 0]))
    assert not report.l1_ok
    assert not report.ok


def test_non_hermitian_functional_fails_l2(m2):
    report = check_representable(m2, PositiveFunctional(m2, [0.5, 0.3j, 0.3j, 0.5]))
    assert not report.l2_ok


def test_gamma_is_minimal_constant(m2):
    # for the pure state e00, gamma_x for x = e00 is omega(x^dagger x)^{1/2} = 1
    omega = state_from_density_matrix(m2, matrix_unit(2, 0, 0))
    report = check_representable(m2, omega)
    assert report.gamma[0] == pytest.approx(1.0)


@given(rngs())
def test_density_states_always_representable(rng):
    A = make_full_matrix_algebra(3)
    rank = int(rng.integers(1, 4))
    omega = state_from_density_matrix(A, random_density(3, rng, rank=rank))
    assert check_representable(A, omega).ok
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    G = omega.gram
    assert np.real(np.conj(c) @ G @ c) >= -1e-10 * np.linalg.norm(G, 2) * np.vdot(c, c).real
