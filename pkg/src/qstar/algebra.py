"""Concrete finite-dimensional *-algebras, their elements and functionals.

An algebra is a linearly independent family of complex n x n matrices whose
span contains the identity and is closed under products and adjoints.  All
coefficient arithmetic is done against that distinguished basis.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .errors import ClosureError, DimensionMismatchError, PositivityError, SizeError
from .linalg import EQ_TOL, RANK_TOL, dagger, hermitian_part, psd_eigh

# largest basis for which the d^3 structure constants are cached
_TABLE_LIMIT = 128


class StarAlgebra:
    """A *-subalgebra of M_n given by a basis of matrices.

    Args:
        basis: array-like of shape (d, n, n).
        name: label used in reports.
        verify: check independence and closure at construction.  Subclasses
            whose closure holds by construction pass ``False``.
    """

    def __init__(self, basis, name=None, verify=True):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise DimensionMismatchError(f"basis must have shape (d, n, n), got {basis.shape}")
        self._basis = basis
        self.dim = basis.shape[0]
        self.ambient_dim = basis.shape[1]
        self.name = name or f"A(d={self.dim}, n={self.ambient_dim})"
        if verify:
            self._verify()

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    @property
    def basis(self):
        return self._basis

    # -- coordinates -------------------------------------------------------

    @cached_property
    def _pinv(self):
        flat = self.basis.reshape(self.dim, -1).T
        return np.linalg.pinv(flat)

    def _coeffs(self, mats):
        flat = mats.reshape(*mats.shape[:-2], -1)
        return flat @ self._pinv.T

    def _matrix(self, coeffs):
        return np.tensordot(coeffs, self.basis, axes=([-1], [0]))

    def coords(self, mats, check=True):
        """Basis coefficients of one matrix or a stack of matrices.

        Raises:
            ClosureError: a matrix is not in the span (relative Frobenius
                residual above 1e-10).
        """
        mats = np.asarray(mats, dtype=complex)
        if mats.shape[-2:] != (self.ambient_dim, self.ambient_dim):
            raise DimensionMismatchError(
                f"expected {self.ambient_dim}x{self.ambient_dim} matrices, got {mats.shape}"
            )
        c = self._coeffs(mats)
        if check:
            resid = self.span_defect(mats, c)
            if resid > EQ_TOL:
                raise ClosureError("matrix leaves the algebra span", resid)
        return c

    def span_defect(self, mats, coeffs=None):
        mats = np.asarray(mats, dtype=complex)
        if coeffs is None:
            coeffs = self._coeffs(mats)
        back = self._matrix(coeffs)
        diff = np.linalg.norm((back - mats).reshape(-1, self.ambient_dim ** 2), axis=1)
        scale = np.maximum(np.linalg.norm(mats.reshape(-1, self.ambient_dim ** 2), axis=1), 1.0)
        return float(np.max(diff / scale)) if diff.size else 0.0

    def matrix(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[-1] != self.dim:
            raise DimensionMismatchError(f"expected {self.dim} coefficients, got {coeffs.shape[-1]}")
        return self._matrix(coeffs)

    # -- structure ---------------------------------------------------------

    def _verify(self):
        flat = self.basis.reshape(self.dim, -1)
        s = np.linalg.svd(flat, compute_uv=False)
        if s.size == 0 or s[-1] <= RANK_TOL * s[0]:
            raise ClosureError("basis matrices are linearly dependent", float(s[-1] / s[0]) if s.size else 0.0)
        self.coords(np.eye(self.ambient_dim))
        self.coords(dagger(self.basis))
        for i in range(self.dim):
            self.coords(self.basis[i] @ self.basis)

    @cached_property
    def unit(self):
        """Coefficients of the identity matrix."""
        return self.coords(np.eye(self.ambient_dim))

    @cached_property
    def star_table(self):
        """S with S[:, i] = coeffs(B_i^dagger); coeffs(a^dagger) = S @ conj(c)."""
        return self.coords(dagger(self.basis), check=False).T

    @cached_property
    def mult_table(self):
        """Structure constants c[i, j, k] with B_i B_j = sum_k c[i, j, k] B_k."""
        if self.dim > _TABLE_LIMIT:
            raise SizeError(f"structure constants not cached above d={_TABLE_LIMIT}")
        prods = np.einsum("iab,jbc->ijac", self.basis, self.basis)
        return self.coords(prods, check=False)

    def left_multiplication(self, i):
        """d x d matrix L_i of a -> B_i a in coefficients."""
        if self.dim <= _TABLE_LIMIT:
            return self.mult_table[i].T
        return self.coords(self.basis[i] @ self.basis, check=False).T

    def left_multiplications(self):
        if self.dim <= _TABLE_LIMIT:
            return np.transpose(self.mult_table, (0, 2, 1))
        return np.stack([self.left_multiplication(i) for i in range(self.dim)])

    # -- functional hooks --------------------------------------------------

    def density_values(self, mats):
        """tr(M B_k) for every basis element (stacks of M allowed)."""
        return np.einsum("...ab,kba->...k", np.asarray(mats, dtype=complex), self.basis)

    def density_from_values(self, values):
        """D in the span's dual with tr(D B_k) = values[k]."""
        w = values @ self._pinv
        return w.reshape(self.ambient_dim, self.ambient_dim).T

    def gram_from_density(self, density):
        """G[i, j] = tr(D B_i^dagger B_j)."""
        d, n = self.dim, self.ambient_dim
        bd = (self.basis @ density).reshape(d, n * n)
        return np.conj(self.basis.reshape(d, n * n)) @ bd.T

    @property
    def is_full(self):
        """True when the span is all of M_n."""
        return self.dim == self.ambient_dim ** 2

    # -- elements ----------------------------------------------------------

    def element(self, coeffs):
        return AlgebraElement(self, coeffs)

    def from_matrix(self, mat):
        return AlgebraElement(self, self.coords(mat))

    def basis_element(self, i):
        c = np.zeros(self.dim, dtype=complex)
        c[i] = 1.0
        return AlgebraElement(self, c)

    def identity(self):
        return AlgebraElement(self, self.unit)


class FullMatrixAlgebra(StarAlgebra):
    """M_n with the matrix-unit basis e_ij at index i * n + j."""

    def __init__(self, n):
        if not 1 <= n <= 64:
            raise SizeError(f"matrix size must be in [1, 64], got {n}")
        self.n = n
        self.dim = n * n
        self.ambient_dim = n
        self.name = f"M{n}"

    @cached_property
    def basis(self):
        return np.eye(self.dim, dtype=complex).reshape(self.dim, self.n, self.n)

    def _coeffs(self, mats):
        return mats.reshape(*mats.shape[:-2], self.dim).astype(complex)

    def _matrix(self, coeffs):
        return coeffs.reshape(*coeffs.shape[:-1], self.n, self.n)

    def density_values(self, mats):
        return np.swapaxes(np.asarray(mats, dtype=complex), -1, -2).reshape(*np.shape(mats)[:-2], self.dim)

    def density_from_values(self, values):
        return values.reshape(self.n, self.n).T.copy()

    def gram_from_density(self, density):
        # omega(e_ji e_kl) = delta_ik D[l, j]
        return np.kron(np.eye(self.n), density.T)

    @cached_property
    def mult_table(self):
        n = self.n
        table = np.zeros((self.dim,) * 3, dtype=complex)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    table[i * n + j, j * n + k, i * n + k] = 1.0
        return table


def make_full_matrix_algebra(n):
    """M_n with matrix units; raises SizeError outside 1 <= n <= 64."""
    return FullMatrixAlgebra(n)


def make_tensor_algebra(first, second):
    """Tensor product algebra with the Kronecker-product basis."""
    basis = np.einsum("iab,jcd->ijacbd", first.basis, second.basis)
    d = first.dim * second.dim
    n = first.ambient_dim * second.ambient_dim
    return StarAlgebra(basis.reshape(d, n, n), name=f"{first.name}x{second.name}")


class AlgebraElement:
    """An element sum_i coeffs[i] B_i of a :class:`StarAlgebra`."""

    __slots__ = ("algebra", "coeffs", "_matrix")

    def __init__(self, algebra, coeffs):
        coeffs = np.array(coeffs, dtype=complex).reshape(-1)
        if coeffs.shape[0] != algebra.dim:
            raise DimensionMismatchError(f"expected {algebra.dim} coefficients, got {coeffs.shape[0]}")
        coeffs.setflags(write=False)
        self.algebra = algebra
        self.coeffs = coeffs
        self._matrix = None

    @property
    def matrix(self):
        if self._matrix is None:
            m = self.algebra.matrix(self.coeffs)
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def __repr__(self):
        return f"AlgebraElement({self.algebra.name}, {np.round(self.coeffs, 6)!r})"

    def _same(self, other):
        if not isinstance(other, AlgebraElement) or other.algebra is not self.algebra:
            raise DimensionMismatchError("elements belong to different algebras")

    def __add__(self, other):
        self._same(other)
        return AlgebraElement(self.algebra, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return AlgebraElement(self.algebra, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlgebraElement(self.algebra, -self.coeffs)

    def __mul__(self, scalar):
        return AlgebraElement(self.algebra, scalar * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return AlgebraElement(self.algebra, self.coeffs / scalar)

    def __matmul__(self, other):
        return multiply(self.algebra, self, other)

    def adjoint(self):
        return involution(self.algebra, self)

    @property
    def dag(self):
        return self.adjoint()

    def norm(self):
        """Operator norm of the matrix."""
        return float(np.linalg.norm(self.matrix, 2))


def multiply(algebra, a, b):
    """Algebra product, computed as a matrix product projected back on the basis.

    Raises:
        ClosureError: the product is not in the span (malformed algebra).
    """
    for x in (a, b):
        if x.coeffs.shape[0] != algebra.dim:
            raise DimensionMismatchError("element does not belong to this algebra")
    return AlgebraElement(algebra, algebra.coords(a.matrix @ b.matrix))


def involution(algebra, a):
    if a.coeffs.shape[0] != algebra.dim:
        raise DimensionMismatchError("element does not belong to this algebra")
    return AlgebraElement(algebra, algebra.coords(dagger(a.matrix)))


class PositiveFunctional:
    """A linear functional stored by its values on the basis.

    Positivity is *not* enforced here; :func:`check_representable` reports it.
    ``omega(M) = tr(density @ M)`` for every M in the span.
    """

    def __init__(self, algebra, values):
        values = np.array(values, dtype=complex).reshape(-1)
        if values.shape[0] != algebra.dim:
            raise DimensionMismatchError(f"expected {algebra.dim} values, got {values.shape[0]}")
        values.setflags(write=False)
        self.algebra = algebra
        self.values = values

    def __repr__(self):
        return f"PositiveFunctional({self.algebra.name}, state={self.is_state})"

    @cached_property
    def density(self):
        """Matrix D in the algebra's ambient space with omega(M) = tr(D M)."""
        return self.algebra.density_from_values(self.values)

    @cached_property
    def gram(self):
        """G[i, j] = omega(B_i^dagger B_j)."""
        return self.algebra.gram_from_density(self.density)

    @property
    def norm_value(self):
        """omega(e)."""
        return complex(self.values @ self.algebra.unit)

    @property
    def is_state(self):
        return abs(self.norm_value - 1.0) <= EQ_TOL

    def __call__(self, a):
        if isinstance(a, AlgebraElement):
            return apply_functional(self, a)
        return self.evaluate_matrix(a)

    def evaluate_matrix(self, mats):
        """omega on matrices assumed to lie in the span (stacks allowed)."""
        return np.einsum("ab,...ba->...", self.density, np.asarray(mats, dtype=complex))

    def quadratic(self, coeffs):
        """omega(a^dagger a) for a with the given coefficients."""
        c = np.asarray(coeffs, dtype=complex)
        return float(np.real(np.conj(c) @ self.gram @ c))


def apply_functional(omega, a):
    """omega(a) = sum_i coeffs_i omega(B_i)."""
    if a.coeffs.shape[0] != omega.values.shape[0]:
        raise DimensionMismatchError("functional and element dimensions differ")
    return complex(a.coeffs @ omega.values)


def functional_from_values(algebra, values):
    return PositiveFunctional(algebra, values)


def state_from_density_matrix(algebra, rho):
    """Functional x -> tr(rho x).

    Raises:
        PositivityError: rho is not Hermitian or has an eigenvalue below
            -1e-10 times its largest one.
    """
    rho = np.asarray(rho, dtype=complex)
    n = algebra.ambient_dim
    if rho.shape != (n, n):
        raise DimensionMismatchError(f"density matrix must be {n}x{n}")
    if np.linalg.norm(rho - dagger(rho)) > EQ_TOL * max(np.linalg.norm(rho), 1.0):
        raise PositivityError("density matrix is not Hermitian")
    w = np.linalg.eigvalsh(hermitian_part(rho))
    if w.size and w[0] < -EQ_TOL * max(abs(w[-1]), 1e-300):
        raise PositivityError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return PositiveFunctional(algebra, algebra.density_values(rho))


@dataclass
class RepresentabilityReport:
    l1_ok: bool
    l2_ok: bool
    l3_ok: bool
    min_eigenvalue: float
    gamma: dict = field(default_factory=dict)
    worst_violation: float = 0.0

    @property
    def ok(self):
        return self.l1_ok and self.l2_ok and self.l3_ok


def check_representable(algebra, omega, samples=16, seed=0):
    """Check (L1)-(L3) for ``omega`` and compute the minimal constants gamma_x.

    gamma_x is the norm of a -> omega(x^dagger a) with respect to the
    seminorm omega(a^dagger a)^{1/2}, i.e. sqrt(v^dagger G^+ v) with
    v = G[:, x]; it is infinite when v leaves the range of G.  Failures are
    reported in flags, never raised.
    """
    G = omega.gram
    w = np.linalg.eigvalsh(hermitian_part(G))
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    min_eig = float(w[0]) if w.size else 0.0
    l1 = scale == 0.0 or min_eig >= -EQ_TOL * scale
    herm_defect = np.max(np.abs(algebra.star_table.T @ omega.values - np.conj(omega.values)))
    l2 = bool(herm_defect <= EQ_TOL * max(1.0, float(np.max(np.abs(omega.values)))))
    l2 = l2 and np.linalg.norm(G - dagger(G)) <= EQ_TOL * max(scale, 1.0)

    gamma = {}
    worst = 0.0
    l3 = bool(l1 and l2)
    if l3:
        vals, vecs = psd_eigh(G)
        for k in range(algebra.dim):
            v = G[:, k]
            coef = dagger(vecs) @ v
            leak = np.linalg.norm(v - vecs @ coef)
            if leak > 1e-9 * max(scale, 1.0):
                gamma[k] = math.inf
                l3 = False
            else:
                gamma[k] = float(np.sqrt(np.sum(np.abs(coef) ** 2 / vals))) if vals.size else 0.0
        if l3:
            rng = np.random.default_rng(seed)
            a = rng.normal(size=(samples, algebra.dim)) + 1j * rng.normal(size=(samples, algebra.dim))
            lhs = np.abs(a @ G.T)  # |omega(B_k^dagger a)| for each sample and k
            seminorm = np.sqrt(np.clip(np.real(np.einsum("si,ij,sj->s", np.conj(a), G, a)), 0, None))
            g = np.array([gamma[k] for k in range(algebra.dim)])
            viol = lhs - g[None, :] * seminorm[:, None]
            worst = float(max(np.max(viol) if viol.size else 0.0, 0.0))
            l3 = worst <= 1e-9 * max(scale, 1.0)
    else:
        gamma = {k: math.inf for k in range(algebra.dim)}
        worst = math.inf
    return RepresentabilityReport(bool(l1), bool(l2), bool(l3), min_eig, gamma, worst)
