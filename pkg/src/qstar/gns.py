"""GNS construction for representable functionals.

The Hilbert space is realized as C^m where m is the numerical rank of the
Gram form <a, a'> = omega(a'^dagger a).  With G = V diag(mu) V^dagger
(retained eigenpairs only) the map lambda on coefficient vectors is
Lambda = diag(sqrt(mu)) V^dagger, so Lambda^dagger Lambda = G and the null
space N_omega is quotiented out.  Each pi(B_i) solves
pi(B_i) Lambda = Lambda L_i in least squares, L_i being left
multiplication by B_i in coefficients.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, check_representable
from .errors import DimensionMismatchError, IllPosedError, NumericalFailureError, RepresentabilityError
from .linalg import RANK_TOL, dagger, op_norm, psd_eigh

MODULE_LAW_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GNSTriple:
    """The triple (pi, lambda, H) with cyclic vector xi = lambda(e).

    At finite dimension the representation is everywhere defined and bounded,
    so it is its own closure and its own adjoint; :meth:`closure` and
    :meth:`adjoint` return ``self``.
    """

    hilbert_dim: int
    lambda_matrix: np.ndarray
    rep: np.ndarray
    cyclic_vector: np.ndarray
    rank_tolerance: float
    source_functional: object = field(repr=False)
    module_residual: float = 0.0

    @property
    def algebra(self):
        return self.source_functional.algebra

    def closure(self):
        return self

    def adjoint(self):
        return self

    def lambda_of(self, a):
        return lambda_of(self, a)

    def represent(self, x):
        return represent_operator(self, x)


def gns_construct(algebra, omega, tol=RANK_TOL):
    """Build the GNS triple of a representable functional.

    Raises:
        RepresentabilityError: omega fails (L1)-(L3).
        IllPosedError: the module-law least-squares residual exceeds 1e-9.
    """
    report = check_representable(algebra, omega)
    if not report.ok:
        raise RepresentabilityError(
            f"functional is not representable (L1={report.l1_ok}, L2={report.l2_ok}, L3={report.l3_ok})",
            report,
        )
    G = omega.gram
    mu, V = psd_eigh(G, tol)
    m = mu.size
    d = algebra.dim
    lam = np.sqrt(mu)[:, None] * dagger(V)
    lam_pinv = V / np.sqrt(mu)[None, :] if m else np.zeros((d, 0), dtype=complex)

    rep = np.empty((d, m, m), dtype=complex)
    worst = 0.0
    scale = max(float(np.sqrt(mu[0])) if m else 0.0, 1.0)
    for i in range(d):
        target = lam @ algebra.left_multiplication(i)
        p = target @ lam_pinv
        rep[i] = p
        if m:
            worst = max(worst, float(np.linalg.norm(p @ lam - target)) / scale)
    if worst > MODULE_LAW_TOL:
        raise IllPosedError("left multiplication does not preserve the quotient", worst)
    xi = lam @ algebra.unit
    rep.setflags(write=False)
    lam.setflags(write=False)
    xi.setflags(write=False)
    return GNSTriple(m, lam, rep, xi, tol, omega, worst)


def lambda_of(g, a):
    """lambda(a) = Lambda @ coeffs(a)."""
    coeffs = a.coeffs if isinstance(a, AlgebraElement) else np.asarray(a, dtype=complex)
    if coeffs.shape[-1] != g.lambda_matrix.shape[1]:
        raise DimensionMismatchError("element does not belong to the GNS algebra")
    return coeffs @ g.lambda_matrix.T


def represent_operator(g, x):
    """pi(x) = sum_i coeffs_i pi(B_i)."""
    coeffs = x.coeffs if isinstance(x, AlgebraElement) else np.asarray(x, dtype=complex)
    if coeffs.shape[-1] != g.rep.shape[0]:
        raise DimensionMismatchError("element does not belong to the GNS algebra")
    return np.tensordot(coeffs, g.rep, axes=([-1], [0]))


def gns_residuals(g):
    """Residuals of the GNS invariants, keyed by name."""
    omega = g.source_functional
    A = g.algebra
    lam, rep, xi = g.lambda_matrix, g.rep, g.cyclic_vector
    m = g.hilbert_dim
    recon = np.einsum("a,iab,b->i", np.conj(xi), rep, xi)
    out = {
        "hilbert_dim": m,
        "reconstruction": float(np.max(np.abs(recon - omega.values))) if A.dim else 0.0,
        "inner_product": float(np.linalg.norm(dagger(lam) @ lam - omega.gram)),
        "module": g.module_residual,
        "star": 0.0,
        "cyclic_rank": 0,
    }
    if m:
        rep_of_adjoints = np.tensordot(A.star_table.T, rep, axes=([1], [0]))
        out["star"] = float(np.max(np.linalg.norm(rep_of_adjoints - dagger(rep), axis=(1, 2))))
        orbit = np.einsum("iab,b->ai", rep, xi)
        out["cyclic_rank"] = int(np.linalg.matrix_rank(orbit, tol=RANK_TOL * max(np.linalg.norm(orbit, 2), 1e-300)))
    return out


@dataclass
class SeminormBound:
    kappa: float
    lower: float
    upper: float
    argmax: np.ndarray = field(repr=False, default=None)


def seminorm_domination_bounds(algebra, omega, restarts=8, iterations=60, seed=0):
    """Certified interval for the smallest kappa with omega(a*a) <= kappa^2 ||a||^2.

    The lower end comes from normalized power ascent on c -> c^dagger G c
    over the operator-norm unit sphere (``restarts`` seeded starts plus the
    unit and the basis elements); the upper end is sqrt(omega(e)), valid
    for every positive functional on a C*-algebra.
    """
    G = omega.gram
    rng = np.random.default_rng(seed)

    def ratio(c):
        nrm = op_norm(algebra.matrix(c))
        if nrm == 0.0:
            return 0.0, c
        c = c / nrm
        return float(np.real(np.conj(c) @ G @ c)), c

    starts = [algebra.unit, *np.eye(algebra.dim, dtype=complex)]
    starts += [rng.normal(size=algebra.dim) + 1j * rng.normal(size=algebra.dim) for _ in range(restarts)]
    best, best_c = -np.inf, None
    for k, c in enumerate(starts):
        val, c = ratio(np.asarray(c, dtype=complex))
        if k > algebra.dim:  # ascend only from the random starts
            for _ in range(iterations):
                step = G @ c
                nv, nc = ratio(c + step / max(np.linalg.norm(step), 1e-300) * np.linalg.norm(c))
                if nv <= val:
                    break
                val, c = nv, nc
        if val > best:
            best, best_c = val, c
    upper = float(np.sqrt(max(np.real(omega.norm_value), 0.0)))
    lower = float(np.sqrt(max(best, 0.0)))
    if lower > upper + 1e-9:
        raise NumericalFailureError("sampled ratio exceeds omega(e)", lower - upper)
    return SeminormBound(upper, lower, upper, best_c)


def check_seminorm_domination(algebra, omega, restarts=8, seed=0):
    """kappa for the seminorm p(a) = kappa ||a||_op dominating omega(a*a)."""
    return seminorm_domination_bounds(algebra, omega, restarts=restarts, seed=seed).kappa
