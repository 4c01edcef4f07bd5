"""Local modifications omega_b(x) = omega(b^dagger x b) and their GNS relation.

The cyclic subspace generated by lambda(b) reduces pi_omega and carries a
copy of pi_{omega_b}.  This module builds that subspace, the unitary
between it and H_{omega_b}, and the converse problem of recovering b from
a target functional.

Convention: an :class:`Intertwiner` maps the subspace (in the coordinates of
its orthonormal basis Q) *onto* H_{omega_b}, so that
pi_{omega_b}(x) U = U Q^dagger pi_omega(x) Q.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, PositiveFunctional, state_from_density_matrix
from .errors import (
    DegenerateGeneratorError,
    DimensionMismatchError,
    NumericalFailureError,
    SingularStateError,
    SizeError,
    UnsupportedStructureError,
)
from .gns import gns_construct, lambda_of
from .linalg import EQ_TOL, RANK_TOL, dagger, fro, orth, psd_inv_sqrt, psd_sqrt

INTERTWINER_TOL = 1e-8
MODIFIER_TOL = 1e-9


def local_modify(algebra, omega, b):
    """The functional x -> omega(b^dagger x b).

    omega(b^dagger b) = 0 is allowed and gives the zero functional.
    """
    bm = b.matrix
    # omega(b^dagger x b) = tr((b D b^dagger) x)
    return PositiveFunctional(algebra, algebra.density_values(bm @ omega.density @ dagger(bm)))


def generator_weight(g, b):
    """omega(b^dagger b) = ||lambda(b)||^2."""
    v = lambda_of(g, b)
    return float(np.real(np.vdot(v, v)))


def _degeneracy_floor(g):
    G = g.source_functional.gram
    return RANK_TOL * max(float(np.max(np.abs(np.linalg.eigvalsh(G)))) if G.size else 0.0, 1e-300)


@dataclass(frozen=True, eq=False)
class SubRepSubspace:
    """Closure of pi(A) lambda(b) with its orthogonal projection."""

    projection: np.ndarray
    basis: np.ndarray
    generator: AlgebraElement
    generator_vector: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[1]

    def compress(self, op):
        """Q^dagger op Q, the operator restricted to the subspace."""
        return dagger(self.basis) @ op @ self.basis


def sub_rep_projection(g, b):
    """Projection onto H^b = span{pi(B_i) lambda(b)}.

    Raises:
        DegenerateGeneratorError: omega(b^dagger b) is below the rank floor.
    """
    weight = generator_weight(g, b)
    if weight <= _degeneracy_floor(g):
        raise DegenerateGeneratorError(weight)
    v = lambda_of(g, b)
    orbit = np.einsum("iab,b->ai", g.rep, v)
    Q = orth(orbit)
    P = Q @ dagger(Q)
    for arr in (P, Q):
        arr.setflags(write=False)
    return SubRepSubspace(P, Q, b, v)


def quasi_invariance_residual(g, sub):
    """max_i ||pi(B_i) P - P pi(B_i) P||_F."""
    P = sub.projection
    return float(max(fro(p @ P - P @ p @ P) for p in g.rep)) if len(g.rep) else 0.0


@dataclass(frozen=True, eq=False)
class Intertwiner:
    """Unitary U from the subspace (Q coordinates) onto H_{omega_b}."""

    matrix: np.ndarray
    residual: float
    unitarity_defect: float
    subspace: SubRepSubspace = field(repr=False)
    source: object = field(repr=False)
    target: object = field(repr=False)

    def as_partial_isometry(self):
        """U Q^dagger: H_omega -> H_{omega_b}, zero on the complement of H^b."""
        return self.matrix @ dagger(self.subspace.basis)


def intertwining_residual(g_source, g_target, U, Q):
    """max_i ||pi_target(B_i) U - U Q^dagger pi_source(B_i) Q||_F."""
    if len(g_source.rep) == 0:
        return 0.0
    lhs = g_target.rep @ U
    rhs = U @ (dagger(Q)[None] @ g_source.rep @ Q[None])
    return float(np.max(np.linalg.norm(lhs - rhs, axis=(1, 2))))


def unitarity_defect(U):
    r = U.shape[1]
    mp = U.shape[0]
    return max(fro(dagger(U) @ U - np.eye(r)), fro(U @ dagger(U) - np.eye(mp)))


def build_intertwiner(algebra, omega, b, g=None, g_b=None):
    """Unitary U with U Q^dagger pi(a) lambda(b) = lambda_{omega_b}(a).

    Solves U W = Lambda_b in least squares where W holds the subspace
    coordinates of pi(B_i) lambda(b); W^dagger W and Lambda_b^dagger Lambda_b
    are both the Gram matrix of omega_b, so U is unitary.

    Raises:
        DegenerateGeneratorError: omega(b^dagger b) vanishes.
        NumericalFailureError: unitarity or intertwining residual above 1e-8.
    """
    g = g if g is not None else gns_construct(algebra, omega)
    sub = sub_rep_projection(g, b)
    if g_b is None:
        g_b = gns_construct(algebra, local_modify(algebra, omega, b))
    Q = sub.basis
    W = dagger(Q) @ np.einsum("iab,b->ai", g.rep, sub.generator_vector)
    if g_b.hilbert_dim != Q.shape[1]:
        raise NumericalFailureError(
            f"subspace dimension {Q.shape[1]} differs from dim H_omega_b = {g_b.hilbert_dim}", np.inf
        )
    U = g_b.lambda_matrix @ np.linalg.pinv(W, rcond=RANK_TOL)
    defect = unitarity_defect(U)
    resid = intertwining_residual(g, g_b, U, Q)
    if max(defect, resid) > INTERTWINER_TOL:
        raise NumericalFailureError("intertwiner check failed", max(defect, resid))
    U.setflags(write=False)
    return Intertwiner(U, resid, defect, sub, g, g_b)


def verify_unitary_equivalence(rep1, rep2, U):
    """Residual of rep1(x) = U^dagger rep2(x) U over the given basis images.

    Returns a dict with ``residual`` (max Frobenius deviation) and
    ``unitarity_defect``.
    """
    rep1 = np.asarray(rep1, dtype=complex)
    rep2 = np.asarray(rep2, dtype=complex)
    U = np.asarray(U, dtype=complex)
    if rep1.shape[0] != rep2.shape[0]:
        raise DimensionMismatchError("representations have different numbers of basis images")
    if U.shape != (rep2.shape[1], rep1.shape[1]):
        raise DimensionMismatchError(f"U has shape {U.shape}, expected {(rep2.shape[1], rep1.shape[1])}")
    conj = dagger(U)[None] @ rep2 @ U[None]
    resid = float(np.max(np.linalg.norm(rep1 - conj, axis=(1, 2)))) if rep1.shape[0] else 0.0
    return {"residual": resid, "unitarity_defect": unitarity_defect(U)}


# -- converse direction -----------------------------------------------------


def _require_full(algebra):
    if not algebra.is_full:
        raise UnsupportedStructureError(
            "closed-form modifier needs a full matrix algebra; use search_modifier instead"
        )


def modifier_deviation(algebra, omega, b, target):
    """max_i |omega_b(B_i) - target(B_i)|."""
    return float(np.max(np.abs(local_modify(algebra, omega, b).values - target.values)))


def solve_modifier(algebra, omega, target):
    """b = rho'^{1/2} rho^{-1/2} with omega_b = target, for faithful omega on M_n.

    Raises:
        UnsupportedStructureError: the algebra is not all of M_n.
        SingularStateError: rho is not invertible.
        NumericalFailureError: the verification omega_b = target fails at 1e-9.
    """
    _require_full(algebra)
    rho = omega.density
    w = np.linalg.eigvalsh(rho)
    if w[0] <= RANK_TOL * max(w[-1], 1e-300):
        raise SingularStateError(
            f"reference state is not faithful (min eigenvalue {w[0]:.3e}); use approximate_modifier_sequence"
        )
    bm = psd_sqrt(target.density) @ psd_inv_sqrt(rho)
    b = algebra.from_matrix(bm)
    dev = modifier_deviation(algebra, omega, b, target)
    if dev > MODIFIER_TOL:
        raise NumericalFailureError("omega_b does not reproduce the target", dev)
    return b


def rank_modifier(algebra, omega, target):
    """Closed-form b with b rho b^dagger = rho' whenever rank rho' <= rank rho.

    b = sum_j sqrt(nu_j / mu_j) |v_j><u_j| pairs the eigenvectors of rho'
    with those of rho; this covers non-faithful rho, where
    :func:`solve_modifier` refuses.  Returns ``None`` when the rank
    condition fails.
    """
    _require_full(algebra)
    mu, u = np.linalg.eigh(omega.density)
    nu, v = np.linalg.eigh(target.density)
    mu, u, nu, v = mu[::-1], u[:, ::-1], nu[::-1], v[:, ::-1]
    r = int(np.sum(mu > RANK_TOL * max(mu[0], 1e-300)))
    r_t = int(np.sum(nu > RANK_TOL * max(nu[0], 1e-300)))
    if r_t > r:
        return None
    bm = (v[:, :r_t] * np.sqrt(nu[:r_t] / mu[:r_t])) @ dagger(u[:, :r_t])
    return algebra.from_matrix(bm)


@dataclass
class ModifierSequence:
    """Regularized modifiers b_n and their convergence diagnostics."""

    modifiers: list
    epsilons: list
    functional_errors: list
    cauchy_increments: list
    converged: bool

    @property
    def final_error(self):
        return self.functional_errors[-1]


def approximate_modifier_sequence(algebra, omega, target, steps=25, tol=1e-6):
    """b_n = rho'^{1/2} (rho + 2^-n I)^{-1/2}, n = 1..steps, with diagnostics.

    ``functional_errors[n-1]`` is max_i |omega_{b_n}(B_i) - target(B_i)|;
    ``cauchy_increments[n-1]`` is ||lambda(b_{n+1}) - lambda(b_n)||.
    ``converged`` is true when the last error is below ``tol`` and the
    errors are non-increasing over the last five steps.
    """
    if steps < 1:
        raise SizeError("need at least one step")
    _require_full(algebra)
    rho = omega.density
    root = psd_sqrt(target.density)
    eye = np.eye(algebra.ambient_dim)
    mods, eps, errs = [], [], []
    for n in range(1, steps + 1):
        e = 2.0 ** -n
        b = algebra.from_matrix(root @ psd_inv_sqrt(rho + e * eye))
        mods.append(b)
        eps.append(e)
        errs.append(modifier_deviation(algebra, omega, b, target))
    incs = [
        float(np.sqrt(max(omega.quadratic(mods[k + 1].coeffs - mods[k].coeffs), 0.0)))
        for k in range(steps - 1)
    ]
    tail = errs[-5:]
    monotone = all(tail[k + 1] <= tail[k] + EQ_TOL for k in range(len(tail) - 1))
    return ModifierSequence(mods, eps, errs, incs, bool(errs[-1] < tol and monotone))


def search_modifier(algebra, omega, target, iterations=50, restarts=8, seed=0, start=None):
    """Damped Gauss-Newton search for b with omega_b = target.

    Works on any algebra; no completeness claim.  The residual
    r(c) = omega_b(B_i) - target(B_i) is quadratic in (c, conj c); its
    Jacobian in the real coordinates (Re c, Im c) is assembled from
    omega(b^dagger B_i B_k) and omega(B_k^dagger B_i b).

    Returns ``(b, residual)`` for the best restart.
    """
    rng = np.random.default_rng(seed)
    A = algebra
    basis = A.basis
    D = omega.density
    d = A.dim

    def residual(c):
        bm = A.matrix(c)
        vals = np.einsum("ab,kba->k", bm @ D @ dagger(bm), basis)
        return vals - target.values

    def jacobian(c):
        bm = A.matrix(c)
        # d/dc_k omega(b^+ B_i b) = tr(D b^+ B_i B_k); d/dconj(c_k) = tr(D B_k^+ B_i b)
        left = np.einsum("ab,bc,icd,kda->ik", D, dagger(bm), basis, basis, optimize=True)
        right = np.einsum("ab,kcb,icd,da->ik", D, np.conj(basis), basis, bm, optimize=True)
        ju = left + right
        jv = 1j * (left - right)
        J = np.concatenate([ju, jv], axis=1)
        return np.concatenate([J.real, J.imag], axis=0)

    starts = [] if start is None else [np.asarray(start, dtype=complex)]
    starts += [rng.normal(size=d) + 1j * rng.normal(size=d) for _ in range(restarts)]
    best_c, best_r = None, np.inf
    for c in starts:
        lam = 1e-3
        r = residual(c)
        cost = float(np.sum(np.abs(r) ** 2))
        for _ in range(iterations):
            J = jacobian(c)
            rr = np.concatenate([r.real, r.imag])
            JtJ = J.T @ J
            step = np.linalg.solve(JtJ + lam * np.eye(2 * d), -J.T @ rr)
            cand = c + step[:d] + 1j * step[d:]
            r_new = residual(cand)
            cost_new = float(np.sum(np.abs(r_new) ** 2))
            if cost_new < cost:
                c, r, cost = cand, r_new, cost_new
                lam = max(lam / 10, 1e-12)
            else:
                lam *= 10
            if np.sqrt(cost) < 1e-13:
                break
        res = float(np.max(np.abs(r)))
        if res < best_r:
            best_c, best_r = c, res
        if best_r < 1e-12:
            break
    return A.element(best_c), best_r


def modification_report(algebra, omega, b=None, target=None):
    """Forward and converse checks bundled as the CLI-facing dict."""
    out = {}
    if b is not None:
        tw = build_intertwiner(algebra, omega, b)
        out.update(
            forward_residual=tw.residual,
            subspace_dim=tw.subspace.dim,
            unitarity_defect=tw.unitarity_defect,
        )
    if target is not None:
        bb = solve_modifier(algebra, omega, target)
        out["converse_residual"] = modifier_deviation(algebra, omega, bb, target)
        tw = build_intertwiner(algebra, omega, bb)
        out.setdefault("forward_residual", tw.residual)
        out.setdefault("subspace_dim", tw.subspace.dim)
        out.setdefault("unitarity_defect", tw.unitarity_defect)
    return out


def target_from_density(algebra, rho):
    return state_from_density_matrix(algebra, rho)
