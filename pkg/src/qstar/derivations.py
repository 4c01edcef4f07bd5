"""*-derivations, their induced maps in a GNS representation, effective
Hamiltonians, the bound constants of the spatiality criterion, and
finite-volume Heisenberg dynamics.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from .algebra import AlgebraElement
from .errors import (
    DegenerateGeneratorError,
    DerivationInconsistencyError,
    DimensionMismatchError,
    NotHermitianError,
    NotWellDefinedError,
    SizeError,
)
from .gns import gns_construct, lambda_of, represent_operator, seminorm_domination_bounds
from .linalg import EQ_TOL, RANK_TOL, dagger, expm_hermitian, fro, hermitian_part, op_norm, svd
from .modifications import build_intertwiner, local_modify

SPATIAL_TOL = 1e-8
WELL_DEFINED_TOL = 1e-9
# unknowns * equations above which the stacked commutator system is refused
_SPATIAL_LIMIT = 4_000_000


@dataclass(frozen=True, eq=False)
class Derivation:
    """Linear map on coefficients: coeffs(delta(a)) = map_matrix @ coeffs(a)."""

    algebra: object = field(repr=False)
    map_matrix: np.ndarray
    verified_star: bool = False
    verified_leibniz: bool = False
    star_defect: float = 0.0
    leibniz_defect: float = 0.0

    @property
    def is_valid(self):
        return self.verified_star and self.verified_leibniz

    def __call__(self, a):
        return AlgebraElement(self.algebra, self.map_matrix @ a.coeffs)

    def images(self):
        """Matrices delta(B_i), stacked."""
        return self.algebra.matrix(self.map_matrix.T)


def check_derivation(algebra, map_matrix):
    """Test *-compatibility and the Leibniz rule on every basis (pair).

    Violations are recorded in the returned :class:`Derivation`, never raised.
    """
    D = np.asarray(map_matrix, dtype=complex)
    if D.shape != (algebra.dim, algebra.dim):
        raise DimensionMismatchError(f"map must be {algebra.dim}x{algebra.dim}")
    B = algebra.basis
    img = algebra.matrix(D.T)
    scale = max(float(np.max(np.linalg.norm(img, axis=(1, 2)))) if img.size else 0.0, 1.0)

    # delta(B_i^dagger) = sum_l S[l, i] delta(B_l)
    S = algebra.star_table
    img_of_adj = np.tensordot(S.T, img, axes=([1], [0]))
    star = float(np.max(np.linalg.norm(img_of_adj - dagger(img), axis=(1, 2)))) / scale

    leib = 0.0
    for i in range(algebra.dim):
        prod_coeffs = algebra.coords(B[i] @ B, check=False)
        lhs = algebra.matrix(prod_coeffs @ D.T)
        rhs = B[i][None] @ img + img[i][None] @ B
        leib = max(leib, float(np.max(np.linalg.norm(lhs - rhs, axis=(1, 2)))) / scale)
    D.setflags(write=False)
    return Derivation(algebra, D, star <= EQ_TOL, leib <= EQ_TOL, star, leib)


def inner_derivation(algebra, h):
    """delta(a) = i (h a - a h) for Hermitian h.

    Raises:
        NotHermitianError: h differs from h^dagger by more than 1e-10.
    """
    hm = h.matrix if isinstance(h, AlgebraElement) else np.asarray(h, dtype=complex)
    if fro(hm - dagger(hm)) > EQ_TOL * max(fro(hm), 1.0):
        raise NotHermitianError("generator of an inner derivation must be Hermitian")
    comm = 1j * (hm[None] @ algebra.basis - algebra.basis @ hm[None])
    D = algebra.coords(comm).T
    return check_derivation(algebra, D)


def derivation_images(g, delta):
    """pi(delta(B_i)) for every basis element."""
    return np.tensordot(delta.map_matrix.T, g.rep, axes=([1], [0]))


@dataclass
class InducedDerivation:
    """delta_pi(pi(a)) = pi(delta(a)), defined on pi(A)."""

    gns: object = field(repr=False)
    derivation: Derivation = field(repr=False)
    certificate: float
    kernel_dim: int

    def on_element(self, a):
        return represent_operator(self.gns, self.derivation(a))

    def __call__(self, op):
        """Apply to an operator in pi(A) (coefficients found by least squares)."""
        rep = self.gns.rep.reshape(len(self.gns.rep), -1).T
        coeffs = np.linalg.lstsq(rep, np.asarray(op, dtype=complex).reshape(-1), rcond=None)[0]
        return represent_operator(self.gns, self.derivation.map_matrix @ coeffs)


def kernel_of_representation(g):
    """Orthonormal coefficient vectors spanning ker(pi)."""
    d = g.algebra.dim
    if g.hilbert_dim == 0:
        return np.eye(d, dtype=complex)
    rep = g.rep.reshape(d, -1).T
    _, s, vh = svd(rep, full_matrices=rep.shape[0] < rep.shape[1])
    r = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    return dagger(vh[r:])


def induced_derivation(g, delta):
    """Induced derivation with its well-definedness certificate.

    The certificate is max ||pi(delta(a))||_F over an orthonormal basis a of
    ker(pi).

    Raises:
        NotWellDefinedError: the certificate exceeds 1e-9; carries the witness a.
    """
    if delta.algebra.dim != g.algebra.dim:
        raise DimensionMismatchError("derivation and representation use different algebras")
    K = kernel_of_representation(g)
    cert, witness = 0.0, None
    for k in range(K.shape[1]):
        val = fro(represent_operator(g, delta.map_matrix @ K[:, k]))
        if val > cert:
            cert, witness = val, K[:, k]
    if cert > WELL_DEFINED_TOL:
        raise NotWellDefinedError(cert, g.algebra.element(witness))
    return InducedDerivation(g, delta, cert, K.shape[1])


@dataclass
class EffectiveHamiltonian:
    """Hermitian H with pi(delta(x)) = i[H, pi(x)] up to ``residual``."""

    matrix: np.ndarray
    residual: float
    gauge: dict
    cyclic_image_norm: float
    spatial: bool
    commutant_dim: int
    conditioning_warning: str = None


def _commutator_system(rep):
    """Stacked K with K vec(H) = vec(i[H, pi_i]) for all i (row-major vec)."""
    d, m, _ = rep.shape
    eye = np.eye(m)
    blocks = [1j * (np.kron(eye, p.T) - np.kron(p, eye)) for p in rep]
    return np.concatenate(blocks, axis=0) if blocks else np.zeros((0, m * m), dtype=complex)


def solve_spatial(g, delta, threshold=SPATIAL_TOL):
    """Least-squares effective Hamiltonian for the induced derivation.

    Solves i(H pi(B_i) - pi(B_i) H) = pi(delta(B_i)) for all i.  The minimal
    Frobenius-norm solution is Hermitian whenever delta is a *-derivation
    (the solution set is invariant under H -> H^dagger).  It is then shifted
    by a real multiple of the identity so that <H xi, xi> = 0.  The verdict is
    "spatial" iff the residual is below ``threshold``.
    """
    induced_derivation(g, delta)
    m = g.hilbert_dim
    d = g.algebra.dim
    if d * m ** 4 > _SPATIAL_LIMIT:
        raise SizeError(f"commutator system too large (d={d}, m={m})")
    targets = derivation_images(g, delta)
    K = _commutator_system(g.rep)
    rhs = targets.reshape(-1)
    if K.shape[0] > K.shape[1]:
        # same singular values and right vectors, at a fraction of the cost
        q, K = np.linalg.qr(K)
        rhs = dagger(q) @ rhs
    u, s, vh = svd(K)
    top = s[0] if s.size else 0.0
    keep = s > RANK_TOL * top if top > 0 else np.zeros_like(s, dtype=bool)
    coef = (dagger(u[:, keep]) @ rhs) / s[keep]
    h = (dagger(vh[keep]) @ coef).reshape(m, m)
    herm_defect = fro(h - dagger(h))
    h = hermitian_part(h)

    xi = g.cyclic_vector
    xi_norm2 = float(np.real(np.vdot(xi, xi)))
    shift = float(np.real(np.vdot(xi, h @ xi)) / xi_norm2) if xi_norm2 > 0 else 0.0
    h = h - shift * np.eye(m)

    resid = spatial_residual(g.rep, targets, h)
    warning = None
    if keep.any():
        cond = float(s[keep][-1] / top)
        if cond < 1e-8:
            warning = f"ill-conditioned commutator system (smallest retained singular ratio {cond:.2e})"
            warnings.warn(warning, RuntimeWarning, stacklevel=2)
    gauge = {
        "minimal_norm": True,
        "scalar_shift": shift,
        "cyclic_expectation": float(np.real(np.vdot(xi, h @ xi))),
        "hermiticity_defect_before_symmetrization": herm_defect,
    }
    return EffectiveHamiltonian(
        h, resid, gauge, float(np.linalg.norm(h @ xi)), resid < threshold, int(np.sum(~keep)), warning
    )


def spatial_residual(rep, targets, h):
    """max_i ||target_i - i(H pi_i - pi_i H)||_F."""
    if len(rep) == 0:
        return 0.0
    comm = 1j * (h[None] @ rep - rep @ h[None])
    return float(np.max(np.linalg.norm(targets - comm, axis=(1, 2))))


@dataclass
class BoundReport:
    """kappa of the seminorm domination and a certified interval for C."""

    kappa: float
    c_lower: float
    c_upper: float
    samples: int
    argmax: np.ndarray = field(repr=False, default=None)


def _bound_ratio_parts(algebra, omega, delta):
    w = delta.map_matrix.T @ omega.values  # omega(delta(a)) = w . c
    G = omega.gram
    # omega(a a^dagger) = c^dagger G2 c with G2[j, i] = omega(B_i B_j^dagger)
    B = algebra.basis
    K = omega.evaluate_matrix(B[:, None] @ dagger(B)[None])
    G2 = K.T
    return w, G, G2


def _ratio(c, w, G, G2):
    num = abs(w @ c)
    den = np.sqrt(max(np.real(np.conj(c) @ G @ c), 0.0)) + np.sqrt(max(np.real(np.conj(c) @ G2 @ c), 0.0))
    if den <= 1e-14 * max(np.linalg.norm(c) ** 2, 1e-300):
        return 0.0
    return float(num / den)


def _ascend(c, w, G, G2, iterations=50):
    """Projected gradient ascent of the scale-invariant ratio on the unit sphere."""
    c = c / np.linalg.norm(c)
    val = _ratio(c, w, G, G2)
    step = 0.5
    for _ in range(iterations):
        lin = w @ c
        q1 = max(np.real(np.conj(c) @ G @ c), 1e-300)
        q2 = max(np.real(np.conj(c) @ G2 @ c), 1e-300)
        den = np.sqrt(q1) + np.sqrt(q2)
        if abs(lin) == 0.0:
            break
        g_num = lin * np.conj(w) / (2 * abs(lin))
        g_den = G @ c / (2 * np.sqrt(q1)) + G2 @ c / (2 * np.sqrt(q2))
        grad = (g_num * den - abs(lin) * g_den) / den ** 2
        grad = grad - np.real(np.vdot(c, grad)) * c
        gn = np.linalg.norm(grad)
        if gn < 1e-14:
            break
        improved = False
        while step > 1e-8:
            cand = c + step * grad / gn
            cand = cand / np.linalg.norm(cand)
            v = _ratio(cand, w, G, G2)
            if v > val:
                c, val, improved = cand, v, True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
    return c, val


def estimate_bound_constant(algebra, omega, delta, restarts=8, seed=0, g=None, hamiltonian=None):
    """Certified interval [c_lower, c_upper] for the constant C in
    |omega(delta(a))| <= C (omega(a*a)^{1/2} + omega(aa*)^{1/2}).

    c_lower maximizes the ratio over basis elements, delta-aligned elements
    and seeded random starts refined by ascent; c_upper = ||H xi|| when the
    induced derivation is spatial (``inf`` otherwise).

    Raises:
        DegenerateGeneratorError: omega vanishes, so every denominator is 0.
    """
    w, G, G2 = _bound_ratio_parts(algebra, omega, delta)
    if np.max(np.abs(G)) == 0.0:
        raise DegenerateGeneratorError(0.0)
    rng = np.random.default_rng(seed)
    d = algebra.dim
    eye = np.eye(d, dtype=complex)
    structured = [eye[i] for i in range(d)]
    structured += [delta.map_matrix[:, i] for i in range(d) if np.linalg.norm(delta.map_matrix[:, i]) > 0]
    structured += [np.conj(w)] if np.linalg.norm(w) > 0 else []
    best, best_c, count = 0.0, None, 0
    for c in structured:
        count += 1
        v = _ratio(c / np.linalg.norm(c), w, G, G2)
        if v > best:
            best, best_c = v, c
    for _ in range(restarts):
        c0 = rng.normal(size=d) + 1j * rng.normal(size=d)
        c, v = _ascend(c0, w, G, G2)
        count += 1
        if v > best:
            best, best_c = v, c
    if best_c is not None:
        c, v = _ascend(best_c, w, G, G2)
        if v > best:
            best, best_c = v, c

    bounds = seminorm_domination_bounds(algebra, omega, seed=seed)
    if hamiltonian is None:
        g = g if g is not None else gns_construct(algebra, omega)
        hamiltonian = solve_spatial(g, delta)
    c_upper = hamiltonian.cyclic_image_norm if hamiltonian.spatial else np.inf
    return BoundReport(bounds.kappa, float(best), float(c_upper), count, best_c)


def _random_elements(algebra, rng, count):
    z = rng.normal(size=(count, algebra.dim)) + 1j * rng.normal(size=(count, algebra.dim))
    return [algebra.element(c) for c in z]


@dataclass
class ModifiedBoundReport:
    constant: float
    modified_constant: float
    samples: int
    violations: int
    max_ratio: float
    identity_residual: float


def verify_modified_bound(algebra, omega, b, delta, C, samples=200, seed=0, g=None, slack=1e-9):
    """Check |omega_b(delta(a))| <= (C ||pi(b)|| + ||lambda(delta(b))||)
    (omega_b(a*a)^{1/2} + omega_b(aa*)^{1/2}) + slack on seeded samples, and
    the identity b* delta(a) b = delta(b*ab) - delta(b*)ab - b*a delta(b).

    Raises:
        DerivationInconsistencyError: the identity fails beyond 1e-9 relative.
    """
    g = g if g is not None else gns_construct(algebra, omega)
    omega_b = local_modify(algebra, omega, b)
    db = delta(b)
    const = C * op_norm(represent_operator(g, b)) + float(np.linalg.norm(lambda_of(g, db)))
    bm, dbm = b.matrix, db.matrix
    bdag = dagger(bm)
    delta_bdag = delta(b.adjoint()).matrix
    rng = np.random.default_rng(seed)
    viol, worst_ratio, worst_id = 0, 0.0, 0.0
    for a in _random_elements(algebra, rng, samples):
        am = a.matrix
        lhs_id = bdag @ delta(a).matrix @ bm
        rhs_id = delta(algebra.from_matrix(bdag @ am @ bm)).matrix - delta_bdag @ am @ bm - bdag @ am @ dbm
        worst_id = max(worst_id, fro(lhs_id - rhs_id) / max(fro(lhs_id), 1.0))
        lhs = abs(omega_b(delta(a)))
        den = np.sqrt(max(omega_b.quadratic(a.coeffs), 0.0)) + np.sqrt(
            max(np.real(omega_b.evaluate_matrix(am @ dagger(am))), 0.0)
        )
        if lhs > const * den + slack:
            viol += 1
        if den > 0:
            worst_ratio = max(worst_ratio, lhs / den)
    if worst_id > 1e-9:
        raise DerivationInconsistencyError(worst_id)
    return ModifiedBoundReport(C, const, samples, viol, worst_ratio, worst_id)


@dataclass
class HamiltonianRelation:
    delta: np.ndarray = field(repr=False)
    commutation_residual: float
    derivation_gap: float
    transferred_residual: float
    residual_source: float
    residual_modified: float


def relate_effective_hamiltonians(algebra, omega, b, delta):
    """Compare H_{omega_b} with the transfer U (Q^+ H_omega Q) U^+.

    Both implement the induced derivation on H_{omega_b}, so their difference
    must commute with pi_{omega_b}(A).
    """
    g = gns_construct(algebra, omega)
    omega_b = local_modify(algebra, omega, b)
    g_b = gns_construct(algebra, omega_b)
    tw = build_intertwiner(algebra, omega, b, g=g, g_b=g_b)
    h = solve_spatial(g, delta)
    h_b = solve_spatial(g_b, delta)
    U = tw.matrix
    transferred = U @ tw.subspace.compress(h.matrix) @ dagger(U)
    diff = h_b.matrix - transferred
    comm = diff[None] @ g_b.rep - g_b.rep @ diff[None]
    comm_res = float(np.max(np.linalg.norm(comm, axis=(1, 2)))) if len(g_b.rep) else 0.0
    targets_b = derivation_images(g_b, delta)
    return HamiltonianRelation(
        diff,
        comm_res,
        comm_res,  # ||i[diff, pi(x)]|| has the same norm as the commutator
        spatial_residual(g_b.rep, targets_b, transferred),
        h.residual,
        h_b.residual,
    )


def heisenberg_evolve(h, X, t):
    """alpha_t(X) = exp(iht) X exp(-iht), computed from the spectrum of h."""
    h = np.asarray(h, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if h.shape != X.shape:
        raise DimensionMismatchError("h and X must have the same shape")
    if fro(h - dagger(h)) > EQ_TOL * max(fro(h), 1.0):
        raise NotHermitianError("Hamiltonian must be Hermitian")
    u = expm_hermitian(h, t)
    return u @ X @ dagger(u)


def richardson_derivative(h, X, dt=1e-4):
    """Second-order estimate of d/dt alpha_t(X) at t = 0 from forward differences."""
    f1 = (heisenberg_evolve(h, X, dt) - X) / dt
    f2 = (heisenberg_evolve(h, X, dt / 2) - X) / (dt / 2)
    return 2 * f2 - f1
