"""Seeded property suites.

Each suite runs one trial per (algebra, index) task.  Trial k draws from the
k-th child of ``SeedSequence(seed)``, so results do not depend on how tasks
are scheduled; aggregation is by maximum and count in task order.  BLAS is
pinned to one thread in every worker so floating-point reductions do not
depend on the degree of parallelism either.
"""

from concurrent.futures import ProcessPoolExecutor
import math

import numpy as np
from threadpoolctl import threadpool_limits

from .algebra import state_from_density_matrix
from .commutant import commutation_residual, decompose_direct_sum
from .derivations import (
    estimate_bound_constant,
    inner_derivation,
    relate_effective_hamiltonians,
    solve_spatial,
    verify_modified_bound,
)
from .errors import QStarError
from .gns import gns_construct, gns_residuals, represent_operator
from .linalg import RANK_TOL
from .modifications import (
    approximate_modifier_sequence,
    build_intertwiner,
    modifier_deviation,
    solve_modifier,
)
from .sampling import random_density, random_element, random_hermitian, random_state
from .serialize import algebra_from_spec

FAITHFUL_FLOOR = 0.05


def _random_rank(n, rng):
    return int(rng.integers(1, n + 1))


def trial_gns(A, rng, params):
    omega = random_state(A, rng, rank=_random_rank(A.ambient_dim, rng))
    res = gns_residuals(gns_construct(A, omega))
    ok = res["reconstruction"] < 1e-9 and res["cyclic_rank"] == res["hilbert_dim"]
    return {"ok": ok, "reconstruction": res["reconstruction"], "module": res["module"],
            "star": res["star"], "inner_product": res["inner_product"], "hilbert_dim": res["hilbert_dim"],
            "cyclic_rank_gap": res["hilbert_dim"] - res["cyclic_rank"]}


def trial_intertwiner(A, rng, params):
    omega = random_state(A, rng, rank=_random_rank(A.ambient_dim, rng))
    b = random_element(A, rng)
    try:
        tw = build_intertwiner(A, omega, b)
    except QStarError as exc:
        return {"ok": False, "error": type(exc).__name__}
    ok = tw.unitarity_defect < 1e-10 and tw.residual < 1e-8
    return {"ok": ok, "unitarity_defect": tw.unitarity_defect, "intertwining_residual": tw.residual,
            "subspace_dim": tw.subspace.dim}


def trial_converse(A, rng, params):
    n = A.ambient_dim
    omega = state_from_density_matrix(A, random_density(n, rng, floor=FAITHFUL_FLOOR))
    target = random_state(A, rng, rank=_random_rank(n, rng))
    try:
        b = solve_modifier(A, omega, target)
    except QStarError as exc:
        return {"ok": False, "error": type(exc).__name__}
    dev = modifier_deviation(A, omega, b, target)
    return {"ok": dev < 1e-9, "max_basis_deviation": dev}


def _ket(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, np.conj(v)) / np.vdot(v, v).real


# (rho, rho') pairs on M2 covering both support regimes
SUPPORT_CONFIGURATIONS = [
    ("pure_same", _ket([1, 0]), _ket([1, 0])),
    ("pure_orthogonal", _ket([1, 0]), _ket([0, 1])),
    ("pure_to_mixed", _ket([1, 0]), np.eye(2) / 2),
    ("faithful_to_pure", np.diag([0.7, 0.3]).astype(complex), _ket([0, 1])),
    ("pure_plus_same", _ket([1, 1]), _ket([1, 1])),
    ("pure_plus_to_zero", _ket([1, 1]), _ket([1, 0])),
]


def range_included(rho, rho_prime):
    """range(rho') inside range(rho), decided at the global rank tolerance."""
    w, v = np.linalg.eigh(rho)
    keep = v[:, w > RANK_TOL * max(w[-1], 1e-300)]
    leak = rho_prime - keep @ (np.conj(keep.T) @ rho_prime)
    return bool(np.linalg.norm(leak) <= 1e-9 * max(np.linalg.norm(rho_prime), 1e-300))


def trial_sequences(A, rng, params, index=0):
    name, rho, rho_p = SUPPORT_CONFIGURATIONS[index % len(SUPPORT_CONFIGURATIONS)]
    omega = state_from_density_matrix(A, rho)
    target = state_from_density_matrix(A, rho_p)
    seq = approximate_modifier_sequence(A, omega, target, steps=int(params.get("steps", 25)))
    inside = range_included(rho, rho_p)
    return {"ok": seq.converged == inside, "configuration": name, "converged": seq.converged,
            "range_included": inside, "final_error": seq.final_error}


def trial_spatial(A, rng, params):
    n = A.ambient_dim
    omega = state_from_density_matrix(A, random_density(n, rng, floor=FAITHFUL_FLOOR))
    h = random_hermitian(n, rng)
    delta = inner_derivation(A, h)
    g = gns_construct(A, omega)
    H = solve_spatial(g, delta)
    comm = commutation_residual(H.matrix - represent_operator(g, A.from_matrix(h)), g.rep)
    bound = estimate_bound_constant(A, omega, delta, g=g, hamiltonian=H, seed=int(rng.integers(2**31)))
    b = random_element(A, rng)
    mod = verify_modified_bound(A, omega, b, delta, C=bound.c_upper, samples=int(params.get("samples", 200)),
                                seed=int(rng.integers(2**31)), g=g)
    sandwich = bound.c_lower - bound.c_upper
    ok = H.residual < 1e-8 and comm < 1e-8 and sandwich <= 1e-9 and mod.violations == 0
    return {"ok": ok, "spatial_residual": H.residual, "commutant_residual": comm,
            "c_lower": bound.c_lower, "c_upper": bound.c_upper, "sandwich_gap": sandwich,
            "bound_violations": mod.violations, "identity_residual": mod.identity_residual}


def trial_hamiltonian(A, rng, params):
    n = A.ambient_dim
    omega = state_from_density_matrix(A, random_density(n, rng, floor=FAITHFUL_FLOOR))
    b = random_element(A, rng)
    delta = inner_derivation(A, random_hermitian(n, rng))
    try:
        rel = relate_effective_hamiltonians(A, omega, b, delta)
    except QStarError as exc:
        return {"ok": False, "error": type(exc).__name__}
    return {"ok": rel.commutation_residual < 1e-8, "commutation_residual": rel.commutation_residual,
            "transferred_residual": rel.transferred_residual}


def trial_direct_sum(A, rng, params):
    """Generators |0><v_k| / sqrt(mu_k) along the eigenvectors of rho."""
    n = A.ambient_dim
    rho = random_density(n, rng)
    omega = state_from_density_matrix(A, rho)
    mu, v = np.linalg.eigh(rho)
    gens = []
    for k in range(n):
        bm = np.outer(np.eye(n)[0], np.conj(v[:, k])) / np.sqrt(mu[k])
        gens.append(A.from_matrix(bm))
    rep = decompose_direct_sum(A, omega, gens)
    worst_block = max(b["equivalence_residual"] for b in rep["blocks"])
    return {"ok": rep["status"] == "complete", "orthogonality_max": rep["orthogonality_max"],
            "completeness_residual": rep["completeness_residual"], "block_equivalence": worst_block,
            "total_equivalence_residual": rep["total_equivalence_residual"], "blocks": len(rep["blocks"])}


SUITES = {
    "gns": trial_gns,
    "intertwiner": trial_intertwiner,
    "converse": trial_converse,
    "sequences": trial_sequences,
    "spatial": trial_spatial,
    "hamiltonian": trial_hamiltonian,
    "direct_sum": trial_direct_sum,
}

DEFAULT_ALGEBRAS = {
    "gns": ["M2", "M3", "M2xM2"],
    "intertwiner": ["M2", "M2xM2"],
    "converse": ["M2", "M3"],
    "sequences": ["M2"],
    "spatial": ["M2"],
    "hamiltonian": ["M2"],
    "direct_sum": ["M2", "M2xM2"],
}


def _run_task(task):
    suite, alg_name, index, seed_seq, params = task
    with threadpool_limits(1):
        A = algebra_from_spec(alg_name)
        rng = np.random.default_rng(seed_seq)
        fn = SUITES[suite]
        out = fn(A, rng, params, index=index) if suite == "sequences" else fn(A, rng, params)
    out = {k: (v.item() if isinstance(v, np.generic) else v) for k, v in out.items()}
    out["ok"] = bool(out["ok"])
    return {"algebra": alg_name, "index": index, **out}


def run_sweep(suite, trials, seed=0, algebras=None, jobs=1, params=None):
    """Run ``trials`` trials per algebra and aggregate.

    Returns a JSON-ready dict with per-trial records, per-metric maxima, the
    failure count and a status: "pass", "fail", or "partial" when there were
    no trials.
    """
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}")
    algebras = list(algebras or DEFAULT_ALGEBRAS[suite])
    params = dict(params or {})
    tasks = [(suite, a, k) for a in algebras for k in range(trials)]
    seqs = np.random.SeedSequence(seed).spawn(len(tasks))
    payload = [(s, a, k, q, params) for (s, a, k), q in zip(tasks, seqs)]
    if jobs > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, payload, chunksize=max(1, len(payload) // (4 * jobs))))
    else:
        records = [_run_task(t) for t in payload]
    return aggregate(suite, seed, algebras, trials, params, records)


def aggregate(suite, seed, algebras, trials, params, records):
    metrics = {}
    for rec in records:
        for key, val in rec.items():
            if key in ("index", "ok") or isinstance(val, (bool, str)) or val is None:
                continue
            if isinstance(val, (int, float)) and math.isfinite(val):
                name = f"max_{key}"
                metrics[name] = max(metrics.get(name, -math.inf), float(val))
    failures = sum(not r["ok"] for r in records)
    status = "partial" if not records else ("pass" if failures == 0 else "fail")
    metrics["failures"] = float(failures)
    metrics["trials"] = float(len(records))
    if not records:
        metrics = {}
    return {
        "suite": suite,
        "seed": seed,
        "algebras": algebras,
        "trials_per_algebra": trials,
        "params": params,
        "status": status,
        "failures": failures,
        "metrics": metrics,
        "per_trial": records,
    }
