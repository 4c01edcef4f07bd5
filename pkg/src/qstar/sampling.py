"""Seeded random inputs for property sweeps and tests.

Every function takes an explicit ``numpy.random.Generator``; nothing reads
global random state.
"""

import numpy as np
from scipy.stats import unitary_group

from .algebra import state_from_density_matrix
from .linalg import dagger


def ginibre(n, rng, cols=None):
    cols = n if cols is None else cols
    return (rng.normal(size=(n, cols)) + 1j * rng.normal(size=(n, cols))) / np.sqrt(2)


def random_density(n, rng, rank=None, floor=0.0):
    """Trace-one PSD matrix of the given rank (full rank by default).

    ``floor`` mixes in floor * I / n to keep the spectrum away from zero.
    """
    x = ginibre(n, rng, n if rank is None else rank)
    rho = x @ dagger(x)
    rho = rho / np.trace(rho).real
    if floor:
        rho = (1 - floor) * rho + floor * np.eye(n) / n
    return 0.5 * (rho + dagger(rho))


def random_hermitian(n, rng, scale=1.0):
    x = ginibre(n, rng)
    return scale * 0.5 * (x + dagger(x))


def random_unitary(n, rng):
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random()) * np.eye(1)


def random_state(algebra, rng, rank=None, floor=0.0):
    """A state on a full or tensor algebra from a random density matrix."""
    return state_from_density_matrix(algebra, random_density(algebra.ambient_dim, rng, rank, floor))


def random_element(algebra, rng):
    c = rng.normal(size=algebra.dim) + 1j * rng.normal(size=algebra.dim)
    return algebra.element(c)


def random_matrix_element(algebra, rng):
    """Element from a random ambient matrix (requires a full algebra)."""
    return algebra.from_matrix(ginibre(algebra.ambient_dim, rng))


def random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def trial_generators(seed, trials):
    """One independent generator per trial, spawned from a single seed.

    Trial k gets the same stream regardless of how trials are scheduled.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]
