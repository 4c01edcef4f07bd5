"""JSON round-trips shared by all modules and the CLI.

Complex matrices are row-major nested lists of ``[re, im]`` pairs.  An
algebra literal is ``{"ambient_dim": n, "basis": [...], "functional":
{"values": [...]}}``; the CLI also accepts the names ``"M<n>"``,
``"M2xM2"`` and ``"Pauli<N>"``.
"""

import re

import numpy as np

from .algebra import (
    PositiveFunctional,
    StarAlgebra,
    make_full_matrix_algebra,
    make_tensor_algebra,
    state_from_density_matrix,
)
from .errors import ConfigError
from .gns import GNSTriple


def to_json_complex(arr):
    """ndarray -> nested lists with [re, im] leaves."""
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def from_json_complex(data, ndim=1):
    """Inverse of :func:`to_json_complex` for an array of rank ``ndim``.

    Plain real numbers (rank ``ndim`` instead of ``ndim + 1``) are accepted.
    """
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError("array is not numeric", "") from exc
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == ndim:
        return arr.astype(complex)
    raise ConfigError(f"expected a rank-{ndim} array of numbers or [re, im] pairs", "")


def matrix_from_json(data, name="matrix"):
    """Square complex matrix from [re, im] pairs or real numbers."""
    try:
        mat = from_json_complex(data, ndim=2)
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc.message}", "") from exc
    if mat.shape[0] != mat.shape[1]:
        raise ConfigError(f"{name} must be square, got {mat.shape}", "")
    return mat


_NAMED = re.compile(r"^M(\d+)$")
_PAULI = re.compile(r"^Pauli(\d+)$")


def algebra_from_spec(spec):
    """Build an algebra from a name or a literal document."""
    if isinstance(spec, str):
        if spec == "M2xM2":
            m2 = make_full_matrix_algebra(2)
            return make_tensor_algebra(m2, m2)
        match = _NAMED.match(spec)
        if match:
            return make_full_matrix_algebra(int(match.group(1)))
        match = _PAULI.match(spec)
        if match:
            from .lattice import PauliAlgebra

            return PauliAlgebra(int(match.group(1)))
        raise ConfigError(f"unknown algebra name {spec!r}", "/payload/algebra")
    algebra, _ = load_algebra(spec)
    return algebra


def load_algebra(doc):
    """(algebra, functional or None) from the shared literal format."""
    basis = np.array([matrix_from_json(m, "basis element") for m in doc["basis"]])
    n = int(doc.get("ambient_dim", basis.shape[1]))
    if basis.shape[1] != n:
        raise ConfigError(f"basis matrices are {basis.shape[1]}x{basis.shape[1]}, ambient_dim is {n}", "/basis")
    algebra = StarAlgebra(basis)
    omega = None
    if "functional" in doc:
        omega = PositiveFunctional(algebra, from_json_complex(doc["functional"]["values"]))
    return algebra, omega


def dump_algebra(algebra, omega=None):
    doc = {"ambient_dim": algebra.ambient_dim, "basis": to_json_complex(algebra.basis)}
    if omega is not None:
        doc["functional"] = {"values": to_json_complex(omega.values)}
    return doc


def functional_from_spec(algebra, spec):
    """A functional from {"density": M} or {"values": [...]}."""
    if "density" in spec:
        return state_from_density_matrix(algebra, matrix_from_json(spec["density"], "density"))
    if "values" in spec:
        return PositiveFunctional(algebra, from_json_complex(spec["values"]))
    raise ConfigError("state needs 'density' or 'values'", "/payload/state")


def dump_gns(g):
    return {
        "hilbert_dim": g.hilbert_dim,
        "lambda": to_json_complex(g.lambda_matrix),
        "rep": to_json_complex(g.rep),
        "cyclic_vector": to_json_complex(g.cyclic_vector),
    }


def load_gns(doc, omega):
    """Rebuild a :class:`GNSTriple` against the functional it came from."""
    m = int(doc["hilbert_dim"])
    d = omega.algebra.dim
    if m == 0:
        empty = np.zeros((0,), dtype=complex)
        return GNSTriple(0, np.zeros((0, d), dtype=complex), np.zeros((d, 0, 0), dtype=complex), empty, 1e-10, omega)
    lam = from_json_complex(doc["lambda"], 2).reshape(m, omega.algebra.dim)
    rep = from_json_complex(doc["rep"], 3).reshape(omega.algebra.dim, m, m)
    xi = from_json_complex(doc["cyclic_vector"], 1).reshape(m)
    return GNSTriple(m, lam, rep, xi, 1e-10, omega)
