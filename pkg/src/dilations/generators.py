"""Instance generators: random schemes and the built-in example corpus.

The ``shift-compression`` scheme compresses commuting coefficient-shift
isometries to the low-degree coefficient subspace, which guarantees a
tuple passing the full certificate conditions.  The generic schemes
(``poly-of-matrix``, ``diagonal``) produce commuting contractions that
usually fail.  Two fixed instances round out the corpus: a nilpotent
3x3 pair with no structured dilation and a triple of coordinate
projections admitting only the relaxed route.
"""

from __future__ import annotations

import numpy as np

from .core import BadParams, adj, opnorm, random_unitary
from .hardy import LinearSymbol, toeplitz_op
from .jsonio import TupleDocument

__all__ = ["generate_instance", "shift_compression_data", "SCHEMES"]

SCHEMES = ("shift-compression", "poly-of-matrix", "diagonal", "nilpotent-pair", "projection-triple")

_ALIASES = {
    "paper-remark": "nilpotent-pair",
    "remark": "nilpotent-pair",
    "paper-ex54": "projection-triple",
    "ex54": "projection-triple",
}


def shift_compression_data(E_dim: int, n: int, degree: int, seed: int):
    """Symbol data and compressed factors for a guaranteed-positive tuple.

    Picks a random unitary frame, partitions the fiber coordinates among
    the n factors, and draws diagonal phases with product one.  Returns
    (T_list, U_list, P_list) where T_i is the truncation of the symbol
    operator U_i P_i^perp + z U_i P_i to coefficient degrees < ``degree``.
    """
    if E_dim < 1 or n < 1 or degree < 1:
        raise BadParams("need E_dim >= 1, n >= 1, degree >= 1")
    rng = np.random.default_rng(seed)
    frame = random_unitary(E_dim, rng)
    groups = rng.integers(n, size=E_dim)
    phase_rows = [np.exp(2j * np.pi * rng.random(E_dim)) for _ in range(n - 1)]
    diag_unitaries = [np.diag(p) for p in phase_rows]
    if phase_rows:
        diag_unitaries.append(np.diag(np.conj(np.prod(np.vstack(phase_rows), axis=0))))
    else:
        diag_unitaries.append(np.eye(E_dim, dtype=complex))
    U_list = [frame @ d @ adj(frame) for d in diag_unitaries]
    P_list = [
        frame @ np.diag((groups == i).astype(complex)) @ adj(frame) for i in range(n)
    ]
    T_list = [
        toeplitz_op(LinearSymbol.from_model_pair(u, p), degree).data
        for u, p in zip(U_list, P_list)
    ]
    return T_list, U_list, P_list


def _poly_of_matrix(d: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    base = g * (0.9 / max(opnorm(g), 1e-12))
    mats = []
    for _ in range(n):
        coeffs = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        m = coeffs[0] * np.eye(d, dtype=complex) + coeffs[1] * base + coeffs[2] * base @ base
        mats.append(m * (0.95 / max(opnorm(m), 1e-12)))
    return mats


def _diagonal(d: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    return [
        np.diag(rng.random(d) * np.exp(2j * np.pi * rng.random(d)))
        for _ in range(n)
    ]


def _nilpotent_pair():
    t1 = np.array(
        [[0.0, 0.0, 0.0], [1.0 / 3.0, 0.0, 0.0], [0.0, 1.0 / (3.0 * np.sqrt(3.0)), 0.0]],
        dtype=complex,
    )
    t2 = np.array(
        [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [-1.0 / np.sqrt(3.0), 0.0, 0.0]],
        dtype=complex,
    )
    return [t1, t2]


def _projection_triple():
    return [np.diag([1.0 if j == i else 0.0 for j in range(3)]).astype(complex) for i in range(3)]


def generate_instance(scheme: str, params: dict | None = None, seed: int = 0) -> TupleDocument:
    """Build a :class:`TupleDocument` for the requested scheme.

    Identical scheme, params, and seed always produce an identical
    document.  The fixed corpus instances ship with their known
    certificates attached.
    """
    params = dict(params or {})
    name = _ALIASES.get(scheme, scheme)
    if name == "shift-compression":
        q = int(params.pop("E_dim", 2))
        n = int(params.pop("n", 2))
        m = int(params.pop("degree", params.pop("m", 2)))
        _reject_extra(params)
        T_list, _, _ = shift_compression_data(q, n, m, seed)
        return TupleDocument(
            matrices=T_list,
            settings={"scheme": "shift-compression", "seed": seed, "E_dim": q, "n": n, "degree": m},
        )
    if name == "poly-of-matrix":
        d = int(params.pop("d", 4))
        n = int(params.pop("n", 2))
        _reject_extra(params)
        return TupleDocument(
            matrices=_poly_of_matrix(d, n, seed),
            settings={"scheme": "poly-of-matrix", "seed": seed, "d": d, "n": n},
        )
    if name == "diagonal":
        d = int(params.pop("d", 4))
        n = int(params.pop("n", 2))
        _reject_extra(params)
        return TupleDocument(
            matrices=_diagonal(d, n, seed),
            settings={"scheme": "diagonal", "seed": seed, "d": d, "n": n},
        )
    if name == "nilpotent-pair":
        _reject_extra(params)
        return TupleDocument(
            matrices=_nilpotent_pair(),
            settings={"scheme": "nilpotent-pair"},
        )
    if name == "projection-triple":
        _reject_extra(params)
        mats = _projection_triple()
        eye = np.eye(3, dtype=complex)
        cert = ([eye.copy() for _ in mats], [eye - m for m in mats])
        return TupleDocument(
            matrices=mats,
            certificate=cert,
            adjoint_certificate=([u.copy() for u in cert[0]], [p.copy() for p in cert[1]]),
            settings={"scheme": "projection-triple"},
        )
    raise BadParams(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def _reject_extra(params: dict) -> None:
    if params:
        raise BadParams(f"unexpected parameters: {sorted(params)}")
