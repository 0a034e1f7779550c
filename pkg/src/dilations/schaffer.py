"""Truncated isometric and unitary dilations as banded block operators.

The isometric tuple lives on H plus N copies of the defect range; the
unitary tuple on N copies of the defect range, H, and N copies of the
star-defect range.  All defect-space blocks are stored compressed on the
range bases, so zero-rank defects yield genuinely absent tails.
"""

from __future__ import annotations

import numpy as np

from .blocks import BlockBuilder, DilationTuple, TruncatedBlockOperator, chain_products, interior_norm
from .certificates import Certificate
from .core import (
    DEFAULT_TOL,
    BadParams,
    InvalidCertificate,
    Tolerances,
    Unsupported,
    adj,
)
from .defects import ContractionTuple, DefectData, build_tuple, defect_data

__all__ = [
    "build_isometric",
    "build_unitary",
    "schaffer_unitary_of_product",
    "telescoping_check",
]


def _iso_operator(Ti, U, P, defects: DefectData, N: int) -> TruncatedBlockOperator:
    d = Ti.shape[0]
    r = defects.rank
    builder = BlockBuilder("iso", N, range(N + 1), [d] + [r] * N)
    builder.set(0, 0, Ti)
    if r:
        a0 = (np.eye(r, dtype=complex) - P) @ adj(U)
        a1 = P @ adj(U)
        DQ = adj(defects.basis) @ defects.D
        builder.set(1, 0, a1 @ DQ)
        for k in range(1, N + 1):
            builder.set(k, k, a0)
        for k in range(1, N):
            builder.set(k + 1, k, a1)
    return builder.done()


def _uni_operator(Ti, U, P, Ut, Q, defects: DefectData, T, N: int) -> TruncatedBlockOperator:
    d = Ti.shape[0]
    r, rs = defects.rank, defects.rank_star
    labels = list(range(-N, N + 1))
    dims = [r] * N + [d] + [rs] * N
    builder = BlockBuilder("uni", N, labels, dims)
    builder.set(0, 0, Ti)
    if r:
        a0 = (np.eye(r, dtype=complex) - P) @ adj(U)
        a1 = P @ adj(U)
        DQ = adj(defects.basis) @ defects.D
        for k in range(1, N + 1):
            builder.set(-k, -k, a0)
        for k in range(2, N + 1):
            builder.set(-k, -k + 1, a1)
        builder.set(-1, 0, a1 @ DQ)
        if rs:
            builder.set(-1, 1, -a1 @ (adj(defects.basis) @ adj(T) @ defects.basis_star))
    if rs:
        b0 = Ut @ (np.eye(rs, dtype=complex) - Q)
        b1 = Ut @ Q
        builder.set(0, 1, (defects.D_star @ defects.basis_star) @ b1)
        for k in range(1, N + 1):
            builder.set(k, k, b0)
        for k in range(1, N):
            builder.set(k, k + 1, b1)
    return builder.done()


def _require_valid(cert: Certificate, tol: Tolerances, what: str) -> None:
    if not cert.valid(tol):
        raise InvalidCertificate(
            f"{what} has validity residual {cert.max_validity_residual:.3e}"
        )


def build_isometric(
    tp: ContractionTuple,
    defects: DefectData,
    cert: Certificate,
    N: int,
    tol: Tolerances = DEFAULT_TOL,
) -> DilationTuple:
    """Isometric dilation tuple on H plus N defect copies.

    Each operator has first column T_i over P_i U_i^* D, diagonal blocks
    P_i^perp U_i^*, and subdiagonal blocks P_i U_i^*; the cached product of
    all factors realizes the classical one-step pattern on interior blocks.
    """
    if N < 2:
        raise BadParams("truncation depth N must be at least 2")
    _require_valid(cert, tol, "certificate")
    ops = tuple(
        _iso_operator(tp.T_list[i], cert.U[i], cert.P[i], defects, N) for i in range(tp.n)
    )
    partials = chain_products([op.data for op in ops])
    return DilationTuple(
        ops=ops,
        product=ops[0].like(partials[-1]),
        partial_products=tuple(partials),
        tp=tp,
        defects=defects,
        cert=cert,
    )


def build_unitary(
    tp: ContractionTuple,
    defects: DefectData,
    cert: Certificate,
    adjoint_cert: Certificate,
    N: int,
    tol: Tolerances = DEFAULT_TOL,
) -> DilationTuple:
    """Unitary dilation tuple on N defect copies, H, and N star copies.

    The restriction of each operator to H plus the defect tail equals the
    isometric dilation; the star tail carries the co-analytic band built
    from the adjoint-side certificate.
    """
    if N < 2:
        raise BadParams("truncation depth N must be at least 2")
    _require_valid(cert, tol, "certificate")
    _require_valid(adjoint_cert, tol, "adjoint certificate")
    ops = tuple(
        _uni_operator(
            tp.T_list[i],
            cert.U[i],
            cert.P[i],
            adjoint_cert.U[i],
            adjoint_cert.P[i],
            defects,
            tp.T,
            N,
        )
        for i in range(tp.n)
    )
    partials = chain_products([op.data for op in ops])
    return DilationTuple(
        ops=ops,
        product=ops[0].like(partials[-1]),
        partial_products=tuple(partials),
        tp=tp,
        defects=defects,
        cert=cert,
        adjoint_cert=adjoint_cert,
    )


def schaffer_unitary_of_product(
    T,
    N: int,
    tol: Tolerances = DEFAULT_TOL,
    defects: DefectData | None = None,
) -> TruncatedBlockOperator:
    """One-step unitary dilation pattern of a single contraction.

    Central block [[D, -T*], [T, D*]] with identity shift bands on both
    tails; passing ``defects`` reuses existing range bases so the blocks
    stay comparable with operators built from the same data.
    """
    Tm = np.asarray(T, dtype=complex)
    if defects is None:
        defects = defect_data(build_tuple([Tm], tol), tol)
    r, rs = defects.rank, defects.rank_star
    return _uni_operator(
        Tm,
        np.eye(r, dtype=complex),
        np.eye(r, dtype=complex),
        np.eye(rs, dtype=complex),
        np.eye(rs, dtype=complex),
        defects,
        Tm,
        N,
    )


def telescoping_check(dilation: DilationTuple, tol: Tolerances = DEFAULT_TOL) -> float:
    """Worst interior residual of the partial-product recursion.

    Every partial product of the unitary tuple must again be a one-step
    block operator built from the accumulated certificate data, and the
    final product must match the one-step pattern of the product
    contraction.  Returns the maximum interior deviation over all stages.
    """
    if dilation.layout != "uni":
        raise Unsupported("telescoping check requires the unitary layout")
    tp, defects = dilation.tp, dilation.defects
    cert, acert = dilation.cert, dilation.adjoint_cert
    if tp is None or defects is None or cert is None or acert is None:
        raise BadParams("dilation lacks construction context")
    N = dilation.N
    r, rs = defects.rank, defects.rank_star
    d = tp.dim
    worst = 0.0
    under_T = np.eye(d, dtype=complex)
    under_U = np.eye(r, dtype=complex)
    under_P = np.zeros((r, r), dtype=complex)
    prefix_U = np.eye(r, dtype=complex)
    under_Ut = np.eye(rs, dtype=complex)
    under_Q = np.zeros((rs, rs), dtype=complex)
    prefix_Ut = np.eye(rs, dtype=complex)
    template = dilation.product
    for k in range(tp.n):
        under_T = under_T @ tp.T_list[k]
        under_U = under_U @ cert.U[k]
        under_P = under_P + adj(prefix_U) @ cert.P[k] @ prefix_U
        prefix_U = cert.U[k] @ prefix_U
        under_Ut = under_Ut @ acert.U[k]
        under_Q = under_Q + adj(prefix_Ut) @ acert.P[k] @ prefix_Ut
        prefix_Ut = acert.U[k] @ prefix_Ut
        target = _uni_operator(under_T, under_U, under_P, under_Ut, under_Q, defects, tp.T, N)
        resid = interior_norm(template, dilation.partial_products[k] - target.data, k + 1)
        worst = max(worst, resid)
    pattern = schaffer_unitary_of_product(tp.T, N, tol, defects=defects)
    worst = max(
        worst,
        interior_norm(template, dilation.partial_products[-1] - pattern.data, tp.n),
    )
    return worst
