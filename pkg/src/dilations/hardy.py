"""Truncated analytic/bilateral symbol calculus on coefficient spaces.

Linear symbols A0 + z A1 (or A0 + conj(z) A1) act on truncated coefficient
sequences as bidiagonal block matrices.  This module provides the symbol
factorization checks for commuting isometric tuples with shift product,
the pure embedding and dilations for contractions with vanishing adjoint
powers, characteristic-function sampling, and extraction of symbol data
back out of a shift-product tuple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import BlockBuilder, DilationTuple, TruncatedBlockOperator, chain_products, interior_norm
from .certificates import AdjointCertificate
from .core import (
    DEFAULT_TOL,
    BadParams,
    InvalidCertificate,
    NotC0,
    NotProjection,
    NotPureShift,
    NotUnitary,
    SingularResolvent,
    Tolerances,
    adj,
    as_matrix,
    is_projection,
    is_unitary,
    opnorm,
    orthonormal_range_basis,
    psd_sqrt,
)
from .defects import ContractionTuple, DefectData, is_c0

__all__ = [
    "LinearSymbol",
    "CharacteristicSample",
    "toeplitz_op",
    "laurent_op",
    "BdfTupleReport",
    "BdfProductResult",
    "bdf_tuple_check",
    "bdf_product",
    "bdf_coanalytic_product",
    "pure_embedding",
    "pure_dilation",
    "characteristic_sample",
    "bcl_extract",
]


@dataclass(frozen=True)
class LinearSymbol:
    """Degree-one operator symbol A0 + z A1 (conj(z) when ``conjugate``)."""

    A0: np.ndarray
    A1: np.ndarray
    conjugate: bool = False

    def __post_init__(self) -> None:
        if self.A0.shape != self.A1.shape or self.A0.shape[0] != self.A0.shape[1]:
            raise ValueError("symbol coefficients must be square and equal-shaped")

    @property
    def fiber_dim(self) -> int:
        return self.A0.shape[0]

    @classmethod
    def from_model_pair(cls, U, P, conjugate: bool = False) -> "LinearSymbol":
        """Symbol U P^perp + z U P (unitary on the left)."""
        Um, Pm = as_matrix(U), as_matrix(P)
        eye = np.eye(Um.shape[0], dtype=complex)
        return cls(A0=Um @ (eye - Pm), A1=Um @ Pm, conjugate=conjugate)

    @classmethod
    def from_transfer_pair(cls, U, P, conjugate: bool = False) -> "LinearSymbol":
        """Symbol P^perp U^* + z P U^* (adjoint unitary on the right)."""
        Um, Pm = as_matrix(U), as_matrix(P)
        eye = np.eye(Um.shape[0], dtype=complex)
        return cls(A0=(eye - Pm) @ adj(Um), A1=Pm @ adj(Um), conjugate=conjugate)

    def isometric_defect(self) -> float:
        eye = np.eye(self.fiber_dim, dtype=complex)
        return max(
            opnorm(adj(self.A0) @ self.A0 + adj(self.A1) @ self.A1 - eye),
            opnorm(adj(self.A0) @ self.A1),
        )

    def is_isometric(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        return self.isometric_defect() <= tol.check_tol


def toeplitz_op(sym: LinearSymbol, N: int) -> TruncatedBlockOperator:
    """Coefficient action of the symbol on analytic coefficients 0..N-1.

    Analytic symbols put A1 on the subdiagonal (multiplication by z shifts
    coefficients up); conjugate symbols put it on the superdiagonal.
    """
    if N < 1:
        raise BadParams("need at least one coefficient block")
    q = sym.fiber_dim
    builder = BlockBuilder("h2", N, range(N), [q] * N)
    for k in range(N):
        builder.set(k, k, sym.A0)
    for k in range(N - 1):
        if sym.conjugate:
            builder.set(k, k + 1, sym.A1)
        else:
            builder.set(k + 1, k, sym.A1)
    return builder.done()


def laurent_op(sym: LinearSymbol, N: int) -> TruncatedBlockOperator:
    """Same band pattern over bilateral modes -N..N."""
    if N < 1:
        raise BadParams("need at least one coefficient block")
    q = sym.fiber_dim
    labels = list(range(-N, N + 1))
    builder = BlockBuilder("l2", N, labels, [q] * len(labels))
    for k in labels:
        builder.set(k, k, sym.A0)
    for k in labels[:-1]:
        if sym.conjugate:
            builder.set(k, k + 1, sym.A1)
        else:
            builder.set(k + 1, k, sym.A1)
    return builder.done()


def _validate_pairs(pairs, tol: Tolerances):
    out = []
    for k, (u, p) in enumerate(pairs):
        um, pm = as_matrix(u), as_matrix(p)
        if is_unitary(um) > tol.check_tol:
            raise NotUnitary(f"pair {k}: unitary residual {is_unitary(um):.3e}")
        if is_projection(pm) > tol.check_tol:
            raise NotProjection(f"pair {k}: projection residual {is_projection(pm):.3e}")
        out.append((um, pm))
    return out


@dataclass(frozen=True)
class BdfTupleReport:
    """Algebraic and matrix-level verdicts for a symbol tuple.

    The four algebraic residuals follow the factorization conditions for
    commuting isometric tuples whose product is the coefficient shift; the
    matrix side rebuilds the truncated operators and checks commutation
    plus the interior product against the shift directly.
    """

    commutation: float
    product_identity: float
    exchange: float
    exchange_bound: float
    partition: float
    matrix_commutation: float
    matrix_product: float
    threshold: float

    @property
    def algebraic_verdict(self) -> bool:
        residuals = (
            self.commutation,
            self.product_identity,
            self.exchange,
            self.exchange_bound,
            self.partition,
        )
        return all(r <= self.threshold for r in residuals)

    @property
    def matrix_verdict(self) -> bool:
        return max(self.matrix_commutation, self.matrix_product) <= self.threshold


def bdf_tuple_check(
    pairs,
    N: int = 8,
    coanalytic: bool = False,
    tol: Tolerances = DEFAULT_TOL,
) -> BdfTupleReport:
    """Check that (U_i, P_i) data factorizes the coefficient shift.

    Conditions: the unitaries commute with product I, the exchanged
    projection sums P_j + U_j^* P_i U_j agree for every pair and stay below
    I, and the telescoped projection sum equals I.  Cross-validated against
    the truncated operators themselves.
    """
    data = _validate_pairs(pairs, tol)
    n = len(data)
    if n == 0:
        raise BadParams("need at least one pair")
    q = data[0][0].shape[0]
    eye = np.eye(q, dtype=complex)
    commutation = 0.0
    exchange = 0.0
    exchange_bound = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            Ui, Pi = data[i]
            Uj, Pj = data[j]
            commutation = max(commutation, opnorm(Ui @ Uj - Uj @ Ui))
            left = Pj + adj(Uj) @ Pi @ Uj
            right = Pi + adj(Ui) @ Pj @ Ui
            exchange = max(exchange, opnorm(left - right))
            top = np.linalg.eigvalsh((left + adj(left)) / 2.0).max() if q else 0.0
            exchange_bound = max(exchange_bound, max(0.0, float(top) - 1.0))
    prod = eye.copy()
    for u, _ in data:
        prod = prod @ u
    product_identity = opnorm(prod - eye)
    total = np.zeros((q, q), dtype=complex)
    prefix = eye.copy()
    for u, p in data:
        total = total + adj(prefix) @ p @ prefix
        prefix = u @ prefix
    partition = opnorm(total - eye)

    ops = [toeplitz_op(LinearSymbol.from_model_pair(u, p, coanalytic), N) for u, p in data]
    matrix_commutation = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            comm = ops[i].data @ ops[j].data - ops[j].data @ ops[i].data
            matrix_commutation = max(matrix_commutation, interior_norm(ops[i], comm, 2))
    shift = toeplitz_op(
        LinearSymbol(np.zeros((q, q), dtype=complex), eye, coanalytic), N
    )
    prod_mat = np.eye(ops[0].size, dtype=complex)
    for op in ops:
        prod_mat = prod_mat @ op.data
    matrix_product = interior_norm(ops[0], prod_mat - shift.data, n)
    return BdfTupleReport(
        commutation=commutation,
        product_identity=product_identity,
        exchange=exchange,
        exchange_bound=exchange_bound,
        partition=partition,
        matrix_commutation=matrix_commutation,
        matrix_product=matrix_product,
        threshold=tol.check_tol,
    )


@dataclass(frozen=True)
class BdfProductResult:
    """Combined pair (U, P) for a product of two symbol operators."""

    U: np.ndarray
    P: np.ndarray
    projection_flag: bool
    matrix_residual: float
    threshold: float

    @property
    def matrix_verdict(self) -> bool:
        return self.matrix_residual <= self.threshold

    @property
    def consistent(self) -> bool:
        return self.projection_flag == self.matrix_verdict


def bdf_product(U1, P1, U2, P2, N: int = 8, tol: Tolerances = DEFAULT_TOL) -> BdfProductResult:
    """Product formula for analytic transfer symbols P^perp U^* + z P U^*.

    Returns U = U1 U2 and P = P1 + U1^* P2 U1 with a flag recording whether
    P is a projection; the truncated-matrix identity holds exactly when the
    flag does (for commuting unitaries).
    """
    (u1, p1), (u2, p2) = _validate_pairs([(U1, P1), (U2, P2)], tol)
    U = u1 @ u2
    P = p1 + adj(u1) @ p2 @ u1
    flag = is_projection(P) <= tol.check_tol
    left = toeplitz_op(LinearSymbol.from_transfer_pair(u1, p1), N)
    right = toeplitz_op(LinearSymbol.from_transfer_pair(u2, p2), N)
    target = toeplitz_op(LinearSymbol.from_transfer_pair(U, P), N)
    resid = interior_norm(target, left.data @ right.data - target.data, 2)
    return BdfProductResult(
        U=U, P=P, projection_flag=flag, matrix_residual=resid, threshold=tol.check_tol
    )


def bdf_coanalytic_product(
    U1, P1, U2, P2, N: int = 8, tol: Tolerances = DEFAULT_TOL
) -> BdfProductResult:
    """Product formula for co-analytic symbols U P^perp + conj(z) U P.

    Returns U = U1 U2 and P = P2 + U2^* P1 U2; the flags mirror
    :func:`bdf_product` on the reversed-mode truncations.
    """
    (u1, p1), (u2, p2) = _validate_pairs([(U1, P1), (U2, P2)], tol)
    U = u1 @ u2
    P = p2 + adj(u2) @ p1 @ u2
    flag = is_projection(P) <= tol.check_tol
    left = toeplitz_op(LinearSymbol.from_model_pair(u1, p1, conjugate=True), N)
    right = toeplitz_op(LinearSymbol.from_model_pair(u2, p2, conjugate=True), N)
    target = toeplitz_op(LinearSymbol.from_model_pair(U, P, conjugate=True), N)
    resid = interior_norm(target, left.data @ right.data - target.data, 2)
    return BdfProductResult(
        U=U, P=P, projection_flag=flag, matrix_residual=resid, threshold=tol.check_tol
    )


def _star_basis(T, tol: Tolerances) -> np.ndarray:
    eye = np.eye(T.shape[0], dtype=complex)
    return orthonormal_range_basis(eye - T @ adj(T), tol, scale=1.0)


def pure_embedding(
    T,
    N: int,
    tol: Tolerances = DEFAULT_TOL,
    defects: DefectData | None = None,
) -> np.ndarray:
    """Row-stacked map h -> (D* h, D* T^* h, ..., D* T^{*(N-1)} h).

    Requires vanishing adjoint powers: spectral radius below one and
    ||T^{*N}|| below rank_tol, so that the embedding is a near-isometry.
    Rows are compressed onto the star-defect range basis.
    """
    Tm = as_matrix(T)
    witness = is_c0(Tm, horizon=N, tol=tol)
    if not witness:
        raise NotC0(f"spectral radius {witness.spectral_radius:.6f} is not below one")
    if witness.power_norms and witness.power_norms[-1] > tol.rank_tol:
        raise BadParams(
            f"||T*^{N}|| = {witness.power_norms[-1]:.3e} exceeds rank_tol; increase N"
        )
    d = Tm.shape[0]
    basis_star = defects.basis_star if defects is not None else _star_basis(Tm, tol)
    D_star = (
        defects.D_star
        if defects is not None
        else psd_sqrt(np.eye(d, dtype=complex) - Tm @ adj(Tm), tol, scale=1.0)
    )
    rs = basis_star.shape[1]
    rows = np.zeros((N * rs, d), dtype=complex)
    power = np.eye(d, dtype=complex)
    head = adj(basis_star) @ D_star
    for k in range(N):
        rows[k * rs : (k + 1) * rs, :] = head @ power
        power = power @ adj(Tm)
    return rows


def pure_dilation(
    tp: ContractionTuple,
    defects: DefectData,
    adjoint_cert: AdjointCertificate,
    N: int,
    space: str = "h2",
    tol: Tolerances = DEFAULT_TOL,
) -> DilationTuple:
    """Coefficient-space dilation tuple for a product with decaying powers.

    Builds the analytic (``h2``) or bilateral (``l2``) operators with
    symbols built from the adjoint-side certificate, together with the pure
    embedding of H into the nonnegative modes.  The embedding is attached
    to the returned tuple.
    """
    if space not in ("h2", "l2"):
        raise BadParams("space must be 'h2' or 'l2'")
    if not adjoint_cert.valid(tol):
        raise InvalidCertificate(
            f"adjoint certificate has validity residual {adjoint_cert.max_validity_residual:.3e}"
        )
    embed_rows = pure_embedding(tp.T, N, tol, defects=defects)
    symbols = [
        LinearSymbol.from_model_pair(adjoint_cert.U[i], adjoint_cert.P[i])
        for i in range(tp.n)
    ]
    if space == "h2":
        ops = tuple(toeplitz_op(sym, N) for sym in symbols)
        embedding = embed_rows
    else:
        ops = tuple(laurent_op(sym, N) for sym in symbols)
        rs = defects.rank_star
        embedding = np.zeros(((2 * N + 1) * rs, tp.dim), dtype=complex)
        offset = N * rs
        embedding[offset : offset + N * rs, :] = embed_rows
    partials = chain_products([op.data for op in ops])
    return DilationTuple(
        ops=ops,
        product=ops[0].like(partials[-1]),
        partial_products=tuple(partials),
        tp=tp,
        defects=defects,
        adjoint_cert=adjoint_cert,
        embedding=embedding,
    )


@dataclass(frozen=True)
class CharacteristicSample:
    """Boundary samples of the characteristic function and its defect."""

    angles: tuple[float, ...]
    theta: tuple[np.ndarray, ...]
    delta: tuple[np.ndarray, ...]

    @property
    def max_delta_norm(self) -> float:
        return max((opnorm(d) for d in self.delta), default=0.0)

    def consistency_residual(self) -> float:
        """Worst ||delta^2 - (I - theta^* theta)|| over the grid."""
        worst = 0.0
        for th, de in zip(self.theta, self.delta):
            eye = np.eye(th.shape[1], dtype=complex)
            worst = max(worst, opnorm(de @ de - (eye - adj(th) @ th)))
        return worst


def characteristic_sample(
    T, grid_size: int = 64, tol: Tolerances = DEFAULT_TOL
) -> CharacteristicSample:
    """Sample theta(e^{it}) = -T + e^{it} D* (I - e^{it} T^*)^{-1} D on a
    uniform angle grid, compressed between the two defect ranges, together
    with the pointwise defect delta(t)."""
    Tm = as_matrix(T)
    d = Tm.shape[0]
    eye = np.eye(d, dtype=complex)
    D_sq = eye - adj(Tm) @ Tm
    Ds_sq = eye - Tm @ adj(Tm)
    D = psd_sqrt(D_sq, tol, scale=1.0)
    D_star = psd_sqrt(Ds_sq, tol, scale=1.0)
    basis = orthonormal_range_basis(D_sq, tol, scale=1.0)
    basis_star = orthonormal_range_basis(Ds_sq, tol, scale=1.0)
    angles = tuple(2.0 * np.pi * k / grid_size for k in range(grid_size))
    thetas = []
    deltas = []
    r = basis.shape[1]
    for t in angles:
        lam = np.exp(1j * t)
        resolvent = np.linalg.solve(eye - lam * adj(Tm), eye)
        if opnorm(resolvent) > 1e12:
            raise SingularResolvent(f"resolvent norm exceeds 1e12 at angle {t:.4f}")
        theta_full = -Tm + lam * D_star @ resolvent @ D
        theta = adj(basis_star) @ theta_full @ basis
        delta = psd_sqrt(np.eye(r, dtype=complex) - adj(theta) @ theta, tol)
        thetas.append(theta)
        deltas.append(delta)
    return CharacteristicSample(angles=angles, theta=tuple(thetas), delta=tuple(deltas))


def bcl_extract(dilation: DilationTuple, tol: Tolerances = DEFAULT_TOL):
    """Recover (U_i, P_i) pairs from a tuple whose product is the shift.

    The product must equal the truncated coefficient shift on interior
    blocks; the pairs are read off block (0, 0) of V_i^* - V_i' V^* and of
    V_i'^* - V_i V^*, where V_i' is the product of the other factors.
    """
    if dilation.layout != "h2":
        raise NotPureShift("extraction requires the analytic coefficient layout")
    ops = dilation.ops
    q = dilation.product.dims[0]
    eye = np.eye(q, dtype=complex)
    shift = toeplitz_op(LinearSymbol(np.zeros((q, q), dtype=complex), eye), dilation.N)
    V = dilation.product.data
    if interior_norm(dilation.product, V - shift.data, dilation.n) > tol.check_tol * (1 + q):
        raise NotPureShift("tuple product is not the truncated coefficient shift")
    sl = dilation.product.label_slice(0)
    out = []
    for i, op in enumerate(ops):
        others = np.eye(op.size, dtype=complex)
        for j, other in enumerate(ops):
            if j != i:
                others = others @ other.data
        X = (adj(op.data) - others @ adj(V))[sl, sl]
        Y = (adj(others) - op.data @ adj(V))[sl, sl]
        U = adj(X + adj(Y))
        P = adj(U) @ Y
        out.append((U, P))
    return out
