"""Certificate reconstruction and condition checking on defect spaces.

Solves the fundamental equations on the ranges of D and D*, rebuilds the
unique candidate pair (projections, commuting unitaries) on each side,
evaluates the five structural conditions in full or relaxed mode, and
provides a brute-force oracle for scalar and simultaneously-diagonal
defect spaces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    Tolerances,
    Unsupported,
    adj,
    fronorm,
    is_projection,
    is_unitary,
    opnorm,
)
from .defects import ContractionTuple, DefectData

__all__ = [
    "SolveOutcome",
    "FundamentalPairs",
    "Certificate",
    "AdjointCertificate",
    "ConditionReport",
    "solve_fundamental",
    "fundamental_pairs",
    "assemble_certificate",
    "adjoint_transfer",
    "make_certificate",
    "make_adjoint_certificate",
    "check_conditions",
    "check_adjoint_conditions",
    "certificate_oracle_search",
    "ILL_CONDITION_LIMIT",
]

ILL_CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class SolveOutcome:
    """Solution of defect @ C @ defect = rhs on the compressed defect range."""

    C: np.ndarray
    residual: float
    condition_number: float

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_number > ILL_CONDITION_LIMIT


def _solve_on_range(defect: np.ndarray, basis: np.ndarray, rhs: np.ndarray) -> SolveOutcome:
    r = basis.shape[1]
    if r == 0:
        return SolveOutcome(np.zeros((0, 0), dtype=complex), float(opnorm(rhs)), 1.0)
    dc = adj(basis) @ defect @ basis
    rc = adj(basis) @ rhs @ basis
    x = np.linalg.solve(dc, rc)
    x = np.linalg.solve(dc.T, x.T).T
    w = np.linalg.eigvalsh((dc + adj(dc)) / 2.0)
    cond = float(w.max() / w.min()) if w.min() > 0 else np.inf
    residual = opnorm(defect @ (basis @ x @ adj(basis)) @ defect - rhs)
    return SolveOutcome(x, residual, cond)


def solve_fundamental(A, B, tol: Tolerances = DEFAULT_TOL) -> SolveOutcome:
    """The unique contraction C on the D-range of AB with D C D = D_B^2 A.

    A and B must be commuting contractions; the result lives on the
    orthonormal range basis of the defect of AB.  A condition number above
    ``ILL_CONDITION_LIMIT`` flags the outcome without rejecting it.
    """
    from .core import NotCommuting, NotContraction, commutator_norm, is_contraction
    from .core import orthonormal_range_basis, psd_sqrt

    a = np.asarray(A, dtype=complex)
    b = np.asarray(B, dtype=complex)
    if is_contraction(a) > tol.check_tol or is_contraction(b) > tol.check_tol:
        raise NotContraction("both arguments must be contractions")
    if commutator_norm(a, b) > tol.check_tol * a.shape[0]:
        raise NotCommuting("arguments must commute")
    prod = a @ b
    eye = np.eye(a.shape[0], dtype=complex)
    defect_sq = eye - adj(prod) @ prod
    defect = psd_sqrt(defect_sq, tol, scale=1.0)
    basis = orthonormal_range_basis(defect_sq, tol, scale=1.0)
    rhs = (eye - adj(b) @ b) @ a
    return _solve_on_range(defect, basis, rhs)


@dataclass(frozen=True)
class FundamentalPairs:
    """Solutions F_i, F_i' on the D-range and G_i, G_i' on the D*-range.

    The primal pair satisfies D T_i = F_i D + F_i'^* D T and the starred
    pair the adjoint analogue; ``transfer_residual`` records the worst of
    these identities over all indices.
    """

    F: tuple[np.ndarray, ...]
    F_prime: tuple[np.ndarray, ...]
    G: tuple[np.ndarray, ...]
    G_prime: tuple[np.ndarray, ...]
    solve_residual: float
    transfer_residual: float
    ill_conditioned: bool

    @property
    def n(self) -> int:
        return len(self.F)


def fundamental_pairs(
    tp: ContractionTuple, defects: DefectData, tol: Tolerances = DEFAULT_TOL
) -> FundamentalPairs:
    """Solve all fundamental equations of the tuple on both defect ranges."""
    eye = np.eye(tp.dim, dtype=complex)
    T, Ts = tp.T, adj(tp.T)
    F, Fp, G, Gp = [], [], [], []
    solve_res = 0.0
    transfer_res = 0.0
    ill = False
    for Ti, Tip in zip(tp.T_list, tp.Tprime_list):
        out_f = _solve_on_range(defects.D, defects.basis, (eye - adj(Tip) @ Tip) @ Ti)
        out_fp = _solve_on_range(defects.D, defects.basis, (eye - adj(Ti) @ Ti) @ Tip)
        out_g = _solve_on_range(defects.D_star, defects.basis_star, (eye - Tip @ adj(Tip)) @ adj(Ti))
        out_gp = _solve_on_range(defects.D_star, defects.basis_star, (eye - Ti @ adj(Ti)) @ adj(Tip))
        for out in (out_f, out_fp, out_g, out_gp):
            solve_res = max(solve_res, out.residual)
            ill = ill or out.ill_conditioned
        F.append(out_f.C)
        Fp.append(out_fp.C)
        G.append(out_g.C)
        Gp.append(out_gp.C)
        emb, emb_s = defects.embed, defects.embed_star
        transfer_res = max(
            transfer_res,
            opnorm(defects.D @ Ti - emb(out_f.C) @ defects.D - adj(emb(out_fp.C)) @ defects.D @ T),
            opnorm(
                defects.D_star @ adj(Ti)
                - emb_s(out_g.C) @ defects.D_star
                - adj(emb_s(out_gp.C)) @ defects.D_star @ Ts
            ),
        )
    return FundamentalPairs(
        F=tuple(F),
        F_prime=tuple(Fp),
        G=tuple(G),
        G_prime=tuple(Gp),
        solve_residual=solve_res,
        transfer_residual=transfer_res,
        ill_conditioned=ill,
    )


@dataclass(frozen=True)
class Certificate:
    """Candidate unitaries U_i and projections P_i on the D-range.

    Validity residuals are carried as data; invalid algebra is a verdict,
    not an exception, because failure of the reconstruction certifies
    non-existence in full mode.
    """

    U: tuple[np.ndarray, ...]
    P: tuple[np.ndarray, ...]
    unitarity: tuple[float, ...]
    projectivity: tuple[float, ...]
    commutation: float
    product_residual: float
    source: str = "reconstructed"

    @property
    def n(self) -> int:
        return len(self.U)

    @property
    def rank(self) -> int:
        return self.U[0].shape[0] if self.U else 0

    @property
    def max_validity_residual(self) -> float:
        per_index = list(self.unitarity) + list(self.projectivity)
        return max(per_index + [self.commutation, self.product_residual], default=0.0)

    def valid(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        return self.max_validity_residual <= tol.check_tol


class AdjointCertificate(Certificate):
    """Certificate on the D*-range; ``U`` holds the tilde unitaries and
    ``P`` the adjoint-side projections."""


def _certificate_from(U_list, P_list, source: str, cls) -> Certificate:
    U = tuple(np.asarray(u, dtype=complex) for u in U_list)
    P = tuple(np.asarray(p, dtype=complex) for p in P_list)
    r = U[0].shape[0] if U else 0
    prod = np.eye(r, dtype=complex)
    for u in U:
        prod = prod @ u
    comm = 0.0
    for i in range(len(U)):
        for j in range(i + 1, len(U)):
            comm = max(comm, fronorm(U[i] @ U[j] - U[j] @ U[i]))
    return cls(
        U=U,
        P=P,
        unitarity=tuple(is_unitary(u) for u in U),
        projectivity=tuple(is_projection(p) for p in P),
        commutation=comm,
        product_residual=opnorm(prod - np.eye(r, dtype=complex)),
        source=source,
    )


def make_certificate(U_list, P_list, source: str = "supplied") -> Certificate:
    """Package user-supplied data on the D-range with validity residuals."""
    return _certificate_from(U_list, P_list, source, Certificate)


def make_adjoint_certificate(U_list, P_list, source: str = "supplied") -> AdjointCertificate:
    """Package user-supplied data on the D*-range with validity residuals."""
    return _certificate_from(U_list, P_list, source, AdjointCertificate)


def _recipe(F, F_prime, source: str, cls) -> Certificate:
    U_list, P_list = [], []
    for f, fp in zip(F, F_prime):
        r = f.shape[0]
        u = adj(f) + fp
        p = 0.5 * (np.eye(r, dtype=complex) - (f - adj(fp)) @ u)
        U_list.append(u)
        P_list.append(p)
    return _certificate_from(U_list, P_list, source, cls)


def assemble_certificate(pairs: FundamentalPairs, tol: Tolerances = DEFAULT_TOL) -> Certificate:
    """Reconstruct the unique candidate certificate from the primal pairs.

    U_i = F_i^* + F_i' and P_i = (I - (F_i - F_i'^*) U_i) / 2; when the five
    conditions are satisfiable at all, this is the only possible choice.
    """
    return _recipe(pairs.F, pairs.F_prime, "reconstructed", Certificate)


def adjoint_transfer(
    tp: ContractionTuple,
    defects: DefectData,
    pairs: FundamentalPairs,
    tol: Tolerances = DEFAULT_TOL,
) -> AdjointCertificate:
    """Transfer to the D*-side: tilde-U_i = G_i^* + G_i' and the matching
    projections, mirroring the primal recipe."""
    return _recipe(pairs.G, pairs.G_prime, "reconstructed", AdjointCertificate)


@dataclass(frozen=True)
class ConditionReport:
    """Residuals of the five conditions plus certificate validity.

    ``r1`` and ``r4`` are per-index; ``r2``, ``r3`` are maxima over pairs;
    ``r5`` is the partition-of-identity residual.  ``starred`` marks the
    adjoint-side variant (conditions (1')..(5')).
    """

    mode: str
    starred: bool
    dim: int
    r1: tuple[float, ...]
    r2: float
    r3: float
    r4: tuple[float, ...]
    r5: float
    certificate_valid: bool
    certificate_residual: float
    threshold: float

    @property
    def residuals(self) -> tuple[float, float, float, float, float]:
        return (
            max(self.r1, default=0.0),
            self.r2,
            self.r3,
            max(self.r4, default=0.0),
            self.r5,
        )

    def condition_passes(self, k: int) -> bool:
        return self.residuals[k - 1] <= self.threshold

    @property
    def checked_conditions(self) -> tuple[int, ...]:
        return (1, 2, 3, 4) if self.mode == "relaxed" else (1, 2, 3, 4, 5)

    @property
    def verdict(self) -> bool:
        return self.certificate_valid and all(
            self.condition_passes(k) for k in self.checked_conditions
        )

    @property
    def worst_failure(self) -> int | None:
        """Failing condition with the largest residual; 0 marks a failure
        of the certificate algebra alone; None when everything passes."""
        failing = [k for k in self.checked_conditions if not self.condition_passes(k)]
        if failing:
            return max(failing, key=lambda k: self.residuals[k - 1])
        if not self.certificate_valid:
            return 0
        return None

    def lines(self) -> list[str]:
        tag = "'" if self.starred else ""
        out = [f"mode={self.mode}  certificate_valid={self.certificate_valid} "
               f"(validity residual {self.certificate_residual:.3e})"]
        for k, resid in enumerate(self.residuals, start=1):
            checked = k in self.checked_conditions
            status = "pass" if resid <= self.threshold else "FAIL"
            note = "" if checked else "  [reported only]"
            out.append(f"condition ({k}{tag}): residual {resid:.3e}  {status}{note}")
        out.append(f"verdict: {'pass' if self.verdict else 'fail'}")
        return out


def _raw_conditions(
    T_list,
    T,
    D,
    basis,
    defect_squares,
    cert: Certificate,
    mode: str,
    starred: bool,
    tol: Tolerances,
) -> ConditionReport:
    dim = T.shape[0]
    r = basis.shape[1]
    DQ = adj(basis) @ D
    F = [(np.eye(r, dtype=complex) - p) @ adj(u) for u, p in zip(cert.U, cert.P)]
    Fp = [u @ p for u, p in zip(cert.U, cert.P)]
    r1 = tuple(
        opnorm(D @ Ti - basis @ (F[i] @ DQ) - basis @ (adj(Fp[i]) @ DQ @ T))
        for i, Ti in enumerate(T_list)
    )
    r2 = 0.0
    r3 = 0.0
    for i in range(len(T_list)):
        for j in range(i + 1, len(T_list)):
            r2 = max(r2, opnorm(F[i] @ F[j] - F[j] @ F[i]))
            r3 = max(r3, opnorm(Fp[i] @ Fp[j] - Fp[j] @ Fp[i]))
    DB = D @ basis
    r4 = tuple(
        opnorm(DB @ (cert.U[i] @ cert.P[i] @ adj(cert.U[i])) @ adj(DB) - defect_squares[i])
        for i in range(len(T_list))
    )
    total = np.zeros((r, r), dtype=complex)
    prefix = np.eye(r, dtype=complex)
    for u, p in zip(cert.U, cert.P):
        total = total + adj(prefix) @ p @ prefix
        prefix = u @ prefix
    r5 = opnorm(total - np.eye(r, dtype=complex))
    return ConditionReport(
        mode=mode,
        starred=starred,
        dim=dim,
        r1=r1,
        r2=r2,
        r3=r3,
        r4=r4,
        r5=r5,
        certificate_valid=cert.valid(tol),
        certificate_residual=cert.max_validity_residual,
        threshold=tol.check_tol * (1 + dim),
    )


def check_conditions(
    tp: ContractionTuple,
    defects: DefectData,
    cert: Certificate,
    mode: str = "full",
    tol: Tolerances = DEFAULT_TOL,
) -> ConditionReport:
    """Evaluate conditions (1)-(5) for a certificate on the D-range.

    All five residuals are computed regardless of mode; the verdict uses
    (1)-(5) in full mode and (1)-(4) in relaxed mode.
    """
    _validate_mode(mode)
    _validate_shapes(cert, defects.rank, tp.n)
    eye = np.eye(tp.dim, dtype=complex)
    squares = [eye - adj(t) @ t for t in tp.T_list]
    return _raw_conditions(
        tp.T_list, tp.T, defects.D, defects.basis, squares, cert, mode, False, tol
    )


def check_adjoint_conditions(
    tp: ContractionTuple,
    defects: DefectData,
    cert: AdjointCertificate,
    mode: str = "full",
    tol: Tolerances = DEFAULT_TOL,
) -> ConditionReport:
    """Evaluate the starred conditions (1')-(5') on the D*-range."""
    _validate_mode(mode)
    _validate_shapes(cert, defects.rank_star, tp.n)
    eye = np.eye(tp.dim, dtype=complex)
    squares = [eye - t @ adj(t) for t in tp.T_list]
    return _raw_conditions(
        [adj(t) for t in tp.T_list],
        adj(tp.T),
        defects.D_star,
        defects.basis_star,
        squares,
        cert,
        mode,
        True,
        tol,
    )


def _validate_mode(mode: str) -> None:
    if mode not in ("full", "relaxed"):
        raise ValueError(f"mode must be 'full' or 'relaxed', got {mode!r}")


def _validate_shapes(cert: Certificate, rank: int, n: int) -> None:
    from .core import ShapeMismatch

    if cert.n != n:
        raise ShapeMismatch(f"certificate has {cert.n} indices, tuple has {n}")
    for m in list(cert.U) + list(cert.P):
        if m.shape != (rank, rank):
            raise ShapeMismatch(f"certificate blocks must be {rank}x{rank}, got {m.shape}")


def _is_all_diagonal(mats, tol: Tolerances) -> bool:
    for m in mats:
        off = m - np.diag(np.diag(m))
        if opnorm(off) > tol.check_tol:
            return False
    return True


def certificate_oracle_search(
    tp: ContractionTuple,
    defects: DefectData,
    grid: int = 64,
    mode: str = "full",
    tol: Tolerances = DEFAULT_TOL,
    adjoint: bool = False,
):
    """Exhaustive search for a certificate passing the given mode.

    Supported domains: scalar defect (rank 1) with phases on a ``grid`` of
    roots of unity, and full-rank simultaneously diagonal tuples with 0/1
    diagonal projections and sign-diagonal unitaries.  Returns the best
    passing certificate or None; raises Unsupported outside those domains.
    """
    _validate_mode(mode)
    rank = defects.rank_star if adjoint else defects.rank
    make = make_adjoint_certificate if adjoint else make_certificate
    checker = check_adjoint_conditions if adjoint else check_conditions
    n = tp.n
    if rank == 0:
        cert = make([np.zeros((0, 0))] * n, [np.zeros((0, 0))] * n, source="oracle")
        return cert
    if rank == 1:
        unitary_choices = _phase_tuples(n, grid)
        projection_choices = [
            [np.array([[float(b)]], dtype=complex) for b in bits]
            for bits in itertools.product((1.0, 0.0), repeat=n)
        ]
    elif rank == tp.dim and _is_all_diagonal(tp.T_list, tol):
        unitary_choices = _sign_diag_tuples(n, tp.dim)
        projection_choices = [
            [np.diag(np.array(bits, dtype=complex)) for bits in combo]
            for combo in itertools.product(
                list(itertools.product((1.0, 0.0), repeat=tp.dim)), repeat=n
            )
        ]
    else:
        raise Unsupported(
            "oracle search supports scalar defects or full-rank diagonal tuples only"
        )
    best = None
    best_resid = np.inf
    for U_list in unitary_choices:
        for P_list in projection_choices:
            cert = make(U_list, P_list, source="oracle")
            report = checker(tp, defects, cert, mode=mode, tol=tol)
            if not report.verdict:
                continue
            worst = max(report.residuals[k - 1] for k in report.checked_conditions)
            if worst < best_resid:
                best, best_resid = cert, worst
                if worst <= 1e-12:
                    return best
    return best


def _phase_tuples(n: int, grid: int):
    """Scalar unitaries u_1..u_n on the grid of roots of unity, product 1."""
    if n == 1:
        yield [np.array([[1.0 + 0j]])]
        return
    roots = np.exp(2j * np.pi * np.arange(grid) / grid)
    for ks in itertools.product(range(grid), repeat=n - 1):
        us = [roots[k] for k in ks]
        last = np.conj(np.prod(us))
        yield [np.array([[u]]) for u in us + [last]]


def _sign_diag_tuples(n: int, d: int):
    """Sign-diagonal unitaries with product I, identity-first ordering."""
    if n == 1:
        yield [np.eye(d, dtype=complex)]
        return
    choices = list(itertools.product((1.0, -1.0), repeat=d))
    for combo in itertools.product(choices, repeat=n - 1):
        mats = [np.diag(np.array(c, dtype=complex)) for c in combo]
        prod = np.eye(d, dtype=complex)
        for m in mats:
            prod = prod @ m
        yield mats + [np.linalg.inv(prod)]
