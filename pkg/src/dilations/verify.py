"""Dilation-property verification, minimality checks, and the end-to-end
pipeline from a contraction tuple to a verified dilation report."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .blocks import DilationTuple, interior_norm
from .certificates import (
    AdjointCertificate,
    Certificate,
    ConditionReport,
    adjoint_transfer,
    assemble_certificate,
    certificate_oracle_search,
    check_adjoint_conditions,
    check_conditions,
    fundamental_pairs,
)
from .core import (
    DEFAULT_TOL,
    BadParams,
    DegreeExceedsTruncation,
    Tolerances,
    Unsupported,
    adj,
    is_unitary,
    opnorm,
)
from .defects import (
    CanonicalSplit,
    ContractionTuple,
    build_tuple,
    canonical_decomposition,
    defect_data,
    is_c0,
)
from .hardy import pure_dilation
from .schaffer import build_unitary, telescoping_check

__all__ = [
    "DilationReport",
    "PipelineReport",
    "default_embedding",
    "multi_indices",
    "verify_dilation",
    "minimality_defect",
    "full_pipeline",
]


def multi_indices(n: int, maxdeg: int):
    """Multi-indices of length n with total degree <= maxdeg.

    Graded order (degree ascending); within a grade, lexicographically
    descending on the tuple, so the enumeration is deterministic and the
    reported worst index reproducible.
    """
    for total in range(maxdeg + 1):
        for cut in itertools.combinations(range(total + n - 1), n - 1):
            parts = []
            prev = -1
            for c in cut:
                parts.append(c - prev - 1)
                prev = c
            parts.append(total + n - 2 - prev)
            yield tuple(parts)


def default_embedding(dilation: DilationTuple, dim: int) -> np.ndarray:
    """Identity inclusion of H as its block (layouts with an H block)."""
    template = dilation.product
    if 0 not in template.labels or template.block(0, 0).shape[0] != dim:
        raise BadParams("layout has no H block; supply an explicit embedding")
    out = np.zeros((template.size, dim), dtype=complex)
    out[template.label_slice(0), :] = np.eye(dim, dtype=complex)
    return out


@dataclass(frozen=True)
class DilationReport:
    """Compression, structural, and minimality residuals of a dilation."""

    max_compression_residual: float
    worst_index: tuple[int, ...]
    compression: tuple[tuple[tuple[int, ...], float], ...]
    structural: tuple[float, ...]
    commutation: float
    minimality_defect: int
    dim: int
    threshold: float

    @property
    def max_structural_residual(self) -> float:
        return max(list(self.structural) + [self.commutation], default=0.0)

    @property
    def verdict(self) -> bool:
        return (
            self.max_compression_residual <= self.threshold * (1 + self.dim)
            and self.max_structural_residual <= self.threshold * max(self.dim, 1)
        )

    def lines(self) -> list[str]:
        out = [
            f"max compression residual {self.max_compression_residual:.3e} "
            f"at multi-index {self.worst_index}",
            f"structural residuals per operator: "
            + ", ".join(f"{s:.3e}" for s in self.structural),
            f"pairwise commutation residual {self.commutation:.3e}",
            f"minimality defect {self.minimality_defect}",
            f"verdict: {'pass' if self.verdict else 'fail'}",
        ]
        return out


def _op_powers(mat: np.ndarray, maxdeg: int) -> list[np.ndarray]:
    out = [np.eye(mat.shape[0], dtype=complex)]
    for _ in range(maxdeg):
        out.append(out[-1] @ mat)
    return out


def verify_dilation(
    tp: ContractionTuple,
    dilation: DilationTuple,
    embedding: np.ndarray | None = None,
    maxdeg: int = 8,
    tol: Tolerances = DEFAULT_TOL,
) -> DilationReport:
    """Check every compression identity up to total degree ``maxdeg``.

    For each multi-index k the residual is the spectral norm of
    E^* (prod_i W_i^{k_i}) E - prod_i T_i^{k_i}; also reports interior
    isometry/unitarity per operator, pairwise interior commutation, and the
    minimality defect of the product.
    """
    if maxdeg > dilation.N - 1:
        raise DegreeExceedsTruncation(f"maxdeg {maxdeg} exceeds N-1 = {dilation.N - 1}")
    if embedding is None:
        embedding = dilation.embedding
    if embedding is None:
        embedding = default_embedding(dilation, tp.dim)
    E = np.asarray(embedding, dtype=complex)
    op_pows = [_op_powers(op.data, maxdeg) for op in dilation.ops]
    t_pows = [_op_powers(t, maxdeg) for t in tp.T_list]
    Estar = adj(E)
    records = []
    worst = -1.0
    worst_index: tuple[int, ...] = (0,) * tp.n
    for index in multi_indices(tp.n, maxdeg):
        left = Estar
        small = np.eye(tp.dim, dtype=complex)
        for i, k in enumerate(index):
            left = left @ op_pows[i][k]
            small = small @ t_pows[i][k]
        resid = opnorm(left @ E - small)
        records.append((index, resid))
        if resid > worst:
            worst, worst_index = resid, index
    two_sided = dilation.layout in ("uni", "l2")
    structural = []
    for op in dilation.ops:
        eye = np.eye(op.size, dtype=complex)
        col = interior_norm(op, adj(op.data) @ op.data - eye, 1)
        if two_sided:
            row = interior_norm(op, op.data @ adj(op.data) - eye, 1)
            structural.append(max(col, row))
        else:
            structural.append(col)
    commutation = 0.0
    for i in range(tp.n):
        for j in range(i + 1, tp.n):
            comm = dilation.ops[i].data @ dilation.ops[j].data - dilation.ops[j].data @ dilation.ops[i].data
            commutation = max(commutation, interior_norm(dilation.product, comm, 2))
    defect = minimality_defect(dilation, maxdeg, embedding=E, tol=tol)
    return DilationReport(
        max_compression_residual=worst,
        worst_index=worst_index,
        compression=tuple(records),
        structural=tuple(structural),
        commutation=commutation,
        minimality_defect=defect,
        dim=tp.dim,
        threshold=tol.check_tol,
    )


def minimality_defect(
    dilation: DilationTuple,
    maxdeg: int,
    embedding: np.ndarray | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> int:
    """Unreached dimensions in the orbit of H under the product operator.

    Spans (prod W_i)^k E over |k| <= maxdeg (nonnegative k for one-sided
    layouts) and returns the numerical corank over the blocks reachable
    within maxdeg applications from the embedding's support.  Zero means
    the product is minimal at truncation scale.
    """
    if maxdeg > dilation.N - 1:
        raise DegreeExceedsTruncation(f"maxdeg {maxdeg} exceeds N-1 = {dilation.N - 1}")
    template = dilation.product
    if embedding is None:
        embedding = dilation.embedding
    if embedding is None:
        dims = dict(zip(template.labels, template.dims))
        if 0 not in dims:
            raise BadParams("layout has no H block; supply an explicit embedding")
        embedding = np.zeros((template.size, dims[0]), dtype=complex)
        embedding[template.label_slice(0), :] = np.eye(dims[0], dtype=complex)
    E = np.asarray(embedding, dtype=complex)
    block_norms = {
        label: opnorm(E[template.label_slice(label), :]) for label in template.labels
    }
    top = max(block_norms.values(), default=0.0)
    if top == 0.0:
        return 0
    support = [l for l, v in block_norms.items() if v > tol.rank_tol * top]
    reachable = [
        l for l in template.labels if min(abs(l - s) for s in support) <= maxdeg
    ]
    idx = template.indices_for(reachable)
    prod = dilation.product.data
    powers = _op_powers(prod, maxdeg)
    columns = [(pw @ E)[idx, :] for pw in powers]
    if dilation.layout in ("uni", "l2"):
        star_powers = _op_powers(adj(prod), maxdeg)
        columns.extend((pw @ E)[idx, :] for pw in star_powers[1:])
    stack = np.hstack(columns)
    if stack.size == 0:
        return 0
    s = np.linalg.svd(stack, compute_uv=False)
    rank = int(np.count_nonzero(s > tol.rank_tol * s[0])) if s.size and s[0] > 0 else 0
    return int(len(idx) - rank)


@dataclass(frozen=True)
class PipelineReport:
    """Composite outcome of the certificate-to-dilation pipeline."""

    mode: str
    dim: int
    defect_rank: int
    defect_rank_star: int
    full_report: ConditionReport
    adjoint_report: ConditionReport | None
    relaxed_report: ConditionReport | None
    adjoint_relaxed_report: ConditionReport | None
    dilation_report: DilationReport | None
    telescoping_residual: float | None
    split: CanonicalSplit | None
    unitary_part_residual: float | None
    failure: str | None

    @property
    def verdict(self) -> bool:
        if self.mode == "full":
            return (
                self.full_report.verdict
                and self.adjoint_report is not None
                and self.adjoint_report.verdict
                and self.dilation_report is not None
                and self.dilation_report.verdict
            )
        if self.mode == "relaxed":
            ok = self.dilation_report is not None and self.dilation_report.verdict
            if self.unitary_part_residual is not None:
                ok = ok and self.unitary_part_residual <= self.full_report.threshold
            return ok
        return False

    def lines(self) -> list[str]:
        out = [f"pipeline mode: {self.mode}",
               f"defect ranks: {self.defect_rank} / {self.defect_rank_star}"]
        out += ["full-mode conditions:"] + ["  " + s for s in self.full_report.lines()]
        if self.adjoint_report is not None:
            out += ["adjoint conditions:"] + ["  " + s for s in self.adjoint_report.lines()]
        if self.relaxed_report is not None:
            out += ["relaxed conditions (c.n.u. part):"] + [
                "  " + s for s in self.relaxed_report.lines()
            ]
        if self.adjoint_relaxed_report is not None:
            out += ["adjoint relaxed conditions (c.n.u. part):"] + [
                "  " + s for s in self.adjoint_relaxed_report.lines()
            ]
        if self.split is not None:
            out.append(
                f"canonical split: unitary part dim {self.split.dim_unitary}, "
                f"c.n.u. part dim {self.split.dim_cnu}"
            )
        if self.dilation_report is not None:
            out += ["dilation verification:"] + ["  " + s for s in self.dilation_report.lines()]
        if self.telescoping_residual is not None:
            out.append(f"telescoping residual {self.telescoping_residual:.3e}")
        if self.failure:
            out.append(f"failure: {self.failure}")
        out.append(f"pipeline verdict: {'pass' if self.verdict else 'fail'}")
        return out


def _restricted_tuple(tp: ContractionTuple, basis: np.ndarray, tol: Tolerances):
    mats = [adj(basis) @ t @ basis for t in tp.T_list]
    return build_tuple(mats, tol)


def _reduction_residual(tp: ContractionTuple, split: CanonicalSplit) -> float:
    worst = 0.0
    b1, b2 = split.basis_unitary, split.basis_cnu
    for t in tp.T_list:
        if b1.shape[1] and b2.shape[1]:
            worst = max(worst, opnorm(adj(b1) @ t @ b2), opnorm(adj(b2) @ t @ b1))
    return worst


def full_pipeline(
    tp: ContractionTuple,
    N: int = 16,
    maxdeg: int = 8,
    tol: Tolerances = DEFAULT_TOL,
    cert: Certificate | None = None,
    adjoint_cert: AdjointCertificate | None = None,
    grid: int = 64,
) -> PipelineReport:
    """Defects, certificates, conditions, and (on success) a verified dilation.

    Full mode: reconstruct (or accept) the certificate, check conditions
    (1)-(5), build the unitary tuple on N defect copies each side, verify
    compressions up to ``maxdeg``, the telescoping recursion, and
    minimality.  On full-mode failure, fall back to the relaxed route: split
    off the unitary part, and on the c.n.u. part (whose product has decaying
    powers in finite dimension) build the bilateral coefficient dilation
    from an adjoint-side certificate obtained by transfer, supplied data, or
    oracle search.
    """
    defects = defect_data(tp, tol)
    pairs = fundamental_pairs(tp, defects, tol)
    primal = cert if cert is not None else assemble_certificate(pairs, tol)
    full_rep = check_conditions(tp, defects, primal, mode="full", tol=tol)
    if cert is not None and not full_rep.verdict:
        reconstructed = assemble_certificate(pairs, tol)
        rec_rep = check_conditions(tp, defects, reconstructed, mode="full", tol=tol)
        if rec_rep.verdict:
            primal, full_rep = reconstructed, rec_rep

    if full_rep.verdict:
        adj_cert = adjoint_cert if adjoint_cert is not None else adjoint_transfer(tp, defects, pairs, tol)
        adj_rep = check_adjoint_conditions(tp, defects, adj_cert, mode="full", tol=tol)
        dilation = build_unitary(tp, defects, primal, adj_cert, N, tol)
        report = verify_dilation(tp, dilation, maxdeg=maxdeg, tol=tol)
        tele = telescoping_check(dilation, tol)
        return PipelineReport(
            mode="full",
            dim=tp.dim,
            defect_rank=defects.rank,
            defect_rank_star=defects.rank_star,
            full_report=full_rep,
            adjoint_report=adj_rep,
            relaxed_report=None,
            adjoint_relaxed_report=None,
            dilation_report=report,
            telescoping_residual=tele,
            split=None,
            unitary_part_residual=None,
            failure=None,
        )

    failure = _describe_failure(full_rep, "full")
    split = canonical_decomposition(tp.T, tol)
    reduction = _reduction_residual(tp, split)
    if split.dim_cnu == 0:
        return PipelineReport(
            mode="failed",
            dim=tp.dim,
            defect_rank=defects.rank,
            defect_rank_star=defects.rank_star,
            full_report=full_rep,
            adjoint_report=None,
            relaxed_report=None,
            adjoint_relaxed_report=None,
            dilation_report=None,
            telescoping_residual=None,
            split=split,
            unitary_part_residual=None,
            failure=failure + "; no c.n.u. part to dilate on the relaxed route",
        )

    whole = split.dim_cnu == tp.dim
    sub_tp = tp if whole else _restricted_tuple(tp, split.basis_cnu, tol)
    sub_defects = defects if whole else defect_data(sub_tp, tol)
    sub_pairs = pairs if whole else fundamental_pairs(sub_tp, sub_defects, tol)

    relaxed_rep = None
    primal_candidates: list[Certificate] = []
    if cert is not None and whole:
        primal_candidates.append(cert)
    primal_candidates.append(assemble_certificate(sub_pairs, tol))
    for cand in primal_candidates:
        rep = check_conditions(sub_tp, sub_defects, cand, mode="relaxed", tol=tol)
        if relaxed_rep is None or rep.verdict:
            relaxed_rep = rep
        if rep.verdict:
            break
    if relaxed_rep is not None and not relaxed_rep.verdict:
        try:
            found = certificate_oracle_search(sub_tp, sub_defects, grid=grid, mode="relaxed", tol=tol)
        except Unsupported:
            found = None
        if found is not None:
            relaxed_rep = check_conditions(sub_tp, sub_defects, found, mode="relaxed", tol=tol)

    adj_candidates: list[AdjointCertificate] = []
    if adjoint_cert is not None and whole:
        adj_candidates.append(adjoint_cert)
    adj_candidates.append(adjoint_transfer(sub_tp, sub_defects, sub_pairs, tol))
    adj_rep = None
    chosen = None
    for cand in adj_candidates:
        rep = check_adjoint_conditions(sub_tp, sub_defects, cand, mode="relaxed", tol=tol)
        if adj_rep is None or _hardy_route_ok(rep):
            adj_rep, chosen = rep, cand
        if _hardy_route_ok(rep):
            break
    if chosen is None or not _hardy_route_ok(adj_rep):
        try:
            found = certificate_oracle_search(
                sub_tp, sub_defects, grid=grid, mode="relaxed", tol=tol, adjoint=True
            )
        except Unsupported:
            found = None
        if found is not None:
            rep = check_adjoint_conditions(sub_tp, sub_defects, found, mode="relaxed", tol=tol)
            if _hardy_route_ok(rep):
                adj_rep, chosen = rep, found

    if chosen is None or not _hardy_route_ok(adj_rep):
        return PipelineReport(
            mode="failed",
            dim=tp.dim,
            defect_rank=defects.rank,
            defect_rank_star=defects.rank_star,
            full_report=full_rep,
            adjoint_report=None,
            relaxed_report=relaxed_rep,
            adjoint_relaxed_report=adj_rep,
            dilation_report=None,
            telescoping_residual=None,
            split=split,
            unitary_part_residual=reduction,
            failure=failure
            + "; relaxed route undetermined (no adjoint-side certificate found)",
        )

    witness = is_c0(sub_tp.T, horizon=N, tol=tol)
    if not witness:
        return PipelineReport(
            mode="failed",
            dim=tp.dim,
            defect_rank=defects.rank,
            defect_rank_star=defects.rank_star,
            full_report=full_rep,
            adjoint_report=None,
            relaxed_report=relaxed_rep,
            adjoint_relaxed_report=adj_rep,
            dilation_report=None,
            telescoping_residual=None,
            split=split,
            unitary_part_residual=reduction,
            failure=failure + "; c.n.u. part is not power-decaying (unexpected)",
        )

    dilation = pure_dilation(sub_tp, sub_defects, chosen, N, space="l2", tol=tol)
    report = verify_dilation(sub_tp, dilation, maxdeg=maxdeg, tol=tol)
    unitary_resid = reduction
    for t in tp.T_list:
        if split.dim_unitary:
            b1 = split.basis_unitary
            unitary_resid = max(unitary_resid, is_unitary(adj(b1) @ t @ b1))
    return PipelineReport(
        mode="relaxed",
        dim=tp.dim,
        defect_rank=defects.rank,
        defect_rank_star=defects.rank_star,
        full_report=full_rep,
        adjoint_report=None,
        relaxed_report=relaxed_rep,
        adjoint_relaxed_report=adj_rep,
        dilation_report=report,
        telescoping_residual=None,
        split=split,
        unitary_part_residual=unitary_resid,
        failure=failure,
    )


def _hardy_route_ok(report: ConditionReport | None) -> bool:
    """Conditions (1')-(3') gate the coefficient-space route."""
    if report is None or not report.certificate_valid:
        return False
    return all(report.condition_passes(k) for k in (1, 2, 3))


def _describe_failure(report: ConditionReport, mode: str) -> str:
    k = report.worst_failure
    if k is None:
        return f"{mode} mode passed"
    if k == 0:
        return f"{mode}-mode certificate algebra invalid (residual {report.certificate_residual:.3e})"
    return f"{mode} mode stops at condition ({k}) with residual {report.residuals[k - 1]:.3e}"
