"""Command-line front end.

Exit codes: 0 when the mathematical check passes, 2 when it fails, 1 on
malfunction (unreadable input, bad flags), so shell pipelines can branch
on outcome versus error.  The environment variable ``DILATION_TOL``
overrides the residual acceptance tolerance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .certificates import (
    adjoint_transfer,
    assemble_certificate,
    certificate_oracle_search,
    check_conditions,
    fundamental_pairs,
    make_adjoint_certificate,
    make_certificate,
)
from .core import DEFAULT_TOL, DilationError, InvalidCertificate, NotC0, Tolerances, Unsupported
from .defects import canonical_decomposition, defect_data
from .generators import generate_instance
from .hardy import characteristic_sample, pure_dilation
from .jsonio import ParseError, TupleDocument, matrix_to_json
from .schaffer import build_isometric, build_unitary
from .verify import full_pipeline

PASS, FAIL, ERROR = 0, 2, 1


def _tolerances() -> Tolerances:
    override = os.environ.get("DILATION_TOL")
    if not override:
        return DEFAULT_TOL
    check = float(override)
    rank = min(DEFAULT_TOL.rank_tol, check / 100.0)
    return Tolerances(rank_tol=rank, check_tol=check)


def _setting(doc: TupleDocument, args, key: str, default):
    if getattr(args, key, None) is not None:
        return getattr(args, key)
    if key in doc.settings:
        return type(default)(doc.settings[key])
    return default


def _doc_certificates(doc: TupleDocument):
    cert = None
    if doc.certificate is not None:
        cert = make_certificate(doc.certificate[0], doc.certificate[1], source="supplied")
    adj_cert = None
    if doc.adjoint_certificate is not None:
        adj_cert = make_adjoint_certificate(
            doc.adjoint_certificate[0], doc.adjoint_certificate[1], source="supplied"
        )
    return cert, adj_cert


def _cmd_check(args) -> int:
    tol = _tolerances()
    doc = TupleDocument.from_path(args.file)
    tp = doc.to_tuple(tol)
    defects = defect_data(tp, tol)
    supplied, _ = _doc_certificates(doc)
    candidates = []
    if supplied is not None:
        candidates.append(supplied)
    pairs = fundamental_pairs(tp, defects, tol)
    candidates.append(assemble_certificate(pairs, tol))
    report = None
    for cand in candidates:
        report = check_conditions(tp, defects, cand, mode=args.mode, tol=tol)
        if report.verdict:
            break
    if not report.verdict and args.mode == "relaxed":
        try:
            found = certificate_oracle_search(tp, defects, grid=args.grid, mode="relaxed", tol=tol)
        except Unsupported:
            found = None
        if found is not None:
            report = check_conditions(tp, defects, found, mode="relaxed", tol=tol)
    if args.json:
        payload = {
            "mode": report.mode,
            "residuals": list(report.residuals),
            "certificate_valid": report.certificate_valid,
            "certificate_residual": report.certificate_residual,
            "threshold": report.threshold,
            "verdict": report.verdict,
        }
        print(json.dumps(payload, indent=2))
    else:
        for line in report.lines():
            print(line)
    return PASS if report.verdict else FAIL


def _cmd_verify(args) -> int:
    tol = _tolerances()
    doc = TupleDocument.from_path(args.file)
    tp = doc.to_tuple(tol)
    cert, adj_cert = _doc_certificates(doc)
    N = _setting(doc, args, "N", 16)
    maxdeg = _setting(doc, args, "maxdeg", 8)
    grid = _setting(doc, args, "grid", 64)
    report = full_pipeline(tp, N=N, maxdeg=maxdeg, tol=tol, cert=cert, adjoint_cert=adj_cert, grid=grid)
    if args.json:
        payload = {
            "mode": report.mode,
            "verdict": report.verdict,
            "defect_rank": report.defect_rank,
            "defect_rank_star": report.defect_rank_star,
            "full_residuals": list(report.full_report.residuals),
            "failure": report.failure,
        }
        if report.dilation_report is not None:
            payload["max_compression_residual"] = report.dilation_report.max_compression_residual
            payload["minimality_defect"] = report.dilation_report.minimality_defect
        if report.telescoping_residual is not None:
            payload["telescoping_residual"] = report.telescoping_residual
        print(json.dumps(payload, indent=2))
    else:
        for line in report.lines():
            print(line)
    return PASS if report.verdict else FAIL


def _cmd_dilate(args) -> int:
    tol = _tolerances()
    doc = TupleDocument.from_path(args.file)
    tp = doc.to_tuple(tol)
    defects = defect_data(tp, tol)
    cert, adj_cert = _doc_certificates(doc)
    N = _setting(doc, args, "N", 16)
    pairs = fundamental_pairs(tp, defects, tol)
    if cert is None:
        cert = assemble_certificate(pairs, tol)
    if adj_cert is None:
        adj_cert = adjoint_transfer(tp, defects, pairs, tol)
    if args.kind == "isometric":
        dilation = build_isometric(tp, defects, cert, N, tol)
    elif args.kind == "unitary":
        dilation = build_unitary(tp, defects, cert, adj_cert, N, tol)
    elif args.kind == "hardy-h2":
        dilation = pure_dilation(tp, defects, adj_cert, N, space="h2", tol=tol)
    else:
        dilation = pure_dilation(tp, defects, adj_cert, N, space="l2", tol=tol)
    payload = {
        "kind": args.kind,
        "layout": dilation.layout,
        "N": dilation.N,
        "labels": list(dilation.product.labels),
        "dims": list(dilation.product.dims),
        "operators": [matrix_to_json(op.data) for op in dilation.ops],
        "product": matrix_to_json(dilation.product.data),
    }
    if dilation.embedding is not None:
        payload["embedding"] = matrix_to_json(dilation.embedding)
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return PASS


def _cmd_decompose(args) -> int:
    tol = _tolerances()
    doc = TupleDocument.from_path(args.file)
    tp = doc.to_tuple(tol)
    split = canonical_decomposition(tp.T, tol)
    payload = {
        "dim": tp.dim,
        "dim_unitary": split.dim_unitary,
        "dim_cnu": split.dim_cnu,
        "basis_unitary": matrix_to_json(split.basis_unitary),
        "basis_cnu": matrix_to_json(split.basis_cnu),
    }
    print(json.dumps(payload, indent=2))
    return PASS


def _cmd_theta(args) -> int:
    tol = _tolerances()
    doc = TupleDocument.from_path(args.file)
    tp = doc.to_tuple(tol)
    grid = _setting(doc, args, "grid", 64)
    sample = characteristic_sample(tp.T, grid_size=grid, tol=tol)
    payload = {
        "grid": grid,
        "max_delta_norm": sample.max_delta_norm,
        "consistency_residual": sample.consistency_residual(),
    }
    if args.json:
        payload["angles"] = list(sample.angles)
        payload["theta"] = [matrix_to_json(t) for t in sample.theta]
        payload["delta"] = [matrix_to_json(d) for d in sample.delta]
    print(json.dumps(payload, indent=2))
    return PASS


def _cmd_examples(args) -> int:
    if args.action != "run":
        print("usage: dilations examples run", file=sys.stderr)
        return ERROR
    tol = _tolerances()
    rows = []
    ok = True

    doc = generate_instance("nilpotent-pair")
    tp = doc.to_tuple(tol)
    report = full_pipeline(tp, N=8, maxdeg=4, tol=tol)
    cond4 = report.full_report.residuals[3]
    good = (not report.full_report.verdict) and cond4 >= 1e-2 and report.mode == "failed"
    ok &= good
    rows.append(("nilpotent-pair", "full-mode failure at condition (4)", good))

    doc = generate_instance("projection-triple")
    tp = doc.to_tuple(tol)
    cert, adj_cert = _doc_certificates(doc)
    report = full_pipeline(tp, N=16, maxdeg=8, tol=tol, cert=cert, adjoint_cert=adj_cert)
    good = (
        report.mode == "relaxed"
        and report.verdict
        and report.relaxed_report is not None
        and report.relaxed_report.verdict
        and abs(report.full_report.r5 - 1.0) <= 1e-8
        and report.dilation_report is not None
        and report.dilation_report.minimality_defect > 0
    )
    ok &= good
    rows.append(("projection-triple", "relaxed pass, condition (5) fails, non-minimal product", good))

    width = max(len(r[0]) for r in rows)
    for name, expectation, good in rows:
        print(f"{name:<{width}}  {'PASS' if good else 'FAIL'}  {expectation}")
    return PASS if ok else FAIL


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dilations",
        description="Certificates and minimal unitary dilations for commuting contraction tuples",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate the certificate conditions")
    p.add_argument("file")
    p.add_argument("--mode", choices=["full", "relaxed"], default="full")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("dilate", help="emit dilation blocks as JSON")
    p.add_argument("file")
    p.add_argument("--kind", choices=["isometric", "unitary", "hardy-h2", "hardy-l2"], required=True)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_dilate)

    p = sub.add_parser("verify", help="run the end-to-end pipeline")
    p.add_argument("file")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--maxdeg", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("decompose", help="canonical unitary/c.n.u. splitting")
    p.add_argument("file")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("theta", help="characteristic-function boundary sample")
    p.add_argument("file")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_theta)

    p = sub.add_parser("examples", help="run the built-in corpus")
    p.add_argument("action", choices=["run"])
    p.set_defaults(func=_cmd_examples)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    except (InvalidCertificate, NotC0) as exc:
        print(f"fail: {exc}", file=sys.stderr)
        return FAIL
    except DilationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
