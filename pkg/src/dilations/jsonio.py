"""JSON exchange format for contraction tuples and optional certificates.

Complex entries are serialized as [re, im] pairs in row-major order; no
string-encoded numerics, so the round trip is bit-exact for finite
doubles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, DilationError, Tolerances
from .defects import ContractionTuple, build_tuple

__all__ = ["ParseError", "TupleDocument", "matrix_to_json", "matrix_from_json"]


class ParseError(DilationError):
    """Structured failure while reading a tuple document."""


def matrix_to_json(m: np.ndarray) -> dict:
    arr = np.asarray(m, dtype=complex)
    return {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in arr.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix object: {exc}") from exc
    if len(data) != rows * cols:
        raise ParseError(f"matrix data length {len(data)} != rows*cols = {rows * cols}")
    try:
        flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    return flat.reshape(rows, cols)


def _cert_to_json(cert_pair) -> dict | None:
    if cert_pair is None:
        return None
    U_list, P_list = cert_pair
    return {
        "U": [matrix_to_json(u) for u in U_list],
        "P": [matrix_to_json(p) for p in P_list],
    }


def _cert_from_json(obj, what: str):
    if obj is None:
        return None
    try:
        U = [matrix_from_json(m) for m in obj["U"]]
        P = [matrix_from_json(m) for m in obj.get("P", obj.get("Q", []))]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed {what} block: {exc}") from exc
    if len(U) != len(P):
        raise ParseError(f"{what} block must pair one projection with each unitary")
    return (U, P)


@dataclass
class TupleDocument:
    """Serializable bundle: matrices plus optional certificates and settings."""

    matrices: list[np.ndarray]
    certificate: tuple[list[np.ndarray], list[np.ndarray]] | None = None
    adjoint_certificate: tuple[list[np.ndarray], list[np.ndarray]] | None = None
    settings: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0] if self.matrices else 0

    def to_tuple(self, tol: Tolerances = DEFAULT_TOL) -> ContractionTuple:
        try:
            return build_tuple(self.matrices, tol)
        except DilationError as exc:
            raise ParseError(f"document does not define a valid tuple: {exc}") from exc

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "dim": self.dim,
            "matrices": [matrix_to_json(m) for m in self.matrices],
        }
        if self.certificate is not None:
            payload["certificate"] = _cert_to_json(self.certificate)
        if self.adjoint_certificate is not None:
            payload["adjoint_certificate"] = _cert_to_json(self.adjoint_certificate)
        if self.settings:
            payload["settings"] = self.settings
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TupleDocument":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        if not isinstance(payload, dict) or "matrices" not in payload:
            raise ParseError("document must be an object with a 'matrices' list")
        mats = [matrix_from_json(m) for m in payload["matrices"]]
        if "n" in payload and int(payload["n"]) != len(mats):
            raise ParseError("declared n does not match the number of matrices")
        if "dim" in payload and mats and int(payload["dim"]) != mats[0].shape[0]:
            raise ParseError("declared dim does not match the matrices")
        settings = payload.get("settings", {})
        if not isinstance(settings, dict):
            raise ParseError("settings must be an object")
        return cls(
            matrices=mats,
            certificate=_cert_from_json(payload.get("certificate"), "certificate"),
            adjoint_certificate=_cert_from_json(
                payload.get("adjoint_certificate"), "adjoint_certificate"
            ),
            settings=settings,
        )

    @classmethod
    def from_path(cls, path) -> "TupleDocument":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
        return cls.from_json(text)
