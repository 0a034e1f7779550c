"""Truncated banded block operators on labelled block decompositions.

A :class:`TruncatedBlockOperator` stores a dense matrix together with the
list of block labels and their dimensions.  Labels are integers in reading
order; layouts differ in which ends of the label range are truncations of
an infinite operator:

* ``iso``  -- H at label 0 plus N defect copies at 1..N (right-truncated),
* ``uni``  -- N defect copies at -N..-1, H at 0, N star copies at 1..N
  (truncated at both ends),
* ``h2``   -- N fiber copies at 0..N-1 (right-truncated),
* ``l2``   -- 2N+1 fiber copies at -N..N (truncated at both ends).

Verification restricts to interior blocks, i.e. blocks at a prescribed
distance from every truncated end; stored boundary blocks are as-built and
agree with the infinite operator, truncation only omits blocks outside.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ShapeMismatch, opnorm

__all__ = [
    "TruncatedBlockOperator",
    "BlockBuilder",
    "DilationTuple",
    "interior_norm",
]

_TRUNCATED_ENDS = {
    "iso": (False, True),
    "uni": (True, True),
    "h2": (False, True),
    "l2": (True, True),
}


@dataclass(frozen=True)
class TruncatedBlockOperator:
    """Banded block matrix over labelled blocks, stored dense."""

    layout: str
    N: int
    labels: tuple[int, ...]
    dims: tuple[int, ...]
    data: np.ndarray
    bandwidth: int = 1

    def __post_init__(self) -> None:
        if self.layout not in _TRUNCATED_ENDS:
            raise ValueError(f"unknown layout {self.layout!r}")
        if len(self.labels) != len(self.dims):
            raise ShapeMismatch("labels and dims must align")
        total = sum(self.dims)
        if self.data.shape != (total, total):
            raise ShapeMismatch(f"data must be {total}x{total}, got {self.data.shape}")

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def _starts(self) -> dict[int, tuple[int, int]]:
        spans = {}
        pos = 0
        for label, dim in zip(self.labels, self.dims):
            spans[label] = (pos, pos + dim)
            pos += dim
        return spans

    def label_slice(self, label: int) -> slice:
        lo, hi = self._starts()[label]
        return slice(lo, hi)

    def block(self, row_label: int, col_label: int) -> np.ndarray:
        return self.data[self.label_slice(row_label), self.label_slice(col_label)]

    @property
    def truncated_ends(self) -> tuple[bool, bool]:
        return _TRUNCATED_ENDS[self.layout]

    def interior_labels(self, margin: int) -> list[int]:
        low, high = self.truncated_ends
        lo, hi = self.labels[0], self.labels[-1]
        out = []
        for label in self.labels:
            if low and label - lo < margin:
                continue
            if high and hi - label < margin:
                continue
            out.append(label)
        return out

    def indices_for(self, labels) -> np.ndarray:
        spans = self._starts()
        idx = []
        for label in labels:
            lo, hi = spans[label]
            idx.extend(range(lo, hi))
        return np.asarray(idx, dtype=int)

    def restrict(self, matrix: np.ndarray, margin: int) -> np.ndarray:
        """Submatrix of ``matrix`` (aligned with this layout) on interior
        rows and columns at the given margin."""
        idx = self.indices_for(self.interior_labels(margin))
        if idx.size == 0:
            return np.zeros((0, 0), dtype=complex)
        return matrix[np.ix_(idx, idx)]

    def like(self, data: np.ndarray) -> "TruncatedBlockOperator":
        """Same layout, new payload."""
        return TruncatedBlockOperator(
            layout=self.layout,
            N=self.N,
            labels=self.labels,
            dims=self.dims,
            data=data,
            bandwidth=self.bandwidth,
        )


class BlockBuilder:
    """Mutable assembler for a :class:`TruncatedBlockOperator`."""

    def __init__(self, layout: str, N: int, labels, dims) -> None:
        self.layout = layout
        self.N = N
        self.labels = tuple(labels)
        self.dims = tuple(dims)
        total = sum(self.dims)
        self.data = np.zeros((total, total), dtype=complex)
        self._spans = {}
        pos = 0
        for label, dim in zip(self.labels, self.dims):
            self._spans[label] = slice(pos, pos + dim)
            pos += dim

    def set(self, row_label: int, col_label: int, block) -> None:
        b = np.asarray(block, dtype=complex)
        rs, cs = self._spans[row_label], self._spans[col_label]
        want = (rs.stop - rs.start, cs.stop - cs.start)
        if b.shape != want:
            raise ShapeMismatch(f"block ({row_label},{col_label}) must be {want}, got {b.shape}")
        self.data[rs, cs] = b

    def done(self, bandwidth: int = 1) -> TruncatedBlockOperator:
        return TruncatedBlockOperator(
            layout=self.layout,
            N=self.N,
            labels=self.labels,
            dims=self.dims,
            data=self.data,
            bandwidth=bandwidth,
        )


def interior_norm(op: TruncatedBlockOperator, matrix: np.ndarray, margin: int) -> float:
    """Spectral norm of ``matrix`` restricted to interior blocks."""
    return opnorm(op.restrict(matrix, margin))


@dataclass(frozen=True)
class DilationTuple:
    """A tuple of block operators with its ordered product and partials.

    ``partial_products[k]`` is the matrix product of the first k+1
    operators; the context fields remember what the tuple was built from so
    that downstream checks can rebuild structural targets.
    """

    ops: tuple[TruncatedBlockOperator, ...]
    product: TruncatedBlockOperator
    partial_products: tuple[np.ndarray, ...]
    tp: object = None
    defects: object = None
    cert: object = None
    adjoint_cert: object = None
    embedding: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def layout(self) -> str:
        return self.product.layout

    @property
    def N(self) -> int:
        return self.product.N


def chain_products(mats) -> list[np.ndarray]:
    out = []
    acc = None
    for m in mats:
        acc = m.copy() if acc is None else acc @ m
        out.append(acc)
    return out
