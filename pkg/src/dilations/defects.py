"""Defect operators and spaces for tuples of commuting contractions.

Builds the validated tuple (factors, product, co-products), the defect
operators D and D* with orthonormal range bases, the canonical
unitary-plus-completely-nonunitary splitting, and the spectral pure/c.n.u.
classification of the product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_TOL,
    NotCommuting,
    NotContraction,
    ShapeMismatch,
    Tolerances,
    adj,
    as_matrix,
    commutator_norm,
    is_contraction,
    opnorm,
    orthonormal_range_basis,
    psd_sqrt,
)

__all__ = [
    "ContractionTuple",
    "DefectData",
    "CanonicalSplit",
    "C0Witness",
    "build_tuple",
    "defect_data",
    "canonical_decomposition",
    "is_c0",
    "is_cnu",
]


@dataclass(frozen=True)
class ContractionTuple:
    """n commuting contractions T_1..T_n with product T and co-products.

    ``Tprime_list[i]`` is the product of all factors except the i-th, taken
    in ascending index order (the order is immaterial for commuting data).
    """

    T_list: tuple[np.ndarray, ...]
    T: np.ndarray
    Tprime_list: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return len(self.T_list)

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    def adjoint(self) -> "ContractionTuple":
        """The tuple (T_1*, ..., T_n*); its product is T* up to commutators."""
        return build_tuple([adj(t) for t in self.T_list])


def _ordered_product(mats, dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    for m in mats:
        out = out @ m
    return out


def build_tuple(T_list, tol: Tolerances = DEFAULT_TOL) -> ContractionTuple:
    """Validate and assemble a :class:`ContractionTuple`.

    Rejects non-square or mismatched shapes, factors that are not
    contractions to ``check_tol``, and pairs whose commutator exceeds
    ``check_tol * dim``.
    """
    mats = [as_matrix(t) for t in T_list]
    if not mats:
        raise ShapeMismatch("need at least one matrix")
    dim = mats[0].shape[0]
    for m in mats:
        if m.shape != (dim, dim):
            raise ShapeMismatch(f"all factors must be {dim}x{dim}, got {m.shape}")
    for k, m in enumerate(mats):
        resid = is_contraction(m)
        if resid > tol.check_tol:
            raise NotContraction(f"factor {k} exceeds unit norm by {resid:.3e}")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            resid = commutator_norm(mats[i], mats[j])
            if resid > tol.check_tol * dim:
                raise NotCommuting(f"factors {i} and {j} have commutator norm {resid:.3e}")
    T = _ordered_product(mats, dim)
    primes = tuple(
        _ordered_product([m for j, m in enumerate(mats) if j != i], dim)
        for i in range(len(mats))
    )
    return ContractionTuple(T_list=tuple(mats), T=T, Tprime_list=primes)


@dataclass(frozen=True)
class DefectData:
    """Defect operators of a tuple, ambient and compressed.

    ``basis`` / ``basis_star`` carry orthonormal columns spanning the ranges
    of D and D*; certificate operators live in those coordinates.
    """

    D: np.ndarray
    D_star: np.ndarray
    basis: np.ndarray
    basis_star: np.ndarray
    D_i: tuple[np.ndarray, ...]
    D_i_prime: tuple[np.ndarray, ...]
    D_i_star: tuple[np.ndarray, ...]
    D_i_prime_star: tuple[np.ndarray, ...]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def rank_star(self) -> int:
        return self.basis_star.shape[1]

    @property
    def D_compressed(self) -> np.ndarray:
        return adj(self.basis) @ self.D @ self.basis

    @property
    def D_star_compressed(self) -> np.ndarray:
        return adj(self.basis_star) @ self.D_star @ self.basis_star

    def embed(self, m: np.ndarray) -> np.ndarray:
        """Re-embed an operator given on the D-range basis into ambient space."""
        return self.basis @ m @ adj(self.basis)

    def embed_star(self, m: np.ndarray) -> np.ndarray:
        return self.basis_star @ m @ adj(self.basis_star)


def _defect_of(m: np.ndarray, tol: Tolerances) -> np.ndarray:
    eye = np.eye(m.shape[0], dtype=complex)
    return psd_sqrt(eye - adj(m) @ m, tol, scale=1.0)


def defect_data(tp: ContractionTuple, tol: Tolerances = DEFAULT_TOL) -> DefectData:
    """All defect operators of the tuple, with range bases of D and D*.

    The bases are extracted from the squared defects (same range, but the
    rank threshold then acts on eigenvalues rather than their square
    roots, which keeps rounding noise out of the basis).
    """
    eye = np.eye(tp.dim, dtype=complex)
    D = _defect_of(tp.T, tol)
    D_star = _defect_of(adj(tp.T), tol)
    return DefectData(
        D=D,
        D_star=D_star,
        basis=orthonormal_range_basis(eye - adj(tp.T) @ tp.T, tol, scale=1.0),
        basis_star=orthonormal_range_basis(eye - tp.T @ adj(tp.T), tol, scale=1.0),
        D_i=tuple(_defect_of(t, tol) for t in tp.T_list),
        D_i_prime=tuple(_defect_of(t, tol) for t in tp.Tprime_list),
        D_i_star=tuple(_defect_of(adj(t), tol) for t in tp.T_list),
        D_i_prime_star=tuple(_defect_of(adj(t), tol) for t in tp.Tprime_list),
    )


@dataclass(frozen=True)
class CanonicalSplit:
    """Orthonormal bases of the unitary part H1 and the c.n.u. part H2."""

    basis_unitary: np.ndarray
    basis_cnu: np.ndarray

    @property
    def dim_unitary(self) -> int:
        return self.basis_unitary.shape[1]

    @property
    def dim_cnu(self) -> int:
        return self.basis_cnu.shape[1]


def canonical_decomposition(T, tol: Tolerances = DEFAULT_TOL) -> CanonicalSplit:
    """Split the space into the maximal reducing unitary part and the rest.

    H1 is the joint numerical kernel of all power defects
    I - T^{*m} T^m and I - T^m T^{*m} for m = 1..dim, obtained from one
    stacked SVD; H2 is the orthogonal complement.
    """
    m = as_matrix(T)
    d = m.shape[0]
    if d == 0:
        z = np.zeros((0, 0), dtype=complex)
        return CanonicalSplit(z, z)
    eye = np.eye(d, dtype=complex)
    blocks = []
    power = eye
    for _ in range(d):
        power = power @ m
        blocks.append(eye - adj(power) @ power)
        blocks.append(eye - power @ adj(power))
    stack = np.vstack(blocks)
    u, s, vh = np.linalg.svd(stack, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        # power defects of a contraction are order-one data; floor the
        # reference so an exactly-unitary input has a trivial kernel stack
        rank = int(np.count_nonzero(s > tol.rank_tol * max(s[0], 1.0)))
    basis_cnu = adj(vh)[:, :rank]
    basis_unitary = adj(vh)[:, rank:]
    return CanonicalSplit(basis_unitary=basis_unitary, basis_cnu=basis_cnu)


@dataclass(frozen=True)
class C0Witness:
    """Spectral verdict for T^{*m} -> 0 plus the decay of ||T^{*m}||."""

    flag: bool
    spectral_radius: float
    power_norms: tuple[float, ...] = field(repr=False)

    def __bool__(self) -> bool:
        return self.flag


def is_c0(T, horizon: int | None = None, tol: Tolerances = DEFAULT_TOL) -> C0Witness:
    """Decide spectral radius < 1 - rank_tol, with ||T^{*m}|| as a witness.

    For finite matrices this is equivalent to strong power decay of the
    adjoint, so the flag doubles as the pure/c.n.u. classification.
    """
    m = as_matrix(T)
    if m.shape[0] == 0:
        return C0Witness(True, 0.0, ())
    radius = float(np.max(np.abs(np.linalg.eigvals(m))))
    steps = horizon if horizon is not None else m.shape[0]
    norms = []
    power = np.eye(m.shape[0], dtype=complex)
    star = adj(m)
    for _ in range(max(steps, 1)):
        power = power @ star
        norms.append(opnorm(power))
    return C0Witness(radius < 1.0 - tol.rank_tol, radius, tuple(norms))


def is_cnu(T, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True when the canonical decomposition has no unitary part."""
    return canonical_decomposition(T, tol).dim_unitary == 0
