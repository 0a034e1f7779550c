"""Dense complex-matrix kernel shared by every other module.

Hermitian square roots, orthonormal range bases, structural residuals
(contraction / unitary / projection / commutator) and the
Douglas-Muhly-Pearcy block completion.  Everything is a pure function on
plain ``numpy`` arrays; results are always freshly allocated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "DilationError",
    "ShapeMismatch",
    "NotHermitian",
    "NotPSD",
    "NotContraction",
    "NotCommuting",
    "NotUnitary",
    "NotProjection",
    "NotC0",
    "NotPureShift",
    "InvalidCertificate",
    "SingularResolvent",
    "DegreeExceedsTruncation",
    "BadParams",
    "Unsupported",
    "as_matrix",
    "adj",
    "opnorm",
    "fronorm",
    "psd_sqrt",
    "orthonormal_range_basis",
    "dmp_completion",
    "is_contraction",
    "is_unitary",
    "is_projection",
    "commutator_norm",
    "random_unitary",
    "random_projection",
    "random_contraction",
]


class DilationError(Exception):
    """Base class for all structured failures raised by this package."""


class ShapeMismatch(DilationError):
    pass


class NotHermitian(DilationError):
    pass


class NotPSD(DilationError):
    pass


class NotContraction(DilationError):
    pass


class NotCommuting(DilationError):
    pass


class NotUnitary(DilationError):
    pass


class NotProjection(DilationError):
    pass


class NotC0(DilationError):
    pass


class NotPureShift(DilationError):
    pass


class InvalidCertificate(DilationError):
    pass


class SingularResolvent(DilationError):
    pass


class DegreeExceedsTruncation(DilationError):
    pass


class BadParams(DilationError):
    pass


class Unsupported(DilationError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Relative thresholds used throughout.

    ``rank_tol`` truncates singular values (range bases, numerical kernels),
    ``check_tol`` accepts residuals of operator identities.  Both are
    relative to the largest singular value / Frobenius scale of the data.
    """

    rank_tol: float = 1e-10
    check_tol: float = 1e-8

    def __post_init__(self) -> None:
        if not (0.0 < self.rank_tol < self.check_tol < 1.0):
            raise ValueError("tolerances must satisfy 0 < rank_tol < check_tol < 1")


DEFAULT_TOL = Tolerances()


def as_matrix(a) -> np.ndarray:
    """Coerce input to a fresh 2-d complex array with finite entries."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d array, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def adj(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def opnorm(a: np.ndarray) -> float:
    """Spectral norm; zero-size matrices have norm 0."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def fronorm(a: np.ndarray) -> float:
    """Frobenius norm; zero-size matrices have norm 0."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a))


def _require_square(a: np.ndarray, what: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{what} must be square, got shape {a.shape}")


def psd_sqrt(a, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in ``[-check_tol * ||a||, 0)`` are clamped to zero; anything
    more negative raises :class:`NotPSD`.  Eigenvalues below
    ``rank_tol * ||a||`` are clamped too, so that the square root does not
    amplify rounding noise into spurious range directions; ``scale`` raises
    that reference level (defect computations pass 1.0).
    """
    m = as_matrix(a)
    _require_square(m)
    if m.shape[0] == 0:
        return m
    top = opnorm(m)
    if opnorm(m - adj(m)) > tol.check_tol * max(top, 1.0):
        raise NotHermitian("matrix is not Hermitian to tolerance")
    herm = (m + adj(m)) / 2.0
    w, v = np.linalg.eigh(herm)
    if w.min() < -tol.check_tol * max(top, 1.0):
        raise NotPSD(f"eigenvalue {w.min():.3e} below PSD tolerance")
    reference = top if scale is None else max(top, scale)
    w[w < tol.rank_tol * reference] = 0.0
    s = (v * np.sqrt(w)) @ adj(v)
    return (s + adj(s)) / 2.0


def orthonormal_range_basis(a, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the column span of ``a``.

    Keeps singular directions with sigma > rank_tol * sigma_max.  The zero
    matrix yields a basis with zero columns.  ``scale`` raises the
    reference level above sigma_max; defect matrices of contractions pass
    1.0 so that a pure-noise difference of order-one operators has empty
    range instead of a basis of rounding junk.
    """
    m = as_matrix(a)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    reference = s[0] if scale is None else max(s[0], scale)
    rank = int(np.count_nonzero(s > tol.rank_tol * reference))
    return u[:, :rank].copy()


def is_contraction(a) -> float:
    """Residual max(0, sigma_max - 1); zero means contraction."""
    m = as_matrix(a)
    return max(0.0, opnorm(m) - 1.0)


def is_unitary(a) -> float:
    """Residual ||A*A - I||_F + ||AA* - I||_F for a square matrix."""
    m = as_matrix(a)
    _require_square(m)
    eye = np.eye(m.shape[0], dtype=complex)
    return fronorm(adj(m) @ m - eye) + fronorm(m @ adj(m) - eye)


def is_projection(a) -> float:
    """Residual ||A^2 - A||_F + ||A - A*||_F for a square matrix."""
    m = as_matrix(a)
    _require_square(m)
    return fronorm(m @ m - m) + fronorm(m - adj(m))


def commutator_norm(a, b) -> float:
    """||AB - BA||_F for square matrices of equal size."""
    ma, mb = as_matrix(a), as_matrix(b)
    _require_square(ma)
    _require_square(mb)
    if ma.shape != mb.shape:
        raise ShapeMismatch(f"incompatible shapes {ma.shape} and {mb.shape}")
    return fronorm(ma @ mb - mb @ ma)


def _solve_restricted(defect: np.ndarray, basis: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve defect @ X @ defect = rhs for X on the range of ``defect``.

    ``basis`` holds orthonormal columns spanning that range; the result is
    returned in those coordinates (r x r).
    """
    if basis.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    dc = adj(basis) @ defect @ basis
    rc = adj(basis) @ rhs @ basis
    x = np.linalg.solve(dc, rc)
    return np.linalg.solve(dc.T, x.T).T


def dmp_completion(t1, t2, x, tol: Tolerances = DEFAULT_TOL):
    """Contraction C with x = D_{t1*} C D_{t2}, if the block matrix
    [[t1, x], [0, t2]] is a contraction; None otherwise.

    Solved by restricted least squares on the two defect ranges; presence is
    decided by the round-trip residual together with ||C|| <= 1 + check_tol.
    """
    m1, m2, mx = as_matrix(t1), as_matrix(t2), as_matrix(x)
    _require_square(m1, "t1")
    _require_square(m2, "t2")
    if mx.shape != (m1.shape[0], m2.shape[0]):
        raise ShapeMismatch(f"x must map the domain of t2 into that of t1, got {mx.shape}")
    if is_contraction(m1) > tol.check_tol or is_contraction(m2) > tol.check_tol:
        raise NotContraction("t1 and t2 must be contractions")
    d1_sq = np.eye(m1.shape[0]) - m1 @ adj(m1)
    d2_sq = np.eye(m2.shape[0]) - adj(m2) @ m2
    d1 = psd_sqrt(d1_sq, tol, scale=1.0)
    d2 = psd_sqrt(d2_sq, tol, scale=1.0)
    q1 = orthonormal_range_basis(d1_sq, tol, scale=1.0)
    q2 = orthonormal_range_basis(d2_sq, tol, scale=1.0)
    if q1.shape[1] == 0 or q2.shape[1] == 0:
        c = np.zeros((m1.shape[0], m2.shape[0]), dtype=complex)
    else:
        d1c = adj(q1) @ d1 @ q1
        d2c = adj(q2) @ d2 @ q2
        xc = adj(q1) @ mx @ q2
        cc = np.linalg.solve(d1c, xc)
        cc = np.linalg.solve(d2c.T, cc.T).T
        c = q1 @ cc @ adj(q2)
    roundtrip = opnorm(mx - d1 @ c @ d2)
    if roundtrip > tol.check_tol * (1.0 + opnorm(mx)):
        return None
    if opnorm(c) > 1.0 + tol.check_tol:
        return None
    return c


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR of a complex Gaussian matrix."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projection(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Random rank-``rank`` orthogonal projection on C^n."""
    u = random_unitary(n, rng)
    cols = u[:, :rank]
    return cols @ adj(cols)


def random_contraction(n: int, rng: np.random.Generator, norm: float = 0.9) -> np.ndarray:
    """Random matrix rescaled to spectral norm ``norm``."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    top = opnorm(g)
    if top == 0.0:
        return g
    return g * (norm / top)
