"""Dense complex matrix primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Everything here
is a pure function; inputs are never modified.

Two Hermitian eigensolvers are available. The default delegates to LAPACK
(``numpy.linalg.eigh``); ``method="jacobi"`` runs a cyclic complex Jacobi
iteration written here, which is slower but has no external dependency and
is used as an independent cross-check in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InternalConsistencyError,
    NotHermitianError,
    NotUnitaryError,
)

DEFAULT_TOL = 1e-8
# Eigenvalues of (W + W*)/2 closer than this are treated as one cluster.
CLUSTER_GAP = 1e-7


def as_matrix(x) -> np.ndarray:
    """Return ``x`` as a finite 2-D complex128 array."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _square(x) -> np.ndarray:
    a = as_matrix(x)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def hermitian_defect(a: np.ndarray) -> float:
    """Largest entry of ``|A - A*|``."""
    return float(np.max(np.abs(a - a.conj().T)))


def spectral_scale(a: np.ndarray) -> float:
    """``max(1, ||A||_2)``: the reference magnitude for relative tolerances."""
    return max(1.0, float(np.linalg.norm(a, 2)))


# ---------------------------------------------------------------------------
# Hermitian eigendecomposition


def jacobi_eigh(a, eps: float = 1e-15, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary, then applies the real symmetric Jacobi rotation that
    annihilates it. Returns ``(w, v)`` with ``a = v @ diag(w) @ v*``,
    eigenvalues in no particular order.
    """
    a = hermitian_part(_square(a)).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= eps * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mod = abs(apq)
                if mod <= 1e-300:
                    continue
                phase = apq / mod
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mod)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ g
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        raise InternalConsistencyError("Jacobi iteration did not converge", "jacobi_eigh")
    return np.real(np.diag(a)).copy(), v


def eig_hermitian(a, tol: float = DEFAULT_TOL, method: str = "lapack"):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : (n, n) array_like
        Hermitian up to a defect of ``tol * max(1, ||a||_2)``. The
        Hermitian part ``(a + a*) / 2`` is decomposed.
    tol : float
        Relative tolerance on the Hermitian defect.
    method : {"lapack", "jacobi"}

    Returns
    -------
    eigenvalues : (n,) ndarray
        Real, sorted in descending order.
    q : (n, n) ndarray
        Unitary; column ``j`` is the eigenvector of ``eigenvalues[j]``.
    """
    a = _square(a)
    h = hermitian_part(a)
    defect = hermitian_defect(a)
    if method == "lapack":
        w, q = np.linalg.eigh(h)
    elif method == "jacobi":
        w, q = jacobi_eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    scale = max(1.0, float(np.max(np.abs(w))))
    if defect > tol * scale:
        raise NotHermitianError(f"Hermitian defect {defect:.3e} exceeds {tol * scale:.3e}")
    order = np.argsort(-w, kind="stable")
    return w[order], q[:, order]


# ---------------------------------------------------------------------------
# Singular values, |X|, polar decomposition


def singular_values(x) -> np.ndarray:
    """Singular values of ``x`` in descending order, ``min(rows, cols)`` of them."""
    return np.linalg.svd(as_matrix(x), compute_uv=False)


def abs_matrix(x) -> np.ndarray:
    """The PSD square root ``|X| = (X* X)^{1/2}``, of size cols x cols."""
    x = as_matrix(x)
    _, s, vh = np.linalg.svd(x, full_matrices=True)
    sigma = np.zeros(x.shape[1])
    sigma[: s.size] = s
    v = vh.conj().T
    p = (v * sigma) @ vh
    return hermitian_part(p)


@dataclass(frozen=True)
class PolarFactors:
    """``x = p @ u`` for ``side == "left"``, ``x = u @ p`` for ``"right"``."""

    p: np.ndarray
    u: np.ndarray
    side: str


def polar(x, side: str = "left") -> PolarFactors:
    """Polar decomposition of a square matrix.

    Computed from a full SVD ``x = Y S Z*``: the unitary factor is ``Y Z*``,
    the positive factor is ``Y S Y*`` (left) or ``Z S Z*`` (right). When
    ``x`` is singular the unitary factor is not unique; the one returned is
    whatever completion the SVD provides.
    """
    x = _square(x)
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    y, s, zh = np.linalg.svd(x)
    u = y @ zh
    if side == "left":
        p = (y * s) @ y.conj().T
    else:
        p = (zh.conj().T * s) @ zh
    return PolarFactors(p=hermitian_part(p), u=u, side=side)


# ---------------------------------------------------------------------------
# Unitary diagonalization


@dataclass(frozen=True)
class UnitaryDiagonalization:
    """``w = x* @ diag(d) @ x`` with ``x`` unitary and ``|d_j| = 1``."""

    x: np.ndarray
    d: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.x.conj().T @ (self.d[:, None] * self.x)


def unitary_defect(w: np.ndarray) -> float:
    return float(np.max(np.abs(w.conj().T @ w - np.eye(w.shape[0]))))


def diagonalize_unitary(w, tol: float = DEFAULT_TOL) -> UnitaryDiagonalization:
    """Unitarily diagonalize a unitary matrix.

    ``H = (W + W*)/2`` and ``K = (W - W*)/(2i)`` are commuting Hermitian
    matrices with ``W = H + iK``. An eigenbasis of ``H`` is refined inside
    each cluster of nearly equal eigenvalues by diagonalizing the
    compression of ``K`` to that cluster, which separates conjugate pairs
    ``exp(+-i theta)`` sharing the real part ``cos(theta)``.
    """
    w = _square(w)
    n = w.shape[0]
    defect = unitary_defect(w)
    if defect > tol:
        raise NotUnitaryError(f"W*W - I has entry {defect:.3e} > {tol:.3e}")
    h = hermitian_part(w)
    k = (w - w.conj().T) / 2j
    k = hermitian_part(k)
    evals, q = np.linalg.eigh(h)
    q = q.copy()
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and evals[stop] - evals[stop - 1] < CLUSTER_GAP:
            stop += 1
        if stop - start > 1:
            qc = q[:, start:stop]
            _, y = np.linalg.eigh(hermitian_part(qc.conj().T @ k @ qc))
            q[:, start:stop] = qc @ y
        start = stop
    d = np.einsum("ij,ik,kj->j", q.conj(), w, q)
    d = d / np.abs(d)
    result = UnitaryDiagonalization(x=q.conj().T, d=d)
    residual = float(np.max(np.abs(result.reconstruct() - w)))
    if residual > 1e-9 * n:
        raise InternalConsistencyError(
            f"reconstruction residual {residual:.3e}", "diagonalize_unitary"
        )
    return result


# ---------------------------------------------------------------------------
# PSD certification


@dataclass(frozen=True)
class PsdVerdict:
    """Outcome of :func:`is_psd`.

    ``tolerance_used`` is absolute: ``tol * max(1, ||A||_2)``. Both the
    eigenvalue floor and the Hermitian defect are compared against it.
    """

    is_psd: bool
    min_eigenvalue: float
    hermitian_defect: float
    tolerance_used: float

    def __bool__(self):
        return self.is_psd


def is_psd(a, tol: float = DEFAULT_TOL) -> PsdVerdict:
    a = _square(a)
    defect = hermitian_defect(a)
    w = np.linalg.eigvalsh(hermitian_part(a))
    scale = max(1.0, float(np.max(np.abs(w))))
    tol_abs = tol * scale
    min_eig = float(w[0])
    return PsdVerdict(
        is_psd=bool(min_eig >= -tol_abs and defect <= tol_abs),
        min_eigenvalue=min_eig,
        hermitian_defect=defect,
        tolerance_used=tol_abs,
    )


def zero_pad(x, rows: int, cols: int) -> np.ndarray:
    """Embed ``x`` in the top-left corner of a ``rows x cols`` zero matrix."""
    x = as_matrix(x)
    if rows < x.shape[0] or cols < x.shape[1]:
        raise DimensionError(f"cannot pad {x.shape} down to {(rows, cols)}")
    out = np.zeros((rows, cols), dtype=np.complex128)
    out[: x.shape[0], : x.shape[1]] = x
    return out
