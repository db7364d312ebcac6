"""Certified PSD block matrices whose norm compression is not PSD.

Every generator verifies its own output before returning: the block matrix
passes :func:`~blocknorm.linalg.is_psd` and its compression fails it with a
negative eigenvalue below the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compression import (
    NormCompression,
    PartitionedMatrix,
    abs_entries,
    compress,
    from_blocks,
    pad_blocks,
)
from .errors import InternalConsistencyError, NotFoundError, ParameterError
from .linalg import DEFAULT_TOL, as_matrix, is_psd
from .norms import UINorm, condition_b, eval_norm, largest_flat_prefix, normalize

DEFAULT_THOMPSON_SEED = 20140701


@dataclass(frozen=True)
class CounterexampleReport:
    kind: str
    pm: PartitionedMatrix
    norm: UINorm
    compression: NormCompression
    witness: float
    construction_params: dict = field(default_factory=dict)


def det3(m) -> float:
    """Cofactor expansion of a real 3x3 determinant along the first row."""
    (a, b, c), (d, e, f), (g, h, i) = np.asarray(m, dtype=float)
    return float(a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g))


def _certify(kind, pm, norm, params, witness_fn, tol):
    compression = compress(pm, norm, tol)
    if compression.verdict.is_psd:
        raise InternalConsistencyError(
            f"compression is PSD (min eigenvalue {compression.verdict.min_eigenvalue:.3e})", kind
        )
    return CounterexampleReport(
        kind=kind,
        pm=pm,
        norm=norm,
        compression=compression,
        witness=witness_fn(compression.values),
        construction_params=params,
    )


def schatten_example(p: float, tol: float = DEFAULT_TOL) -> CounterexampleReport:
    """The 4x4 matrix ``[[I_2, I_2], [I_2, I_2]]`` split as sizes (1, 1, 2).

    Its Schatten-p compression is ``[[1, 0, 1], [0, 1, 1], [1, 1, 2^(1/p)]]``
    with determinant ``2^(1/p) - 2``, negative for every ``p > 1``.
    """
    if not p > 1:
        raise ParameterError(f"need p > 1 for a counterexample, got {p}")
    pm = PartitionedMatrix(schatten_example_matrix(), (1, 1, 2))
    norm = UINorm.schatten(p, 2)
    report = _certify("schatten", pm, norm, {"p": float(p)}, det3, tol)
    corner = 1.0 if p == math.inf else 2.0 ** (1.0 / p)
    expected = np.array([[1, 0, 1], [0, 1, 1], [1, 1, corner]], dtype=float)
    if np.max(np.abs(report.compression.values - expected)) > 1e-12:
        raise InternalConsistencyError("compression differs from closed form", "schatten")
    return report


def schatten_example_matrix() -> np.ndarray:
    i2 = np.eye(2)
    return np.block([[i2, i2], [i2, i2]]).astype(np.complex128)


def thm2_necessity(
    norm: UINorm, n1: int, n2: int, n: int, tol: float = DEFAULT_TOL
) -> CounterexampleReport:
    """Counterexample for block sizes ``(n1, n2, n)`` when the norm is not flat at ``k``.

    With ``s`` the largest flat prefix, ``k = min(n1 + n2, n)`` and
    ``s < k``, pick ``n~1 = min(n1, s)``, ``n~2 = s + 1 - n~1`` and
    ``n~ = s + 1``. The PSD matrix with identity diagonal blocks,
    ``A_12 = 0``, ``A_13 = [I 0]`` and ``A_23 = [0 I]`` compresses to

        [[n~1, 0,   n~1    ],
         [0,   n~2, n~2    ],
         [n~1, n~2, s+delta]]

    where ``||I_{n~}|| = s + delta``, whose determinant is
    ``n~1 n~2 (delta - 1) < 0``. Blocks are then padded to the requested
    sizes. The norm is normalized to ``||E_11|| = 1`` first.
    """
    if not (1 <= n1 <= n2 <= n):
        raise ParameterError(f"need 1 <= n1 <= n2 <= n, got {(n1, n2, n)}")
    if norm.ambient_dim < n:
        raise ParameterError(f"norm on M_{norm.ambient_dim} cannot measure {n}x{n} blocks")
    norm = normalize(norm)
    k = min(n1 + n2, n)
    if condition_b(norm, k).holds:
        raise ParameterError(f"norm {norm} is flat at k={k}; no counterexample exists")
    s = largest_flat_prefix(norm)
    if s >= k:
        raise InternalConsistencyError(f"largest flat prefix {s} is not below k={k}", "thm2")
    t1 = min(n1, s)
    t2 = s + 1 - t1
    if t2 > min(n2, s):
        raise InternalConsistencyError(f"n~2 = {t2} exceeds min(n2, s) = {min(n2, s)}", "thm2")
    t = s + 1
    delta = eval_norm(norm, np.eye(t)) - s
    if not (-tol <= delta < 1):
        raise InternalConsistencyError(f"delta = {delta} outside [0, 1)", "thm2")
    delta = max(delta, 0.0)

    a13 = np.hstack([np.eye(t1), np.zeros((t1, t2))])
    a23 = np.hstack([np.zeros((t2, t1)), np.eye(t2)])
    small = from_blocks(
        [
            [np.eye(t1), np.zeros((t1, t2)), a13],
            [np.zeros((t2, t1)), np.eye(t2), a23],
            [a13.T, a23.T, np.eye(t)],
        ]
    )
    pm = pad_blocks(small, (n1, n2, n))
    params = {"n1": n1, "n2": n2, "n": n, "k": k, "s": s, "n1_tilde": t1, "n2_tilde": t2,
              "n_tilde": t, "delta": float(delta)}
    report = _certify("thm2", pm, norm, params, det3, tol)

    expected = np.array([[t1, 0, t1], [0, t2, t2], [t1, t2, s + delta]], dtype=float)
    gap = float(np.max(np.abs(report.compression.values - expected)))
    if gap > 1e-9 * max(1, n):
        raise InternalConsistencyError(f"compression differs from closed form by {gap:.3e}", "thm2")
    closed = t1 * t2 * (delta - 1)
    if abs(report.witness - closed) > 1e-9 * max(1.0, abs(closed)):
        raise InternalConsistencyError("determinant differs from n~1 n~2 (delta - 1)", "thm2")
    return report


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def thompson_search(
    trials: int = 1_000_000, seed: int = DEFAULT_THOMPSON_SEED, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Find a real 4x4 PSD ``B`` whose entrywise modulus is not PSD.

    Trial ``i`` draws ``B = R R^T`` for a 4x3 standard normal ``R`` from a
    generator seeded by ``(seed, i)``; the lowest hit index wins, so the
    result depends on ``seed`` only.

    Raises
    ------
    NotFoundError
        If no trial qualifies.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    for trial in range(trials):
        r = _trial_rng(seed, trial).standard_normal((4, 3))
        b = r @ r.T
        if is_psd(b, tol).is_psd and not is_psd(abs_entries(b), tol).is_psd:
            return b
    raise NotFoundError(f"no qualifying matrix in {trials} trials (seed {seed})")


def m4_block_lift(b, block_dim: int, norm: UINorm, tol: float = DEFAULT_TOL) -> CounterexampleReport:
    """Blow a scalar PSD ``B`` up to ``m`` blocks ``b_ij E_11`` of size ``block_dim``.

    The compression is ``||E_11|| * (|b_ij|)``, not PSD by the choice of ``B``.
    """
    b = as_matrix(b)
    m = b.shape[0]
    if b.shape != (m, m) or m < 4:
        raise ParameterError(f"need a square matrix with m >= 4, got shape {b.shape}")
    if block_dim < 1 or block_dim > norm.ambient_dim:
        raise ParameterError(f"block_dim must lie in [1, {norm.ambient_dim}], got {block_dim}")
    if not is_psd(b, tol).is_psd:
        raise ParameterError("B is not PSD")
    b_abs = abs_entries(b)
    if is_psd(b_abs, tol).is_psd:
        raise ParameterError("entrywise modulus of B is PSD; the lift gives no counterexample")
    a = np.zeros((m * block_dim, m * block_dim), dtype=np.complex128)
    a[::block_dim, ::block_dim] = b
    pm = PartitionedMatrix(a, (block_dim,) * m)
    gamma = eval_norm(norm, np.eye(1))
    report = _certify(
        "m4",
        pm,
        norm,
        {"m": m, "block_dim": block_dim, "gamma": gamma},
        lambda values: is_psd(values, tol).min_eigenvalue,
        tol,
    )
    gap = float(np.max(np.abs(report.compression.values - gamma * b_abs)))
    if gap > 1e-9 * max(1.0, gamma * float(np.max(b_abs))):
        raise InternalConsistencyError(f"compression differs from gamma |B| by {gap:.3e}", "m4")
    return report
