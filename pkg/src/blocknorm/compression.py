"""Norm compressions of partitioned PSD matrices.

For ``A = (A_ij)`` partitioned into ``m x m`` blocks and a unitarily
invariant norm, the compression is the scalar matrix ``(||A_ij||)``. This
module computes it, runs the constructive trace-norm reduction for three
blocks step by step, and decides the three-block case for general norms by
splitting off a trace-norm part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    DimensionError,
    InternalConsistencyError,
    NotPSDError,
    PartitionError,
    PreconditionError,
)
from .linalg import DEFAULT_TOL, PsdVerdict, as_matrix, is_psd
from .norms import UINorm, condition_b, eval_norm

STAGE_LABELS = ("pad", "polar12", "polar23", "diagW", "extractQ", "absQ", "assemble")


@dataclass(frozen=True)
class PartitionedMatrix:
    """A square matrix with diagonal block sizes ``sizes``."""

    a: np.ndarray
    sizes: tuple[int, ...]

    def __post_init__(self):
        a = as_matrix(self.a).copy()
        sizes = tuple(int(s) for s in self.sizes)
        if a.shape[0] != a.shape[1]:
            raise DimensionError(f"partitioned matrix must be square, got {a.shape}")
        if not sizes or any(s < 1 for s in sizes):
            raise PartitionError(f"block sizes must be positive, got {sizes}")
        if sum(sizes) != a.shape[0]:
            raise PartitionError(f"block sizes {sizes} do not sum to {a.shape[0]}")
        a.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "sizes", sizes)

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(t) for t in np.concatenate([[0], np.cumsum(self.sizes)]))

    def block(self, i: int, j: int) -> np.ndarray:
        o = self.offsets
        return self.a[o[i] : o[i + 1], o[j] : o[j + 1]]

    def blocks(self):
        return [[self.block(i, j) for j in range(self.m)] for i in range(self.m)]

    def permuted(self, order) -> "PartitionedMatrix":
        """Block permutation: new block ``(i, j)`` is old block ``(order[i], order[j])``."""
        idx = np.concatenate([np.arange(self.offsets[b], self.offsets[b + 1]) for b in order])
        return PartitionedMatrix(self.a[np.ix_(idx, idx)], tuple(self.sizes[b] for b in order))


def from_blocks(blocks) -> PartitionedMatrix:
    sizes = tuple(np.asarray(row[0]).shape[0] for row in blocks)
    return PartitionedMatrix(np.block([[np.asarray(b, dtype=complex) for b in row] for row in blocks]), sizes)


def pad_blocks(pm: PartitionedMatrix, sizes) -> PartitionedMatrix:
    """Grow every diagonal block to the given size by inserting zero rows/columns.

    Block ``i`` keeps its original entries in its top-left corner. The map
    is ``A -> P* A P`` for a coisometry ``P``, so positivity is preserved.
    """
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != pm.m or any(new < old for new, old in zip(sizes, pm.sizes)):
        raise DimensionError(f"cannot pad block sizes {pm.sizes} to {sizes}")
    new_off = np.concatenate([[0], np.cumsum(sizes)])
    idx = np.concatenate([new_off[b] + np.arange(pm.sizes[b]) for b in range(pm.m)])
    out = np.zeros((sum(sizes), sum(sizes)), dtype=np.complex128)
    out[np.ix_(idx, idx)] = pm.a
    return PartitionedMatrix(out, sizes)


def require_psd(pm: PartitionedMatrix, tol: float) -> PsdVerdict:
    verdict = is_psd(pm.a, tol)
    if not verdict.is_psd:
        raise NotPSDError(
            f"input is not PSD: min eigenvalue {verdict.min_eigenvalue:.6g}, "
            f"Hermitian defect {verdict.hermitian_defect:.3g}",
            verdict.min_eigenvalue,
        )
    return verdict


# ---------------------------------------------------------------------------
# Compression


@dataclass(frozen=True)
class NormCompression:
    values: np.ndarray
    verdict: PsdVerdict
    norm_used: UINorm


def compression_values(pm: PartitionedMatrix, norm: UINorm) -> np.ndarray:
    if max(pm.sizes) > norm.ambient_dim:
        raise DimensionError(
            f"norm on M_{norm.ambient_dim} cannot measure blocks of size {max(pm.sizes)}"
        )
    m = pm.m
    values = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            values[i, j] = values[j, i] = eval_norm(norm, pm.block(i, j))
    return values


def compression_values_batch(stack, sizes, norm: UINorm) -> np.ndarray:
    """``compression_values`` over a ``(T, N, N)`` stack sharing one partition."""
    stack = np.asarray(stack, dtype=np.complex128)
    sizes = tuple(int(s) for s in sizes)
    if max(sizes) > norm.ambient_dim:
        raise DimensionError(
            f"norm on M_{norm.ambient_dim} cannot measure blocks of size {max(sizes)}"
        )
    off = np.concatenate([[0], np.cumsum(sizes)])
    m = len(sizes)
    out = np.zeros((stack.shape[0], m, m))
    for i in range(m):
        for j in range(i, m):
            blk = stack[:, off[i] : off[i + 1], off[j] : off[j + 1]]
            sv = np.zeros((stack.shape[0], norm.ambient_dim))
            sv[:, : min(sizes[i], sizes[j])] = np.linalg.svd(blk, compute_uv=False)
            out[:, i, j] = out[:, j, i] = norm.from_singular_values(sv)
    return out


def compress(pm: PartitionedMatrix, norm: UINorm, tol: float = DEFAULT_TOL) -> NormCompression:
    """Compute ``(||A_ij||)`` and certify whether it is PSD.

    Each value is taken from the upper block ``A_ij, i <= j`` and mirrored,
    which is exact for Hermitian input because ``A_ji = A_ij*``.

    Raises
    ------
    NotPSDError
        If ``pm`` itself is not PSD within ``tol``.
    DimensionError
        If a block does not fit in the norm's ambient space.
    """
    require_psd(pm, tol)
    values = compression_values(pm, norm)
    return NormCompression(values=values, verdict=is_psd(values, tol), norm_used=norm)


def compress_m2(pm: PartitionedMatrix, norm: UINorm, tol: float = DEFAULT_TOL) -> NormCompression:
    """Two-block compression; always PSD for PSD input and any such norm."""
    if pm.m != 2:
        raise PartitionError(f"expected 2 diagonal blocks, got {pm.m}")
    result = compress(pm, norm, tol)
    if not result.verdict.is_psd:
        raise InternalConsistencyError(
            f"2-block compression not PSD (min eigenvalue {result.verdict.min_eigenvalue:.3e})",
            "compress_m2",
        )
    return result


def abs_entries(b) -> np.ndarray:
    """Entrywise modulus ``(|b_ij|)`` as a real matrix."""
    return np.abs(as_matrix(b))


def trace_norm_matrix(pm: PartitionedMatrix) -> np.ndarray:
    """``(tr |A_ij|)``, evaluated block by block from singular values."""
    m = pm.m
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            out[i, j] = out[j, i] = float(np.sum(linalg.singular_values(pm.block(i, j))))
    return out


# ---------------------------------------------------------------------------
# Constructive trace-norm reduction for three blocks


@dataclass(frozen=True)
class ReductionTrace:
    """Every intermediate object of the three-block trace-norm reduction.

    ``stages`` holds ``(label, PartitionedMatrix)`` in the order of
    ``STAGE_LABELS``. The last three snapshots are
    ``Q~_1 + ... + Q~_n`` (direct sum, before taking moduli),
    ``Q_1 + ... + Q_n`` and the block matrix ``(Q_ij)``.
    """

    stages: tuple
    u12: np.ndarray
    u23: np.ndarray
    x: np.ndarray
    d: np.ndarray
    q_triples: np.ndarray
    q_blocks: np.ndarray
    trace_matrix: np.ndarray
    input_trace_norms: np.ndarray
    checks: dict = field(default_factory=dict)

    def stage(self, label: str) -> PartitionedMatrix:
        return dict(self.stages)[label]


def _conj_block(a: np.ndarray, n: int, which: int, u: np.ndarray) -> np.ndarray:
    """``T a T*`` where ``T`` is the identity except ``u`` in diagonal block ``which``."""
    t = np.eye(3 * n, dtype=np.complex128)
    t[which * n : (which + 1) * n, which * n : (which + 1) * n] = u
    return t @ a @ t.conj().T


def _block(a: np.ndarray, n: int, i: int, j: int) -> np.ndarray:
    return a[i * n : (i + 1) * n, j * n : (j + 1) * n]


def reduce_theorem1(pm: PartitionedMatrix, tol: float = DEFAULT_TOL) -> ReductionTrace:
    """Run the polar-decomposition reduction of a three-block PSD matrix.

    Steps, each recorded as a stage snapshot:

    1. ``pad``: grow all blocks to ``n = max(n_1, n_2, n_3)``.
    2. ``polar12``: with ``A_12 = P_12 U``, conjugate by ``I + U + I`` so
       that ``A_12`` becomes PSD.
    3. ``polar23``: with ``A_23 = P_23 V``, conjugate by ``I + I + V``.
    4. ``diagW``: with ``A_13 = P_13 W`` and ``W = X* D X``, conjugate by
       ``X + X + X``; now ``A_13 = X P_13 X* D``.
    5. ``extractQ``: gather the ``(r, r)`` entries of the nine blocks into
       3x3 matrices ``Q~_r`` (principal submatrices, hence PSD).
    6. ``absQ``: replace the ``(1, 3)`` and ``(3, 1)`` entries of ``Q~_r``
       by their moduli, giving ``Q_r``.
    7. ``assemble``: ``Q_ij = diag(Q_1[i, j], ..., Q_n[i, j])``.

    The invariants (all stages PSD, congruence stages isospectral,
    ``tr Q_ij = tr |A_ij|``, each ``Q_r`` PSD, ``(Q_ij)`` isospectral with
    the direct sum of the ``Q_r``) are verified before returning.

    Raises
    ------
    PartitionError
        If ``pm`` does not have three diagonal blocks.
    NotPSDError
        If ``pm`` is not PSD.
    InternalConsistencyError
        If an invariant fails; ``stage`` names the step.
    """
    if pm.m != 3:
        raise PartitionError(f"expected 3 diagonal blocks, got {pm.m}")
    require_psd(pm, tol)
    n = max(pm.sizes)
    stages = []

    padded = pad_blocks(pm, (n, n, n))
    stages.append(("pad", padded))
    a = np.array(padded.a)

    u12 = linalg.polar(_block(a, n, 0, 1), "left").u
    a = linalg.hermitian_part(_conj_block(a, n, 1, u12))
    stages.append(("polar12", PartitionedMatrix(a, (n, n, n))))

    u23 = linalg.polar(_block(a, n, 1, 2), "left").u
    a = linalg.hermitian_part(_conj_block(a, n, 2, u23))
    stages.append(("polar23", PartitionedMatrix(a, (n, n, n))))

    w = linalg.polar(_block(a, n, 0, 2), "left").u
    diag_w = linalg.diagonalize_unitary(w)
    x, d = diag_w.x, diag_w.d
    xt = np.kron(np.eye(3), x)
    a = linalg.hermitian_part(xt @ a @ xt.conj().T)
    stages.append(("diagW", PartitionedMatrix(a, (n, n, n))))

    # q_tilde[r] is the 3x3 matrix of (r, r) entries of the nine blocks.
    q_tilde = np.empty((n, 3, 3), dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            q_tilde[:, i, j] = np.diag(_block(a, n, i, j))
    stages.append(("extractQ", _direct_sum(q_tilde)))

    q = q_tilde.copy()
    q[:, 0, 2] = np.abs(q_tilde[:, 0, 2])
    q[:, 2, 0] = np.abs(q_tilde[:, 2, 0])
    stages.append(("absQ", _direct_sum(q)))

    q_blocks = np.zeros((3, 3, n, n), dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            q_blocks[i, j] = np.diag(q[:, i, j])
    assembled = np.block([[q_blocks[i, j] for j in range(3)] for i in range(3)])
    stages.append(("assemble", PartitionedMatrix(assembled, (n, n, n))))

    trace_matrix = np.real(np.trace(q_blocks, axis1=2, axis2=3))
    trace = ReductionTrace(
        stages=tuple(stages),
        u12=u12,
        u23=u23,
        x=x,
        d=d,
        q_triples=q,
        q_blocks=q_blocks,
        trace_matrix=trace_matrix,
        input_trace_norms=trace_norm_matrix(pm),
    )
    _verify_reduction(trace, n, tol)
    return trace


def _direct_sum(mats: np.ndarray) -> PartitionedMatrix:
    k, s, _ = mats.shape
    out = np.zeros((k * s, k * s), dtype=np.complex128)
    for r in range(k):
        out[r * s : (r + 1) * s, r * s : (r + 1) * s] = mats[r]
    return PartitionedMatrix(out, (s,) * k)


def _verify_reduction(trace: ReductionTrace, n: int, tol: float) -> None:
    stages = dict(trace.stages)
    padded = stages["pad"].a
    scale = linalg.spectral_scale(padded)
    base = np.linalg.eigvalsh(linalg.hermitian_part(padded))

    for label, snap in trace.stages:
        verdict = is_psd(snap.a, tol)
        if not verdict.is_psd:
            raise InternalConsistencyError(
                f"snapshot not PSD (min eigenvalue {verdict.min_eigenvalue:.3e})", label
            )

    for label in ("polar12", "polar23", "diagW"):
        ev = np.linalg.eigvalsh(stages[label].a)
        gap = float(np.max(np.abs(ev - base)))
        if gap > tol * scale:
            raise InternalConsistencyError(f"spectrum moved by {gap:.3e}", label)

    for label, u in (("polar12", trace.u12), ("polar23", trace.u23), ("diagW", trace.x)):
        if linalg.unitary_defect(u) > tol:
            raise InternalConsistencyError("transformation is not unitary", label)

    diag_a = stages["diagW"].a
    for i, j in ((0, 1), (1, 2)):
        blk = _block(diag_a, n, i, j)
        if not is_psd(blk, tol).is_psd:
            raise InternalConsistencyError(f"block ({i + 1},{j + 1}) is not PSD", "diagW")

    gap = float(np.max(np.abs(trace.trace_matrix - trace.input_trace_norms)))
    if gap > tol * max(1.0, float(np.max(np.abs(trace.input_trace_norms)))):
        raise InternalConsistencyError(f"tr Q_ij differs from tr|A_ij| by {gap:.3e}", "assemble")

    for r, qr in enumerate(trace.q_triples):
        verdict = is_psd(qr, tol)
        if not verdict.is_psd:
            raise InternalConsistencyError(
                f"Q_{r + 1} not PSD (min eigenvalue {verdict.min_eigenvalue:.3e})", "absQ"
            )

    blocks_ev = np.linalg.eigvalsh(stages["assemble"].a)
    sum_ev = np.sort(np.concatenate([np.linalg.eigvalsh(qr) for qr in trace.q_triples]))
    gap = float(np.max(np.abs(blocks_ev - sum_ev)))
    if gap > tol * scale:
        raise InternalConsistencyError(
            f"(Q_ij) and the direct sum of Q_r differ in spectrum by {gap:.3e}", "assemble"
        )
    trace.checks.update(
        stages_psd=True,
        congruence_isospectral=True,
        trace_preserved=True,
        q_triples_psd=True,
        permutation_similar=True,
    )


# ---------------------------------------------------------------------------
# Three blocks, general norm


@dataclass(frozen=True)
class SufficiencyResult:
    """Compression plus the split ``(||A_ij||) = g (tr|A^_ij|) + diag(0, 0, eps)``.

    ``g = ||E_11||`` (1 for a normalized norm) and ``trace_part`` already
    includes it. Values are reported in the caller's block order; the
    ``eps`` entry sits on the position of the largest block.
    """

    compression: NormCompression
    epsilon: float
    k: int
    trace_part: np.ndarray
    order: tuple[int, ...]


def sufficiency_check(
    pm: PartitionedMatrix, norm: UINorm, tol: float = DEFAULT_TOL
) -> SufficiencyResult:
    """Decide a three-block compression under the flatness condition at ``k``.

    Blocks are reordered so that ``n_1 <= n_2 <= n_3`` and
    ``k = min(n_1 + n_2, n_3)``. If ``k = n_3`` every block has rank at most
    ``k`` and its norm equals its trace norm. Otherwise a unitary ``V`` from
    the SVD of the stacked off-diagonal column ``(A_13; A_23)`` kills the
    last ``n_3 - k`` columns, and deleting those rows and columns of
    ``(I + I + V)* A (I + I + V)`` leaves ``A^`` whose trace-norm
    compression differs from ``(||A_ij||)`` only by ``eps >= 0`` in the
    ``(3, 3)`` slot.

    Raises
    ------
    PreconditionError
        If the norm is not flat at ``k``; no guarantee applies then.
    InternalConsistencyError
        If the decomposition or the resulting positivity check fails.
    """
    if pm.m != 3:
        raise PartitionError(f"expected 3 diagonal blocks, got {pm.m}")
    order = tuple(int(t) for t in np.argsort(pm.sizes, kind="stable"))
    inverse = np.argsort(order)
    spm = pm.permuted(order)
    n1, n2, n3 = spm.sizes
    if n3 > norm.ambient_dim:
        raise DimensionError(f"norm on M_{norm.ambient_dim} cannot measure blocks of size {n3}")
    k = min(n1 + n2, n3)
    cert = condition_b(norm, k)
    if not cert.holds:
        raise PreconditionError(
            f"norm {norm} is not flat at k={k} (slack {cert.slack:.6g}); "
            "a counterexample exists for these block sizes"
        )
    result = compress(spm, norm, tol)
    values = result.values
    scale = max(1.0, float(np.max(np.abs(values))))
    gamma = norm.e11()

    if k == n3:
        trace_part = gamma * trace_norm_matrix(spm)
        eps = 0.0
        gap = float(np.max(np.abs(values - trace_part)))
        if gap > tol * scale:
            raise InternalConsistencyError(
                f"norm differs from trace norm by {gap:.3e} on a rank <= k block", "sufficiency"
            )
    else:
        stacked = np.vstack([spm.block(0, 2), spm.block(1, 2)])
        _, _, vh = np.linalg.svd(stacked)
        v = vh.conj().T
        t = np.eye(n1 + n2 + n3, dtype=np.complex128)
        t[n1 + n2 :, n1 + n2 :] = v
        rotated = linalg.hermitian_part(t.conj().T @ spm.a @ t)
        tail = rotated[: n1 + n2, n1 + n2 + k :]
        if tail.size and float(np.max(np.abs(tail))) > tol * scale:
            raise InternalConsistencyError("V failed to zero the trailing columns", "sufficiency")
        keep = n1 + n2 + k
        hat = PartitionedMatrix(rotated[:keep, :keep], (n1, n2, k))
        trace_part = gamma * trace_norm_matrix(hat)
        eps = values[2, 2] - trace_part[2, 2]
        split = trace_part.copy()
        split[2, 2] += eps
        gap = float(np.max(np.abs(values - split)))
        if gap > tol * scale:
            raise InternalConsistencyError(
                f"off-(3,3) entries differ from the truncated trace norms by {gap:.3e}",
                "sufficiency",
            )
        if eps < -tol * scale:
            raise InternalConsistencyError(f"epsilon = {eps:.3e} is negative", "sufficiency")
        eps = max(eps, 0.0)

    if not result.verdict.is_psd:
        raise InternalConsistencyError(
            f"compression not PSD (min eigenvalue {result.verdict.min_eigenvalue:.3e})",
            "sufficiency",
        )
    original = NormCompression(
        values=values[np.ix_(inverse, inverse)],
        verdict=result.verdict,
        norm_used=norm,
    )
    return SufficiencyResult(
        compression=original,
        epsilon=float(eps),
        k=k,
        trace_part=trace_part[np.ix_(inverse, inverse)],
        order=order,
    )
