"""Random PSD instances and the property fuzzing harness.

Trial ``i`` of a run with master seed ``s`` draws everything from a
generator seeded by ``SeedSequence([s, i])``, so any single trial can be
replayed alone and the outcome does not depend on evaluation order.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .compression import (
    PartitionedMatrix,
    abs_entries,
    compress,
    compression_values_batch,
    reduce_theorem1,
    sufficiency_check,
)
from .errors import BlockNormError, ParameterError, PreconditionError
from .linalg import DEFAULT_TOL, is_psd
from .norms import UINorm, condition_b

MODES = ("thm1", "thm2", "m2", "abs3")
MAX_RANDOM_BLOCK = 4


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def random_psd(dim: int, rank: int, seed=None) -> np.ndarray:
    """Gram matrix ``R* R`` for a ``rank x dim`` matrix of complex standard normals.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if dim < 1 or not 1 <= rank <= dim:
        raise ParameterError(f"need 1 <= rank <= dim, got rank={rank}, dim={dim}")
    rng = np.random.default_rng(seed)
    r = (rng.standard_normal((rank, dim)) + 1j * rng.standard_normal((rank, dim))) / np.sqrt(2)
    a = r.conj().T @ r
    return (a + a.conj().T) / 2


@dataclass
class FuzzReport:
    mode: str
    trials: int
    failures: int
    worst_min_eigenvalue: float
    seed: int
    config: dict
    failure_payloads: list = field(default_factory=list)


def draw_trial(mode: str, sizes, seed: int, trial: int):
    """Block sizes and PSD matrix of one fuzz trial, reproducible on its own."""
    rng = trial_rng(seed, trial)
    if mode == "abs3":
        trial_sizes = (1, 1, 1)
    elif sizes is None:
        m = 3 if mode == "thm1" else 2
        trial_sizes = tuple(int(t) for t in rng.integers(1, MAX_RANDOM_BLOCK + 1, size=m))
    else:
        trial_sizes = tuple(sizes)
    dim = sum(trial_sizes)
    rank = int(rng.integers(1, dim + 1))
    return trial_sizes, random_psd(dim, rank, rng)


def _batch_verdicts(mats, tol):
    """Min eigenvalue and pass flag for each matrix of a stack."""
    ev = np.linalg.eigvalsh(mats)
    scale = np.maximum(1.0, np.max(np.abs(ev), axis=-1))
    return ev[:, 0], ev[:, 0] >= -tol * scale


def run_fuzz(
    mode: str,
    trials: int,
    seed: int,
    sizes=None,
    norm: UINorm | None = None,
    tol: float = DEFAULT_TOL,
) -> FuzzReport:
    """Check one of the positivity theorems on random PSD inputs.

    Modes
    -----
    thm1
        Three blocks, trace norm: the compression must be PSD and the
        constructive reduction must pass its own invariant checks.
    thm2
        Three blocks, a norm flat at ``k = min(n_1 + n_2, n_3)``: the
        compression must be PSD.
    m2
        Two blocks, any norm: the compression must be PSD.
    abs3
        Random 3x3 PSD matrices: the entrywise modulus must be PSD.

    Block sizes default to independent draws from ``1..4`` per trial
    (``thm1``, ``m2``). A failure means a proven statement was violated, so
    it signals a numerical or implementation defect.
    """
    if mode not in MODES:
        raise ParameterError(f"unknown fuzz mode {mode!r}; choose from {MODES}")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if sizes is not None:
        sizes = tuple(int(s) for s in sizes)
        want = {"thm1": 3, "thm2": 3, "m2": 2}.get(mode)
        if want is not None and len(sizes) != want:
            raise ParameterError(f"mode {mode} needs {want} block sizes, got {sizes}")
        if any(s < 1 for s in sizes):
            raise ParameterError(f"block sizes must be positive, got {sizes}")
    if mode == "thm2" and sizes is None:
        raise ParameterError("mode thm2 needs explicit block sizes")
    if mode in ("thm2", "m2") and norm is None:
        raise ParameterError(f"mode {mode} needs a norm")
    if mode == "thm1":
        norm = UINorm.trace(max(sizes) if sizes else MAX_RANDOM_BLOCK)
    if norm is not None and sizes is not None and max(sizes) > norm.ambient_dim:
        raise ParameterError(f"norm on M_{norm.ambient_dim} cannot measure blocks of size {max(sizes)}")
    if norm is not None and sizes is None and norm.ambient_dim < MAX_RANDOM_BLOCK:
        raise ParameterError(f"random block sizes go up to {MAX_RANDOM_BLOCK}; norm ambient too small")
    if mode == "thm2":
        n1, n2, n3 = sorted(sizes)
        k = min(n1 + n2, n3)
        if not condition_b(norm, k).holds:
            raise PreconditionError(
                f"norm {norm} is not flat at k={k}; use the counterexample command instead"
            )

    groups = defaultdict(list)
    for t in range(trials):
        trial_sizes, a = draw_trial(mode, sizes, seed, t)
        groups[trial_sizes].append((t, a))

    failures = []
    worst = np.inf
    for trial_sizes, items in groups.items():
        idx = [t for t, _ in items]
        stack = np.stack([a for _, a in items])
        if mode == "abs3":
            targets = np.abs(stack)
        else:
            targets = compression_values_batch(stack, trial_sizes, norm)
        mins, ok = _batch_verdicts(targets, tol)
        worst = min(worst, float(np.min(mins)))
        for pos, t in enumerate(idx):
            err = None
            if mode == "thm1":
                try:
                    reduce_theorem1(PartitionedMatrix(stack[pos], trial_sizes), tol)
                except BlockNormError as exc:
                    err = str(exc)
            if not ok[pos] or err is not None:
                failures.append(_payload(mode, t, trial_sizes, stack[pos], norm, tol, err))
    failures.sort(key=lambda f: f["trial"])
    return FuzzReport(
        mode=mode,
        trials=trials,
        failures=len(failures),
        worst_min_eigenvalue=float(worst),
        seed=int(seed),
        config={
            "sizes": list(sizes) if sizes is not None else None,
            "norm": str(norm) if norm is not None else None,
            "tol": tol,
        },
        failure_payloads=failures,
    )


def _payload(mode, trial, sizes, a, norm, tol, err):
    payload = {"trial": trial, "sizes": list(sizes), "matrix": a}
    if mode == "abs3":
        b = abs_entries(a)
        payload["abs_entries"] = b
        payload["min_eigenvalue"] = is_psd(b, tol).min_eigenvalue
    else:
        pm = PartitionedMatrix(a, sizes)
        result = compress(pm, norm, tol)
        payload["compression"] = result.values
        payload["min_eigenvalue"] = result.verdict.min_eigenvalue
        if mode == "thm2":
            try:
                sufficiency_check(pm, norm, tol)
            except BlockNormError as exc:
                err = err or str(exc)
    if err is not None:
        payload["error"] = err
    return payload
