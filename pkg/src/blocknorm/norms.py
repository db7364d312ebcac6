"""Unitarily invariant norms on M_n and the flatness test on partial identities.

Four families are supported, all determined by the singular values
``s_1 >= ... >= s_n`` of the (zero-padded) argument:

* Schatten p:  ``(sum s_j^p)^(1/p)``, operator norm at ``p = inf``
* Ky Fan r:    ``s_1 + ... + s_r``
* c-norm v:    ``sum v_j s_j`` for a nonincreasing nonnegative weight ``v``
* max of c-norms over a finite list of weights

A rectangular block smaller than ``n x n`` is measured by padding it with
zero rows and columns, which leaves its nonzero singular values unchanged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .linalg import as_matrix

SCHATTEN = "schatten"
KYFAN = "kyfan"
CNORM = "c"
MAXC = "maxc"


@dataclass(frozen=True)
class UINorm:
    """Descriptor of a unitarily invariant norm on ``M_{ambient_dim}``.

    Build instances with :meth:`schatten`, :meth:`kyfan`, :meth:`cnorm`,
    :meth:`maxc` or :func:`parse_norm` rather than the raw constructor.
    ``weights`` holds one vector for a c-norm and several for a max of
    c-norms; it is empty for the other families.
    """

    kind: str
    ambient_dim: int
    p: float | None = None
    r: int | None = None
    weights: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        n = self.ambient_dim
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ParameterError(f"ambient dimension must be a positive integer, got {n!r}")
        if self.kind == SCHATTEN:
            if self.p is None or not (self.p >= 1):
                raise ParameterError(f"Schatten exponent must be >= 1, got {self.p!r}")
        elif self.kind == KYFAN:
            if self.r is None or not 1 <= self.r <= n:
                raise ParameterError(f"Ky Fan index must lie in [1, {n}], got {self.r!r}")
        elif self.kind in (CNORM, MAXC):
            if not self.weights or (self.kind == CNORM and len(self.weights) != 1):
                raise ParameterError(f"{self.kind} norm needs weight vectors")
            for v in self.weights:
                _check_weight(v, n)
        else:
            raise ParameterError(f"unknown norm family {self.kind!r}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def schatten(cls, p: float, n: int) -> "UINorm":
        return cls(SCHATTEN, n, p=math.inf if p == math.inf else float(p))

    @classmethod
    def trace(cls, n: int) -> "UINorm":
        return cls.schatten(1.0, n)

    @classmethod
    def operator(cls, n: int) -> "UINorm":
        return cls.schatten(math.inf, n)

    @classmethod
    def kyfan(cls, r: int, n: int) -> "UINorm":
        return cls(KYFAN, n, r=int(r))

    @classmethod
    def cnorm(cls, v) -> "UINorm":
        v = tuple(float(t) for t in v)
        return cls(CNORM, len(v), weights=(v,))

    @classmethod
    def maxc(cls, vs) -> "UINorm":
        vs = tuple(tuple(float(t) for t in v) for v in vs)
        if not vs:
            raise ParameterError("maxc norm needs at least one weight vector")
        return cls(MAXC, len(vs[0]), weights=vs)

    # -- evaluation -------------------------------------------------------

    def __call__(self, x) -> float:
        return eval_norm(self, x)

    def from_singular_values(self, s):
        """Evaluate on singular values ``s`` of shape ``(..., n)``, sorted descending.

        Works on stacks, so a batch of blocks can be measured with one SVD.
        """
        s = np.asarray(s, dtype=float)
        if self.kind == SCHATTEN:
            if self.p == math.inf:
                return s[..., 0]
            if self.p == 1.0:
                return s.sum(axis=-1)
            top = s[..., :1]
            safe = np.where(top > 0, top, 1.0)
            return top[..., 0] * np.sum((s / safe) ** self.p, axis=-1) ** (1.0 / self.p)
        if self.kind == KYFAN:
            return s[..., : self.r].sum(axis=-1)
        w = np.asarray(self.weights)
        return np.max(s @ w.T, axis=-1)

    def e11(self) -> float:
        """The norm of the matrix unit ``E_11``."""
        if self.kind in (SCHATTEN, KYFAN):
            return 1.0
        return max(v[0] for v in self.weights)

    def partial_identity(self, k: int) -> float:
        """The norm of ``E_11 + ... + E_kk``."""
        if not 1 <= k <= self.ambient_dim:
            raise DimensionError(f"k must lie in [1, {self.ambient_dim}], got {k}")
        s = np.zeros(self.ambient_dim)
        s[:k] = 1.0
        return float(self.from_singular_values(s))

    def with_ambient(self, n: int) -> "UINorm":
        """Same family on ``M_n``; weight vectors are truncated or zero-extended."""
        if self.kind == SCHATTEN:
            return UINorm(SCHATTEN, n, p=self.p)
        if self.kind == KYFAN:
            return UINorm(KYFAN, n, r=min(self.r, n))
        vs = tuple(tuple(v[:n]) + (0.0,) * max(0, n - len(v)) for v in self.weights)
        return UINorm(self.kind, n, weights=vs)

    def __str__(self):
        return format_norm(self)


def _check_weight(v, n):
    if len(v) != n:
        raise ParameterError(f"weight vector has length {len(v)}, expected {n}")
    if not all(math.isfinite(t) for t in v):
        raise ParameterError("weight vector has non-finite entries")
    if v[0] <= 0:
        raise ParameterError("weight vector must have a positive first entry")
    if v[-1] < 0 or any(a < b for a, b in zip(v, v[1:])):
        raise ParameterError(f"weight vector must be nonincreasing and nonnegative: {v}")


def padded_singular_values(x, n: int) -> np.ndarray:
    """Singular values of ``x`` padded with zeros to length ``n``."""
    x = as_matrix(x)
    if max(x.shape) > n:
        raise DimensionError(f"block of shape {x.shape} does not fit in M_{n}")
    s = np.zeros(n)
    sv = np.linalg.svd(x, compute_uv=False)
    s[: sv.size] = sv
    return s


def eval_norm(norm: UINorm, x) -> float:
    """Evaluate ``norm`` on ``x``, zero-padding it to ``ambient_dim`` square."""
    return float(norm.from_singular_values(padded_singular_values(x, norm.ambient_dim)))


def normalize(norm: UINorm) -> UINorm:
    """Rescale so that ``||E_11|| = 1``.

    Schatten and Ky Fan norms already satisfy this; weight vectors are all
    divided by the largest leading weight.
    """
    if norm.kind in (SCHATTEN, KYFAN):
        return norm
    top = norm.e11()
    vs = tuple(tuple(t / top for t in v) for v in norm.weights)
    return UINorm(norm.kind, norm.ambient_dim, weights=vs)


def scaled(norm: UINorm, factor: float) -> UINorm:
    """``factor * norm`` for the weighted families."""
    if norm.kind not in (CNORM, MAXC):
        raise ParameterError("only c-norms and their maxima can be rescaled")
    vs = tuple(tuple(t * factor for t in v) for v in norm.weights)
    return UINorm(norm.kind, norm.ambient_dim, weights=vs)


# ---------------------------------------------------------------------------
# Flatness of the partial identities


@dataclass(frozen=True)
class ConditionBCertificate:
    """Result of comparing ``||E_11 + ... + E_kk||`` with ``k ||E_11||``.

    Values refer to the normalized norm. ``slack`` is never meaningfully
    negative, by subadditivity.
    """

    k: int
    norm_of_e11: float
    norm_of_partial_identity: float
    holds: bool
    slack: float
    tolerance: float


def condition_b(norm: UINorm, k: int, tol: float | None = None) -> ConditionBCertificate:
    if not 1 <= k <= norm.ambient_dim:
        raise DimensionError(f"k must lie in [1, {norm.ambient_dim}], got {k}")
    if tol is None:
        tol = 1e-9 * k
    unit = normalize(norm)
    e11 = unit.e11()
    part = unit.partial_identity(k)
    slack = k * e11 - part
    return ConditionBCertificate(
        k=k,
        norm_of_e11=e11,
        norm_of_partial_identity=part,
        holds=bool(slack <= tol),
        slack=slack,
        tolerance=tol,
    )


def largest_flat_prefix(norm: UINorm, tol: float | None = None) -> int:
    """Largest ``s`` with ``||E_11 + ... + E_ss|| = s ||E_11||``.

    Scans every ``s`` instead of stopping at the first failure.
    """
    best = 1
    for s in range(1, norm.ambient_dim + 1):
        if condition_b(norm, s, tol).holds:
            best = s
    return best


# ---------------------------------------------------------------------------
# Text form: "schatten:p=2", "trace", "op", "kyfan:r=3", "c:[1,0.5,0]",
# "maxc:[1,1,0];[1,0.5,0.5]"


def parse_norm(text: str, ambient_dim: int | None = None) -> UINorm:
    """Parse a norm spec string.

    ``ambient_dim`` is required for Schatten and Ky Fan norms; for the
    weighted families it defaults to the weight length and must agree with
    it when given.
    """
    text = text.strip()
    head, _, arg = text.partition(":")
    head = head.strip().lower()
    try:
        if head in ("trace", "op", SCHATTEN, KYFAN):
            if ambient_dim is None:
                raise ParameterError(f"norm {text!r} needs an ambient dimension")
            if head == "trace":
                return UINorm.trace(ambient_dim)
            if head == "op":
                return UINorm.operator(ambient_dim)
            key, _, value = arg.partition("=")
            if head == SCHATTEN and key.strip() == "p":
                value = value.strip().lower()
                p = math.inf if value in ("inf", "infinity") else float(value)
                return UINorm.schatten(p, ambient_dim)
            if head == KYFAN and key.strip() == "r":
                return UINorm.kyfan(int(value), ambient_dim)
            raise ParameterError(f"malformed norm spec {text!r}")
        if head == CNORM:
            norm = UINorm.cnorm(json.loads(arg))
        elif head == MAXC:
            norm = UINorm.maxc([json.loads(part) for part in arg.split(";")])
        else:
            raise ParameterError(f"unknown norm family in {text!r}")
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"malformed norm spec {text!r}: {exc}") from exc
    if ambient_dim is not None and norm.ambient_dim != ambient_dim:
        raise ParameterError(
            f"weight length {norm.ambient_dim} does not match ambient dimension {ambient_dim}"
        )
    return norm


def format_norm(norm: UINorm) -> str:
    if norm.kind == SCHATTEN:
        return "schatten:p=inf" if norm.p == math.inf else f"schatten:p={norm.p!r}"
    if norm.kind == KYFAN:
        return f"kyfan:r={norm.r}"
    vecs = ";".join("[" + ",".join(repr(t) for t in v) + "]" for v in norm.weights)
    return f"{norm.kind}:{vecs}"
