"""JSON matrix files and report serialization."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError, PartitionError


@dataclass(frozen=True)
class MatrixFile:
    """``{"rows": r, "cols": c, "data": [[re, im], ...], "partition": [...]}``."""

    rows: int
    cols: int
    data: tuple[tuple[float, float], ...]
    partition: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ParameterError(f"bad shape {(self.rows, self.cols)}")
        if len(self.data) != self.rows * self.cols:
            raise ParameterError(
                f"data has {len(self.data)} entries, expected {self.rows * self.cols}"
            )
        if self.partition is not None:
            if self.rows != self.cols:
                raise PartitionError("a partitioned matrix must be square")
            if any(p < 1 for p in self.partition) or sum(self.partition) != self.rows:
                raise PartitionError(
                    f"partition {list(self.partition)} does not split {self.rows} rows"
                )

    @classmethod
    def from_matrix(cls, a, partition=None) -> "MatrixFile":
        a = np.asarray(a, dtype=np.complex128)
        data = tuple((float(z.real), float(z.imag)) for z in a.ravel())
        part = tuple(int(p) for p in partition) if partition is not None else None
        return cls(a.shape[0], a.shape[1], data, part)

    def matrix(self) -> np.ndarray:
        flat = np.array([complex(re, im) for re, im in self.data], dtype=np.complex128)
        return flat.reshape(self.rows, self.cols)

    def to_dict(self) -> dict:
        out = {"rows": self.rows, "cols": self.cols, "data": [list(p) for p in self.data]}
        if self.partition is not None:
            out["partition"] = list(self.partition)
        return out

    @classmethod
    def from_dict(cls, obj) -> "MatrixFile":
        try:
            rows, cols = int(obj["rows"]), int(obj["cols"])
            data = []
            for pair in obj["data"]:
                re, im = pair
                data.append((float(re), float(im)))
            part = obj.get("partition")
            part = tuple(int(p) for p in part) if part is not None else None
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed matrix file: {exc!r}") from exc
        if not all(math.isfinite(v) for pair in data for v in pair):
            raise ParameterError("matrix file has non-finite entries")
        return cls(rows, cols, tuple(data), part)


def read_matrix_file(path) -> MatrixFile:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read {path}: {exc}") from exc
    return MatrixFile.from_dict(obj)


def write_matrix_file(path, mf: MatrixFile) -> None:
    Path(path).write_text(json.dumps(mf.to_dict()) + "\n")


def to_jsonable(obj):
    """Convert results into JSON-safe values.

    Complex arrays become matrix-file objects, real arrays nested lists,
    dataclasses dicts. Infinities are written as the strings ``"inf"`` and
    ``"-inf"``.
    """
    from .norms import UINorm

    if isinstance(obj, UINorm):
        return str(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2:
                return MatrixFile.from_matrix(obj).to_dict()
            if obj.ndim == 1:
                return [[float(z.real), float(z.imag)] for z in obj]
            return [to_jsonable(sub) for sub in obj]
        return to_jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False)
