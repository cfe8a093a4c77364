"""Schema-stable JSON reports.

Every report carries the same keys in the same order; fields a command does
not compute are null.  Floats are written with 17 significant digits so that
every double survives a round trip through the file.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = ["REPORT_KEYS", "JobConfig", "input_digest", "new_report", "to_jsonable", "dumps"]

REPORT_KEYS = (
    "command",
    "input_digest",
    "theta",
    "pfaffian",
    "covolume",
    "density_ok",
    "separable_K",
    "k_diagonal",
    "gaussian",
    "lagrangian_split",
    "residuals",
    "result",
    "config",
)

GAUSSIAN_KEYS = ("X", "Y", "k", "is_frame")


@dataclass
class JobConfig:
    """Numerical settings of one invocation; None means the per-dimension default."""

    d: int | None = None
    n: int | None = None
    extent: float | None = None
    trunc: int | None = None
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.n is not None and (self.n < 2 or self.n % 2):
            raise ValueError("grid size must be even and at least 2")
        if self.extent is not None and not self.extent > 0:
            raise ValueError("extent must be positive")
        if self.trunc is not None and self.trunc < 1:
            raise ValueError("truncation radius must be at least 1")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")

    def as_dict(self):
        return asdict(self)


def input_digest(*texts: str) -> str:
    """sha256 over the raw input documents, in order."""
    h = hashlib.sha256()
    for t in texts:
        h.update(t.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()


def new_report(command: str, digest: str | None, config: JobConfig) -> dict:
    rep = dict.fromkeys(REPORT_KEYS)
    rep["command"] = command
    rep["input_digest"] = digest
    rep["config"] = config.as_dict()
    return rep


def gaussian_block(res) -> dict:
    return dict(zip(GAUSSIAN_KEYS, (res.x_mat, res.y_mat, res.k_diag, res.is_frame)))


def to_jsonable(obj):
    """Convert numpy values and tuples into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    # keep it a JSON float even when %g chose an integer form
    if all(c not in s for c in ".en"):
        s += ".0"
    return s


def _emit(obj, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (list, dict)) for v in obj):
            # numeric rows stay on one line
            parts = []
            for v in obj:
                sub: list = []
                _emit(v, indent, level + 1, sub)
                parts.append("".join(sub))
            out.append("[" + ", ".join(parts) + "]")
        else:
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(pad)
                _emit(v, indent, level + 1, out)
                out.append(",\n" if i < len(obj) - 1 else "\n")
            out.append(end + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report, indent: int = 2) -> str:
    out: list = []
    _emit(to_jsonable(report), indent, 0, out)
    return "".join(out) + "\n"
