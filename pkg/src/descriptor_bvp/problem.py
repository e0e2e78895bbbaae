"""JSON problem files.

A problem file is a JSON object::

    {
      "F": [[...], ...], "G": [[...], ...],
      "A1": [[...], ...], "B1": [...],
      "A2": [[...], ...], "B2": [...],
      "N": 4,
      "options": {
        "theta": 1e-5, "tol": null, "seed": 0, "strategy": "auto",
        "E": [[...], ...],
        "wcf": {"Qp": [[...]], "Jp": [[...]], "P": ..., "Q": ..., "Hq": ..., "p": 3, "q": 2}
      }
    }

Matrices are lists of rows. A real entry is a bare number, a complex entry
is ``[re, im]``. ``options`` and everything inside it is optional; a
``wcf`` needs at least ``Jp`` and either ``Qp`` or ``Q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bvp import DEFAULT_THETA, BoundaryValueProblem, Strategy
from .pencil import MatrixPencil

__all__ = [
    "ProblemFile",
    "ProblemFileError",
    "dump_matrix",
    "dump_scalar",
    "load_problem",
    "parse_matrix",
    "parse_problem",
    "problem_to_dict",
]

STRATEGIES = ("auto",) + tuple(s.value for s in Strategy)


class ProblemFileError(ValueError):
    """Malformed problem file; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass
class ProblemFile:
    F: np.ndarray
    G: np.ndarray
    A1: np.ndarray
    B1: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    N: int
    theta: float = DEFAULT_THETA
    tol: float | None = None
    seed: int = 0
    strategy: str = "auto"
    E: np.ndarray | None = None
    wcf: dict[str, object] | None = field(default=None)

    def bvp(self) -> BoundaryValueProblem:
        return BoundaryValueProblem(MatrixPencil(self.F, self.G), self.A1, self.B1,
                                    self.A2, self.B2, self.N)


def _scalar(x, where):
    if isinstance(x, bool):
        raise ProblemFileError("booleans are not numbers", where)
    if isinstance(x, (int, float)):
        v = complex(float(x), 0.0)
    elif isinstance(x, list) and len(x) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        v = complex(float(x[0]), float(x[1]))
    else:
        raise ProblemFileError(f"expected a number or [re, im], got {json.dumps(x)}", where)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ProblemFileError("non-finite entry", where)
    return v


def parse_matrix(obj, name: str, cols: int | None = None) -> np.ndarray:
    """Parse a list of rows into a complex array (empty list gives ``0 x cols``)."""
    if not isinstance(obj, list):
        raise ProblemFileError("expected a list of rows", name)
    if not obj:
        return np.zeros((0, cols or 0), dtype=complex)
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise ProblemFileError("expected a list of rows", f"{name}[{i}]")
        rows.append([_scalar(x, f"{name}[{i}][{j}]") for j, x in enumerate(row)])
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ProblemFileError(f"row has {len(row)} entries, expected {width}", f"{name}[{i}]")
    if width == 0:
        raise ProblemFileError("empty row", name)
    return np.array(rows, dtype=complex)


def parse_vector(obj, name: str) -> np.ndarray:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        obj = [obj]
    if not isinstance(obj, list):
        raise ProblemFileError("expected a list of entries", name)
    return np.array([[_scalar(x, f"{name}[{i}]")] for i, x in enumerate(obj)],
                    dtype=complex).reshape(-1, 1)


def _int(obj, name, minimum=None):
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ProblemFileError(f"expected an integer, got {json.dumps(obj)}", name)
    if minimum is not None and obj < minimum:
        raise ProblemFileError(f"must be >= {minimum}", name)
    return obj


def _real(obj, name, allow_none=False):
    if obj is None and allow_none:
        return None
    if isinstance(obj, bool) or not isinstance(obj, (int, float)) or not math.isfinite(obj):
        raise ProblemFileError(f"expected a finite number, got {json.dumps(obj)}", name)
    return float(obj)


def parse_problem(doc: dict) -> ProblemFile:
    """Validate a decoded JSON document; all shape checks happen here."""
    if not isinstance(doc, dict):
        raise ProblemFileError("top level must be an object")
    for key in ("F", "G", "A1", "A2", "B1", "B2", "N"):
        if key not in doc:
            raise ProblemFileError("missing", key)
    F = parse_matrix(doc["F"], "F")
    G = parse_matrix(doc["G"], "G")
    m = F.shape[0]
    if F.shape != (m, m):
        raise ProblemFileError(f"must be square, got {F.shape[0]}x{F.shape[1]}", "F")
    if G.shape != F.shape:
        raise ProblemFileError(f"shape {G.shape[0]}x{G.shape[1]} differs from F", "G")
    A1 = parse_matrix(doc["A1"], "A1", m)
    A2 = parse_matrix(doc["A2"], "A2", m)
    for name, A in (("A1", A1), ("A2", A2)):
        if A.shape[1] != m:
            raise ProblemFileError(f"must have {m} columns, got {A.shape[1]}", name)
    B1 = parse_vector(doc["B1"], "B1")
    B2 = parse_vector(doc["B2"], "B2")
    if B1.shape[0] != A1.shape[0]:
        raise ProblemFileError(f"has {B1.shape[0]} entries, A1 has {A1.shape[0]} rows", "B1")
    if B2.shape[0] != A2.shape[0]:
        raise ProblemFileError(f"has {B2.shape[0]} entries, A2 has {A2.shape[0]} rows", "B2")
    N = _int(doc["N"], "N", 1)

    opts = doc.get("options", {}) or {}
    if not isinstance(opts, dict):
        raise ProblemFileError("must be an object", "options")
    unknown = set(opts) - {"theta", "tol", "seed", "strategy", "E", "wcf"}
    if unknown:
        raise ProblemFileError(f"unknown keys {sorted(unknown)}", "options")
    theta = _real(opts.get("theta", DEFAULT_THETA), "options.theta")
    if theta <= 0:
        raise ProblemFileError("must be positive", "options.theta")
    tol = _real(opts.get("tol"), "options.tol", allow_none=True)
    if tol is not None and tol < 0:
        raise ProblemFileError("must be non-negative", "options.tol")
    seed = _int(opts.get("seed", 0), "options.seed")
    strategy = opts.get("strategy", "auto")
    if strategy not in STRATEGIES:
        raise ProblemFileError(f"must be one of {STRATEGIES}", "options.strategy")
    E = None
    if opts.get("E") is not None:
        E = parse_matrix(opts["E"], "options.E")
    wcf = None
    if opts.get("wcf") is not None:
        wcf = _parse_wcf(opts["wcf"], m)
    return ProblemFile(F, G, A1, B1, A2, B2, N, theta, tol, seed, strategy, E, wcf)


def _parse_wcf(obj, m):
    if not isinstance(obj, dict):
        raise ProblemFileError("must be an object", "options.wcf")
    out: dict[str, object] = {}
    for key in ("P", "Q", "Qp", "Jp", "Hq"):
        if obj.get(key) is not None:
            out[key] = parse_matrix(obj[key], f"options.wcf.{key}")
    for key in ("p", "q"):
        if key in obj:
            out[key] = _int(obj[key], f"options.wcf.{key}", 0)
    if "Jp" not in out:
        raise ProblemFileError("missing", "options.wcf.Jp")
    p = out["Jp"].shape[0]
    if "Qp" not in out:
        if "Q" not in out:
            raise ProblemFileError("needs Qp or Q", "options.wcf")
        out["Qp"] = out["Q"][:, :p]
    if out["Qp"].shape[0] != m:
        raise ProblemFileError(f"must have {m} rows", "options.wcf.Qp")
    if out.get("p", p) != p:
        raise ProblemFileError(f"p={out['p']} but Jp is {p}x{p}", "options.wcf.p")
    if out.get("q", m - p) != m - p:
        raise ProblemFileError(f"q={out['q']} but m - p = {m - p}", "options.wcf.q")
    return out


def load_problem(path) -> ProblemFile:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_problem(doc)


def dump_scalar(z: complex):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]


def dump_matrix(A) -> list:
    A = np.asarray(A)
    return [[dump_scalar(x) for x in row] for row in A]


def dump_vector(b) -> list:
    return [dump_scalar(x) for x in np.asarray(b).ravel()]


def problem_to_dict(pf: ProblemFile) -> dict:
    opts: dict[str, object] = {"theta": pf.theta, "tol": pf.tol, "seed": pf.seed,
                               "strategy": pf.strategy}
    if pf.E is not None:
        opts["E"] = dump_matrix(pf.E)
    if pf.wcf is not None:
        w = {}
        for key in ("P", "Q", "Qp", "Jp", "Hq"):
            if key in pf.wcf:
                w[key] = dump_matrix(pf.wcf[key])
        for key in ("p", "q"):
            if key in pf.wcf:
                w[key] = pf.wcf[key]
        opts["wcf"] = w
    return {
        "F": dump_matrix(pf.F), "G": dump_matrix(pf.G),
        "A1": dump_matrix(pf.A1), "B1": dump_vector(pf.B1),
        "A2": dump_matrix(pf.A2), "B2": dump_vector(pf.B2),
        "N": pf.N, "options": opts,
    }
