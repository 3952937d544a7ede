"""Text serialisation of ensembles, POVMs and reports.

Ensemble documents look like::

    {"dim": 2, "priors": [0.5, 0.5],
     "states": [[[1, 0], [0, 0], [0, 0], [0, 0]], ...]}

Each matrix is a flat row-major list of ``[re, im]`` pairs.  POVM documents
carry ``"kind"`` (``"ambiguous"`` or ``"unambiguous"``) and ``"elements"``
instead of ``"priors"``/``"states"``; for unambiguous POVMs element 0 is the
inconclusive operator.  Reals are written with 17 significant digits, which
round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .ensemble import AMBIGUOUS, UNAMBIGUOUS, Ensemble, Povm
from .errors import ParseError
from .linalg import DEFAULT_TOL, Tolerances

__all__ = [
    "dumps",
    "format_real",
    "matrix_to_doc",
    "ensemble_to_doc",
    "ensemble_from_doc",
    "povm_to_doc",
    "povm_from_doc",
    "save_ensemble",
    "load_ensemble",
    "save_povm",
    "load_povm",
    "parse_document",
]


def format_real(x: float) -> str:
    if not math.isfinite(x):
        # JSON has no literal for these; readers get a string.
        return json.dumps("inf" if x > 0 else "-inf" if x < 0 else "nan")
    text = format(float(x), ".17g")
    if text in ("0", "-0"):
        return "0.0" if text == "0" else "-0.0"
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def dumps(obj, indent: int | None = 2, _level: int = 0) -> str:
    """JSON text with fixed field order (insertion order) and 17-digit reals."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_real(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # Leaf rows (numbers, complex pairs) stay on one line.
        if all(not isinstance(v, (dict, list, tuple)) or _is_pair(v) for v in obj):
            return "[" + ", ".join(dumps(v, None, _level + 1) for v in obj) + "]"
        return "[" + sep.join(pad + dumps(v, indent, _level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _is_pair(v) -> bool:
    return isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float, np.number)) for x in v)


def matrix_to_doc(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a).ravel()]


def _matrix_from_doc(entries, dim: int, where: str) -> np.ndarray:
    if not isinstance(entries, list) or len(entries) != dim * dim:
        got = len(entries) if isinstance(entries, list) else type(entries).__name__
        raise ParseError(f"expected {dim * dim} complex entries, got {got}", field=where)
    out = np.empty(dim * dim, dtype=np.complex128)
    for k, z in enumerate(entries):
        if (
            not isinstance(z, list)
            or len(z) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
        ):
            raise ParseError(f"malformed complex entry {z!r}; expected [re, im]", field=f"{where}[{k}]")
        out[k] = complex(float(z[0]), float(z[1]))
    return out.reshape(dim, dim)


def parse_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, field=f"column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object")
    return doc


def _get_dim(doc: dict) -> int:
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"'dim' must be a positive integer, got {dim!r}", field="dim")
    return dim


def ensemble_to_doc(e: Ensemble) -> dict:
    return {
        "dim": e.dim,
        "priors": [float(p) for p in e.priors],
        "states": [matrix_to_doc(s) for s in e.states],
    }


def ensemble_from_doc(doc: dict, tol: Tolerances = DEFAULT_TOL) -> Ensemble:
    dim = _get_dim(doc)
    priors = doc.get("priors")
    if not isinstance(priors, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in priors
    ):
        raise ParseError("'priors' must be a list of numbers", field="priors")
    states = doc.get("states")
    if not isinstance(states, list):
        raise ParseError("'states' must be a list of matrices", field="states")
    mats = [_matrix_from_doc(s, dim, f"states[{i}]") for i, s in enumerate(states)]
    return Ensemble(tuple(mats), [float(p) for p in priors], tol)


def povm_to_doc(povm: Povm) -> dict:
    return {
        "dim": povm.dim,
        "kind": povm.kind,
        "elements": [matrix_to_doc(e) for e in povm.elements],
    }


def povm_from_doc(doc: dict, tol: Tolerances = DEFAULT_TOL) -> Povm:
    dim = _get_dim(doc)
    kind = doc.get("kind", AMBIGUOUS)
    if kind not in (AMBIGUOUS, UNAMBIGUOUS):
        raise ParseError(f"'kind' must be {AMBIGUOUS!r} or {UNAMBIGUOUS!r}, got {kind!r}", field="kind")
    key = "elements" if "elements" in doc else "states"
    elements = doc.get(key)
    if not isinstance(elements, list):
        raise ParseError("'elements' must be a list of matrices", field="elements")
    mats = [_matrix_from_doc(x, dim, f"{key}[{i}]") for i, x in enumerate(elements)]
    return Povm(tuple(mats), kind, tol)


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def save_ensemble(e: Ensemble, path) -> None:
    Path(path).write_text(dumps(ensemble_to_doc(e)) + "\n", encoding="utf-8")


def load_ensemble(path, tol: Tolerances = DEFAULT_TOL) -> Ensemble:
    return ensemble_from_doc(parse_document(_read(path)), tol)


def save_povm(povm: Povm, path) -> None:
    Path(path).write_text(dumps(povm_to_doc(povm)) + "\n", encoding="utf-8")


def load_povm(path, tol: Tolerances = DEFAULT_TOL) -> Povm:
    return povm_from_doc(parse_document(_read(path)), tol)
