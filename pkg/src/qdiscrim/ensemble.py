"""Validated discrimination instances: ensembles, POVMs, the structured family."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadPovm, BadPrior, BadState, DimMismatch, ValidationError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    hermitian_eig,
    hermiticity_defect,
    spectral_cutoff,
)

__all__ = [
    "Ensemble",
    "Povm",
    "StructuredEnsemble",
    "validate_ensemble",
    "check_density_matrix",
    "effective_dimension",
    "structured_to_ensemble",
    "basis_projector",
]

AMBIGUOUS = "ambiguous"
UNAMBIGUOUS = "unambiguous"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def check_density_matrix(a, tol: Tolerances = DEFAULT_TOL, index: int | None = None) -> np.ndarray:
    """Return ``a`` as a read-only complex matrix or raise :class:`BadState`."""
    label = "state" if index is None else f"state {index}"
    try:
        rho = as_matrix(a, label)
    except ValidationError as exc:
        raise BadState(str(exc), index) from None
    defect = hermiticity_defect(rho)
    if defect > tol.tol_recon:
        raise BadState(f"{label} is not Hermitian (max |A - A^H| = {defect:.3e})", index)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol.tol_recon:
        raise BadState(f"{label} has trace {tr!r}, expected 1", index)
    w = hermitian_eig(rho, tol).eigenvalues
    if w[0] < -tol.tol_psd:
        raise BadState(f"{label} has negative eigenvalue {w[0]:.3e}", index)
    return _frozen(rho)


def _check_priors(priors, m: int, tol: Tolerances) -> np.ndarray:
    p = np.array(priors, dtype=float)
    if p.ndim != 1 or p.shape[0] != m:
        raise BadPrior(f"expected {m} priors, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise BadPrior("priors must be finite")
    bad = np.flatnonzero(p <= 0)
    if bad.size:
        raise BadPrior(f"prior {bad[0]} is {p[bad[0]]!r}; priors must be strictly positive")
    total = float(np.sum(p))
    if abs(total - 1.0) > tol.tol_recon:
        raise BadPrior(f"priors sum to {total!r}, expected 1")
    return _frozen(p)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """States ``rho_i`` with prior probabilities ``p_i``.

    Validated on construction: at least two states of one dimension, each
    Hermitian, positive semidefinite and unit trace; priors strictly
    positive and summing to one.  Arrays are stored read-only.
    """

    states: tuple
    priors: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        states = list(self.states)
        if len(states) < 2:
            raise ValidationError(f"an ensemble needs at least 2 states, got {len(states)}")
        checked = [check_density_matrix(s, self.tol, i) for i, s in enumerate(states)]
        dims = {s.shape[0] for s in checked}
        if len(dims) != 1:
            raise DimMismatch(f"states have differing dimensions {sorted(dims)}")
        object.__setattr__(self, "states", tuple(checked))
        object.__setattr__(self, "priors", _check_priors(self.priors, len(checked), self.tol))

    @property
    def m(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def weighted(self, i: int) -> np.ndarray:
        """``p_i * rho_i``."""
        return self.priors[i] * self.states[i]

    def average_state(self) -> np.ndarray:
        return sum(self.weighted(i) for i in range(self.m))

    def with_priors(self, priors) -> "Ensemble":
        return Ensemble(self.states, priors, self.tol)

    def __eq__(self, other):
        if not isinstance(other, Ensemble):
            return NotImplemented
        return (
            self.m == other.m
            and self.dim == other.dim
            and np.array_equal(self.priors, other.priors)
            and all(np.array_equal(a, b) for a, b in zip(self.states, other.states))
        )

    __hash__ = None


def validate_ensemble(states: Sequence, priors: Sequence[float], tol: Tolerances = DEFAULT_TOL) -> Ensemble:
    return Ensemble(tuple(states), priors, tol)


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive operators summing to the identity.

    For ``kind="unambiguous"`` element 0 is the inconclusive outcome and
    elements ``1..m`` name the states.
    """

    elements: tuple
    kind: str = AMBIGUOUS
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if self.kind not in (AMBIGUOUS, UNAMBIGUOUS):
            raise BadPovm(f"kind must be {AMBIGUOUS!r} or {UNAMBIGUOUS!r}, got {self.kind!r}")
        elems = [as_matrix(e, f"POVM element {i}") for i, e in enumerate(self.elements)]
        if len(elems) < 1:
            raise BadPovm("a POVM needs at least one element")
        dims = {e.shape[0] for e in elems}
        if len(dims) != 1:
            raise DimMismatch(f"POVM elements have differing dimensions {sorted(dims)}")
        for i, e in enumerate(elems):
            defect = hermiticity_defect(e)
            if defect > self.tol.tol_recon:
                raise BadPovm(f"POVM element {i} is not Hermitian (defect {defect:.3e})")
            w = hermitian_eig(e, self.tol).eigenvalues
            if w[0] < -self.tol.tol_psd:
                raise BadPovm(f"POVM element {i} has negative eigenvalue {w[0]:.3e}")
        total = sum(elems)
        gap = float(np.max(np.abs(total - np.eye(total.shape[0]))))
        if gap > self.tol.tol_recon:
            raise BadPovm(f"POVM elements do not sum to identity (max deviation {gap:.3e})")
        object.__setattr__(self, "elements", tuple(_frozen(e) for e in elems))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other):
        if not isinstance(other, Povm):
            return NotImplemented
        return (
            self.kind == other.kind
            and len(self) == len(other)
            and all(np.array_equal(a, b) for a, b in zip(self.elements, other.elements))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class StructuredEnsemble:
    """The family ``rho_i = a_i |0><0| + (1 - a_i) |i><i|`` on ``m + 1`` levels."""

    alphas: np.ndarray
    priors: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        a = np.array(self.alphas, dtype=float)
        if a.ndim != 1 or a.shape[0] < 2:
            raise ValidationError(f"need at least 2 alphas, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
            raise ValidationError(f"alphas must lie in [0, 1], got {a.tolist()}")
        object.__setattr__(self, "alphas", _frozen(a))
        object.__setattr__(self, "priors", _check_priors(self.priors, a.shape[0], self.tol))

    @property
    def m(self) -> int:
        return self.alphas.shape[0]

    def __eq__(self, other):
        if not isinstance(other, StructuredEnsemble):
            return NotImplemented
        return np.array_equal(self.alphas, other.alphas) and np.array_equal(self.priors, other.priors)

    __hash__ = None


def basis_projector(dim: int, *indices: int) -> np.ndarray:
    """Diagonal projector onto the given computational basis vectors."""
    d = np.zeros(dim)
    d[list(indices)] = 1.0
    return np.diag(d).astype(np.complex128)


def structured_to_ensemble(s: StructuredEnsemble) -> Ensemble:
    dim = s.m + 1
    states = []
    for i, a in enumerate(s.alphas, start=1):
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[0, 0] = a
        rho[i, i] = 1.0 - a
        states.append(rho)
    return Ensemble(tuple(states), s.priors, s.tol)


def effective_dimension(e: Ensemble, tol: Tolerances = DEFAULT_TOL) -> int:
    """Rank of ``sum_i rho_i``: the dimension of the space the states span."""
    w = hermitian_eig(sum(e.states), tol).eigenvalues
    return int(np.count_nonzero(w > spectral_cutoff(w, tol)))
