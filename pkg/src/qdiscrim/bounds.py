"""Lower bounds on the minimum error probability of discriminating an ensemble.

Seven bounds are evaluated, named ``l0`` ... ``l6`` in the order they are
usually quoted, plus the exact two-state (Helstrom) value when ``m == 2``:

* ``l0``: one minus the ``d`` largest priors, ``d`` the dimension spanned by
  the states;
* ``l1``: ``1 - d * max_i ||p_i rho_i||``;
* ``l2``: pairwise trace distances averaged over ``m - 1``;
* ``l3``: ``sum_{i<j} p_i p_j F(rho_i, rho_j)^2``;
* ``l4``: ``1 - min_k (p_k + sum_{j != k} Tr(p_j rho_j - p_k rho_k)_+)``;
* ``l5``: ``1 - Tr sqrt(sum_i p_i^2 rho_i^2)``;
* ``l6``: from the pure-state decomposition of each ``rho_i`` against
  ``rho^{-1/2}``, ``rho = sum_i p_i rho_i``.

Indices are zero-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ensemble import Ensemble, effective_dimension
from .errors import InternalInconsistency, WrongArity
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    fidelity_from_root,
    hermitian_eig,
    matrix_sqrt_psd,
    pseudo_inverse_sqrt,
    spectral_cutoff,
)

__all__ = [
    "BOUND_NAMES",
    "BoundReport",
    "helstrom",
    "bound_l0",
    "bound_l1",
    "bound_l2",
    "bound_l3",
    "bound_l4",
    "bound_l5",
    "bound_l6",
    "l4_success_terms",
    "all_bounds",
]

BOUND_NAMES = ("l0", "l1", "l2", "l3", "l4", "l5", "l6")

# Slack for relations that hold exactly in theory.
RELATION_SLACK = 1e-9


class _Spectra:
    """Per-ensemble cache of the eigen-computations the bounds share."""

    def __init__(self, e: Ensemble, tol: Tolerances):
        self.e = e
        self.tol = tol
        self._pair: dict[tuple[int, int], np.ndarray] = {}
        self._fid: dict[tuple[int, int], float] = {}

    @cached_property
    def effective_dim(self) -> int:
        return effective_dimension(self.e, self.tol)

    @cached_property
    def state_eigs(self):
        return [hermitian_eig(s, self.tol) for s in self.e.states]

    @cached_property
    def state_roots(self):
        return [matrix_sqrt_psd(s, self.tol) for s in self.e.states]

    def pair_eigenvalues(self, i: int, j: int) -> np.ndarray:
        """Eigenvalues of ``p_j rho_j - p_i rho_i`` for ``i < j``."""
        key = (i, j)
        if key not in self._pair:
            diff = self.e.weighted(j) - self.e.weighted(i)
            self._pair[key] = hermitian_eig(diff, self.tol).eigenvalues
        return self._pair[key]

    def trace_abs(self, i: int, j: int) -> float:
        """``Tr|p_j rho_j - p_i rho_i|``."""
        lo, hi = min(i, j), max(i, j)
        return float(np.sum(np.abs(self.pair_eigenvalues(lo, hi))))

    def trace_positive(self, j: int, k: int) -> float:
        """``Tr(p_j rho_j - p_k rho_k)_+`` with the positive-part rank cutoff."""
        if k < j:
            w = self.pair_eigenvalues(k, j)
        else:
            w = -self.pair_eigenvalues(j, k)
        cut = spectral_cutoff(w, self.tol)
        return float(np.sum(w[w > cut]))

    def fidelity(self, i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        if key not in self._fid:
            a, b = key
            self._fid[key] = fidelity_from_root(self.state_roots[a], self.e.states[b], self.tol)
        return self._fid[key]


def _spectra(e: Ensemble, tol: Tolerances, cache: _Spectra | None) -> _Spectra:
    return cache if cache is not None else _Spectra(e, tol)


def helstrom(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> float:
    """Exact minimum error probability for two states, ``(1 - Tr|p2 rho2 - p1 rho1|) / 2``."""
    if e.m != 2:
        raise WrongArity(f"the Helstrom value needs exactly 2 states, got {e.m}")
    sp = _spectra(e, tol, _cache)
    return 0.5 * (1.0 - sp.trace_abs(0, 1))


def top_prior_mass(e: Ensemble, d: int) -> float:
    return float(np.sum(np.sort(e.priors)[::-1][: min(d, e.m)]))


def bound_l0(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> float:
    sp = _spectra(e, tol, _cache)
    return 1.0 - top_prior_mass(e, sp.effective_dim)


def bound_l1(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> float:
    """Operator-norm bound; negative values are returned as is."""
    sp = _spectra(e, tol, _cache)
    largest = max(p * float(np.max(np.abs(w))) for p, (w, _) in zip(e.priors, sp.state_eigs))
    return float(1.0 - sp.effective_dim * largest)


def bound_l2(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> float:
    sp = _spectra(e, tol, _cache)
    total = sum(sp.trace_abs(i, j) for i in range(e.m) for j in range(i + 1, e.m))
    return 0.5 * (1.0 - total / (e.m - 1))


def bound_l3(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> float:
    sp = _spectra(e, tol, _cache)
    p = e.priors
    return float(
        sum(p[i] * p[j] * sp.fidelity(i, j) ** 2 for i in range(e.m) for j in range(i + 1, e.m))
    )


def l4_success_terms(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> np.ndarray:
    """Upper bounds on the success probability, one per reference index ``k``.

    Entry ``k`` is ``p_k + sum_{j != k} Tr(p_j rho_j - p_k rho_k)_+``.
    """
    sp = _spectra(e, tol, _cache)
    return np.array(
        [e.priors[k] + sum(sp.trace_positive(j, k) for j in range(e.m) if j != k) for k in range(e.m)]
    )


def bound_l4(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> tuple[float, int]:
    """Return ``(value, k)`` where ``k`` is the smallest minimising index."""
    terms = l4_success_terms(e, tol, _cache)
    k = int(np.argmin(terms))
    return 1.0 - float(terms[k]), k


def bound_l5(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> float:
    squares = sum(e.priors[i] ** 2 * (e.states[i] @ e.states[i]) for i in range(e.m))
    squares = 0.5 * (squares + squares.conj().T)
    return 1.0 - float(np.trace(matrix_sqrt_psd(squares, tol)).real)


def bound_l6(e: Ensemble, tol: Tolerances = DEFAULT_TOL, _cache: _Spectra | None = None) -> float:
    """Bound obtained by splitting each state into its weighted eigenvectors.

    Only eigenvalues above the rank cutoff of each state contribute.  When a
    state has a degenerate spectrum the value depends on which eigenbasis
    the solver returns for the degenerate block.
    """
    sp = _spectra(e, tol, _cache)
    inv_root = pseudo_inverse_sqrt(e.average_state(), tol)
    total = 0.0
    for p, (w, v) in zip(e.priors, sp.state_eigs):
        keep = w > spectral_cutoff(w, tol)
        for lam, psi in zip(w[keep], v.T[keep]):
            overlap = p * lam * float(np.vdot(psi, inv_root @ psi).real)
            total += overlap**2
    return float(1.0 - total**0.25)


@dataclass(frozen=True)
class BoundReport:
    """Values of all seven bounds for one ensemble.

    ``helstrom`` is set only for two-state ensembles.  ``l4_terms[k]`` is
    the success-probability bound for reference index ``k`` and
    ``l4_argmin`` the smallest index attaining the minimum.
    """

    l0: float
    l1: float
    l2: float
    l3: float
    l4: float
    l5: float
    l6: float
    helstrom: float | None
    effective_dim: int
    l4_argmin: int
    l4_terms: tuple
    top_prior_mass: float

    def values(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in BOUND_NAMES}

    def clamped(self) -> dict[str, float]:
        """Each bound floored at zero, the usable value."""
        return {name: max(v, 0.0) for name, v in self.values().items()}

    def best(self) -> float:
        return max(self.values().values())


def all_bounds(e: Ensemble, tol: Tolerances = DEFAULT_TOL) -> BoundReport:
    """Evaluate every bound, sharing eigen-computations between them.

    Raises
    ------
    InternalInconsistency
        When a relation that holds exactly in theory (``l4 >= l2``, the
        two-state collapse onto the Helstrom value, every bound at most one)
        fails numerically.
    """
    sp = _Spectra(e, tol)
    terms = l4_success_terms(e, tol, sp)
    k = int(np.argmin(terms))
    report = BoundReport(
        l0=bound_l0(e, tol, sp),
        l1=bound_l1(e, tol, sp),
        l2=bound_l2(e, tol, sp),
        l3=bound_l3(e, tol, sp),
        l4=1.0 - float(terms[k]),
        l5=bound_l5(e, tol, sp),
        l6=bound_l6(e, tol, sp),
        helstrom=helstrom(e, tol, sp) if e.m == 2 else None,
        effective_dim=sp.effective_dim,
        l4_argmin=k,
        l4_terms=tuple(float(t) for t in terms),
        top_prior_mass=top_prior_mass(e, sp.effective_dim),
    )
    _check_report(report, tol)
    return report


def _check_report(r: BoundReport, tol: Tolerances) -> None:
    for name, v in r.values().items():
        if v > 1.0 + tol.tol_recon:
            raise InternalInconsistency(f"{name} = {v!r} exceeds 1")
    if r.l4 < r.l2 - RELATION_SLACK:
        raise InternalInconsistency(f"l4 = {r.l4!r} < l2 = {r.l2!r}")
    if r.helstrom is not None:
        for name in ("l4", "l2"):
            gap = abs(getattr(r, name) - r.helstrom)
            if gap > RELATION_SLACK:
                raise InternalInconsistency(f"{name} differs from the Helstrom value by {gap:.3e}")
