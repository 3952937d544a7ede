"""Exact minimum-error solutions for solvable ensembles, and optimality checks.

Three classes are solved exactly: two states (Helstrom measurement),
mutually commuting states (classical maximum likelihood in a shared
eigenbasis) and the structured family.  Every returned measurement is run
through :func:`certify_optimal` before it is handed back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import helstrom, l4_success_terms
from .ensemble import AMBIGUOUS, UNAMBIGUOUS, Ensemble, Povm, StructuredEnsemble, basis_projector, structured_to_ensemble
from .errors import CertificateFailed, DimMismatch, NotCommuting, NotUnambiguous, ValidationError, WrongArity
from .linalg import DEFAULT_TOL, Tolerances, hermitian_eig, hermiticity_defect, operator_norm, positive_part, support_projector

__all__ = [
    "COMMUTE_TOL",
    "ORTHOGONALITY_TOL",
    "Certificate",
    "ExactResult",
    "KAttainability",
    "AttainabilityReport",
    "StructuredSolution",
    "success_probability",
    "certify_optimal",
    "solve_two_state",
    "solve_commuting",
    "solve_exact",
    "check_l4_attainability",
    "solve_structured",
    "unambiguous_feasibility",
]

COMMUTE_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-8
CONSISTENCY_TOL = 1e-9
UNAMBIGUOUS_TOL = 1e-9

TWO_STATE = "two_state_helstrom"
COMMUTING = "commuting_classical"
STRUCTURED = "structured_family"


@dataclass(frozen=True)
class Certificate:
    """Outcome of the optimality test ``R - p_j rho_j >= 0`` for all ``j``.

    ``margins[j]`` is the smallest eigenvalue of ``R - p_j rho_j`` and
    ``min_margin`` the smallest of them.
    """

    r_matrix: np.ndarray
    hermiticity_defect: float
    margins: tuple
    min_margin: float
    passed: bool

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class ExactResult:
    qe: float
    optimal_povm: Povm
    method: str
    certificate: Certificate


@dataclass(frozen=True)
class KAttainability:
    k: int
    term: float
    max_overlap: float
    orthogonal: bool
    attains_min: bool


@dataclass(frozen=True)
class AttainabilityReport:
    per_k: tuple
    attained: bool
    witness_k: int | None = None
    povm: Povm | None = None
    certificate: Certificate | None = None


@dataclass(frozen=True)
class StructuredSolution:
    qe: float
    qu: float
    ratio: float
    twice_qe_holds: bool
    degenerate_ratio: bool
    ambiguous_povm: Povm
    unambiguous_povm: Povm
    certificate: Certificate


def _check_povm_for(e: Ensemble, povm: Povm, kind: str, count: int) -> None:
    if povm.kind != kind:
        raise WrongArity(f"expected a {kind} POVM, got {povm.kind}")
    if len(povm) != count:
        raise WrongArity(f"expected {count} POVM elements for {e.m} states, got {len(povm)}")
    if povm.dim != e.dim:
        raise DimMismatch(f"POVM acts on dimension {povm.dim}, states on {e.dim}")


def success_probability(e: Ensemble, povm: Povm) -> float:
    """``sum_i p_i Tr(rho_i E_i)`` for an ambiguous POVM."""
    _check_povm_for(e, povm, AMBIGUOUS, e.m)
    return float(sum(e.priors[i] * np.trace(e.states[i] @ povm.elements[i]).real for i in range(e.m)))


def certify_optimal(e: Ensemble, povm: Povm, tol: Tolerances = DEFAULT_TOL) -> Certificate:
    """Sufficient optimality test for a minimum-error measurement.

    Builds ``R = sum_i p_i rho_i E_i``; the measurement is optimal when ``R``
    is Hermitian and ``R - p_j rho_j`` is positive semidefinite for every
    ``j``.  A failing test is reported, not raised.
    """
    _check_povm_for(e, povm, AMBIGUOUS, e.m)
    r = sum(e.weighted(i) @ povm.elements[i] for i in range(e.m))
    defect = hermiticity_defect(r)
    rh = 0.5 * (r + r.conj().T)
    margins = tuple(float(hermitian_eig(rh - e.weighted(j), tol).eigenvalues[0]) for j in range(e.m))
    worst = min(margins)
    return Certificate(r, defect, margins, worst, defect <= tol.tol_recon and worst >= -tol.tol_psd)


def _finish(e: Ensemble, povm: Povm, qe: float, method: str, tol: Tolerances) -> ExactResult:
    cert = certify_optimal(e, povm, tol)
    if not cert.passed:
        raise CertificateFailed(
            f"{method}: constructed POVM failed certification (min margin {cert.min_margin:.3e}, "
            f"hermiticity defect {cert.hermiticity_defect:.3e})"
        )
    gap = abs(qe - (1.0 - success_probability(e, povm)))
    if gap > CONSISTENCY_TOL:
        raise CertificateFailed(f"{method}: error probability disagrees with its POVM by {gap:.3e}")
    return ExactResult(qe, povm, method, cert)


def _hermitian(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def solve_two_state(e: Ensemble, tol: Tolerances = DEFAULT_TOL) -> ExactResult:
    """Helstrom measurement: project onto the positive part of ``p2 rho2 - p1 rho1``."""
    if e.m != 2:
        raise WrongArity(f"two-state solver needs 2 states, got {e.m}")
    plus = _hermitian(support_projector(positive_part(e.weighted(1) - e.weighted(0), tol), tol))
    povm = Povm((_hermitian(np.eye(e.dim) - plus), plus), tol=tol)
    return _finish(e, povm, helstrom(e, tol), TWO_STATE, tol)


def max_commutator(e: Ensemble) -> float:
    worst = 0.0
    for i in range(e.m):
        for j in range(i + 1, e.m):
            a, b = e.states[i], e.states[j]
            worst = max(worst, float(np.max(np.abs(a @ b - b @ a))))
    return worst


def solve_commuting(e: Ensemble, tol: Tolerances = DEFAULT_TOL) -> ExactResult:
    """Exact solution for mutually commuting states.

    The shared eigenbasis comes from diagonalising the generic combination
    ``sum_i (1 + (i + 1)/(m + 1)) p_i rho_i``.  Each basis vector is then
    assigned to the state with the largest weighted probability on it
    (smallest index on ties).

    Raises
    ------
    NotCommuting
        If some pair of states fails to commute, or some state is not
        diagonal in the computed basis (degenerate combinations).
    """
    comm = max_commutator(e)
    if comm > COMMUTE_TOL:
        raise NotCommuting(
            f"states do not commute (max |[rho_i, rho_j]| = {comm:.3e}); "
            "general ensembles need semidefinite programming, which is not supported"
        )
    combo = sum((1.0 + (i + 1) / (e.m + 1)) * e.weighted(i) for i in range(e.m))
    basis = hermitian_eig(combo, tol).eigenvectors
    scores = np.empty((e.m, e.dim))
    for i, rho in enumerate(e.states):
        d = basis.conj().T @ rho @ basis
        off = float(np.max(np.abs(d - np.diag(np.diag(d)))))
        if off > COMMUTE_TOL:
            raise NotCommuting(f"state {i} is not diagonal in the shared basis (off-diagonal {off:.3e})")
        scores[i] = e.priors[i] * np.diag(d).real
    winner = np.argmax(scores, axis=0)
    elements = []
    for i in range(e.m):
        cols = basis[:, winner == i]
        elements.append(_hermitian(cols @ cols.conj().T))
    povm = Povm(tuple(elements), tol=tol)
    qe = 1.0 - float(np.sum(np.max(scores, axis=0)))
    return _finish(e, povm, qe, COMMUTING, tol)


def solve_exact(e: Ensemble, tol: Tolerances = DEFAULT_TOL) -> ExactResult:
    """Dispatch to the two-state or commuting solver."""
    if e.m == 2:
        return solve_two_state(e, tol)
    return solve_commuting(e, tol)


def _overlap(p: np.ndarray, q: np.ndarray, tol: Tolerances) -> float:
    # ||P Q||^2 = ||Q P Q|| and Q P Q is Hermitian.
    return math.sqrt(max(operator_norm(_hermitian(q @ p @ q), tol), 0.0))


def check_l4_attainability(e: Ensemble, tol: Tolerances = DEFAULT_TOL) -> AttainabilityReport:
    """Test, for every reference index ``k``, whether the positive parts
    ``(p_j rho_j - p_k rho_k)_+`` (``j != k``) have mutually orthogonal supports.

    The bound ``l4`` is attained exactly when some ``k`` has orthogonal
    supports; the report also records whether each ``k`` minimises the
    ``l4`` expression.  For the first attaining ``k`` the measurement
    ``E_j = projector onto supp (p_j rho_j - p_k rho_k)_+``, ``E_k = I - sum``
    is built and certified.
    """
    terms = l4_success_terms(e, tol)
    best = float(np.min(terms))
    per_k = []
    witness = None
    witness_projectors = None
    for k in range(e.m):
        projectors = {
            j: _hermitian(support_projector(positive_part(e.weighted(j) - e.weighted(k), tol), tol))
            for j in range(e.m)
            if j != k
        }
        keys = sorted(projectors)
        overlap = max(
            (_overlap(projectors[a], projectors[b], tol) for ia, a in enumerate(keys) for b in keys[ia + 1 :]),
            default=0.0,
        )
        orthogonal = overlap <= ORTHOGONALITY_TOL
        attains = float(terms[k]) - best <= CONSISTENCY_TOL
        per_k.append(KAttainability(k, float(terms[k]), overlap, orthogonal, attains))
        if witness is None and orthogonal and attains:
            witness, witness_projectors = k, projectors
    if witness is None:
        return AttainabilityReport(tuple(per_k), False)
    elements = [None] * e.m
    for j, proj in witness_projectors.items():
        elements[j] = proj
    elements[witness] = _hermitian(np.eye(e.dim) - sum(witness_projectors.values()))
    try:
        povm = Povm(tuple(elements), tol=tol)
    except ValidationError:
        # Supports orthogonal only to within ORTHOGONALITY_TOL.
        return AttainabilityReport(tuple(per_k), True, witness)
    return AttainabilityReport(tuple(per_k), True, witness, povm, certify_optimal(e, povm, tol))


def solve_structured(s: StructuredEnsemble, tol: Tolerances = DEFAULT_TOL) -> StructuredSolution:
    """Closed-form ambiguous and unambiguous solutions for the structured family.

    With weights ``w_i = p_i alpha_i`` the inconclusive probability is
    ``sum w`` and the minimum error probability ``sum w - max w``.  The
    ratio is ``inf`` when only the error probability vanishes and ``nan``
    (with ``degenerate_ratio`` set) when both do.
    """
    w = s.priors * s.alphas
    qu = float(np.sum(w))
    k = int(np.argmax(w))
    qe = qu - float(w[k])
    degenerate = qe == 0.0
    if degenerate:
        ratio = math.inf if qu > 0 else math.nan
    else:
        ratio = qu / qe
    dim = s.m + 1
    amb = [basis_projector(dim, i + 1) for i in range(s.m)]
    amb[k] = basis_projector(dim, 0, k + 1)
    ambiguous = Povm(tuple(amb), tol=tol)
    unambiguous = Povm(tuple(basis_projector(dim, i) for i in range(dim)), kind=UNAMBIGUOUS, tol=tol)

    e = structured_to_ensemble(s)
    result = _finish(e, ambiguous, qe, STRUCTURED, tol)
    q_fail = unambiguous_feasibility(e, unambiguous, tol)
    if abs(q_fail - qu) > CONSISTENCY_TOL:
        raise CertificateFailed(f"unambiguous POVM fails with probability {q_fail!r}, expected {qu!r}")
    return StructuredSolution(
        qe=qe,
        qu=qu,
        ratio=ratio,
        twice_qe_holds=bool(qu >= 2.0 * qe - 1e-12),
        degenerate_ratio=degenerate,
        ambiguous_povm=ambiguous,
        unambiguous_povm=unambiguous,
        certificate=result.certificate,
    )


def unambiguous_feasibility(e: Ensemble, povm: Povm, tol: Tolerances = DEFAULT_TOL) -> float:
    """Inconclusive probability ``sum_i p_i Tr(rho_i Pi_0)`` of an error-free POVM.

    Raises
    ------
    NotUnambiguous
        If some ``Tr(Pi_i rho_{j-1})``, ``i != j``, exceeds ``1e-9``; the worst
        pair of element indices and its value are attached.
    """
    _check_povm_for(e, povm, UNAMBIGUOUS, e.m + 1)
    worst, pair = 0.0, (0, 0)
    for i in range(1, e.m + 1):
        for j in range(1, e.m + 1):
            if i == j:
                continue
            t = float(np.trace(povm.elements[i] @ e.states[j - 1]).real)
            if t > worst:
                worst, pair = t, (i, j)
    if worst > UNAMBIGUOUS_TOL:
        raise NotUnambiguous(
            f"element {pair[0]} fires on state {pair[1] - 1} with probability {worst:.3e}", pair, worst
        )
    return float(sum(e.priors[i] * np.trace(e.states[i] @ povm.elements[0]).real for i in range(e.m)))
