"""Randomised sweeps: rank the bounds and check every proven relation between them."""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import BOUND_NAMES, BoundReport, all_bounds
from .ensemble import Ensemble, structured_to_ensemble
from .exact import check_l4_attainability, solve_commuting, solve_structured, solve_two_state
from .io import dumps
from .linalg import DEFAULT_TOL, Tolerances, fidelity, trace_norm
from .sampling import random_commuting_ensemble, random_ensemble, random_structured, trial_seed

__all__ = [
    "RANK_RESOLUTION",
    "CHECK_SLACK",
    "KINDS",
    "rank_bounds",
    "format_ranking",
    "parse_ranking",
    "relation_margins",
    "SweepConfig",
    "SweepSummary",
    "run_sweep",
]

RANK_RESOLUTION = 1e-9
CHECK_SLACK = 1e-9
KINDS = ("general", "commuting", "equiprobable", "structured")


def rank_bounds(report: BoundReport | dict, resolution: float = RANK_RESOLUTION) -> list[list[str]]:
    """Group bound labels (``"L0"``...) from largest to smallest value.

    A label joins the current group when it is within ``resolution`` of the
    group's largest member.
    """
    values = report.values() if isinstance(report, BoundReport) else dict(report)
    items = sorted(((v, int(name[1:])) for name, v in values.items()), key=lambda t: (-t[0], t[1]))
    groups: list[list[str]] = []
    head = None
    for v, idx in items:
        if head is None or head - v > resolution:
            groups.append([])
            head = v
        groups[-1].append(f"L{idx}")
    return [sorted(g, key=lambda s: int(s[1:])) for g in groups]


def format_ranking(groups: list[list[str]]) -> str:
    return ">".join("=".join(g) for g in groups)


def parse_ranking(text: str) -> tuple[frozenset, ...]:
    return tuple(frozenset(part.split("=")) for part in text.replace(" ", "").split(">"))


def relation_margins(e: Ensemble, report: BoundReport, tol: Tolerances = DEFAULT_TOL) -> dict[str, float]:
    """Margins of the inequalities that hold for every ensemble.

    Each margin is non-negative when the relation holds; equalities report
    ``-|difference|``.  Pairwise relations report their worst pair.
    """
    m = e.m
    p = e.priors
    out = {
        "l4_ge_l2": report.l4 - report.l2,
        "l2_ge_l3_over_m_minus_1": report.l2 - report.l3 / (m - 1),
        "success_cap": 1.0 - min(report.l4_terms),
    }
    if report.helstrom is not None:
        out["two_state_l4_eq_helstrom"] = -abs(report.l4 - report.helstrom)
        out["two_state_l2_eq_helstrom"] = -abs(report.l2 - report.helstrom)
        out["two_state_helstrom_ge_l3"] = report.helstrom - report.l3
    if np.all(p == p[0]):
        out["equiprobable_l4_ge_l3"] = report.l4 - report.l3

    fid = np.ones((m, m))
    weighted_lo = weighted_hi = plain_lo = plain_hi = math.inf
    for i in range(m):
        for j in range(i + 1, m):
            f = fidelity(e.states[i], e.states[j], tol)
            fid[i, j] = fid[j, i] = f
            weighted = trace_norm(e.weighted(i) - e.weighted(j), tol)
            plain = trace_norm(e.states[i] - e.states[j], tol)
            weighted_lo = min(weighted_lo, weighted - (p[i] + p[j] - 2 * math.sqrt(p[i] * p[j]) * f))
            weighted_hi = min(weighted_hi, p[i] + p[j] - 2 * p[i] * p[j] * f * f - weighted)
            plain_lo = min(plain_lo, plain - 2 * (1 - f))
            plain_hi = min(plain_hi, 2 * math.sqrt(max(1 - f * f, 0.0)) - plain)
    out["pair_weighted_trace_lower"] = weighted_lo
    out["pair_weighted_trace_upper"] = weighted_hi
    out["pair_trace_fidelity_lower"] = plain_lo
    out["pair_trace_fidelity_upper"] = plain_hi

    a = np.array([sum(p[i] * p[j] * fid[i, j] ** 2 for j in range(m) if j != i) for i in range(m)])
    if a.max() >= 0.5 * a.sum():
        out["dominant_overlap_l4_ge_l3"] = report.l4 - report.l3
    return out


@dataclass(frozen=True)
class SweepConfig:
    seed: int
    trials: int
    m: int
    dim: int
    kind: str = "general"
    tol: Tolerances = DEFAULT_TOL
    max_records: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.m < 2 or self.dim < 2:
            raise ValueError(f"need m >= 2 and dim >= 2, got m={self.m}, dim={self.dim}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "m": self.m,
            "dim": self.dim,
            "kind": self.kind,
            "tolerances": self.tol.as_dict(),
            "max_records": self.max_records,
        }

    def digest(self) -> str:
        return hashlib.sha256(dumps(self.as_dict(), indent=None).encode()).hexdigest()


@dataclass
class _CheckStats:
    evaluated: int = 0
    violations: int = 0
    worst_slack: float = math.inf

    def add(self, margin: float) -> None:
        self.evaluated += 1
        if margin < -CHECK_SLACK:
            self.violations += 1
        self.worst_slack = min(self.worst_slack, margin)


@dataclass
class SweepSummary:
    """Aggregated sweep results.

    ``wins`` counts trials where a single bound is strictly largest;
    ``ties`` counts trials where several share the maximum, and each of
    those is credited in ``shared_wins``.  So ``sum(wins) + ties == trials``.
    """

    config: SweepConfig
    wins: dict = field(default_factory=lambda: {n: 0 for n in BOUND_NAMES})
    shared_wins: dict = field(default_factory=lambda: {n: 0 for n in BOUND_NAMES})
    ties: int = 0
    checks: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @property
    def total_violations(self) -> int:
        return sum(c.violations for c in self.checks.values())

    @property
    def passed(self) -> bool:
        return self.total_violations == 0

    def distinct_winners(self) -> list[str]:
        return [n for n in BOUND_NAMES if self.wins[n] + self.shared_wins[n] > 0]

    def to_doc(self) -> dict:
        cfg = self.config
        return {
            "stamp": {"seed": cfg.seed, "config_hash": cfg.digest()},
            "config": cfg.as_dict(),
            "trials": cfg.trials,
            "wins": dict(self.wins),
            "shared_wins": dict(self.shared_wins),
            "ties": self.ties,
            "checks": {
                name: {"evaluated": c.evaluated, "violations": c.violations, "worst_slack": c.worst_slack}
                for name, c in sorted(self.checks.items())
            },
            "total_violations": self.total_violations,
            "passed": self.passed,
            "records": self.records,
        }


def _trial_ensemble(cfg: SweepConfig, trial: int):
    seed = trial_seed(cfg.seed, trial)
    if cfg.kind == "general":
        return random_ensemble(seed, cfg.m, cfg.dim, cfg.tol), None
    if cfg.kind == "equiprobable":
        e = random_ensemble(seed, cfg.m, cfg.dim, cfg.tol)
        return e.with_priors(np.full(cfg.m, 1.0 / cfg.m)), None
    if cfg.kind == "commuting":
        return random_commuting_ensemble(seed, cfg.m, cfg.dim, cfg.tol), None
    s = random_structured(seed, cfg.m, cfg.tol)
    return structured_to_ensemble(s), s


def _run_trial(args) -> tuple[int, dict, list[str], dict]:
    cfg, trial = args
    tol = cfg.tol
    e, structured = _trial_ensemble(cfg, trial)
    report = all_bounds(e, tol)
    margins = relation_margins(e, report, tol)

    qe = None
    if e.m == 2:
        two = solve_two_state(e, tol)
        qe = two.qe
        margins["two_state_povm_certifies"] = 0.0 if two.certificate.passed else -1.0
    if cfg.kind in ("commuting", "structured"):
        exact = solve_commuting(e, tol)
        if qe is not None:
            margins["two_state_matches_commuting"] = -abs(qe - exact.qe)
        qe = exact.qe
        attain = check_l4_attainability(e, tol)
        if attain.attained:
            margins["attained_l4_equals_exact"] = -abs(qe - report.l4)
            margins["attaining_povm_certifies"] = (
                0.0 if attain.certificate is not None and attain.certificate.passed else -1.0
            )
    if structured is not None:
        sol = solve_structured(structured, tol)
        margins["structured_matches_commuting"] = -abs(sol.qe - qe)
    if qe is not None:
        values = report.values()
        if report.helstrom is not None:
            values["helstrom"] = report.helstrom
        margins["bound_le_exact"] = min(qe - v for v in values.values())

    values = report.values()
    top = max(values.values())
    winners = [n for n in BOUND_NAMES if values[n] >= top - RANK_RESOLUTION]
    record = {"trial": trial, "seed": trial_seed(cfg.seed, trial), **values}
    if qe is not None:
        record["exact"] = qe
    return trial, margins, winners, record


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepSummary:
    """Run ``cfg.trials`` independent trials and aggregate them.

    Trial ``t`` draws its ensemble from ``trial_seed(cfg.seed, t)``.  Aggregation
    only counts and takes minima, so the summary does not depend on
    ``workers``.
    """
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outcomes = [_run_trial(j) for j in jobs]

    summary = SweepSummary(cfg)
    for trial, margins, winners, record in sorted(outcomes, key=lambda o: o[0]):
        for name, margin in margins.items():
            summary.checks.setdefault(name, _CheckStats()).add(margin)
        if len(winners) == 1:
            summary.wins[winners[0]] += 1
        else:
            summary.ties += 1
            for n in winners:
                summary.shared_wins[n] += 1
        if len(summary.records) < cfg.max_records:
            summary.records.append(record)
    return summary
