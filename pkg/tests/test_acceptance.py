"""Acceptance gate: ten criteria, one PASS/FAIL line each.

Run under pytest (lines are printed in the terminal summary) or directly
with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import math
import os
import sys

import numpy as np
import pytest

from qdiscrim.bounds import BOUND_NAMES, all_bounds
from qdiscrim.cli import main
from qdiscrim.compare import SweepConfig, format_ranking, parse_ranking, rank_bounds, run_sweep
from qdiscrim.ensemble import StructuredEnsemble
from qdiscrim.exact import solve_commuting, solve_structured
from qdiscrim.golden import example_ensemble
from qdiscrim.io import dumps, ensemble_from_doc, ensemble_to_doc, parse_document
from qdiscrim.sampling import random_ensemble

EIG = 1e-7
EXACT = 1e-9
SQRT2 = math.sqrt(2)
WORKERS = min(4, os.cpu_count() or 1)

# Shared with conftest.py, which prints these after the run.
RESULTS: dict[int, str] = {}

GOLDEN = {
    1: (
        {
            "l0": 0.0,
            "l1": 0.0,
            "l2": 5 / 36,
            "l3": 1 / 24,
            "l4": 7 / 36,
            "l5": (13 - math.sqrt(61)) / 36,
            "l6": 1 - (10 / 13) ** 0.25,
        },
        "L4>L5>L2>L6>L3>L1=L0",
    ),
    2: (
        {
            "l0": 1 / 3,
            "l1": 1 / 3,
            "l2": (2 - SQRT2) / 6,
            "l3": 1 / 9,
            "l4": (2 - SQRT2) / 3,
            "l5": 0.0,
            "l6": 1 - ((5 + 2 * SQRT2) / 12) ** 0.25,
        },
        "L0=L1>L4>L3>L6>L2>L5",
    ),
    3: (
        {
            "l0": 0.0,
            "l1": 1 / 3,
            "l2": 1 / 4,
            "l3": 1 / 12,
            "l4": 1 / 3,
            "l5": (3 - math.sqrt(3)) / 6,
            "l6": 1 - (2 / 3) ** 0.25,
        },
        "L1=L4>L2>L5>L6>L3>L0",
    ),
    4: (
        {
            "l0": 0.0,
            "l1": -47 / 25,
            "l2": 0.1350,
            "l3": 0.1377,
            "l4": 0.18,
            "l5": (90 - 9 * math.sqrt(66)) / 100,
            "l6": 1 - 0.694**0.25,
        },
        "L4>L5>L3>L2>L6>L0>L1",
    ),
}


def golden_example(n: int) -> tuple[bool, str]:
    values, ordering = GOLDEN[n]
    report = all_bounds(example_ensemble(n))
    misses = [
        f"{name.upper()}={getattr(report, name):.12g} (want {values[name]:.12g})"
        for name in BOUND_NAMES
        if abs(getattr(report, name) - values[name]) > EIG
    ]
    got = format_ranking(rank_bounds(report))
    if parse_ranking(got) != parse_ranking(ordering):
        misses.append(f"ordering {got} (want {ordering})")
    return not misses, "; ".join(misses) or f"all seven values within {EIG:g}, ordering {got}"


def criterion_5() -> tuple[bool, str]:
    result = solve_commuting(example_ensemble(1))
    r_dev = float(np.abs(result.certificate.r_matrix - np.diag([1 / 6, 1 / 6, 2 / 9, 1 / 4])).max())
    ok = abs(result.qe - 7 / 36) <= EXACT and result.certificate.passed and r_dev <= EIG
    return ok, f"QE={result.qe!r}, certificate {result.certificate.verdict}, max|R - R_expected|={r_dev:.2e}"


def criterion_6() -> tuple[bool, str]:
    s = solve_structured(StructuredEnsemble(np.array([1 / 2, 1 / 3, 1 / 4]), np.full(3, 1 / 3)))
    ok = abs(s.qu - 13 / 36) <= EXACT and abs(s.qe - 7 / 36) <= EXACT and s.twice_qe_holds is False
    return ok, f"QU={s.qu!r}, QE={s.qe!r}, twice_qe_holds={s.twice_qe_holds}"


def criterion_7() -> tuple[bool, str]:
    ratios = {}
    for eps in (1e-2, 1e-4, 1e-6):
        # uniform priors with alphas (0.3, 3 eps, 3 eps) give p_i alpha_i = (0.1, eps, eps)
        s = solve_structured(StructuredEnsemble(np.array([0.3, 3 * eps, 3 * eps]), np.full(3, 1 / 3)))
        ratios[eps] = s.ratio
    values = list(ratios.values())
    ok = ratios[1e-4] > 100 and ratios[1e-6] > 1e4 and all(a < b for a, b in zip(values, values[1:]))
    return ok, ", ".join(f"eps={k:g}: {v:.6g}" for k, v in ratios.items())


PROPERTY_SWEEPS = {
    "general": (
        SweepConfig(seed=20240, trials=1000, m=3, dim=2, kind="general"),
        [
            "l4_ge_l2",
            "l2_ge_l3_over_m_minus_1",
            "success_cap",
            "pair_trace_fidelity_lower",
            "pair_trace_fidelity_upper",
            "pair_weighted_trace_lower",
            "pair_weighted_trace_upper",
        ],
    ),
    "two-state": (
        SweepConfig(seed=20241, trials=1000, m=2, dim=3, kind="general"),
        [
            "two_state_l4_eq_helstrom",
            "two_state_l2_eq_helstrom",
            "two_state_helstrom_ge_l3",
            "two_state_povm_certifies",
            "dominant_overlap_l4_ge_l3",
        ],
    ),
    "equiprobable": (
        SweepConfig(seed=20242, trials=1000, m=3, dim=2, kind="equiprobable"),
        ["equiprobable_l4_ge_l3", "l4_ge_l2"],
    ),
    "commuting": (
        SweepConfig(seed=20243, trials=1000, m=3, dim=3, kind="commuting"),
        ["bound_le_exact", "l4_ge_l2", "success_cap"],
    ),
}


def criterion_8() -> tuple[bool, str]:
    problems = []
    evaluated = 0
    for label, (cfg, required) in PROPERTY_SWEEPS.items():
        summary = run_sweep(cfg, workers=WORKERS)
        for name, stats in summary.checks.items():
            evaluated += stats.evaluated
            if stats.violations:
                problems.append(f"{label}/{name}: {stats.violations} violations (worst {stats.worst_slack:.2e})")
        for name in required:
            if summary.checks.get(name) is None or summary.checks[name].evaluated == 0:
                problems.append(f"{label}/{name}: never evaluated")
        for name in required[:1]:
            if summary.checks[name].evaluated != cfg.trials:
                problems.append(f"{label}/{name}: evaluated {summary.checks[name].evaluated} of {cfg.trials}")
    return not problems, "; ".join(problems) or f"4 sweeps x 1000 trials, {evaluated} relation checks, 0 violations"


def _cli(*argv) -> tuple[int, str]:
    out = io.StringIO()
    code = main(list(argv), stdout=out, stderr=io.StringIO())
    return code, out.getvalue()


def criterion_9() -> tuple[bool, str]:
    argv = ("compare", "--seed", "7", "--trials", "200", "--m", "3", "--dim", "2", "--json")
    first, second = _cli(*argv), _cli(*argv)
    same_report = first == second and first[0] == 0
    exact = True
    for seed in range(50):
        e = random_ensemble(seed, 3, 3)
        back = ensemble_from_doc(parse_document(dumps(ensemble_to_doc(e))))
        exact &= all(a.tobytes() == b.tobytes() for a, b in zip(e.states, back.states))
        exact &= e.priors.tobytes() == back.priors.tobytes()
    return same_report and exact, f"compare reports identical: {same_report}; 50 round trips bit-exact: {exact}"


def criterion_10() -> tuple[bool, str]:
    code, out = _cli("paper-examples")
    failing = [line for line in out.splitlines() if line.startswith("FAIL")]
    detail = f"exit {code}"
    if failing:
        detail += "; " + "; ".join(line.split("  ")[1] for line in failing)
    return code == 0 and not failing, detail


CRITERIA = {
    1: ("Example 1 bounds and ordering", lambda: golden_example(1)),
    2: ("Example 2 bounds and ordering", lambda: golden_example(2)),
    3: ("Example 3 bounds and ordering", lambda: golden_example(3)),
    4: ("Example 4 bounds and ordering", lambda: golden_example(4)),
    5: ("commuting solver on Example 1 with certificate", criterion_5),
    6: ("structured family: QU=13/36, QE=7/36, QU < 2 QE", criterion_6),
    7: ("QU/QE grows without bound", criterion_7),
    8: ("property sweeps", criterion_8),
    9: ("determinism and bit-exact round trip", criterion_9),
    10: ("paper-examples command exits 0", criterion_10),
}


def evaluate(n: int) -> tuple[bool, str]:
    title, check = CRITERIA[n]
    ok, detail = check()
    RESULTS[n] = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    return ok, RESULTS[n]


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, line = evaluate(n)
    print(line)
    assert ok, line


if __name__ == "__main__":
    outcomes = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in outcomes:
        print(line)
    sys.exit(0 if all(ok for ok, _ in outcomes) else 1)
