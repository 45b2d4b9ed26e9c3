"""
Analytic checks behind ``verify``. Each returns a CheckReport instead of raising.
"""

from itertools import product
from typing import Callable, Dict, Iterable, List

import numpy as np

from .analysis import C_MAX, C_MIN
from .errors import UnknownCheckError
from .models import Bb84State, CheckReport
from .quantum import (
    B92_PAIRS,
    BB84_VECTORS,
    b92_counterexample,
    conjugate_declarations,
    cost_matrix,
    derived_cost_matrix,
    expected_cost,
    expected_costs,
    min_cost_povm,
    pauli_correct,
    pauli_matrix,
    random_povms,
)

EXACT_TOLERANCE = 1e-12
SAMPLE_TOLERANCE = 1e-9
Q_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
RANDOM_POVMS = 10_000
CHECK_SEED = 1234


def check_cmin() -> CheckReport:
    costs = [expected_cost(min_cost_povm(q)) for q in Q_GRID]
    exact = all(abs(c - C_MIN) <= EXACT_TOLERANCE for c in costs)
    elements, labels = random_povms(RANDOM_POVMS, np.random.default_rng(CHECK_SEED))
    sampled = float(np.min(expected_costs(elements, labels)))
    passed = exact and sampled >= C_MIN - SAMPLE_TOLERANCE
    detail = f"optimal family {costs}; lowest of {RANDOM_POVMS} random POVMs {sampled:.12g}"
    return CheckReport("cmin", passed, costs[Q_GRID.index(0.5)], detail)


def check_cmax() -> CheckReport:
    costs = [expected_cost(conjugate_declarations(min_cost_povm(q))) for q in Q_GRID]
    exact = all(abs(c - C_MAX) <= EXACT_TOLERANCE for c in costs)
    elements, labels = random_povms(RANDOM_POVMS, np.random.default_rng(CHECK_SEED + 1))
    sampled = max(
        float(np.max(expected_costs(elements, labels))),
        float(np.max(expected_costs(elements, (labels + 2) % 4))),
    )
    passed = exact and sampled <= C_MAX + SAMPLE_TOLERANCE
    detail = f"conjugate-declared family {costs}; highest random POVM {sampled:.12g}"
    return CheckReport("cmax", passed, costs[Q_GRID.index(0.5)], detail)


def check_costmatrix() -> CheckReport:
    printed = cost_matrix().entries
    derived = derived_cost_matrix().entries
    deviation = float(np.max(np.abs(printed - derived)))
    reference_row = sorted((0, 0.25, 0.5, 0.25))
    rows_ok = all(sorted(row) == reference_row for row in printed.tolist())
    passed = (
        deviation <= EXACT_TOLERANCE
        and bool(np.all(np.diag(printed) == 0))
        and bool(np.array_equal(printed, printed.T))
        and rows_ok
    )
    return CheckReport("costmatrix", passed, deviation, "printed vs Born-rule derived matrix")


def check_pauli() -> CheckReport:
    good = 0
    for a, b in product((0, 1), repeat=2):
        images = {pauli_correct(a, b, s) for s in Bb84State}
        involution = all(pauli_correct(a, b, pauli_correct(a, b, s)) is s for s in Bb84State)
        matrix = pauli_matrix(a, b)
        # |<relabelled| X^a Z^b |s>| = 1 means equal up to global phase
        phases = all(
            abs(abs(np.vdot(BB84_VECTORS[int(pauli_correct(a, b, s))], matrix @ BB84_VECTORS[int(s)])) - 1)
            <= EXACT_TOLERANCE
            for s in Bb84State
        )
        if len(images) == 4 and involution and phases:
            good += 1
    return CheckReport("pauli", good == 4, float(good), f"{good}/4 corrections permute the BB84 set")


def check_b92() -> CheckReport:
    result = b92_counterexample()
    nonnegative = all(p >= -EXACT_TOLERANCE for p in result.table.values())
    rows = [sum(result.table[(sent, d)] for d in B92_PAIRS) for sent in B92_PAIRS]
    rows_ok = all(abs(total - 1) <= EXACT_TOLERANCE for total in rows)
    passed = (
        nonnegative
        and rows_ok
        and result.p_both_wrong <= EXACT_TOLERANCE
        and abs(result.p_slot2_correct_given_slot1_wrong - 1) <= EXACT_TOLERANCE
    )
    detail = (
        f"P(both wrong)={result.p_both_wrong:.3g}, "
        f"P(slot2 right | slot1 wrong)={result.p_slot2_correct_given_slot1_wrong:.15g}"
    )
    return CheckReport("b92", passed, result.p_both_wrong, detail)


CHECKS: Dict[str, Callable[[], CheckReport]] = {
    "cmin": check_cmin,
    "cmax": check_cmax,
    "pauli": check_pauli,
    "costmatrix": check_costmatrix,
    "b92": check_b92,
}


def verify_check(name: str) -> CheckReport:
    try:
        check = CHECKS[name]
    except KeyError:
        raise UnknownCheckError(f"unknown check {name!r}; choose from {', '.join(CHECKS)} or all")
    return check()


def run_checks(names: Iterable[str]) -> List[CheckReport]:
    selected: List[str] = []
    for name in names:
        selected.extend(CHECKS if name == "all" else [name])
    return [verify_check(name) for name in selected]
