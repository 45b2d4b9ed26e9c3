import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from operator import add
from typing import List, NamedTuple, Tuple

import numpy as np
from scipy.stats import beta

from .adversaries import forge_run, repudiating_alice_p1, repudiating_alice_p2
from .analysis import abort_probability_bound, forging_bound, repudiation_bound
from .models import Protocol, Role, TrialStats
from .params import Scenario
from .protocols import (
    distribute,
    generate,
    honest_declaration,
    message_coin,
    p1_verify,
    p2_charlie_verify,
    recipient_verdicts,
)

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 0.99
MIN_CHUNK = 500


class TrialOutcome(NamedTuple):
    aborted: bool
    success: bool
    mismatches: int


# Aborted trials stay out of the rate and the histogram, so their verdicts are skipped
ABORTED = TrialOutcome(True, False, 0)


@dataclass
class TrialTally:
    """Partial counts over a set of trials; tallies add in any order."""

    trials: int = 0
    successes: int = 0
    aborts: int = 0
    histogram: Counter = field(default_factory=Counter)

    def record(self, outcome: TrialOutcome) -> None:
        self.trials += 1
        if outcome.aborted:
            self.aborts += 1
            return
        self.successes += int(outcome.success)
        self.histogram[outcome.mismatches] += 1

    def __add__(self, other: "TrialTally") -> "TrialTally":
        return TrialTally(
            self.trials + other.trials,
            self.successes + other.successes,
            self.aborts + other.aborts,
            self.histogram + other.histogram,
        )


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Stream for one trial, a pure function of (master_seed, trial_index)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial_index,)))


def confidence_interval(successes: int, trials: int, level: float = DEFAULT_LEVEL) -> Tuple[float, float]:
    """Exact two-sided Clopper-Pearson interval for a binomial rate."""
    if not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, got {successes}/{trials}")
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if trials == 0:
        return 0.0, 1.0
    alpha = 1 - level
    low = 0.0 if successes == 0 else float(beta.ppf(alpha / 2, successes, trials - successes + 1))
    high = 1.0 if successes == trials else float(beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return low, high


def run_trial(scenario: Scenario, trial_index: int) -> TrialOutcome:
    rng = trial_rng(scenario.master_seed, trial_index)
    protocol, params, adversary = scenario.protocol, scenario.params, scenario.adversary

    if adversary.role is Role.FORGE:
        run = forge_run(protocol, params, adversary, rng)
        if run.aborted:
            return ABORTED
        if protocol is Protocol.P2:
            verdict = p2_charlie_verify(run.declaration, run.charlie, params)
        else:
            verdict = p1_verify(run.declaration, run.charlie, params)
        return TrialOutcome(False, verdict.accepted, verdict.mismatch_count)

    if adversary.role is Role.REPUDIATE:
        if protocol is Protocol.P2:
            pair, decl = repudiating_alice_p2(params, rng)
        else:
            pair, decl = repudiating_alice_p1(params, adversary, rng)
        dist = distribute(protocol, pair, params, rng)
        if dist.aborted:
            return ABORTED
        bob, charlie = recipient_verdicts(protocol, decl, dist, params)
        return TrialOutcome(False, bob.accepted and not charlie.accepted, charlie.mismatch_count)

    pair = generate(protocol, params, rng)
    dist = distribute(protocol, pair, params, rng)
    if dist.aborted:
        return ABORTED
    decl = honest_declaration(pair, message_coin(rng))
    bob, charlie = recipient_verdicts(protocol, decl, dist, params)
    mismatches = max(bob.mismatch_count, charlie.mismatch_count)
    return TrialOutcome(False, bob.accepted and charlie.accepted, mismatches)


def run_chunk(scenario: Scenario, start: int, stop: int) -> TrialTally:
    tally = TrialTally()
    for index in range(start, stop):
        tally.record(run_trial(scenario, index))
    return tally


def scenario_bound(scenario: Scenario) -> float:
    """The closed-form bound a scenario's success rate is compared with."""
    params, role = scenario.params, scenario.adversary.role
    if role is Role.REPUDIATE:
        return repudiation_bound(scenario.protocol, params.s_a, params.s_v, params.length)
    if role is Role.FORGE:
        return forging_bound(scenario.protocol, params.s_v, params.r, params.length)
    return abort_probability_bound(params.r, params.length)


def summarize(tally: TrialTally, bound: float, level: float = DEFAULT_LEVEL) -> TrialStats:
    completed = tally.trials - tally.aborts
    rate = tally.successes / completed if completed else 0.0
    ci_low, ci_high = confidence_interval(tally.successes, completed, level)
    histogram = {k: tally.histogram[k] / completed for k in sorted(tally.histogram)}
    return TrialStats(
        trials=tally.trials,
        successes=tally.successes,
        aborts=tally.aborts,
        rate=rate,
        ci_low=ci_low,
        ci_high=ci_high,
        bound=bound,
        mismatch_histogram=histogram,
    )


def _chunks(trials: int, workers: int) -> List[Tuple[int, int]]:
    size = max(MIN_CHUNK, math.ceil(trials / (4 * workers)))
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def run_trials(scenario: Scenario, workers: int = 1, level: float = DEFAULT_LEVEL) -> TrialStats:
    """Run the scenario's trials and reduce them into TrialStats.

    Each trial seeds its own stream from (master_seed, index), so the result
    does not depend on ``workers`` or on the order chunks finish in.
    """
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    logger.info(
        "running %d %s trials (%s, L=%d, seed=%d, workers=%d)",
        scenario.trials,
        scenario.protocol.value,
        scenario.adversary.role.value,
        scenario.params.length,
        scenario.master_seed,
        workers,
    )
    chunks = _chunks(scenario.trials, workers)
    if workers == 1:
        tallies = [run_chunk(scenario, start, stop) for start, stop in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_chunk, scenario, start, stop) for start, stop in chunks]
            tallies = [f.result() for f in futures]
    for (start, stop), tally in zip(chunks, tallies):
        logger.debug("chunk [%d, %d): %d successes, %d aborts", start, stop, tally.successes, tally.aborts)
    stats = summarize(reduce(add, tallies, TrialTally()), scenario_bound(scenario), level)
    logger.info(
        "finished: rate=%.6g ci=[%.6g, %.6g] bound=%.6g aborts=%d",
        stats.rate,
        stats.ci_low,
        stats.ci_high,
        stats.bound,
        stats.aborts,
    )
    return stats
