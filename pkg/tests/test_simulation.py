import math
import time

import numpy as np
import pytest
from scipy.stats import binomtest

from qdsbench.app.core.analysis import abort_probability_exact, p1_forging_bound, p1_repudiation_bound, p2_forging_bound
from qdsbench.app.core.models import Protocol, Role
from qdsbench.app.core.params import AdversaryConfig, ProtocolParams, Scenario
from qdsbench.app.core.simulation import (
    TrialOutcome,
    TrialTally,
    confidence_interval,
    run_chunk,
    run_trials,
    trial_rng,
)


def scenario(protocol, role=Role.HONEST, trials=200, seed=1, **params):
    target = params.pop("target_fraction", None)
    knows = params.pop("knows_kept_set", True)
    return Scenario(
        protocol=protocol,
        params=ProtocolParams(**params),
        adversary=AdversaryConfig(role=role, target_fraction=target, knows_kept_set=knows),
        trials=trials,
        master_seed=seed,
    )


def test_confidence_interval():
    low, high = confidence_interval(5, 100, 0.95)
    assert low == pytest.approx(0.0164, abs=5e-4)
    assert high == pytest.approx(0.1128, abs=5e-4)
    assert confidence_interval(0, 50, 0.99)[0] == 0.0
    assert confidence_interval(50, 50, 0.99)[1] == 1.0
    assert confidence_interval(0, 0) == (0.0, 1.0)
    with pytest.raises(ValueError):
        confidence_interval(6, 5)


def test_trial_rng_depends_only_on_seed_and_index():
    a = trial_rng(42, 7).random(5)
    b = trial_rng(42, 7).random(5)
    c = trial_rng(42, 8).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_tally_addition_is_order_independent():
    outcomes = [
        TrialOutcome(False, True, 0),
        TrialOutcome(True, False, 3),
        TrialOutcome(False, False, 2),
        TrialOutcome(False, True, 0),
    ]
    parts = []
    for outcome in outcomes:
        tally = TrialTally()
        tally.record(outcome)
        parts.append(tally)
    forward = parts[0] + parts[1] + parts[2] + parts[3]
    backward = parts[3] + (parts[2] + (parts[1] + parts[0]))
    assert forward == backward
    assert (forward.trials, forward.successes, forward.aborts) == (4, 2, 1)
    # aborted trials stay out of the histogram
    assert forward.histogram == {0: 2, 2: 1}


@pytest.mark.parametrize("protocol", list(Protocol))
def test_honest_runs_are_complete(protocol):
    stats = run_trials(scenario(protocol, length=512, s_v=0.1, r=0.1, trials=300))
    assert stats.trials == 300
    # the band sits 4.5 standard deviations out, so aborts are rare
    assert stats.aborts <= 1
    assert stats.rate == 1.0
    assert stats.mismatch_histogram == {0: 1.0}
    assert stats.bound == pytest.approx(4 * math.exp(-10.24))


def test_run_trials_is_deterministic():
    s = scenario(Protocol.P1, Role.FORGE, trials=150, length=128, s_v=0.05, r=0.2, seed=99)
    assert run_trials(s) == run_trials(s)
    other = scenario(Protocol.P1, Role.FORGE, trials=150, length=128, s_v=0.05, r=0.2, seed=100)
    assert run_trials(other).mismatch_histogram != run_trials(s).mismatch_histogram


def test_chunks_combine_to_the_full_run():
    s = scenario(Protocol.P2, Role.FORGE, trials=120, length=64, s_v=0.1, r=0.3)
    whole = run_chunk(s, 0, 120)
    pieces = run_chunk(s, 80, 120) + run_chunk(s, 0, 40) + run_chunk(s, 40, 80)
    assert whole == pieces


def test_parallel_run_matches_serial():
    s = scenario(Protocol.P2, Role.REPUDIATE, trials=1200, length=40, s_v=0.1, r=0.3, seed=5)
    assert run_trials(s, workers=2) == run_trials(s, workers=1)


def test_p2_repudiation_rate_matches_combinatorics():
    # success iff Charlie kept both flipped bits: probability 1/4
    s = scenario(Protocol.P2, Role.REPUDIATE, trials=4000, length=20, s_v=0.1, r=0.45, seed=3)
    stats = run_trials(s)
    assert abs(stats.rate - 0.25) < 0.03
    assert stats.bound == pytest.approx(0.25)
    assert stats.ci_low <= stats.rate <= stats.ci_high


def test_p1_forgery_dominated_by_bound():
    s = scenario(Protocol.P1, Role.FORGE, trials=1500, length=512, s_v=0.03, r=0.05, seed=8)
    stats = run_trials(s)
    assert stats.bound == pytest.approx(p1_forging_bound(0.03, 0.05, 512))
    assert stats.ci_high <= stats.bound
    # some trials abort at r = 0.05, none count toward the rate
    assert stats.successes + stats.aborts <= stats.trials


def test_p1_realistic_forgery_dominated_by_bound():
    s = scenario(
        Protocol.P1,
        Role.FORGE,
        trials=500,
        length=512,
        s_v=0.03,
        r=0.05,
        knows_kept_set=False,
    )
    stats = run_trials(s)
    assert stats.ci_high <= stats.bound


def test_p1prime_forgery_dominated_by_bound():
    s = scenario(Protocol.P1_PRIME, Role.FORGE, trials=500, length=512, s_v=0.03, r=0.05)
    stats = run_trials(s)
    assert stats.ci_high <= stats.bound


def test_p1_repudiation_dominated_by_bound():
    s = scenario(
        Protocol.P1,
        Role.REPUDIATE,
        trials=1000,
        length=512,
        s_v=0.1,
        r=0.1,
        target_fraction=0.05,
    )
    stats = run_trials(s)
    assert stats.bound == pytest.approx(p1_repudiation_bound(0.0, 0.1, 512))
    assert stats.ci_high <= stats.bound


def test_p2_forgery_dominated_by_bound():
    s = scenario(Protocol.P2, Role.FORGE, trials=1000, length=100, s_v=0.1, r=0.15)
    stats = run_trials(s)
    assert stats.bound == pytest.approx(p2_forging_bound(0.1, 0.15, 100))
    assert stats.ci_high <= stats.bound


def test_p2_forgery_never_succeeds_at_tight_bound():
    # the bound is about 9e-7 here, far below any interval 1000 trials can resolve
    s = scenario(Protocol.P2, Role.FORGE, trials=1000, length=200, s_v=0.1, r=0.05)
    stats = run_trials(s)
    assert stats.successes == 0
    assert stats.rate <= stats.bound


def test_all_aborted_gives_zero_rate():
    # an odd length with r = 0 leaves no allowed count, so every run aborts
    stats = run_trials(scenario(Protocol.P2, trials=50, length=101, s_v=0.1))
    assert stats.aborts == 50
    assert stats.rate == 0.0
    assert (stats.ci_low, stats.ci_high) == (0.0, 1.0)
    assert stats.mismatch_histogram == {}


def test_p2_honest_abort_frequency_matches_exact_probability():
    stats = run_trials(scenario(Protocol.P2, trials=2000, seed=9, length=100, s_v=0.1, r=0.01))
    expected = abort_probability_exact(0.01, 100)
    assert binomtest(stats.aborts, stats.trials, expected).pvalue > 0.01


def test_p2_repudiation_runs_fast_on_one_core():
    # a million trials must fit in a minute; the limit leaves room for slow runners
    s = scenario(Protocol.P2, Role.REPUDIATE, trials=20_000, seed=5, length=100, s_v=0.1, r=0.45)
    started = time.perf_counter()
    stats = run_trials(s, workers=1)
    elapsed = time.perf_counter() - started
    assert elapsed < 4.0
    assert stats.aborts == 0
    assert stats.bound == pytest.approx(2**-10)
    assert stats.ci_low <= stats.bound
