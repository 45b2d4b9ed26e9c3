import math

import pytest
from scipy.stats import binom

from qdsbench.app.core.analysis import (
    abort_probability_bound,
    abort_probability_exact,
    bound_report,
    forging_bound,
    min_length,
    optimize_thresholds,
    p1_forging_bound,
    p1_forging_threshold,
    p1_repudiation_bound,
    p2_forging_bound,
    p2_forging_threshold,
    p2_repudiation_bound,
    repudiation_bound,
)
from qdsbench.app.core.errors import UnsatisfiableError
from qdsbench.app.core.models import Protocol
from qdsbench.app.core.params import ProtocolParams


def test_bound_spot_values():
    assert abs(p1_repudiation_bound(0, 0.1, 1000) - math.exp(-5)) <= 1e-12
    assert abs(p1_forging_bound(0.02, 0, 1000) - math.exp(-7.225)) <= 1e-12
    assert abs(p2_repudiation_bound(0.1, 100) - 2**-10) <= 1e-15
    assert abs(p2_forging_bound(0.1, 0, 100) - math.exp(-9)) <= 1e-12
    assert p2_forging_bound(0.1, 0.01, 133) == pytest.approx(1.1e-5, rel=0.05)
    assert abort_probability_bound(0.1, 512) == pytest.approx(4 * math.exp(-10.24))


def test_p1_repudiation_bound_edges():
    assert p1_repudiation_bound(0.1, 0.2, 0) == 1.0
    assert p1_repudiation_bound(0, 0.1, 2000) < p1_repudiation_bound(0, 0.1, 1000)
    with pytest.raises(ValueError):
        p1_repudiation_bound(0.1, 0.1, 100)


def test_p1_forging_bound_identity_and_vacuity():
    for length in (64, 640, 6400):
        assert p1_forging_bound(0, 0, length) == pytest.approx(math.exp(-length / 64), rel=1e-12)
    for r in (0.0, 0.05, 0.2):
        assert p1_forging_bound(p1_forging_threshold(r), r, 1000) == 1.0
    assert p1_forging_threshold(0.05) == pytest.approx(0.05625)


def test_p2_bound_edges():
    assert p2_repudiation_bound(0.3, 0) == 1.0
    # halves when s_v * L grows by one
    assert p2_repudiation_bound(0.1, 110) == pytest.approx(p2_repudiation_bound(0.1, 100) / 2)
    assert p2_forging_bound(0.25, 0, 500) == 1.0
    assert p2_forging_threshold(0.1) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        p2_repudiation_bound(0, 100)


def test_abort_bound_dominates_exact():
    # Binomial(100, 1/2) mass outside [40, 60]
    outside = 1 - (binom.cdf(60, 100, 0.5) - binom.cdf(39, 100, 0.5))
    assert outside <= abort_probability_bound(0.1, 100)
    # four independent counts
    assert abort_probability_exact(0.1, 100) == pytest.approx(1 - (1 - outside) ** 4)
    assert abort_probability_exact(0.1, 100) <= abort_probability_bound(0.1, 100)
    assert abort_probability_bound(0, 100) == 1.0


def test_bounds_non_increasing_in_length():
    for protocol in (Protocol.P1, Protocol.P2):
        previous = 1.0
        for length in (10, 100, 1000, 10_000):
            worst = max(
                repudiation_bound(protocol, 0.0, 0.04, length),
                forging_bound(protocol, 0.04, 0.01, length),
            )
            assert 0 < worst <= previous
            previous = worst


def test_bound_report():
    params = ProtocolParams(length=512, s_a=0.0, s_v=0.03, r=0.05)
    report = bound_report(Protocol.P1, params)
    assert report.K == 231
    assert report.forging_bound == pytest.approx(0.209, abs=0.002)
    assert report.repudiation_bound == pytest.approx(math.exp(-(0.03**2) * 512 / 2))
    assert not report.vacuous

    # P1' shares the P1 bounds
    assert bound_report(Protocol.P1_PRIME, params) == report

    vacuous = bound_report(Protocol.P1, ProtocolParams(length=512, s_v=0.2, r=0.05))
    assert vacuous.vacuous and vacuous.forging_bound == 1.0


def test_min_length_p2():
    length = min_length(Protocol.P2, 1e-4, 0.0, 0.1, 0.01)
    assert length == 133
    assert p2_repudiation_bound(0.1, 133) <= 1e-4
    assert p2_forging_bound(0.1, 0.01, 133) <= 1e-4
    assert p2_repudiation_bound(0.1, 132) > 1e-4


def test_min_length_edges():
    assert min_length(Protocol.P1, 1.0, 0.0, 0.03, 0.05) == 1
    # smaller epsilon never needs a shorter signature
    lengths = [min_length(Protocol.P1, eps, 0.0, 0.03, 0.05) for eps in (1e-2, 1e-4, 1e-6)]
    assert lengths == sorted(lengths)
    with pytest.raises(UnsatisfiableError):
        min_length(Protocol.P1, 1e-3, 0.0, 0.1, 0.05)
    with pytest.raises(ValueError):
        min_length(Protocol.P2, 0.0, 0.0, 0.1, 0.0)


def test_min_length_is_minimal_for_p1():
    length = min_length(Protocol.P1, 1e-3, 0.0, 0.02, 0.0)

    def worst(n):
        return max(p1_repudiation_bound(0.0, 0.02, n), p1_forging_bound(0.02, 0.0, n))

    assert worst(length) <= 1e-3 < worst(length - 1)


def test_optimize_p1_interior():
    choice = optimize_thresholds(Protocol.P1, 4096, 0.01, s_a=0.0)
    assert 0 < choice.s_v < p1_forging_threshold(0.01)
    assert choice.value == max(choice.repudiation_bound, choice.forging_bound)


def test_optimize_p2_equalises_bounds():
    choice = optimize_thresholds(Protocol.P2, 200, 0.0)
    assert choice.s_a == 0.0
    assert abs(choice.repudiation_bound - choice.forging_bound) <= 0.01 * choice.value
    # no grid point does better
    for i in range(1, 50):
        s_v = 0.25 * i / 50
        worst = max(p2_repudiation_bound(s_v, 200), p2_forging_bound(s_v, 0.0, 200))
        assert choice.value <= worst + 1e-15


def test_optimize_p1_free_s_a():
    free = optimize_thresholds(Protocol.P1, 4096, 0.01)
    fixed = optimize_thresholds(Protocol.P1, 4096, 0.01, s_a=0.0)
    assert free.value <= fixed.value + 1e-15
    assert 0 <= free.s_a < free.s_v
    with pytest.raises(ValueError):
        optimize_thresholds(Protocol.P1, 4096, 0.01, s_a=0.5)
