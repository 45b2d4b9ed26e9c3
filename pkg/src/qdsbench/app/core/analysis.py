import math
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.stats import binom

from .errors import UnsatisfiableError
from .models import BoundReport, Protocol, ThresholdChoice
from .params import ProtocolParams, ceil_count, floor_count

# Minimum per-element mismatch probability of an individual forger against P1
C_MIN = 1 / 8
C_MAX = 3 / 8

MAX_LENGTH = 10**9
GRID_POINTS = 200

# Exponent margins at or below this are treated as exactly zero
_MARGIN_EPS = 1e-12
# Floor for bounds that underflow to zero before taking logs
_TINY = 1e-300


def p1_repudiation_bound(s_a: float, s_v: float, length: float) -> float:
    if s_a >= s_v:
        raise ValueError(f"s_a must be below s_v (got s_a={s_a}, s_v={s_v})")
    return min(1.0, math.exp(-((s_v - s_a) ** 2) * length / 2))


def p1_forging_threshold(r: float) -> float:
    """Largest s_v for which the P1 forging bound decays: C_min * K/L = (1 - 2r)/16."""
    return (1 - 2 * r) / 16


def p1_forging_bound(s_v: float, r: float, length: float) -> float:
    """exp(-2 (1/8 - s_v L/K)^2 K) with K = L(1/2 - r); 1 once the exponent vanishes."""
    k = length * (0.5 - r)
    if k <= 0:
        return 1.0
    margin = C_MIN - s_v * length / k
    if margin <= _MARGIN_EPS:
        return 1.0
    return min(1.0, math.exp(-2 * margin**2 * k))


def p2_repudiation_bound(s_v: float, length: float) -> float:
    if s_v <= 0:
        raise ValueError(f"s_v must be positive, got {s_v}")
    return min(1.0, 0.5 ** (s_v * length))


def p2_forging_threshold(r: float) -> float:
    """Largest s_v for which the P2 forging bound decays: (1 - 2r)/4."""
    return (1 - 2 * r) / 4


def p2_forging_bound(s_v: float, r: float, length: float) -> float:
    """exp(-4 (1/4 - s_v/(1-2r))^2 L (1-2r)); 1 once s_v/(1-2r) reaches 1/4."""
    scale = 1 - 2 * r
    margin = 0.25 - s_v / scale
    if margin <= _MARGIN_EPS:
        return 1.0
    return min(1.0, math.exp(-4 * margin**2 * length * scale))


def abort_probability_bound(r: float, length: float) -> float:
    """Two-sided Hoeffding tail for Binomial(L, 1/2), union over both message bits."""
    if r <= 0:
        return 1.0
    return min(1.0, 4 * math.exp(-2 * r**2 * length))


def abort_probability_exact(r: float, length: int) -> float:
    """Exact honest abort probability over the four independent received counts."""
    low = ceil_count(length * (0.5 - r))
    high = floor_count(length * (0.5 + r))
    p_in = float(binom.cdf(high, length, 0.5) - binom.cdf(low - 1, length, 0.5))
    return 1.0 - p_in**4


def repudiation_bound(protocol: Protocol, s_a: float, s_v: float, length: float) -> float:
    if protocol.family is Protocol.P2:
        return p2_repudiation_bound(s_v, length)
    return p1_repudiation_bound(s_a, s_v, length)


def forging_bound(protocol: Protocol, s_v: float, r: float, length: float) -> float:
    if protocol.family is Protocol.P2:
        return p2_forging_bound(s_v, r, length)
    return p1_forging_bound(s_v, r, length)


def forging_threshold(protocol: Protocol, r: float) -> float:
    if protocol.family is Protocol.P2:
        return p2_forging_threshold(r)
    return p1_forging_threshold(r)


def bound_report(protocol: Protocol, params: ProtocolParams) -> BoundReport:
    rep = repudiation_bound(protocol, params.s_a, params.s_v, params.length)
    forge = forging_bound(protocol, params.s_v, params.r, params.length)
    return BoundReport(
        protocol=protocol.family,
        length=params.length,
        s_a=params.s_a,
        s_v=params.s_v,
        r=params.r,
        repudiation_bound=rep,
        forging_bound=forge,
        abort_bound=abort_probability_bound(params.r, params.length),
        K=ceil_count(params.length * (0.5 - params.r)),
        vacuous=rep >= 1.0 or forge >= 1.0,
    )


def min_length(
    protocol: Protocol,
    epsilon: float,
    s_a: float,
    s_v: float,
    r: float,
    max_length: int = MAX_LENGTH,
) -> int:
    """Smallest L with max(repudiation, forging) <= epsilon.

    Doubles L until the target is met, then bisects. Both bounds are
    non-increasing in L, which makes the bisection exact.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    family = protocol.family

    def worst(length: int) -> float:
        return max(
            repudiation_bound(family, s_a, s_v, length),
            forging_bound(family, s_v, r, length),
        )

    if worst(1) <= epsilon:
        return 1
    if s_v >= forging_threshold(family, r):
        raise UnsatisfiableError(
            f"forging bound is vacuous for s_v={s_v}, r={r} "
            f"(needs s_v < {forging_threshold(family, r):.6g})"
        )
    high = 2
    while worst(high) > epsilon:
        if high >= max_length:
            raise UnsatisfiableError(f"no L <= {max_length} reaches epsilon={epsilon}")
        high = min(2 * high, max_length)
    low = high // 2
    while high - low > 1:
        mid = (low + high) // 2
        if worst(mid) <= epsilon:
            high = mid
        else:
            low = mid
    return high


def _best_s_v(
    rep: Callable[[float], float],
    forge: Callable[[float], float],
    low: float,
    high: float,
) -> float:
    """Minimise max(rep, forge) over (low, high): grid first, then a root of log rep - log forge."""
    grid = np.linspace(low, high, GRID_POINTS + 2)[1:-1]
    values = np.array([max(rep(s), forge(s)) for s in grid])
    i = int(np.argmin(values))
    left = grid[max(i - 1, 0)]
    right = grid[min(i + 1, grid.size - 1)]

    def gap(s: float) -> float:
        return math.log(max(rep(s), _TINY)) - math.log(max(forge(s), _TINY))

    if gap(left) > 0 > gap(right):
        root = brentq(gap, left, right, xtol=1e-14)
        if max(rep(root), forge(root)) <= values[i]:
            return float(root)
    return float(grid[i])


def optimize_thresholds(
    protocol: Protocol,
    length: int,
    r: float,
    s_a: Optional[float] = None,
) -> ThresholdChoice:
    """Thresholds minimising the larger of the repudiation and forging bounds.

    ``s_a=None`` leaves the authentication threshold free (P1 only; P2 uses s_a = 0).
    """
    if length < 1:
        raise ValueError(f"length must be positive, got {length}")
    if not 0 <= r < 0.5:
        raise ValueError(f"r must lie in [0, 1/2), got {r}")
    family = protocol.family
    upper = forging_threshold(family, r)

    def choose(fixed_s_a: float) -> ThresholdChoice:
        def rep(s: float) -> float:
            return repudiation_bound(family, fixed_s_a, s, length)

        def forge(s: float) -> float:
            return forging_bound(family, s, r, length)

        s_v = _best_s_v(rep, forge, fixed_s_a, upper)
        return ThresholdChoice(fixed_s_a, s_v, max(rep(s_v), forge(s_v)), rep(s_v), forge(s_v))

    if family is Protocol.P2:
        return choose(0.0)
    if s_a is not None:
        if not 0 <= s_a < upper:
            raise ValueError(f"s_a must lie in [0, {upper:.6g}) for a non-vacuous forging bound")
        return choose(s_a)
    candidates = [choose(float(a)) for a in np.linspace(0, upper, 20, endpoint=False)]
    return min(candidates, key=lambda c: c.value)
