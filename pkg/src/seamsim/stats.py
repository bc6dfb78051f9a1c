"""Welch's two-sample t-test for per-use-case duration comparison.

The unpaired Welch test tolerates unequal variances, which is what trace
durations exhibit; a paired test flags even tiny systematic shifts, so it is
deliberately not offered.  The two-sided p-value comes from the Student-t
distribution evaluated through the regularized incomplete beta function,
implemented here with the standard continued-fraction expansion (absolute
accuracy well below 1e-9 over the usage range).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: float
    variance: float  # unbiased (n-1 denominator); 0.0 when n < 2

    @classmethod
    def of(cls, xs: Sequence[float]) -> "SampleStats":
        n = len(xs)
        if n == 0:
            raise ValueError("empty sample")
        mean = math.fsum(xs) / n
        if n < 2:
            return cls(n, mean, 0.0)
        var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
        return cls(n, mean, var)


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float  # Welch-Satterthwaite degrees of freedom
    p_value: float
    mean_delta: float  # mean(b) - mean(a); positive = b is slower
    relative_delta: float  # mean_delta / mean(a); 0 when mean(a) == 0


class DegenerateSample(Exception):
    """Both samples have zero variance, so the t statistic is undefined.

    ``no_change`` is true when the means are also equal; callers report that
    case as "no change" with p = 1.
    """

    def __init__(self, no_change: bool, mean_delta: float, relative_delta: float):
        super().__init__("zero-variance samples")
        self.no_change = no_change
        self.mean_delta = mean_delta
        self.relative_delta = relative_delta


# ---------------------------------------------------------------------------
# Regularized incomplete beta function

_MAX_ITER = 300
_EPS = 1e-15
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ Student-t with df degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 1.0
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return betainc_regularized(df / 2.0, 0.5, x)


# ---------------------------------------------------------------------------
# Welch test


def welch_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Two-sided Welch test of two duration samples.

    t = (mean_a - mean_b) / sqrt(va/na + vb/nb); degrees of freedom by
    Welch-Satterthwaite.  Both samples need at least two observations.
    Raises DegenerateSample when both variances are zero (no_change tells
    whether the means agree too).
    """
    if len(a) < 2 or len(b) < 2:
        raise ValueError("welch_test needs at least two observations per sample")
    sa = SampleStats.of(a)
    sb = SampleStats.of(b)
    mean_delta = sb.mean - sa.mean
    relative = mean_delta / sa.mean if sa.mean != 0 else 0.0
    va_n = sa.variance / sa.n
    vb_n = sb.variance / sb.n
    pooled = va_n + vb_n
    if pooled == 0.0:
        raise DegenerateSample(no_change=(mean_delta == 0.0), mean_delta=mean_delta, relative_delta=relative)
    t = (sa.mean - sb.mean) / math.sqrt(pooled)
    df = pooled * pooled / (
        (va_n * va_n) / (sa.n - 1) + (vb_n * vb_n) / (sb.n - 1)
    )
    return WelchResult(t=t, df=df, p_value=student_t_two_sided_p(t, df),
                       mean_delta=mean_delta, relative_delta=relative)
