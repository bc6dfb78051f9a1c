"""Numeric-integration oracle for Student-t p-values.

Independent of the production path: the two-sided p-value is computed by
composite Simpson quadrature of the t density, not through the incomplete
beta function.
"""

import math


def t_pdf(x: float, df: float) -> float:
    ln = (
        math.lgamma((df + 1.0) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
        - ((df + 1.0) / 2.0) * math.log1p(x * x / df)
    )
    return math.exp(ln)


def two_sided_p(t: float, df: float, intervals: int = 8192) -> float:
    """P(|T| >= |t|) via Simpson integration of the density over [0, |t|]."""
    t = abs(t)
    if t == 0.0:
        return 1.0
    h = t / intervals
    total = t_pdf(0.0, df) + t_pdf(t, df)
    for i in range(1, intervals):
        total += t_pdf(i * h, df) * (4.0 if i % 2 else 2.0)
    integral = total * h / 3.0
    return 1.0 - 2.0 * integral
