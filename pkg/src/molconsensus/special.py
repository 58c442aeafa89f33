"""Self-contained erfc and E1 evaluators.

These back the closed-form channel-response formulas and deliberately share
no code with the quadrature path, so the two can cross-check each other.
Both routines target full double precision (relative error ~1e-15) using
the classic series / continued-fraction split.
"""

import math

_EULER_GAMMA = 0.5772156649015328606
_FPMIN = 1e-300


def erf_series(x):
    """erf(x) by its Maclaurin series; accurate for |x| <~ 3."""
    # term_n = (-1)^n x^(2n+1) / (n! (2n+1)); ratio recurrence avoids factorials
    total = 0.0
    term = x
    n = 0
    while True:
        total += term / (2 * n + 1)
        n += 1
        term *= -x * x / n
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
        if n > 200:
            break
    return 2.0 / math.sqrt(math.pi) * total


def _erfc_cf(x):
    """erfc(x) for x >= 2 via the Laplace continued fraction (modified Lentz)."""
    b = x
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 300):
        a = 0.5 * i
        b = x  # partial denominators alternate around x; a_n = n/2
        d = 1.0 / (b + a * d)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return math.exp(-x * x) / math.sqrt(math.pi) * h


def erfc(x):
    """Complementary error function, series below 2, continued fraction above."""
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x < 2.0:
        return 1.0 - erf_series(x)
    if x > 26.6:
        return 0.0  # underflows double precision
    return _erfc_cf(x)


def expint_e1(x):
    """Exponential integral E1(x) for x > 0.

    Power series with the log term for x <= 1, Lentz continued fraction
    otherwise.
    """
    if x <= 0.0:
        raise ValueError("E1 requires x > 0")
    if x <= 1.0:
        total = -_EULER_GAMMA - math.log(x)
        term = 1.0
        for k in range(1, 200):
            term *= -x / k
            contrib = -term / k
            total += contrib
            if abs(contrib) < 1e-18 * max(abs(total), 1e-300):
                break
        return total
    # E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    b = x + 1.0
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 300):
        a = -float(i) * i
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return math.exp(-x) * h
