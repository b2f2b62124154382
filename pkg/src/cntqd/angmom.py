"""Clebsch-Gordan coefficients (Condon-Shortley phase convention)."""

from __future__ import annotations

from fractions import Fraction
from math import factorial, sqrt


def _half(x) -> Fraction:
    f = Fraction(x).limit_denominator(2)
    if f.denominator not in (1, 2) or abs(float(f) - float(x)) > 1e-12:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return f


def _int(f: Fraction) -> int:
    if f.denominator != 1:
        raise ValueError("non-integer factorial argument")
    return int(f)


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """``<j1 m1; j2 m2 | j m>`` via the Racah closed form."""
    j1, m1, j2, m2, j, m = map(_half, (j1, m1, j2, m2, j, m))
    if m1 + m2 != m:
        return 0.0
    if not (abs(j1 - j2) <= j <= j1 + j2):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m) > j:
        return 0.0
    for a, b in ((j1, m1), (j2, m2), (j, m)):
        if (a - b).denominator != 1:
            return 0.0
    pref = (2 * j + 1) * Fraction(
        factorial(_int(j1 + j2 - j)) * factorial(_int(j1 - j2 + j)) * factorial(_int(-j1 + j2 + j)),
        factorial(_int(j1 + j2 + j + 1)),
    )
    pref *= (
        factorial(_int(j1 + m1)) * factorial(_int(j1 - m1))
        * factorial(_int(j2 + m2)) * factorial(_int(j2 - m2))
        * factorial(_int(j + m)) * factorial(_int(j - m))
    )
    total = Fraction(0)
    k = 0
    while True:
        args = (j1 + j2 - j - k, j1 - m1 - k, j2 + m2 - k, j - j2 + m1 + k, j - j1 - m2 + k)
        if any(a < 0 for a in args[:3]):
            break
        if all(a >= 0 for a in args[3:]):
            den = factorial(k)
            for a in args:
                den *= factorial(_int(a))
            total += Fraction((-1) ** k, den)
        k += 1
    return float(sqrt(pref)) * float(total)
