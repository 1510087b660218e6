"""Jacobi polynomials, terminating Gauss series and quadrature."""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate

from .model import DomainError


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class JacobiParams:
    n: int
    a: float
    b: float

    def __post_init__(self):
        _check_jacobi(self.n, self.a, self.b)

    def __call__(self, x):
        return jacobi_poly(self.n, self.a, self.b, x)


def _check_jacobi(n, a, b):
    if int(n) != n or n < 0:
        raise DomainError(f"Jacobi degree must be a non-negative integer, got {n}")
    if not (a > -1 and b > -1):
        raise DomainError(f"Jacobi parameters must exceed -1, got a={a}, b={b}")


def jacobi_poly(n: int, a: float, b: float, x):
    """P_n^(a,b)(x) by the three-term recurrence.

    Degree -1 is accepted and returns the zero polynomial.
    """
    if n == -1:
        return _zeros_like(x)
    _check_jacobi(n, a, b)
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return _scalar(p_prev)
    p = (a + 1) + (a + b + 2) * (x - 1) / 2
    ab2 = a * a - b * b
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c1 = 2 * k * (k + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * x + ab2)
        c3 = 2 * (k + a - 1) * (k + b - 1) * s
        p_prev, p = p, (c2 * p - c3 * p_prev) / c1
    return _scalar(p)


def jacobi_poly_derivative(n: int, a: float, b: float, x, order: int = 1):
    """d^order/dx^order P_n^(a,b)(x) via dP_n^(a,b)/dx = (n+a+b+1)/2 P_{n-1}^(a+1,b+1)."""
    factor = 1.0
    for _ in range(order):
        if n == 0:
            return _zeros_like(x)
        factor *= (n + a + b + 1) / 2
        n, a, b = n - 1, a + 1, b + 1
    return factor * jacobi_poly(n, a, b, x)


def hyp2f1_terminating(neg_n: int, b: float, c: float, s):
    """2F1(-n, b; c; s) as the finite sum of n+1 terms (``neg_n`` = -n).

    The terms alternate in sign and can exceed the sum by many orders of
    magnitude near s = 1, so they are accumulated in exact rational arithmetic
    (float inputs are exact rationals) and rounded once.
    """
    if int(neg_n) != neg_n or neg_n > 0:
        raise DomainError(f"first parameter must be a non-positive integer, got {neg_n}")
    n = -int(neg_n)
    for j in range(n):
        if c + j == 0:
            raise DomainError(f"pole: c={c} makes (c)_{j + 1} vanish")
    ratios = [Fraction((k - n)) * (Fraction(b) + k) / ((Fraction(c) + k) * (k + 1))
              for k in range(n)]

    def one(x):
        x = Fraction(float(x))
        term = total = Fraction(1)
        for r in ratios:
            term *= r * x
            total += term
        return float(total)

    s = np.asarray(s, dtype=float)
    return _scalar(np.vectorize(one, otypes=[float])(s))


def jacobi_endpoint_log(n: int, a: float) -> float:
    """log P_n^(a,b)(1) = log Gamma(n+a+1) - log n! - log Gamma(a+1)."""
    return math.lgamma(n + a + 1) - math.lgamma(n + 1) - math.lgamma(a + 1)


def jacobi_at_one(n: int, a: float) -> float:
    """P_n^(a,b)(1) = (a+1)_n / n!, as an exact product for moderate n."""
    if n > 100:
        return math.exp(jacobi_endpoint_log(n, a))
    out = Fraction(1)
    for k in range(1, n + 1):
        out *= (Fraction(a) + k) / k
    return float(out)


def jacobi_via_hypergeometric(n: int, a: float, b: float, x):
    """Gamma-ratio times 2F1(-n, a+b+n+1; 1+a; (1-x)/2).

    Independent of the recurrence; used to cross-check it.
    """
    _check_jacobi(n, a, b)
    x = np.asarray(x, dtype=float)
    return jacobi_at_one(n, a) * hyp2f1_terminating(-n, a + b + n + 1, 1 + a, (1 - x) / 2)


def count_sign_changes(values, rel_floor: float = 1e-12) -> int:
    """Strict sign changes, ignoring entries below rel_floor * max|values|."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0
    if not np.all(np.isfinite(v)):
        raise ValueError("samples must be finite")
    floor = rel_floor * np.max(np.abs(v))
    signs = np.sign(v[np.abs(v) > floor])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def integrate(f, a: float, b: float, *, atol: float = 1e-10, points=None,
              limit: int = 200) -> float:
    """Adaptive quadrature of ``f`` over (a, b), split at ``points``.

    The tolerance is shared evenly between segments. Raises IntegrationError
    if the integrand is non-finite anywhere it is sampled.
    """
    knots = [a]
    if points is not None:
        knots += sorted(float(p) for p in points if a < p < b)
    knots.append(b)

    def checked(x):
        y = f(x)
        if not math.isfinite(y):
            raise IntegrationError(f"non-finite integrand {y!r} at x={x!r}")
        return y

    seg_tol = atol / (len(knots) - 1)
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        val, _ = _integrate.quad(checked, lo, hi, epsabs=seg_tol, epsrel=1e-13,
                                 limit=limit)
        total += val
    return total


def grid_breakpoints(alpha: float, r_max: float) -> list[float]:
    """Segment boundaries matching the log-linear sampling policy."""
    knee = 1.0 / alpha
    pts = list(np.geomspace(1e-6 * knee, knee, 7))
    pts += list(np.linspace(knee, r_max, 11)[1:-1])
    return pts


def _zeros_like(x):
    return _scalar(np.zeros_like(np.asarray(x, dtype=float)))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x
