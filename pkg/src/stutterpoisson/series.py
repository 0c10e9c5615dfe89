"""Truncated power-series arithmetic on real coefficient sequences.

A series is stored as its coefficients c_0..c_N, where c_k multiplies s**k
and N is the truncation order. This is the carrier for probability
generating functions, their logarithms, and the coefficient recurrences the
rest of the package is built on. Truncation is always explicit: every
operation takes the output order `n` and treats missing input coefficients
as zero. Nothing re-truncates behind the caller's back, so the error budget
of a computation is visible at each step.

All arithmetic is plain float64. The exp/log recurrences run in
increasing-index order with one accumulated dot product per coefficient.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["PowerSeries", "ps_mul", "ps_pow", "ps_exp", "ps_log"]


@dataclass(frozen=True)
class PowerSeries:
    """Coefficients c_0..c_N of a real series truncated at order N (N >= 0)."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("a power series needs at least the constant term")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("power series coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def unit(cls, order: int) -> "PowerSeries":
        """Multiplicative identity 1 + 0*s + ... + 0*s**order."""
        return cls((1.0,) + (0.0,) * order)

    @classmethod
    def zero(cls, order: int) -> "PowerSeries":
        return cls((0.0,) * (order + 1))

    def array(self, order: int) -> np.ndarray:
        """Coefficients as a float array of length order+1, zero padded."""
        out = np.zeros(order + 1)
        take = min(len(self.coeffs), order + 1)
        out[:take] = self.coeffs[:take]
        return out


def _check_order(n: int) -> int:
    n = int(n)
    if n < 0:
        raise ValueError(f"truncation order must be >= 0, got {n}")
    return n


def ps_mul(a: PowerSeries, b: PowerSeries, n: int) -> PowerSeries:
    """Cauchy product of `a` and `b` truncated at order `n`."""
    n = _check_order(n)
    prod = np.convolve(a.array(n), b.array(n))[: n + 1]
    return PowerSeries(tuple(prod))


def ps_pow(a: PowerSeries, k: int, n: int) -> PowerSeries:
    """`a` raised to the nonnegative integer power `k`, truncated at order `n`.

    k = 0 yields the unit series; higher powers are k-1 successive products.
    """
    n = _check_order(n)
    k = int(k)
    if k < 0:
        raise ValueError(f"exponent must be >= 0, got {k}")
    out = PowerSeries.unit(n)
    for _ in range(k):
        out = ps_mul(out, a, n)
    return out


def ps_exp(a: PowerSeries, n: int) -> PowerSeries:
    """exp(a) truncated at order `n`.

    Coefficient recurrence: e_0 = exp(a_0) and, for k >= 1,

        k * e_k = sum_{j=1..k} j * a_j * e_{k-j}.

    Raises OverflowError when exp(a_0) is out of float range.
    """
    n = _check_order(n)
    ca = a.array(n)
    e = np.zeros(n + 1)
    e[0] = math.exp(ca[0])
    ja = ca * np.arange(n + 1)
    for k in range(1, n + 1):
        e[k] = np.dot(ja[1 : k + 1], e[k - 1 :: -1][:k]) / k
    return PowerSeries(tuple(e))


def ps_log(a: PowerSeries, n: int) -> PowerSeries:
    """log(a) truncated at order `n`; requires a_0 > 0.

    Coefficient recurrence: b_0 = ln(a_0) and, for k >= 1,

        k * b_k = (k * a_k - sum_{j=1..k-1} j * b_j * a_{k-j}) / a_0.
    """
    n = _check_order(n)
    ca = a.array(n)
    if ca[0] <= 0.0:
        raise ValueError(f"series logarithm needs a positive constant term, got {ca[0]}")
    b = np.zeros(n + 1)
    jb = np.zeros(n + 1)
    b[0] = math.log(ca[0])
    for k in range(1, n + 1):
        s = np.dot(jb[1:k], ca[k - 1 : 0 : -1]) if k > 1 else 0.0
        bk = (k * ca[k] - s) / ca[0] / k
        b[k] = bk
        jb[k] = k * bk
    return PowerSeries(tuple(b))
