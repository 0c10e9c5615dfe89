"""Goodness-of-fit reporting for fitted count models.

The test statistic is eta = sum v_i**2 / e_i - sum v_i over the explicit
bins, which equals the classic Pearson chi-squared sum whenever observed
and expected totals match. Tail probabilities come from the regularized
incomplete gamma function, implemented with the standard series /
continued-fraction split so p-values are bit stable across platforms.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GofReport",
    "expected_counts",
    "pearson_eta",
    "chi2_upper_tail",
    "chi2_quantile",
    "merge_bins",
    "gof_report",
]

_GAMMA_EPS = 1e-15
_GAMMA_MAX_ITER = 600


def expected_counts(pmf_prefix, n: float, tail_bin: bool = False) -> np.ndarray:
    """Expected frequencies n * P_i; optionally append the mass beyond the prefix."""
    probs = np.asarray(pmf_prefix, dtype=float)
    expected = n * probs
    if tail_bin:
        expected = np.append(expected, max(n * (1.0 - probs.sum()), 0.0))
    return expected


def pearson_eta(observed, expected) -> float:
    """sum v_i**2 / e_i - sum v_i over the given bins; every e_i must be > 0."""
    v = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if v.shape != e.shape:
        raise ValueError(f"bin count mismatch: {v.shape} observed vs {e.shape} expected")
    if e.size == 0:
        raise ValueError("need at least one bin")
    if e.min() <= 0.0:
        raise ValueError(
            f"expected count {e.min()} is not positive; merge degenerate bins first"
        )
    return float((v**2 / e).sum() - v.sum())


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma by power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_GAMMA_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma by Lentz continued fraction (x >= a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_upper_tail(x: float, df: int) -> float:
    """P{chi-squared with df degrees of freedom >= x}, for x >= 0."""
    x = float(x)
    df = int(df)
    if x < 0.0:
        raise ValueError(f"statistic must be >= 0, got {x}")
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    a = df / 2.0
    half = x / 2.0
    if half == 0.0:
        return 1.0
    if half < a + 1.0:
        return min(max(1.0 - _lower_gamma_series(a, half), 0.0), 1.0)
    return min(max(_upper_gamma_cf(a, half), 0.0), 1.0)


def chi2_quantile(p: float, df: int) -> float:
    """x with upper-tail probability p, found by bisection (0 < p < 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"tail probability must lie in (0, 1), got {p}")
    lo, hi = 0.0, 1.0
    while chi2_upper_tail(hi, df) > p:
        hi *= 2.0
        if hi > 1e9:
            raise ValueError(f"quantile search failed for p={p}, df={df}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_upper_tail(mid, df) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def merge_bins(observed, expected, start: int) -> tuple:
    """Collapse bins start.. into a single trailing bin (manual merge policy)."""
    v = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if not 0 < start < len(v):
        raise ValueError(f"merge start must lie in 1..{len(v) - 1}, got {start}")
    return (
        np.append(v[:start], v[start:].sum()),
        np.append(e[:start], e[start:].sum()),
    )


@dataclass(frozen=True)
class GofReport:
    """Binned comparison of a fitted model against observed frequencies.

    `df` is the degrees of freedom actually used for `p_value` (default:
    bins - 1, matching the usual published convention that ignores fitted
    parameters); `df_adjusted`/`p_value_adjusted` subtract the number of
    estimated parameters when that leaves at least one degree of freedom.
    """

    bins: tuple
    eta: float
    df: int
    p_value: float | None
    critical_values: dict
    df_adjusted: int | None = None
    p_value_adjusted: float | None = None


def gof_report(
    observed,
    expected,
    labels=None,
    df: int | None = None,
    n_params: int = 0,
    levels: tuple = (0.5, 0.1, 0.05, 0.01),
) -> GofReport:
    """Assemble the eta statistic, p-values, and critical values for one model."""
    v = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if labels is None:
        labels = tuple(str(i) for i in range(len(v)))
    eta = pearson_eta(v, e)
    eta = max(eta, 0.0) if abs(eta) < 1e-9 else eta
    if df is None:
        df = len(v) - 1
    df = int(df)
    df_adj = df - int(n_params)
    adjusted = df_adj >= 1 and n_params > 0
    testable = df >= 1
    return GofReport(
        bins=tuple(zip(labels, v.tolist(), e.tolist())),
        eta=eta,
        df=df,
        p_value=chi2_upper_tail(max(eta, 0.0), df) if testable else None,
        critical_values={level: chi2_quantile(level, df) for level in levels} if testable else {},
        df_adjusted=df_adj if adjusted else None,
        p_value_adjusted=chi2_upper_tail(max(eta, 0.0), df_adj) if adjusted else None,
    )
