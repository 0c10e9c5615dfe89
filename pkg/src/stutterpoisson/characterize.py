"""Deciding whether a discrete law has batch-Poisson structure.

A law with P{X=0} > 0 has log-PGF coefficients b_1, b_2, ... obtained by
taking the series logarithm of its probability sequence. If those
coefficients are all nonnegative with convergent sum, the law is a
stuttering Poisson distribution (SPD) with batch rates theta_i = b_i.
Signed coefficients still define a generalized law (GSPD) whenever the
series converges absolutely, which is guaranteed once P{X=0} > 0.5.

Also here: closure constructions that stay inside the family (compounding
an SPD-distributed count with an i.i.d. summand law, splitting into k
i.i.d. pieces) and the negative binomial's exact batch-rate representation.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .distribution import GspdParams, SpdParams
from .series import PowerSeries, ps_log, ps_mul

__all__ = [
    "Pmf",
    "LawKind",
    "Classification",
    "GspdExtraction",
    "log_pgf_coefficients",
    "classify",
    "gspd_from_pmf",
    "nbd_as_spd",
    "compound_spd",
    "divide",
]

#: Entries this far below zero are treated as rounding noise and clamped.
PROB_TOL = 1e-12

#: Allowed deviation of a full (non-truncated) law's total mass from 1.
MASS_TOL = 1e-9


@dataclass(frozen=True)
class Pmf:
    """A finite probability sequence p_0..p_N.

    Set `truncated=True` when the sequence is the prefix of a law with
    mass beyond N; the total-mass check then only requires sum <= 1.
    """

    probs: tuple
    truncated: bool = False

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise ValueError("a pmf needs at least p_0")
        if min(probs) < -PROB_TOL:
            raise ValueError(f"negative probability {min(probs)}")
        probs = tuple(max(p, 0.0) for p in probs)
        total = sum(probs)
        if self.truncated:
            if total > 1.0 + MASS_TOL:
                raise ValueError(f"truncated pmf mass {total} exceeds 1")
        elif abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"pmf mass {total} is not 1 (pass truncated=True for prefixes)")
        object.__setattr__(self, "probs", probs)

    @property
    def support(self) -> int:
        """Largest index carried (the support bound N)."""
        return len(self.probs) - 1

    @property
    def p0(self) -> float:
        return self.probs[0]


class LawKind(enum.Enum):
    SPD = "spd"
    GSPD = "gspd"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Classification:
    """Outcome of `classify`: the decided kind, extracted rates, residual.

    `rates` carries the log-PGF coefficients b_1..b_n as batch rates (tiny
    negatives clamped when the law is SPD); it is None when no valid
    parameter vector exists (degenerate or divergent cases). `residual`
    bounds the neglected log-series tail: provable for P{X=0} > 0.5, the
    empirical partial-sum gap otherwise.
    """

    kind: LawKind
    rates: GspdParams | None
    residual: float
    note: str = ""


@dataclass(frozen=True)
class GspdExtraction:
    """Signed batch rates extracted from a zero-inflated law.

    `params` is None for the degenerate point mass at 0 (zero total rate);
    `residual` bounds |sum of stored rates + ln p_0|.
    """

    params: GspdParams | None
    residual: float
    note: str = ""


def log_pgf_coefficients(law: Pmf, n: int) -> PowerSeries:
    """Series logarithm b_0..b_n of the probability sequence; needs p_0 > 0."""
    return ps_log(PowerSeries(law.probs), n)


def _tail_residual(law: Pmf, n: int) -> float | None:
    """Provable bound on the neglected log-series tail beyond order n.

    Valid whenever the positive-index mass ratio rho = (1 - p_0)/p_0 is
    below 1, i.e. p_0 > 0.5. The log expansion in powers of the ratio
    series Q only reaches coefficients beyond n through powers Q**i with
    i*m > n (m the largest support point), so the tail is at most

        rho**(j+1) / ((j+1) * (1 - rho)),   j = floor(n / m).
    """
    p0 = law.p0
    positive = law.probs[1:]
    rho = sum(positive) / p0
    if rho == 0.0:
        return 0.0
    if rho >= 1.0:
        return None
    m = max(i for i, p in enumerate(positive, start=1) if p > 0.0)
    j = n // m
    return rho ** (j + 1) / ((j + 1) * (1.0 - rho))


def _reported_residual(law: Pmf, n: int, b: np.ndarray) -> float | None:
    """Tail bound plus a rounding envelope for the accumulated recurrence error.

    The analytic tail can sit far below float precision, so the residual a
    caller may rely on also covers the O(n * eps) rounding of the log
    recurrence and of the rate sum.
    """
    bound = _tail_residual(law, n)
    if bound is None:
        return None
    eps = np.finfo(float).eps
    slack = (n + 1) * eps * (1.0 + abs(math.log(law.p0)) + float(np.abs(b).sum()))
    return bound + slack


def _rates_or_none(rates) -> GspdParams | None:
    try:
        return GspdParams(tuple(rates))
    except ValueError:
        return None


def classify(law: Pmf, n: int, tol: float = 1e-10, sum_tol: float = 1e-8) -> Classification:
    """Decide SPD / GSPD / UNDECIDED from the first n log-PGF coefficients.

    SPD requires every b_i >= -tol and the partial sums to account for
    -ln p_0 within sum_tol. Failing that, GSPD holds provably when
    p_0 > 0.5 and is accepted empirically when the absolute coefficient
    sums have stabilized; everything else stays UNDECIDED. `tol` separates
    genuine negativity from the rounding the log recurrence accumulates.
    """
    b = np.array(log_pgf_coefficients(law, n).coeffs[1:])
    log_p0 = math.log(law.p0)
    bound = _reported_residual(law, n, b)

    if b.min() >= -tol:
        clipped = np.clip(b, 0.0, None)
        gap = abs(clipped.sum() + log_p0)
        if gap <= sum_tol:
            residual = gap if bound is None else max(bound, gap)
            return Classification(LawKind.SPD, _rates_or_none(clipped), residual)

    gap = abs(b.sum() + log_p0)
    if bound is not None:
        return Classification(LawKind.GSPD, _rates_or_none(b), bound)

    window = max(3, n // 10)
    tail_mass = np.abs(b[-window:]).sum()
    if tail_mass <= 1e-10 * max(1.0, np.abs(b).sum()):
        params = _rates_or_none(b)
        if params is not None:
            return Classification(
                LawKind.GSPD, params, gap, note="absolute sums stabilized empirically"
            )

    return Classification(
        LawKind.UNDECIDED,
        _rates_or_none(b),
        gap,
        note="no convergence guarantee at this zero mass and truncation",
    )


def gspd_from_pmf(law: Pmf, n: int) -> GspdExtraction:
    """Extract signed batch rates theta_i = b_i from a law with p_0 > 0.5.

    The zero-mass condition makes the log series absolutely convergent, so
    the first n coefficients determine the law up to a tail bounded by the
    reported residual; sum(theta) approximates -ln p_0 to that residual.
    """
    if law.p0 <= 0.5:
        raise ValueError(f"extraction needs P{{X=0}} > 0.5, got {law.p0}")
    b = np.array(log_pgf_coefficients(law, n).coeffs[1:])
    residual = _reported_residual(law, n, b)
    params = _rates_or_none(b)
    if params is None:
        return GspdExtraction(None, residual, note="zero total batch rate: degenerate at 0")
    return GspdExtraction(params, residual)


def nbd_as_spd(r: float, p: float, R: int) -> SpdParams:
    """Exact batch-rate representation of the negative binomial law.

    NBD(r, p) equals the batch-Poisson law with theta_i = r*(1-p)**i / i;
    `R` truncates that infinite rate vector.
    """
    r = float(r)
    p = float(p)
    R = int(R)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if r <= 0.0:
        raise ValueError(f"r must be positive, got {r}")
    if R < 1:
        raise ValueError(f"truncation order must be >= 1, got {R}")
    q = 1.0 - p
    return SpdParams(tuple(r * q**i / i for i in range(1, R + 1)))


def compound_spd(outer: SpdParams, inner: Pmf, n: int) -> SpdParams:
    """Batch rates of sum_{i=1..N} X_i, N batch-Poisson and X_i ~ inner.

    With G the inner PGF, the compound PGF is exp(sum_j theta_j*(G**j - 1)).
    Expanding the polynomial sum_j theta_j * G(s)**j and dropping its
    constant term leaves canonical batch rates theta'_k, k = 1..n, whose
    total is sum_j theta_j * (1 - p_0**j): batches producing zero total
    thin the law rather than contribute rates.
    """
    if not 0.0 <= inner.p0 < 1.0:
        raise ValueError(f"inner law needs p_0 in [0, 1), got {inner.p0}")
    g = PowerSeries(inner.probs)
    acc = np.zeros(n + 1)
    g_power = PowerSeries.unit(n)
    for theta_j in outer.theta:
        g_power = ps_mul(g_power, g, n)
        acc += theta_j * g_power.array(n)
    return SpdParams(tuple(acc[1:]))


def divide(params, k: int):
    """Split into k i.i.d. pieces: every batch rate divided by k.

    The k-fold convolution of the result reproduces the original law;
    returns the same parameter type as the input.
    """
    k = int(k)
    if k < 1:
        raise ValueError(f"divisor must be >= 1, got {k}")
    return replace(params, theta=tuple(t / k for t in params.theta))
