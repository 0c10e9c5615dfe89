"""Batch-arrival (stuttering) Poisson laws and their signed generalization.

The canonical parameterization is the vector of batch rates
theta_i = alpha_i * lambda * t: the Poisson intensity of batches of size i
over the observation window, with time absorbed. A law with rates
theta_1..theta_r has PGF exp(sum_i theta_i * (s**i - 1)); its cumulants are
the power sums kappa_n = sum_i theta_i * i**n.

Two parameter types live here. `SpdParams` requires nonnegative rates and
describes a genuine probability law. `GspdParams` permits signed rates with
positive total mass; the induced coefficient sequence may dip below zero,
in which case the PMF routines flag it instead of failing.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .series import PowerSeries, ps_mul

__all__ = [
    "SpdParams",
    "GspdParams",
    "NegativeProbabilityWarning",
    "pmf",
    "pmf_oracle",
    "pgf",
    "cumulant",
    "moments_from_cumulants",
    "cumulants_from_moments",
    "central_moments",
    "sample",
    "upper_tail_bound",
]

#: Absolute slack below zero tolerated before a signed-rate PMF is flagged.
NEGATIVE_PMF_TOL = 1e-12


class NegativeProbabilityWarning(UserWarning):
    """A signed-rate parameter vector does not induce a probability law."""


def _as_rates(theta) -> tuple:
    rates = tuple(float(t) for t in theta)
    # drop trailing exact zeros so the top batch size is meaningful
    while rates and rates[-1] == 0.0:
        rates = rates[:-1]
    if not rates:
        raise ValueError("at least one nonzero batch rate is required")
    if not all(math.isfinite(t) for t in rates):
        raise ValueError("batch rates must be finite")
    return rates


@dataclass(frozen=True)
class SpdParams:
    """Nonnegative batch rates theta_1..theta_r with theta_r > 0."""

    theta: tuple

    def __post_init__(self):
        rates = _as_rates(self.theta)
        if min(rates) < 0.0:
            raise ValueError("batch rates must be nonnegative; use GspdParams for signed rates")
        object.__setattr__(self, "theta", rates)

    @classmethod
    def from_alphas(cls, alphas, lam: float, t: float = 1.0) -> "SpdParams":
        """Build from batch-size weights and a rate: theta_i = alpha_i*lam*t."""
        return cls(tuple(a * lam * t for a in alphas))

    @property
    def r(self) -> int:
        """Largest batch size."""
        return len(self.theta)

    @property
    def total(self) -> float:
        """Total batch intensity (lambda * t)."""
        return float(sum(self.theta))

    @property
    def alphas(self) -> tuple:
        """Normalized batch-size weights theta_i / total."""
        tot = self.total
        return tuple(t / tot for t in self.theta)


@dataclass(frozen=True)
class GspdParams:
    """Signed batch rates with positive, absolutely convergent total mass."""

    theta: tuple

    def __post_init__(self):
        rates = _as_rates(self.theta)
        if sum(rates) <= 0.0:
            raise ValueError("total batch rate must be positive")
        object.__setattr__(self, "theta", rates)

    @property
    def r(self) -> int:
        return len(self.theta)

    @property
    def total(self) -> float:
        return float(sum(self.theta))


def pmf(params, n_max: int) -> np.ndarray:
    """Probabilities P_0..P_{n_max} by the batch-rate recursion.

    P_0 = exp(-sum theta_i) and

        P_{j+1} = (1/(j+1)) * sum_{i=1..min(j+1, r)} i * theta_i * P_{j+1-i}.

    For nonnegative rates every output is >= 0. Signed rates may produce
    negative entries; values below -1e-12 mean the parameters do not
    describe a probability law and a NegativeProbabilityWarning is issued
    (the values are still returned).
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    theta = np.asarray(params.theta)
    r = len(theta)
    it = theta * np.arange(1, r + 1)
    out = np.zeros(n_max + 1)
    out[0] = math.exp(-theta.sum())
    for j in range(n_max):
        m = min(j + 1, r)
        out[j + 1] = np.dot(it[:m], out[j :: -1][:m]) / (j + 1)
    if isinstance(params, GspdParams) and out.min() < -NEGATIVE_PMF_TOL:
        warnings.warn(
            f"signed batch rates induce negative mass (min {out.min():.3e}): "
            "not a valid probability law",
            NegativeProbabilityWarning,
            stacklevel=2,
        )
    return out


def pmf_oracle(params, n_max: int) -> np.ndarray:
    """Probabilities P_0..P_{n_max} summed term by term from series powers.

    Evaluates exp(-total) * sum_{k=0..K} g(s)**k / k! with g(s) the batch
    polynomial sum_i theta_i * s**i, via explicit series products. K stops
    once the factorial tail beyond it is below 1e-15 (powers above n_max
    cannot touch the kept prefix, so K never exceeds n_max). Deliberately
    avoids the exponential coefficient recurrence so it stays an
    independent check of `pmf`.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    theta = np.asarray(params.theta)
    lam = float(np.abs(theta).sum())
    batch = PowerSeries((0.0,) + tuple(theta))

    n_terms = 0
    term_bound = 1.0
    while n_terms < n_max:
        n_terms += 1
        term_bound *= lam / n_terms
        nxt = term_bound * lam / (n_terms + 1)
        if lam / (n_terms + 2) < 0.5 and 2.0 * nxt < 1e-15:
            break

    acc = PowerSeries.unit(n_max).array(n_max)
    power = PowerSeries.unit(n_max)
    fact = 1.0
    for k in range(1, n_terms + 1):
        power = ps_mul(power, batch, n_max)
        fact *= k
        acc += power.array(n_max) / fact
    return math.exp(-theta.sum()) * acc


def pgf(params, s: float) -> float:
    """Generating function exp(sum_i theta_i * (s**i - 1)) for |s| <= 1."""
    s = float(s)
    if abs(s) > 1.0:
        raise ValueError(f"generating function argument must satisfy |s| <= 1, got {s}")
    theta = params.theta
    return math.exp(sum(t * (s**i - 1.0) for i, t in enumerate(theta, start=1)))


def cumulant(params, n: int) -> float:
    """n-th cumulant, the power sum kappa_n = sum_i theta_i * i**n (n >= 1)."""
    n = int(n)
    if n < 1:
        raise ValueError(f"cumulant order must be >= 1, got {n}")
    theta = np.asarray(params.theta)
    i = np.arange(1, len(theta) + 1, dtype=float)
    return float(np.dot(theta, i**n))


def _pascal(n: int) -> np.ndarray:
    """Binomial coefficient table C[i, j] for 0 <= j <= i <= n, exact floats."""
    table = np.zeros((n + 1, n + 1))
    table[:, 0] = 1.0
    for i in range(1, n + 1):
        table[i, 1 : i + 1] = table[i - 1, : i] + table[i - 1, 1 : i + 1]
    return table


def moments_from_cumulants(kappa) -> list:
    """Raw moments m_1..m_n from cumulants kappa_1..kappa_n.

    Binomial recursion with m_0 = 1:

        m_{n+1} = sum_{j=0..n} C(n, j) * kappa_{n+1-j} * m_j.
    """
    kappa = [float(k) for k in kappa]
    order = len(kappa)
    if order < 1:
        raise ValueError("need at least one cumulant")
    comb = _pascal(order)
    m = [1.0]
    for n in range(order):
        m.append(float(sum(comb[n, j] * kappa[n - j] * m[j] for j in range(n + 1))))
    return m[1:]


def cumulants_from_moments(m) -> list:
    """Cumulants kappa_1..kappa_n from raw moments m_1..m_n.

    Exact inverse of `moments_from_cumulants`: the j = 0 term of the
    recursion is kappa_{n+1} itself, so it is solved for directly.
    """
    m = [1.0] + [float(v) for v in m]
    order = len(m) - 1
    if order < 1:
        raise ValueError("need at least one moment")
    comb = _pascal(order)
    kappa = []
    for n in range(order):
        k_next = m[n + 1] - sum(comb[n, j] * kappa[n - j] * m[j] for j in range(1, n + 1))
        kappa.append(float(k_next))
    return kappa


def central_moments(params, n: int) -> list:
    """Central moments c_1..c_n (c_1 = 0).

    Same binomial recursion as the raw moments but driven by the shifted
    cumulants kappa*_1 = 0, kappa*_k = kappa_k for k >= 2.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    star = [0.0] + [cumulant(params, k) for k in range(2, n + 1)]
    comb = _pascal(n)
    c = [1.0]
    for j in range(n):
        c.append(float(sum(comb[j, i] * star[j - i] * c[i] for i in range(j + 1))))
    return c[1:]


def sample(params: SpdParams, count: int, seed) -> np.ndarray:
    """Draw `count` variates: a Poisson number of batches, then batch sizes.

    Each draw is sum of N batch sizes with N ~ Poisson(total) and sizes
    i.i.d. from the normalized weights alpha_1..alpha_r. Deterministic for
    a given seed; signed-rate parameters are not samplable.
    """
    if not isinstance(params, SpdParams):
        raise TypeError("sampling requires nonnegative batch rates (SpdParams)")
    count = int(count)
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    rng = np.random.default_rng(seed)
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    n_batches = rng.poisson(params.total, size=count)
    total_batches = int(n_batches.sum())
    sizes = rng.choice(np.arange(1, params.r + 1), size=total_batches, p=params.alphas)
    owner = np.repeat(np.arange(count), n_batches)
    return np.bincount(owner, weights=sizes, minlength=count).astype(np.int64)


def upper_tail_bound(params: SpdParams, n: int) -> float:
    """Chernoff bound on P{X > n} via the generating function.

    Minimizes exp(sum_i theta_i*(s**i - 1) - n*ln s) over s >= 1; the
    stationary point solves sum_i i*theta_i*s**i = n and is bracketed by
    doubling, then bisected. Used as the checkable bound on truncated
    normalization sums.
    """
    theta = np.asarray(params.theta)
    i = np.arange(1, len(theta) + 1, dtype=float)

    def mean_at(s):
        return float(np.dot(i * theta, s**i))

    def exponent(s):
        return float(np.dot(theta, s**i - 1.0)) - n * math.log(s)

    if mean_at(1.0) >= n:
        return 1.0
    hi = 2.0
    while mean_at(hi) < n:
        hi *= 2.0
        if hi > 1e12:
            break
    lo = hi / 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_at(mid) < n:
            lo = mid
        else:
            hi = mid
    return min(1.0, math.exp(exponent(0.5 * (lo + hi))))
