"""Fitting count-frequency data by cumulant matching.

The batch-rate law is linear in its parameters at the cumulant level:
kappa_n = sum_i theta_i * i**n. Sample cumulants therefore determine the
rates through a small Vandermonde system, solved directly. Poisson and
negative binomial method-of-moments fits are provided as baselines.

Sample moments are population style (divide by n, no bias correction):
that convention is what makes the claim-data case study reproduce digit
for digit.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .distribution import GspdParams, SpdParams, cumulants_from_moments, pmf

__all__ = [
    "CountHistogram",
    "SampleMoments",
    "FitResult",
    "NegativeRateWarning",
    "sample_moments",
    "sample_cumulants",
    "vandermonde_solve",
    "fit_spd",
    "fit_poisson",
    "fit_nbd",
    "nbd_pmf",
]


class NegativeRateWarning(UserWarning):
    """Cumulant matching produced one or more negative batch rates."""


@dataclass(frozen=True)
class CountHistogram:
    """Observed frequencies: count value i -> number of observations v_i."""

    bins: dict

    def __post_init__(self):
        clean = {}
        for count, freq in self.bins.items():
            count = int(count)
            freq = int(freq)
            if count < 0:
                raise ValueError(f"count values must be >= 0, got {count}")
            if freq < 0:
                raise ValueError(f"frequencies must be >= 0, got {freq} at count {count}")
            clean[count] = freq
        if sum(clean.values()) < 1:
            raise ValueError("histogram needs at least one observation")
        object.__setattr__(self, "bins", clean)

    @classmethod
    def from_samples(cls, values) -> "CountHistogram":
        counts, freqs = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
        return cls(dict(zip(counts.tolist(), freqs.tolist())))

    @property
    def n(self) -> int:
        """Total number of observations."""
        return sum(self.bins.values())

    @property
    def max_count(self) -> int:
        return max(c for c, v in self.bins.items() if v > 0)

    @property
    def distinct_support(self) -> int:
        """Number of count values actually observed."""
        return sum(1 for v in self.bins.values() if v > 0)

    def frequencies(self, upto: int | None = None) -> np.ndarray:
        """Frequency vector v_0..v_upto (default: up to the largest count)."""
        upto = self.max_count if upto is None else int(upto)
        out = np.zeros(upto + 1)
        for count, freq in self.bins.items():
            if count <= upto:
                out[count] = freq
        return out


@dataclass(frozen=True)
class SampleMoments:
    """Population-style sample moments; raw[k-1] = m_k, central[k-1] = c_k (c_1 = 0)."""

    raw: tuple
    central: tuple


def sample_moments(hist: CountHistogram, order: int) -> SampleMoments:
    """Raw moments m_1..m_order and central moments about the sample mean."""
    order = int(order)
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    counts = np.array(sorted(hist.bins), dtype=float)
    freqs = np.array([hist.bins[int(c)] for c in counts], dtype=float)
    n = float(freqs.sum())
    raw = tuple(float(np.dot(freqs, counts**k)) / n for k in range(1, order + 1))
    centered = counts - raw[0]
    central = tuple(float(np.dot(freqs, centered**k)) / n for k in range(1, order + 1))
    return SampleMoments(raw, central)


def sample_cumulants(moments: SampleMoments) -> tuple:
    """Sample cumulants from raw sample moments.

    Orders 1..3 coincide with (mean, c_2, c_3); order 4 is c_4 - 3*c_2**2.
    """
    return tuple(cumulants_from_moments(moments.raw))


def vandermonde_solve(kappa) -> np.ndarray:
    """Batch rates theta_1..theta_r matching the cumulants kappa_1..kappa_r.

    Solves V theta = kappa with V[n, i] = i**n (n, i = 1..r) by partial
    pivoting. The system's conditioning degrades fast; a residual above
    1e-6 * |kappa| raises (in practice r <= 8 is safe).
    """
    kappa = np.asarray(kappa, dtype=float)
    r = len(kappa)
    if r < 1:
        raise ValueError("need at least one cumulant")
    i = np.arange(1, r + 1, dtype=float)
    vand = i[None, :] ** np.arange(1, r + 1, dtype=float)[:, None]
    theta = np.linalg.solve(vand, kappa)
    residual = np.linalg.norm(vand @ theta - kappa)
    if residual > 1e-6 * max(np.linalg.norm(kappa), np.finfo(float).tiny):
        raise ValueError(
            f"cumulant system too ill-conditioned at order {r}: residual {residual:.3e}"
        )
    return theta


@dataclass(frozen=True)
class FitResult:
    """A fitted count model, its parameters, and fitting diagnostics.

    `params` is model dependent: SpdParams/GspdParams for batch-rate fits,
    {"lambda": ...} for Poisson, {"r": ..., "p": ...} for the negative
    binomial; None when no valid parameter vector exists. `lambda_t` is the
    total batch rate of the law's batch-Poisson representation.
    """

    model: str
    params: object
    lambda_t: float | None
    alphas: tuple | None
    sample_cumulants: tuple
    diagnostics: tuple = field(default_factory=tuple)

    def pmf_prefix(self, n_max: int) -> np.ndarray:
        """Fitted probabilities P_0..P_{n_max}."""
        if self.model == "nbd":
            return nbd_pmf(np.arange(n_max + 1), self.params["r"], self.params["p"])
        if self.model == "poisson":
            lam = self.params["lambda"]
            if lam == 0.0:
                out = np.zeros(n_max + 1)
                out[0] = 1.0
                return out
            return pmf(SpdParams((lam,)), n_max)
        if self.params is None:
            raise ValueError(f"{self.model} fit produced no usable parameters")
        return pmf(self.params, n_max)


def fit_spd(hist: CountHistogram, r: int, clamp_negative: bool = False) -> FitResult:
    """Cumulant-matching fit of an order-r batch-rate law.

    Pipeline: sample moments -> sample cumulants -> Vandermonde solve ->
    normalize to (lambda_t, alphas). Negative solved rates are kept as a
    signed law with a warning by default; `clamp_negative` zeroes them and
    renormalizes instead. Either path is recorded in diagnostics.
    """
    r = int(r)
    if r < 1:
        raise ValueError(f"model order must be >= 1, got {r}")
    kappa = sample_cumulants(sample_moments(hist, r))[:r]
    theta = vandermonde_solve(kappa)
    diagnostics = []
    if hist.distinct_support < r + 1:
        diagnostics.append(
            f"under-determined: {hist.distinct_support} distinct counts for order {r}"
        )
    if theta.min() < 0.0:
        if clamp_negative:
            theta = np.clip(theta, 0.0, None)
            diagnostics.append("negative rates clamped to zero and renormalized")
        else:
            diagnostics.append("negative rate estimates kept as a signed law")
            warnings.warn(
                f"cumulant matching gave negative batch rates {theta.tolist()}",
                NegativeRateWarning,
                stacklevel=2,
            )
    params: object
    total = float(theta.sum())
    if total <= 0.0:
        params = None
        diagnostics.append("total rate not positive: no valid parameter vector")
        lambda_t, alphas = None, None
    else:
        cls = SpdParams if theta.min() >= 0.0 else GspdParams
        params = cls(tuple(theta))
        lambda_t = params.total
        alphas = tuple(t / lambda_t for t in params.theta)
    return FitResult(
        model=f"spd-{r}",
        params=params,
        lambda_t=lambda_t,
        alphas=alphas,
        sample_cumulants=tuple(kappa),
        diagnostics=tuple(diagnostics),
    )


def fit_poisson(hist: CountHistogram) -> FitResult:
    """Poisson fit: the moment estimator lambda = sample mean (also the MLE)."""
    moments = sample_moments(hist, 1)
    lam = moments.raw[0]
    return FitResult(
        model="poisson",
        params={"lambda": lam},
        lambda_t=lam,
        alphas=(1.0,) if lam > 0.0 else None,
        sample_cumulants=(lam,),
    )


def fit_nbd(hist: CountHistogram) -> FitResult:
    """Negative binomial method-of-moments fit; needs overdispersion.

    p = mean/variance and r = mean**2/(variance - mean); equi- or
    under-dispersed data leaves the model inapplicable.
    """
    moments = sample_moments(hist, 2)
    mean = moments.raw[0]
    var = moments.central[1]
    if var <= mean:
        raise ValueError(
            f"negative binomial needs variance > mean, got variance {var} vs mean {mean}"
        )
    p = mean / var
    r = mean**2 / (var - mean)
    return FitResult(
        model="nbd",
        params={"r": r, "p": p},
        lambda_t=-r * math.log(p),
        alphas=None,
        sample_cumulants=(mean, var),
    )


def nbd_pmf(k, r: float, p: float) -> np.ndarray:
    """Negative binomial probabilities C(k+r-1, k) p**r (1-p)**k, via log-gamma."""
    k = np.asarray(k, dtype=float)
    log_p = gammaln(k + r) - gammaln(r) - gammaln(k + 1) + r * math.log(p) + k * math.log1p(-p)
    return np.exp(log_p)
