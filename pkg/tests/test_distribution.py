import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stutterpoisson import (
    GspdParams,
    NegativeProbabilityWarning,
    SpdParams,
    central_moments,
    cumulant,
    cumulants_from_moments,
    moments_from_cumulants,
    pgf,
    pmf,
    pmf_oracle,
    sample,
    upper_tail_bound,
)

E1 = math.exp(-1.0)

HERMITE = SpdParams((0.5, 0.25))


def random_spd(rng, r_max=6, total_max=5.0):
    r = int(rng.integers(1, r_max + 1))
    theta = rng.uniform(0.01, 1.0, r)
    theta *= rng.uniform(0.1, total_max) / theta.sum()
    return SpdParams(tuple(theta))


def brute_force_raw_moments(params, order, tail_tol=1e-12):
    """Moments by direct summation over an oracle-evaluated support prefix."""
    n_max = 40
    while upper_tail_bound(params, n_max) * (n_max + 40) ** order > tail_tol:
        n_max += 40
    probs = pmf_oracle(params, n_max)
    support = np.arange(n_max + 1, dtype=float)
    return [float(np.dot(probs, support**k)) for k in range(1, order + 1)]


class TestParams:
    def test_rejects_negative_rates(self):
        with pytest.raises(ValueError):
            SpdParams((0.5, -0.1))

    def test_rejects_all_zero(self):
        with pytest.raises(ValueError):
            SpdParams((0.0, 0.0))

    def test_trims_trailing_zeros(self):
        assert SpdParams((0.5, 0.25, 0.0)).r == 2
        assert SpdParams((0.0, 0.5)).r == 2  # leading zeros stay

    def test_derived_quantities(self):
        assert HERMITE.total == 0.75
        np.testing.assert_allclose(HERMITE.alphas, [2 / 3, 1 / 3])
        assert abs(sum(HERMITE.alphas) - 1.0) <= 1e-12

    def test_from_alphas_absorbs_time(self):
        params = SpdParams.from_alphas((2 / 3, 1 / 3), lam=0.375, t=2.0)
        np.testing.assert_allclose(params.theta, HERMITE.theta)

    def test_gspd_needs_positive_total(self):
        with pytest.raises(ValueError):
            GspdParams((0.2, -0.3))
        assert GspdParams((0.5, -0.2)).total == pytest.approx(0.3)


class TestPmf:
    def test_poisson_special_case(self):
        np.testing.assert_allclose(
            pmf(SpdParams((1.0,)), 3), [E1, E1, E1 / 2, E1 / 6], rtol=1e-14
        )

    @pytest.mark.parametrize("lam", [0.1, 1.0, 5.0])
    def test_poisson_reduction(self, lam):
        want = [math.exp(-lam) * lam**n / math.factorial(n) for n in range(21)]
        np.testing.assert_allclose(pmf(SpdParams((lam,)), 20), want, atol=1e-14)

    def test_claims_triple_fit_row(self):
        # fitted claim-rate vector reproduces the published expected counts
        params = SpdParams((0.0954483, 0.0024492, 0.0002446))
        scaled = 106974 * pmf(params, 5)
        want = [96974.1, 9256.0, 679.2, 60.4, 4.0]
        np.testing.assert_allclose(scaled[:5], want, atol=0.1)

    def test_matches_oracle(self):
        np.testing.assert_allclose(
            pmf(HERMITE, 8), pmf_oracle(HERMITE, 8), atol=1e-12
        )

    def test_negative_n_max_rejected(self):
        with pytest.raises(ValueError):
            pmf(HERMITE, -1)

    def test_signed_rates_flagged_when_not_a_law(self):
        bad = GspdParams((1.0, -0.4))
        with pytest.warns(NegativeProbabilityWarning):
            values = pmf(bad, 10)
        assert values.min() < -1e-12

    def test_signed_rates_quiet_when_valid(self):
        # a genuine law's signed representation stays nonnegative
        rho = 0.3 / 0.7
        rates = tuple((-1.0) ** (k - 1) / k * rho**k for k in range(1, 30))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            values = pmf(GspdParams(rates), 10)
        np.testing.assert_allclose(values[:2], [0.7, 0.3], atol=1e-12)


class TestPmfOracle:
    def test_poisson_values(self):
        np.testing.assert_allclose(
            pmf_oracle(SpdParams((1.0,)), 2), [E1, E1, E1 / 2], rtol=1e-14
        )

    def test_second_term_by_hand(self):
        # P_2 = e^-0.75 * (theta_2 + theta_1^2/2) = e^-0.75 * 0.375
        got = pmf_oracle(HERMITE, 2)[2]
        assert got == pytest.approx(math.exp(-0.75) * 0.375, rel=1e-14)

    def test_oracle_equivalence_randomized(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(100):
            params = random_spd(rng)
            diff = np.abs(pmf(params, 30) - pmf_oracle(params, 30)).max()
            worst = max(worst, diff)
        assert worst <= 1e-12


class TestPgf:
    def test_at_one_is_exactly_one(self):
        assert pgf(HERMITE, 1.0) == 1.0

    def test_at_zero_is_zero_mass(self):
        assert pgf(SpdParams((1.0,)), 0.0) == pytest.approx(E1, rel=1e-15)

    def test_hand_value(self):
        assert pgf(HERMITE, 0.5) == pytest.approx(math.exp(-0.4375), rel=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            pgf(HERMITE, 1.5)
        with pytest.raises(ValueError):
            pgf(HERMITE, -1.0001)


class TestCumulants:
    def test_poisson_all_orders_equal_rate(self):
        for n in range(1, 7):
            assert cumulant(SpdParams((1.0,)), n) == pytest.approx(1.0)

    def test_claims_mean(self):
        params = SpdParams((0.0954483, 0.0024492, 0.0002446))
        assert cumulant(params, 1) == pytest.approx(0.1010806, abs=5e-7)

    def test_power_sum_order3(self):
        # 0.5*1^3 + 0.25*2^3, cross-checked against the brute-force oracle
        assert cumulant(HERMITE, 3) == pytest.approx(2.5, rel=1e-14)
        brute = cumulants_from_moments(brute_force_raw_moments(HERMITE, 3))
        assert brute[2] == pytest.approx(2.5, rel=1e-9)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            cumulant(HERMITE, 0)


class TestMomentConversions:
    def test_poisson_raw_moments(self):
        assert moments_from_cumulants([1.0, 1.0, 1.0]) == pytest.approx([1.0, 2.0, 5.0])

    def test_degenerate_point_mass(self):
        mu = 1.7
        got = moments_from_cumulants([mu, 0.0, 0.0, 0.0])
        assert got == pytest.approx([mu, mu**2, mu**3, mu**4])

    def test_second_moment_identity(self):
        k1, k2 = 0.4, 0.9
        m = moments_from_cumulants([k1, k2])
        assert m[1] == pytest.approx(k2 + k1**2)

    def test_poisson_cumulants_back(self):
        got = cumulants_from_moments([1.0, 2.0, 5.0, 15.0])
        assert got == pytest.approx([1.0, 1.0, 1.0, 1.0])

    def test_variance_identity(self):
        m1, m2 = 0.7, 1.3
        got = cumulants_from_moments([m1, m2])
        assert got[1] == pytest.approx(m2 - m1**2)

    def test_claims_low_orders_equal_central_moments(self, claims_hist):
        counts = np.array(sorted(claims_hist.bins), dtype=float)
        freqs = np.array([claims_hist.bins[int(c)] for c in counts])
        raw = [float(np.dot(freqs, counts**k)) / claims_hist.n for k in (1, 2, 3)]
        kappa = cumulants_from_moments(raw)
        assert kappa[0] == pytest.approx(0.1010806364, abs=1e-9)
        assert kappa[1] == pytest.approx(0.1074468102, abs=1e-9)
        assert kappa[2] == pytest.approx(0.1216468798, abs=1e-9)

    @given(st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=1, max_size=8))
    @settings(max_examples=120)
    def test_round_trip_identity(self, kappa):
        back = cumulants_from_moments(moments_from_cumulants(kappa))
        scale = max(1.0, max(abs(k) for k in kappa))
        np.testing.assert_allclose(back, kappa, atol=1e-10 * scale)


class TestCentralMoments:
    def test_first_is_zero(self):
        assert central_moments(HERMITE, 1)[0] == 0.0

    def test_low_orders_equal_cumulants(self):
        c = central_moments(HERMITE, 3)
        assert c[1] == pytest.approx(cumulant(HERMITE, 2), rel=1e-14)
        assert c[2] == pytest.approx(cumulant(HERMITE, 3), rel=1e-14)

    def test_fourth_order_identity_and_brute_force(self):
        c = central_moments(HERMITE, 4)
        k2, k4 = cumulant(HERMITE, 2), cumulant(HERMITE, 4)
        assert c[3] == pytest.approx(k4 + 3 * k2**2, rel=1e-13)
        raw = brute_force_raw_moments(HERMITE, 4, tail_tol=1e-10)
        n_max = 120
        probs = pmf_oracle(HERMITE, n_max)
        centered = np.arange(n_max + 1, dtype=float) - raw[0]
        brute_c4 = float(np.dot(probs, centered**4))
        assert c[3] == pytest.approx(brute_c4, rel=1e-9)


class TestCumulantConsistency:
    def test_against_brute_force_moments(self):
        # power sums == cumulants extracted from oracle-summed raw moments
        rng = np.random.default_rng(11)
        for _ in range(8):
            params = random_spd(rng, r_max=4, total_max=2.0)
            raw = brute_force_raw_moments(params, 4, tail_tol=1e-10)
            kappa = cumulants_from_moments(raw)
            for order in range(1, 5):
                want = cumulant(params, order)
                assert kappa[order - 1] == pytest.approx(want, rel=1e-8, abs=1e-10)


class TestNormalization:
    def test_mass_within_tail_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            params = random_spd(rng)
            n_max = int(rng.integers(10, 31))
            total = pmf(params, n_max).sum()
            bound = upper_tail_bound(params, n_max)
            assert total <= 1.0 + 1e-12
            assert total >= 1.0 - bound

    def test_bound_dominates_true_tail(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            params = random_spd(rng, total_max=3.0)
            long_prefix = pmf(params, 200)
            for n_max in (10, 20, 30):
                true_tail = float(long_prefix[n_max + 1 :].sum())
                assert true_tail <= upper_tail_bound(params, n_max) + 1e-15


class TestConvolutionClosure:
    def test_rate_addition_is_convolution(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            a = random_spd(rng, r_max=4, total_max=2.0)
            b = random_spd(rng, r_max=4, total_max=2.0)
            r = max(a.r, b.r)
            merged = SpdParams(
                tuple(
                    (a.theta[i] if i < a.r else 0.0) + (b.theta[i] if i < b.r else 0.0)
                    for i in range(r)
                )
            )
            n_max = 25
            conv = np.convolve(pmf(a, n_max), pmf(b, n_max))[: n_max + 1]
            np.testing.assert_allclose(pmf(merged, n_max), conv, atol=1e-12)

    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_infinitely_divisible(self, k):
        from stutterpoisson import divide

        n_max = 30
        piece = pmf(divide(HERMITE, k), n_max)
        acc = piece.copy()
        for _ in range(k - 1):
            acc = np.convolve(acc, piece)[: n_max + 1]
        np.testing.assert_allclose(acc, pmf(HERMITE, n_max), atol=1e-11)


class TestSample:
    def test_zero_count(self):
        assert sample(SpdParams((1.0,)), 0, seed=1).shape == (0,)

    def test_deterministic_given_seed(self):
        a = sample(HERMITE, 1000, seed=123)
        b = sample(HERMITE, 1000, seed=123)
        assert (a == b).all()

    def test_poisson_mean_band(self):
        draws = sample(SpdParams((1.0,)), 10**6, seed=7)
        assert abs(draws.mean() - 1.0) <= 4 * 1e-3

    def test_hermite_mean_and_variance_bands(self):
        draws = sample(HERMITE, 10**6, seed=8)
        k1, k2 = cumulant(HERMITE, 1), cumulant(HERMITE, 2)
        c4 = central_moments(HERMITE, 4)[3]
        se_mean = math.sqrt(k2 / 10**6)
        se_var = math.sqrt((c4 - k2**2) / 10**6)
        assert abs(draws.mean() - k1) <= 4 * se_mean
        assert abs(draws.var() - k2) <= 4 * se_var

    def test_rejects_signed_rates(self):
        with pytest.raises(TypeError):
            sample(GspdParams((0.5, -0.1)), 10, seed=0)
