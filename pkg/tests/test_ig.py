import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from sdnig.errors import ClosureError, DomainError
from sdnig.ig import (
    ig_chf,
    ig_chf_B,
    ig_from_B,
    ig_from_T,
    ig_pdf,
    ig_pdf_B,
    ig_sample,
    ig_scale_law,
    ig_sum_law,
)

pos = st.floats(min_value=1e-2, max_value=1e2, allow_nan=False)


class TestParametrisations:
    @pytest.mark.parametrize(
        "mu, lam, a, b",
        [(10 / 3, 25.0, 5.0, 1.5), (1.0, 1.0, 1.0, 1.0), (2.0, 16.0, 4.0, 2.0)],
    )
    def test_known_pairs(self, mu, lam, a, b):
        law = ig_from_T(mu, lam)
        assert law.a_scale == pytest.approx(a, rel=1e-12)
        assert law.b_shape == pytest.approx(b, rel=1e-12)
        back = ig_from_B(a, b)
        assert back.mu == pytest.approx(mu, rel=1e-12)
        assert back.lam == pytest.approx(lam, rel=1e-12)

    @given(pos, pos)
    def test_round_trip(self, mu, lam):
        law = ig_from_T(mu, lam)
        back = ig_from_B(law.a_scale, law.b_shape)
        assert math.isclose(back.mu, mu, rel_tol=1e-12)
        assert math.isclose(back.lam, lam, rel_tol=1e-12)

    @pytest.mark.parametrize("args", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_nonpositive_rejected(self, args):
        with pytest.raises(DomainError):
            ig_from_T(*args)
        with pytest.raises(DomainError):
            ig_from_B(*args)

    def test_moments_and_cumulants(self):
        law = ig_from_B(5.0, 1.5)
        assert law.mean == pytest.approx(5 / 1.5)
        assert law.var == pytest.approx(5 / 1.5**3)
        assert law.cumulant(1) == pytest.approx(law.mean)
        assert law.cumulant(2) == pytest.approx(law.var)
        assert law.cumulant(3) == pytest.approx(3 * law.var**2 / law.mean)


class TestDensity:
    @pytest.mark.parametrize("a, b", [(5.0, 1.5), (0.3, 2.0), (2.0, 0.2)])
    def test_forms_agree_and_integrate_to_one(self, a, b):
        law = ig_from_B(a, b)
        x = np.linspace(1e-3, 40, 500)
        np.testing.assert_allclose(ig_pdf(law, x), ig_pdf_B(law, x), rtol=1e-10, atol=1e-300)
        total, _ = integrate.quad(lambda s: ig_pdf(law, s), 0, np.inf, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_matches_scipy(self):
        law = ig_from_T(2.0, 3.0)
        x = np.linspace(0.05, 10, 50)
        ref = stats.invgauss.pdf(x, law.mu / law.lam, scale=law.lam)
        np.testing.assert_allclose(ig_pdf(law, x), ref, rtol=1e-10)

    def test_zero_off_support(self):
        law = ig_from_T(1.0, 1.0)
        assert np.all(ig_pdf(law, np.array([-1.0, 0.0])) == 0.0)


class TestChf:
    def test_exponential_moment_example(self):
        # b^2 = 2.25 > 2, so u = -i is inside the strip
        law = ig_from_B(5.0, 1.5)
        assert complex(ig_chf_B(law, -1j)) == pytest.approx(math.exp(5.0), rel=1e-12)
        # integrand decays like exp(-s/8); the tail beyond 600 is below e^-70
        val, _ = integrate.quad(lambda s: math.exp(s) * ig_pdf(law, s), 0, 600, limit=400)
        assert val == pytest.approx(math.exp(5.0), rel=1e-8)

    def test_two_forms_agree_in_strip(self, rng):
        law = ig_from_B(2.0, 1.3)
        u = rng.normal(size=50) * 3 + 1j * rng.uniform(law.strip_bound * 0.99, 3, size=50)
        np.testing.assert_allclose(ig_chf(law, u), ig_chf_B(law, u), rtol=1e-12)

    def test_strip_violation_raises(self):
        law = ig_from_B(5.0, 1.0)
        with pytest.raises(DomainError):
            ig_chf(law, -1j)  # Im(u) = -1 < -b^2/2 = -0.5
        with pytest.raises(DomainError):
            ig_chf_B(law, -0.6j)

    def test_matches_integral_of_density(self):
        law = ig_from_T(1.5, 2.0)
        for u in (0.3, 1.0, 4.0):
            re, _ = integrate.quad(lambda s: math.cos(u * s) * ig_pdf(law, s), 0, np.inf, limit=400)
            im, _ = integrate.quad(lambda s: math.sin(u * s) * ig_pdf(law, s), 0, np.inf, limit=400)
            assert complex(ig_chf(law, u)) == pytest.approx(complex(re, im), abs=1e-8)

    def test_empirical_chf(self, rng):
        law = ig_from_T(1.0, 2.0)
        n = 10**6
        x = ig_sample(law, rng, n)
        for u in (0.1, 0.5, 1.0, 2.0, 5.0):
            emp = np.mean(np.exp(1j * u * x))
            assert abs(emp - ig_chf(law, u)) < 4 / math.sqrt(n)


class TestSampler:
    def test_ks_against_scipy(self, rng):
        law = ig_from_B(5.0, 1.5)
        x = ig_sample(law, rng, 10**5)
        ref = stats.invgauss(law.mu / law.lam, scale=law.lam)
        assert stats.kstest(x, ref.cdf).pvalue > 0.01

    def test_extreme_shape_is_positive_and_finite(self, rng):
        # large mu*y relative to lam stresses cancellation in the root
        x = ig_sample(ig_from_T(1e3, 1e-3), rng, 10**5)
        assert np.all(np.isfinite(x)) and np.all(x > 0)


class TestClosure:
    def test_sum_example(self):
        law = ig_sum_law(ig_from_B(2.0, 1.5), ig_from_B(3.0, 1.5))
        assert (law.a_scale, law.b_shape) == pytest.approx((5.0, 1.5))

    def test_sum_in_T_form(self):
        mu0, lam0 = 2.0, 1.0
        x = ig_from_T(mu0 * 1, lam0 * 1**2)
        y = ig_from_T(mu0 * 3, lam0 * 3**2)
        law = ig_sum_law(x, y)
        assert (law.mu, law.lam) == pytest.approx((8.0, 16.0))

    def test_sum_shape_mismatch(self):
        with pytest.raises(ClosureError):
            ig_sum_law(ig_from_B(2.0, 1.5), ig_from_B(3.0, 1.6))

    def test_sum_matches_sampled_sum(self, rng):
        x, y = ig_from_B(2.0, 1.5), ig_from_B(3.0, 1.5)
        s = ig_sample(x, rng, 10**5) + ig_sample(y, rng, 10**5)
        d = ig_sample(ig_sum_law(x, y), rng, 10**5)
        assert stats.ks_2samp(s, d).pvalue > 0.01

    def test_scale_identity(self):
        law = ig_from_B(5.0, 1.5)
        same = ig_scale_law(1.0, law)
        assert (same.a_scale, same.b_shape) == pytest.approx((5.0, 1.5))

    def test_scale_matches_scaled_draws(self, rng):
        law = ig_from_T(3.0, 12.0)
        scaled = ig_scale_law(0.5, law)
        assert scaled.mu == pytest.approx(1.5)
        x = 0.5 * ig_sample(law, rng, 10**5)
        ref = stats.invgauss(scaled.mu / scaled.lam, scale=scaled.lam)
        assert stats.kstest(x, ref.cdf).pvalue > 0.01

    def test_scale_chf_identity(self):
        law = ig_from_B(5.0, 1.5)
        c = 2.0
        u = np.array([0.3, 1.0, -2.0 + 0.1j])
        np.testing.assert_allclose(ig_chf(ig_scale_law(c, law), u), ig_chf(law, c * u), rtol=1e-12)

    @pytest.mark.parametrize("c", [0.0, -1.0])
    def test_scale_rejects_nonpositive(self, c):
        with pytest.raises(DomainError):
            ig_scale_law(c, ig_from_B(1.0, 1.0))
