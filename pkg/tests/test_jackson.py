import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uapprox.errors import InputError
from uapprox.jackson import (TrigPoly, apply_smoothing_operator, approximation_error,
                             chebyshev_transfer, difference, dirichlet, fejer, jackson_constant,
                             jackson_constant_bounds, jackson_kernel, make_kernel,
                             modulus_of_smoothness, periodic_grid, sine_ratio, smoothing_order)


def constant_term(N, r):
    """Exact c_{N,r}: the constant term of (sum_{|l|<N} (N - |l|) e^{ilx})^r in integer arithmetic."""
    base = np.array([N - abs(l) for l in range(-(N - 1), N)], dtype=object)
    poly = np.array([1], dtype=object)
    for _ in range(r):
        poly = np.convolve(poly, base)
    return int(poly[len(poly) // 2])


# frozen from constant_term
EXACT_CONSTANTS = {(8, 2): 344, (3, 2): 19, (5, 3): 1751, (1, 4): 1, (10, 4): 4816030}


class TestKernels:
    def test_frozen_oracle(self):
        for (N, r), c in EXACT_CONSTANTS.items():
            assert constant_term(N, r) == c

    @pytest.mark.parametrize("N,r", sorted(EXACT_CONSTANTS))
    def test_constant_matches_oracle(self, N, r):
        assert jackson_constant(N, r) == pytest.approx(EXACT_CONSTANTS[(N, r)], rel=1e-10)

    @pytest.mark.parametrize("N", [1, 2, 5, 17, 40])
    @pytest.mark.parametrize("r", [2, 3, 4])
    def test_constant_bounds(self, N, r):
        lo, hi = jackson_constant_bounds(N, r)
        assert lo <= jackson_constant(N, r) <= hi

    @pytest.mark.parametrize("N,r", [(4, 2), (9, 3), (6, 4)])
    def test_kernel_normalized_and_bounded(self, N, r):
        spec = make_kernel(N, r)
        x = periodic_grid(8 * N * r)  # exact for trigonometric degree < 8 N r
        vals = jackson_kernel(spec, x)
        assert vals.mean() == pytest.approx(1.0, abs=1e-10)
        assert np.all(vals >= 0)
        assert vals.max() <= spec.pointwise_bound

    def test_r_one_rejected(self):
        with pytest.raises(InputError):
            make_kernel(5, 1)

    def test_dirichlet_is_cosine_sum(self):
        x = np.linspace(-7, 7, 1001)
        for N in (0, 1, 4):
            expected = 1 + 2 * sum(np.cos(k * x) for k in range(1, N + 1))
            np.testing.assert_allclose(dirichlet(N, x), expected, atol=1e-11)

    def test_fejer_mean_is_one(self):
        x = periodic_grid(64)
        for N in (1, 3, 7):
            assert fejer(N, x).mean() == pytest.approx(1.0, abs=1e-13)

    def test_sine_ratio_at_poles(self):
        for m in (1, 2, 5, 8):
            x = 2 * math.pi * np.array([-2, -1, 0, 1, 2])
            expected = m * np.array([(-1) ** (k * (m - 1)) for k in (-2, -1, 0, 1, 2)])
            np.testing.assert_allclose(sine_ratio(m, x), expected)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 30), st.floats(-20, 20))
    def test_sine_ratio_is_continuous(self, m, x):
        eps = 1e-7
        a, b = sine_ratio(m, x - eps), sine_ratio(m, x + eps)
        assert abs(a - b) <= m ** 3 * 1e-6


class TestDifferences:
    def test_second_difference_of_square(self):
        np.testing.assert_allclose(difference(lambda x: x ** 2, 2, 0.1, np.array([0.0, 3.0])), [0.02, 0.02])

    def test_modulus_of_sine(self):
        assert 0.008 <= modulus_of_smoothness(np.sin, 2, "sup", 0.1) <= 0.011

    def test_modulus_monotone(self):
        vals = [modulus_of_smoothness(np.sin, 2, 2.0, t) for t in (0.05, 0.1, 0.2, 0.4)]
        assert np.all(np.diff(vals) > 0)

    def test_modulus_bad_t(self):
        with pytest.raises(InputError):
            modulus_of_smoothness(np.sin, 2, "sup", 7.0)


class TestTrigPoly:
    def test_from_samples_round_trip(self):
        rng = np.random.default_rng(0)
        tp = TrigPoly(rng.standard_normal(6), rng.standard_normal(5))
        x = 2 * math.pi * np.arange(32) / 32
        back = TrigPoly.from_samples(tp(x), 5)
        np.testing.assert_allclose(back.a, tp.a, atol=1e-13)
        np.testing.assert_allclose(back.b, tp.b, atol=1e-13)
        assert back.tail < 1e-13

    def test_tail_reports_dropped_coefficient(self):
        x = 2 * math.pi * np.arange(32) / 32
        assert TrigPoly.from_samples(np.cos(x) + 0.25 * np.sin(7 * x), 3).tail == pytest.approx(0.25)

    def test_degree_and_add(self):
        s = TrigPoly([1.0, 0.0, 2.0], [0.0, 0.0]) + TrigPoly([0.0, 0.0, -2.0], [0.0, 0.0])
        assert s.degree == 0
        assert TrigPoly.from_dict(s.scaled(2.0).to_dict()).a[0] == 2.0

    def test_chebyshev_transfer(self):
        tp = TrigPoly([0.5, -1.0, 0.25, 2.0], [0.0, 0.0, 0.0])
        P = chebyshev_transfer(tp)
        x = np.linspace(-3, 3, 50)
        np.testing.assert_allclose(P(2 * np.cos(x)), tp(x), atol=1e-12)

    def test_chebyshev_rejects_sines(self):
        with pytest.raises(InputError):
            chebyshev_transfer(TrigPoly([0.0, 1.0], [1.0]))


class TestOperator:
    def test_smoothing_order(self):
        assert smoothing_order(8, 2) == 5
        assert smoothing_order(9, 3) == 4

    def test_constant_is_reproduced(self):
        tp = apply_smoothing_operator(lambda x: 3.0 + 0 * x, 6, 2)
        assert tp.a[0] == pytest.approx(3.0, abs=1e-12)
        assert tp.degree == 0

    @pytest.mark.parametrize("n,r", [(4, 2), (10, 3), (16, 2)])
    def test_degree_and_frequency_response(self, n, r):
        tp = apply_smoothing_operator(np.cos, n, r)
        assert tp.N == n
        assert tp.tail <= 1e-8
        # cos is an eigenfunction; the multiplier is real and at most 1 + 2^r in size
        np.testing.assert_allclose(tp.a[2:], 0, atol=1e-9)
        np.testing.assert_allclose(tp.b, 0, atol=1e-9)
        assert abs(tp.a[1]) <= 2 ** r + 1

    def test_sine_error_shrinks(self):
        errs = [approximation_error(np.sin, apply_smoothing_operator(np.sin, n, 2)) for n in (8, 16, 32)]
        assert errs[0] > errs[1] > errs[2]
        # the second modulus of sin is about t^2, so halving 1/n should roughly quarter the error
        assert errs[2] / errs[1] < 0.4

    def test_linear(self):
        f = lambda x: np.sin(x) + 0.5 * np.cos(3 * x)
        a = apply_smoothing_operator(f, 12, 2)
        b = apply_smoothing_operator(np.sin, 12, 2) + apply_smoothing_operator(lambda x: np.cos(3 * x), 12, 2).scaled(0.5)
        np.testing.assert_allclose(a.a, b.a, atol=1e-9)
        np.testing.assert_allclose(a.b, b.b, atol=1e-9)

    def test_bad_order(self):
        with pytest.raises(InputError):
            apply_smoothing_operator(np.sin, 5, 1)
