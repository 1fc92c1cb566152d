import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uapprox.errors import InputError
from uapprox.netcore import (COSINE_SQUASHER, EXPONENTIAL, HEAVISIDE, LOGISTIC, Activation,
                             GriddedFunction, ShallowNet, eval_net, lp_error, make_term,
                             net_from_terms, sup_error)


class TestActivation:
    def test_heaviside_is_one_at_zero(self):
        np.testing.assert_array_equal(HEAVISIDE(np.array([-1e-300, 0.0, 2.0])), [0.0, 1.0, 1.0])

    def test_logistic_matches_formula(self):
        t = np.linspace(-30, 30, 101)
        np.testing.assert_allclose(LOGISTIC(t), 1 / (1 + np.exp(-t)), rtol=1e-3, atol=1e-16)
        mid = np.abs(t) < 5
        np.testing.assert_allclose(LOGISTIC(t[mid]), 1 / (1 + np.exp(-t[mid])), rtol=1e-14)
        assert LOGISTIC(0.0) == 0.5
        assert np.all(np.diff(LOGISTIC(np.linspace(-50, 50, 10001))) >= 0)

    def test_cosine_squasher_pieces(self):
        t = np.array([-3.0, -np.pi / 2, -np.pi / 3, 0.0, 1.0])
        np.testing.assert_allclose(COSINE_SQUASHER(t), [0.0, 0.0, 0.5, 1.0, 1.0], atol=1e-15)

    def test_custom_table_interpolates_and_holds_ends(self):
        act = Activation.table([0.0, 1.0, 2.0], [0.0, 0.25, 1.0])
        np.testing.assert_allclose(act(np.array([-5.0, 0.5, 1.5, 9.0])), [0.0, 0.125, 0.625, 1.0])
        assert act.squashing

    def test_custom_table_rejects_unsorted(self):
        with pytest.raises(InputError):
            Activation.table([0.0, 0.0, 1.0], [0.0, 0.5, 1.0])

    def test_flags(self):
        assert HEAVISIDE.squashing and not HEAVISIDE.smooth
        assert LOGISTIC.squashing and LOGISTIC.smooth
        assert EXPONENTIAL.smooth and not EXPONENTIAL.squashing

    def test_unknown_kind(self):
        with pytest.raises(InputError):
            Activation("relu")


class TestEvalNet:
    def test_empty_net(self):
        assert eval_net(ShallowNet(1), [0.5]) == 0.0

    def test_single_heaviside_term(self):
        net = net_from_terms(1, [(2.0, 1.0, 0.0, HEAVISIDE)])
        assert eval_net(net, [1.0]) == 2.0

    def test_single_logistic_term(self):
        net = net_from_terms(1, [(1.0, 1.0, 0.0, LOGISTIC)])
        assert eval_net(net, [0.0]) == 0.5

    def test_dimension_mismatch(self):
        net = net_from_terms(2, [(1.0, [1.0, 1.0], 0.0, LOGISTIC)])
        with pytest.raises(InputError):
            eval_net(net, [1.0])
        with pytest.raises(InputError):
            net(np.zeros((3, 3)))

    def test_term_dimension_checked(self):
        with pytest.raises(InputError):
            ShallowNet(2, (make_term(1.0, [1.0], 0.0, LOGISTIC),))

    def test_json_round_trip(self):
        net = net_from_terms(2, [(1.5, [1.0, -2.0], 0.25, LOGISTIC),
                                 (-0.5, [0.0, 3.0], -1.0, Activation.table([0, 1], [0, 1]))])
        again = ShallowNet.from_json(net.to_json())
        assert again == net
        d = json.loads(net.to_json())
        assert set(d) == {"input_dim", "terms"}
        assert set(d["terms"][0]) == {"c", "w", "b", "activation"}

    def test_compose_affine(self):
        net = net_from_terms(1, [(1.0, 2.0, 0.5, LOGISTIC)])
        moved = net.compose_affine([[1.0]], [-3.0])
        x = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(moved(x), net(x - 3.0), rtol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)), max_size=6),
           st.floats(-3, 3))
    def test_value_is_the_term_sum(self, rows, x):
        net = net_from_terms(1, [(c, w, b, LOGISTIC) for c, w, b in rows])
        expected = sum(c / (1 + np.exp(-(w * x + b))) for c, w, b in rows)
        assert eval_net(net, [x]) == pytest.approx(expected, abs=1e-12)


class TestGriddedFunction:
    def test_weights_sum_to_volume(self):
        f = GriddedFunction.from_callable(lambda X: X[:, 0], [0.0, -1.0], [2.0, 3.0], 9)
        assert f.samples.size == 81
        assert np.all(f.weights >= 0)
        assert f.weights.sum() == pytest.approx(8.0, rel=1e-14)

    def test_default_resolutions(self):
        assert GriddedFunction.from_callable(np.sin, [0.0], [1.0]).resolution == (1025,)
        g = GriddedFunction.from_callable(lambda X: X[:, 0], [0, 0], [1, 1])
        assert g.resolution == (65, 65)

    def test_sample_count_checked(self):
        with pytest.raises(InputError):
            GriddedFunction((0.0,), (1.0,), (5,), np.zeros(4))

    def test_lp_requires_exponent(self):
        with pytest.raises(InputError):
            GriddedFunction((0.0,), (1.0,), (3,), np.zeros(3), norm="lp")


class TestErrors:
    def test_exact_net_has_zero_error(self):
        net = net_from_terms(1, [(1.0, 1.0, 0.0, LOGISTIC)])
        f = GriddedFunction.from_callable(LOGISTIC, [-3.0], [3.0], 101)
        assert sup_error(f, net) == 0.0
        assert lp_error(f, net, 2) == 0.0

    def test_constant_against_empty_net(self):
        f = GriddedFunction.from_callable(lambda x: np.ones_like(x), [0.0], [1.0], 33)
        assert sup_error(f, ShallowNet(1)) == 1.0
        g = GriddedFunction.from_callable(lambda x: 2 * np.ones_like(x), [0.0], [3.0], 33)
        assert lp_error(g, ShallowNet(1), 3) == pytest.approx(2 * 3 ** (1 / 3), rel=1e-14)

    def test_identity_against_half_step(self):
        # |x - 1{x >= 1/2}| peaks at 1/2 on [0, 1]
        f = GriddedFunction.from_callable(lambda x: x, [0.0], [1.0], 1025)
        net = net_from_terms(1, [(1.0, 1.0, -0.5, HEAVISIDE)])
        assert sup_error(f, net) == 0.5

    def test_l2_of_identity(self):
        f = GriddedFunction.from_callable(lambda x: x, [0.0], [1.0], 1025)
        # trapezoid error for x^2 is h^2/6 in the integral
        assert lp_error(f, ShallowNet(1), 2) == pytest.approx(1 / np.sqrt(3), abs=1e-6)

    def test_p_below_one_rejected(self):
        f = GriddedFunction.from_callable(lambda x: x, [0.0], [1.0], 5)
        with pytest.raises(InputError):
            lp_error(f, ShallowNet(1), 0.5)

    def test_grid_dimension_mismatch(self):
        f = GriddedFunction.from_callable(lambda x: x, [0.0], [1.0], 5)
        with pytest.raises(InputError):
            sup_error(f, ShallowNet(2))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.lists(st.floats(-3, 3), min_size=2, max_size=2))
    def test_triangle_inequality(self, a, b):
        f = GriddedFunction.from_callable(np.sin, [-2.0], [2.0], 257)
        A = net_from_terms(1, [(a[0], 1.0, a[1], LOGISTIC)])
        B = net_from_terms(1, [(b[0], -1.0, b[1], LOGISTIC)])
        gap = np.max(np.abs(A(f.points) - B(f.points)))
        assert sup_error(f, A) <= sup_error(f, B) + gap + 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_lp_monotone_in_p_on_probability_weights(self, seed):
        rng = np.random.default_rng(seed)
        f = GriddedFunction.from_callable(lambda x: rng.standard_normal(x.size), [0.0], [1.0], 65)
        errs = [lp_error(f, ShallowNet(1), p) for p in (1.0, 1.5, 2.0, 4.0, 8.0)]
        assert np.all(np.diff(errs) >= -1e-12)

    def test_refinement_changes_sup_error_by_at_most_lip_h(self):
        net = net_from_terms(1, [(1.0, 3.0, 0.0, LOGISTIC)])
        lip = 1.0 + 0.75  # |sin'| + |net'|
        for n in (33, 65, 129):
            coarse = GriddedFunction.from_callable(np.sin, [-2.0], [2.0], n)
            fine = GriddedFunction.from_callable(np.sin, [-2.0], [2.0], 2 * n - 1)
            h = 4.0 / (2 * n - 2)
            assert abs(sup_error(fine, net) - sup_error(coarse, net)) <= lip * h
