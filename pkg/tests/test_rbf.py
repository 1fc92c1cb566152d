import math

import numpy as np
import pytest

from uapprox.errors import HypothesisViolation, InputError
from uapprox.netcore import GriddedFunction
from uapprox.rbf import (RbfKernel, RbfNet, build_rbf_net, cell_midpoints, kernel_integral,
                         mollified_value, rbf_error, rbf_error_sweep, sphere_area)

GAUSS = RbfKernel("gaussian")
TRI = RbfKernel("triangular")


def bump(lo=-1.0, hi=1.0, resolution=2049):
    return GriddedFunction.from_callable(lambda x: np.cos(np.pi * x / 2) ** 2, [lo], [hi], resolution)


class TestKernel:
    def test_integrals(self):
        assert kernel_integral(GAUSS, 1) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        assert kernel_integral(GAUSS, 2) == pytest.approx(math.pi, rel=1e-12)
        assert kernel_integral(GAUSS, 3) == pytest.approx(math.pi ** 1.5, rel=1e-12)
        assert kernel_integral(TRI, 1) == pytest.approx(1.0, rel=1e-14)
        # radial cone of height 1 over the unit disc
        assert kernel_integral(TRI, 2) == pytest.approx(math.pi / 3, rel=1e-14)

    def test_table_kernel(self):
        k = RbfKernel("custom-table-radial", (0.0, 0.5, 1.0, 1.0, 1.0, 0.0))
        np.testing.assert_allclose(k(np.array([0.25, -0.75, 2.0])), [1.0, 0.5, 0.0])
        assert kernel_integral(k, 1) == pytest.approx(1.5, rel=1e-14)
        assert k.support_radius() == 1.0

    @pytest.mark.parametrize("params", [(0.0, 1.0, 1.0, 0.5), (0.1, 1.0, 1.0, 0.0), (0.0, 1.0, 1.0)])
    def test_table_validation(self, params):
        with pytest.raises(InputError):
            RbfKernel("custom-table-radial", params)

    def test_zero_integral(self):
        k = RbfKernel("custom-table-radial", (0.0, 1.0, 2.0, 1.0, -0.5, 0.0))
        with pytest.raises(HypothesisViolation):
            kernel_integral(k, 1)

    def test_sphere_area(self):
        assert sphere_area(1) == 2.0
        assert sphere_area(2) == pytest.approx(2 * math.pi)
        assert sphere_area(3) == pytest.approx(4 * math.pi)

    def test_gaussian_radius(self):
        R = GAUSS.support_radius()
        assert math.exp(-R * R) < 1e-12


class TestNet:
    def test_midpoints(self):
        np.testing.assert_allclose(cell_midpoints(1.0, 4, 1).ravel(), [-0.75, -0.25, 0.25, 0.75])
        assert cell_midpoints(2.0, 3, 2).shape == (9, 2)

    def test_weights(self):
        f = bump()
        net = build_rbf_net(TRI, f, 4, sigma=0.5)
        expected = (1 / 0.5) * np.cos(np.pi * net.centers[:, 0] / 2) ** 2 * 0.5 / 1.0
        np.testing.assert_allclose(net.weights, expected, rtol=1e-12)

    def test_matches_mollifier(self):
        f = bump()
        sigma = 0.1
        net = build_rbf_net(GAUSS, f, 256, sigma)
        x = np.linspace(-1.2, 1.2, 13)
        np.testing.assert_allclose(net(x), mollified_value(GAUSS, f, sigma, x), atol=1e-3)

    def test_json_round_trip(self):
        net = build_rbf_net(TRI, bump(), 8)
        again = RbfNet.from_dict(net.to_dict())
        np.testing.assert_array_equal(again.centers, net.centers)
        assert again.kernel == net.kernel and again.sigma == net.sigma

    def test_boundary_must_vanish(self):
        f = GriddedFunction.from_callable(lambda x: 1 + 0 * x, [-1.0], [1.0], 33)
        with pytest.raises(InputError):
            build_rbf_net(GAUSS, f, 8)

    def test_box_must_be_symmetric(self):
        f = GriddedFunction.from_callable(lambda x: x * (1 - x), [0.0], [1.0], 33)
        with pytest.raises(InputError):
            build_rbf_net(GAUSS, f, 8)

    def test_two_dimensional(self):
        f = GriddedFunction.from_callable(
            lambda X: np.cos(np.pi * X[:, 0] / 2) ** 2 * np.cos(np.pi * X[:, 1] / 2) ** 2, [-1, -1], [1, 1], 65)
        net = build_rbf_net(GAUSS, f, 24, sigma=0.15)
        assert rbf_error(net, f, 1.0) < 0.1


class TestErrors:
    def test_errors_fall_with_n(self):
        table = rbf_error_sweep(GAUSS, bump(), None, [2, 8, 32, 128], p=1.0)
        errs = [e for _, e in table]
        assert all(a > b for a, b in zip(errs, errs[1:]))

    def test_fixed_sigma_plateaus_at_mollifier_error(self):
        errs = [e for _, e in rbf_error_sweep(GAUSS, bump(), 0.1, [2, 8, 32, 128], p=1.0)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[3] == pytest.approx(errs[2], rel=1e-6)

    def test_error_floor_tracks_sigma(self):
        f = bump()
        small = rbf_error(build_rbf_net(GAUSS, f, 256, 0.05), f, 1.0)
        large = rbf_error(build_rbf_net(GAUSS, f, 256, 0.5), f, 1.0)
        assert small < large

    def test_bad_p(self):
        f = bump()
        with pytest.raises(InputError):
            rbf_error(build_rbf_net(GAUSS, f, 4), f, 0.5)
