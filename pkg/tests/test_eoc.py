import math

import numpy as np
import pytest

from critnet.activations import resolve
from critnet.eoc import default_q_grid, eoc_curve, eoc_relu_family, is_on_eoc
from critnet.errors import EmptyCurve, Unsupported
from critnet.propagation import InitHyper, VarianceFate


@pytest.mark.parametrize(
    "name, sigma_w2",
    [
        ("relu", 2.0),
        ("relu+maxpool", 4 * math.pi / (3 * math.pi + 2)),
        ("relu+avgpool", 4 * math.pi / (math.pi + 1)),
    ],
)
def test_relu_family_singleton(name, sigma_w2):
    p = eoc_relu_family(resolve(name))
    assert p.sigma_b2 == 0.0
    assert p.sigma_w2 == pytest.approx(sigma_w2, rel=1e-12)
    assert abs(p.res_var) < 1e-12
    assert p.note


def test_relu_singleton_has_unit_chi():
    assert abs(eoc_relu_family(resolve("relu")).res_chi) < 1e-12


def test_pooled_singleton_chi_differs_from_one():
    # на EOC пулинга α = 1, а χ̃ = 3/4 σ²_w < 1
    p = eoc_relu_family(resolve("relu+maxpool"))
    assert p.res_chi == pytest.approx(0.75 * p.sigma_w2 - 1.0, rel=1e-10)


def test_singleton_only_for_relu_family():
    with pytest.raises(Unsupported):
        eoc_relu_family(resolve("tanh"))


def test_default_grid():
    grid = default_q_grid(20.0, 200)
    assert len(grid) == 200
    assert grid[0] == pytest.approx(1e-4)
    assert grid[-1] == pytest.approx(20.0)


class TestTanhCurve:
    @pytest.fixture(scope="class")
    def points(self):
        from critnet.quadrature import default_spec

        return eoc_curve(resolve("tanh"), list(np.geomspace(1e-2, 5.0, 12)), default_spec(), threads=2)

    def test_every_grid_point_survives(self, points):
        assert len(points) == 12

    def test_residuals(self, points):
        for p in points:
            assert p.sigma_b2 >= 0.0
            assert abs(p.res_var) < 1e-10 * max(p.q_star, 1.0)
            assert abs(p.res_chi) < 1e-8

    def test_starts_near_unit_gain(self, points):
        assert points[0].sigma_w2 == pytest.approx(1.0, abs=0.05)
        assert points[0].sigma_b2 < 1e-3

    def test_bias_grows_along_curve(self, points):
        sb = [p.sigma_b2 for p in points]
        assert all(b >= a for a, b in zip(sb, sb[1:]))


def test_linear_has_no_attracting_points(quad):
    with pytest.raises(EmptyCurve):
        eoc_curve(resolve("linear"), [0.5, 1.0, 2.0], quad)


def test_grid_must_increase(quad):
    with pytest.raises(Unsupported):
        eoc_curve(resolve("tanh"), [1.0, 0.5], quad)


def test_membership(quad):
    act = resolve("tanh")
    (p,) = eoc_curve(act, [1.0], quad)
    check = is_on_eoc(act, InitHyper(sigma_w2=p.sigma_w2, sigma_b2=p.sigma_b2), 1e-4, quad)
    assert check.on_eoc
    assert check.q_star == pytest.approx(1.0, rel=1e-6)

    off = is_on_eoc(resolve("relu"), InitHyper(sigma_w2=1.5, sigma_b2=0.5), 1e-4, quad)
    assert not off.on_eoc
    assert off.q_star == pytest.approx(2.0, rel=1e-8)
    assert off.res_chi == pytest.approx(-0.25, rel=1e-8)

    diverging = is_on_eoc(resolve("relu"), InitHyper(sigma_w2=3.0, sigma_b2=0.0), 1e-4, quad)
    assert not diverging.on_eoc
    assert diverging.variance_fate is VarianceFate.DIVERGES


def test_relu_singleton_with_hermite_quad():
    from critnet.quadrature import Backend, default_spec

    p = eoc_relu_family(resolve("relu"), default_spec(Backend.HERMITE))
    assert p.sigma_w2 == pytest.approx(2.0, rel=1e-12)
    assert abs(p.res_chi) < 1e-12


def test_bias_refinement_leaves_rounding_residual(quad):
    grid = list(np.geomspace(0.1, 20.0, 25))
    for p in eoc_curve(resolve("tanh"), grid, quad):
        assert abs(p.res_var) < 1e-11 * (1.0 + p.q_star)


@pytest.mark.slow
def test_tanh_and_tanh_maxpool_share_the_curve(quad):
    # пулинг пары нечётной активации не меняет ни q*, ни (σ²_w, σ²_b)
    grid = list(np.geomspace(0.1, 20.0, 50))
    plain = eoc_curve(resolve("tanh"), grid, quad, threads=2)
    pooled = eoc_curve(resolve("tanh+maxpool"), grid, quad, threads=2)
    assert [p.q_star for p in plain] == [p.q_star for p in pooled]
    for a, b in zip(plain, pooled):
        assert b.sigma_w2 == pytest.approx(a.sigma_w2, abs=1e-5)
        assert b.sigma_b2 == pytest.approx(a.sigma_b2, abs=1e-5)
