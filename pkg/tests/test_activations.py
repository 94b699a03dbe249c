import math

import numpy as np
import pytest
from scipy.stats import norm

from critnet.activations import (
    ACTIVATION_NAMES,
    Integrand,
    compose_pool,
    conditional_mean,
    is_relu_family,
    maxpool_cdf_form,
    resolve,
    v_operator,
    variance_derivative_stein,
)
from critnet.errors import ArityError, DomainError, UnknownActivation
from critnet.activations import PoolKind


def test_every_registered_name_resolves():
    for name in ACTIVATION_NAMES:
        act = resolve(name)
        assert act.name == name
        assert act.arity == (2 if "+" in name else 1)


def test_unknown_names():
    with pytest.raises(UnknownActivation):
        resolve("sigmoid")
    with pytest.raises(UnknownActivation):
        resolve("relu+minpool")


def test_pooling_twice_is_rejected():
    with pytest.raises(ArityError):
        compose_pool(resolve("relu+maxpool"), PoolKind.MAXPOOL2)


def test_relu_family():
    assert is_relu_family(resolve("relu"))
    assert is_relu_family(resolve("relu+avgpool"))
    assert not is_relu_family(resolve("tanh"))
    assert not is_relu_family(resolve("tanh+maxpool"))


@pytest.mark.parametrize(
    "name, f2, fprime2, f_lap",
    [
        ("relu", 0.5, 0.5, 0.0),
        ("relu+maxpool", (3 * math.pi + 2) / (4 * math.pi), 0.75, 1 / (2 * math.pi)),
        ("relu+avgpool", (math.pi + 1) / (4 * math.pi), 0.25, 1 / (4 * math.pi)),
    ],
)
def test_closed_forms_match_quadrature(quad, name, f2, fprime2, f_lap):
    act = resolve(name)
    x = 2.5
    for use_overrides in (True, False):
        assert v_operator(act, Integrand.F2, x, quad, use_overrides) == pytest.approx(f2 * x, rel=1e-9)
        assert v_operator(act, Integrand.FPRIME2, x, quad, use_overrides) == pytest.approx(fprime2, rel=1e-9)
        assert v_operator(act, Integrand.F_LAPLACIAN, x, quad, use_overrides) == pytest.approx(f_lap, abs=1e-9)


def test_tanh_backends_agree(quad, hermite):
    act = resolve("tanh")
    for g in Integrand:
        assert v_operator(act, g, 0.8, quad) == pytest.approx(v_operator(act, g, 0.8, hermite), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("name", ["tanh", "relu", "tanh+maxpool", "tanh+avgpool"])
def test_variance_slope_three_ways(quad, name):
    act = resolve(name)
    x, eps = 1.3, 1e-5
    slope = v_operator(act, Integrand.FPRIME2, x, quad, False) + v_operator(act, Integrand.F_LAPLACIAN, x, quad, False)
    numeric = (v_operator(act, Integrand.F2, x + eps, quad, False) - v_operator(act, Integrand.F2, x - eps, quad, False)) / (
        2 * eps
    )
    assert slope == pytest.approx(variance_derivative_stein(act, x, quad), rel=1e-8)
    assert slope == pytest.approx(numeric, rel=1e-6)


def test_maxpool_cdf_identity(quad):
    tanh = resolve("tanh")
    pooled = resolve("tanh+maxpool")
    x = 0.9
    assert maxpool_cdf_form(tanh, x, quad) == pytest.approx(
        v_operator(pooled, Integrand.F2, x, quad, use_overrides=False), rel=1e-9
    )
    relu = resolve("relu")
    assert maxpool_cdf_form(relu, 1.0, quad) == pytest.approx((3 * math.pi + 2) / (4 * math.pi), rel=1e-10)
    with pytest.raises(ArityError):
        maxpool_cdf_form(pooled, x, quad)


def test_v_operator_domain(quad):
    with pytest.raises(DomainError):
        v_operator(resolve("tanh"), Integrand.F2, -0.1, quad)


def test_laplacian_at_origin(quad):
    assert v_operator(resolve("tanh"), Integrand.F_LAPLACIAN, 0.0, quad) == 0.0


def test_relu_conditional_mean(quad):
    act = resolve("relu")
    a = np.array([-1.0, 0.0, 0.7, 2.0])
    sigma = 0.6
    want = a * norm.cdf(a / sigma) + sigma * norm.pdf(a / sigma)
    np.testing.assert_allclose(conditional_mean(act, (a,), sigma, quad), want, rtol=1e-10, atol=1e-14)


def test_pooled_conditional_mean_without_noise(quad):
    act = resolve("relu+maxpool")
    a1, a2 = np.array([1.0, -2.0]), np.array([0.5, -1.0])
    np.testing.assert_allclose(conditional_mean(act, (a1, a2), 0.0, quad), [1.0, 0.0])
    with pytest.raises(ArityError):
        conditional_mean(act, (a1,), 0.3, quad)


def test_maxpool_conditional_mean_against_sampling(quad):
    act = resolve("relu+maxpool")
    a1, a2, sigma = np.array([0.3]), np.array([-0.2]), 0.8
    rng = np.random.default_rng(7)
    eps = rng.standard_normal((2, 400_000))
    mc = np.maximum(np.maximum(a1 + sigma * eps[0], 0.0), np.maximum(a2 + sigma * eps[1], 0.0)).mean()
    assert conditional_mean(act, (a1, a2), sigma, quad)[0] == pytest.approx(mc, abs=5e-3)
