import math

import numpy as np
import pytest
from pydantic import ValidationError

from critnet.errors import DomainError, NonFiniteIntegrand, Unsupported
from critnet.quadrature import QuadratureSpec, expect_g1, expect_g2, expect_gn, rule_1d


class TestUnivariate:
    def test_moments_of_standard_normal(self, quad, hermite):
        for spec in (quad, hermite):
            assert expect_g1(lambda z: np.ones_like(z), spec) == pytest.approx(1.0, abs=1e-13)
            assert expect_g1(lambda z: z * z, spec) == pytest.approx(1.0, rel=1e-12)
            assert expect_g1(lambda z: z**4, spec) == pytest.approx(3.0, rel=1e-12)

    def test_kink_on_panel_edge(self, quad):
        spec = quad.with_kinks([0.0])
        assert expect_g1(lambda z: np.maximum(z, 0.0) ** 2, spec) == pytest.approx(0.5, rel=1e-12)
        assert expect_g1(lambda z: np.maximum(z, 0.0), spec) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-12)

    def test_rule_is_cached_and_read_only(self, quad):
        z1, w1 = rule_1d(quad)
        z2, w2 = rule_1d(quad)
        assert z1 is z2 and w1 is w2
        with pytest.raises(ValueError):
            z1[0] = 0.0

    def test_non_finite_integrand_reports_abscissa(self, quad):
        with pytest.raises(NonFiniteIntegrand) as info:
            expect_g1(lambda z: np.where(z > 3.0, np.inf, 0.0), quad)
        assert info.value.abscissa > 3.0


class TestBivariate:
    def test_correlated_product(self, quad, hermite):
        for spec in (quad, hermite):
            assert expect_g2(lambda a, b: a * b, 0.3, spec) == pytest.approx(0.3, rel=1e-12)

    def test_full_correlation_degenerates(self, quad):
        assert expect_g2(lambda a, b: a * b, 1.0, quad) == pytest.approx(1.0, rel=1e-12)
        assert expect_g2(lambda a, b: a * b, -1.0, quad) == pytest.approx(-1.0, rel=1e-12)

    def test_relu_arc_cosine_kernel(self, quad):
        c = 0.4
        spec = quad.with_kinks([0.0])
        got = expect_g2(lambda a, b: np.maximum(a, 0.0) * np.maximum(b, 0.0), c, spec)
        want = (math.sqrt(1 - c * c) + (math.pi - math.acos(c)) * c) / (2 * math.pi)
        assert got == pytest.approx(want, rel=1e-10)

    def test_correlation_outside_unit_interval(self, quad):
        with pytest.raises(DomainError):
            expect_g2(lambda a, b: a * b, 1.5, quad)


class TestPairs:
    def test_folded_max(self, quad):
        spec = quad.with_kinks(())
        mx = lambda a, b: np.maximum(a, b)  # noqa: E731
        assert expect_gn(mx, 2, spec, fold_tie=True) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-10)
        assert expect_gn(lambda a, b: mx(a, b) ** 2, 2, spec, fold_tie=True) == pytest.approx(1.0, rel=1e-10)

    def test_unfolded_product_grid(self, quad):
        assert expect_gn(lambda a, b: a * a * b * b, 2, quad) == pytest.approx(1.0, rel=1e-12)

    def test_only_windows_up_to_two(self, quad):
        with pytest.raises(Unsupported):
            expect_gn(lambda *z: z[0], 3, quad)


def test_kink_points_must_increase():
    with pytest.raises(ValidationError):
        QuadratureSpec(kink_points=(1.0, 0.0))
