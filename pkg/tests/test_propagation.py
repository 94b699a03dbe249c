import math

import pytest
from scipy.stats import linregress

from critnet.activations import resolve
from critnet.errors import DomainError, InvariantViolation
from critnet.propagation import (
    InitHyper,
    Phase,
    PhaseOptions,
    VarianceFate,
    alpha,
    c_from_gamma,
    chi_tilde,
    classify_phase,
    correlation_at_horizon,
    correlation_fixed_point,
    covariance_map,
    depth_trace,
    fixed_point_variance,
    gamma_from_c,
    gradient_profile,
    igb_depth_trace,
    igb_to_mf,
    initial_stats,
    mf_to_igb,
    phase_diagram,
    step_igb,
    variance_map,
)
from critnet.relu_analytic import relu_covariance, step_relu


def hyper(sw: float, sb: float) -> InitHyper:
    return InitHyper(sigma_w2=sw, sigma_b2=sb)


class TestMaps:
    def test_relu_variance_map(self, quad):
        assert variance_map(resolve("relu"), hyper(2.0, 0.0), 3.0, quad) == pytest.approx(3.0)
        assert variance_map(resolve("relu"), hyper(1.0, 0.5), 3.0, quad) == pytest.approx(2.0)

    def test_relu_covariance_map_is_arc_cosine(self, quad):
        act, h = resolve("relu"), hyper(1.7, 0.2)
        for lam, q in ((1.0, 0.0), (2.0, 0.6), (0.5, -0.3), (3.0, 2.9)):
            want = h.sigma_w2 * relu_covariance(lam, q / lam) + h.sigma_b2
            assert covariance_map(act, h, lam, q, quad) == pytest.approx(want, rel=1e-10)

    @pytest.mark.parametrize("name", ["relu+maxpool", "relu+avgpool", "tanh+maxpool"])
    def test_pooled_covariance_on_diagonal_is_variance(self, quad, name):
        act, h = resolve(name), hyper(1.2, 0.1)
        assert covariance_map(act, h, 1.5, 1.5, quad) == pytest.approx(variance_map(act, h, 1.5, quad), rel=1e-8)

    def test_avgpool_covariance_uncorrelated(self, quad):
        act, h = resolve("relu+avgpool"), hyper(1.2, 0.1)
        lam = 1.5
        want = h.sigma_w2 * lam / (2 * math.pi) + h.sigma_b2
        assert covariance_map(act, h, lam, 0.0, quad) == pytest.approx(want, rel=1e-9)

    def test_covariance_rejects_q_above_lambda(self, quad):
        with pytest.raises(InvariantViolation):
            covariance_map(resolve("tanh"), hyper(1.0, 0.0), 1.0, 1.1, quad)

    def test_chi_and_alpha_for_relu(self, quad):
        act, h = resolve("relu"), hyper(2.0, 0.3)
        assert chi_tilde(act, h, 0.7, quad) == pytest.approx(1.0)
        assert alpha(act, h, 0.7, quad) == pytest.approx(1.0)

    @pytest.mark.parametrize("lam", [0.3, 1.0, 4.0])
    def test_chi_tilde_is_covariance_slope_at_unit_correlation(self, quad, lam):
        act, h = resolve("tanh"), hyper(1.7, 0.1)
        d = 1e-4 * lam

        def q_next(q: float) -> float:
            return covariance_map(act, h, lam, q, quad)

        # односторонняя разность второго порядка: q не может превысить Λ
        slope = (3.0 * q_next(lam) - 4.0 * q_next(lam - d) + q_next(lam - 2.0 * d)) / (2.0 * d)
        assert slope == pytest.approx(chi_tilde(act, h, lam, quad), rel=1e-5)


class TestCoordinates:
    def test_gamma_and_c(self):
        for c in (0.0, 0.25, 0.5, 0.9):
            assert c_from_gamma(gamma_from_c(c)) == pytest.approx(c)
        assert gamma_from_c(0.5) == pytest.approx(1.0)
        assert gamma_from_c(1.0) == 1e12
        with pytest.raises(DomainError):
            c_from_gamma(-1.0)

    @pytest.mark.parametrize("gamma", [0.0, 1e-6, 0.3, 1.0, 42.0, 1e3, 1e5, 1e6])
    def test_gamma_survives_roundtrip_through_c(self, gamma):
        assert gamma_from_c(c_from_gamma(gamma)) == pytest.approx(gamma, rel=1e-8, abs=1e-300)

    def test_mf_igb_roundtrip_and_invariants(self):
        assert mf_to_igb(3.0, 1.0) == (2.0, 1.0)
        assert igb_to_mf(2.0, 1.0) == (3.0, 1.0)
        with pytest.raises(InvariantViolation):
            mf_to_igb(1.0, 2.0)
        with pytest.raises(InvariantViolation):
            igb_to_mf(-1.0, 0.0)

    def test_igb_step_matches_relu_closed_form(self, quad):
        h = hyper(1.5, 0.1)
        got = step_igb(resolve("relu"), h, 0.7, 0.4, quad)
        assert got == pytest.approx(step_relu(h, 0.7, 0.4), rel=1e-9)

    def test_linear_igb_closed_form(self, quad):
        h = hyper(1.7, 0.3)
        sd2, sc2 = step_igb(resolve("linear"), h, 0.6, 0.9, quad)
        assert sd2 == pytest.approx(1.7 * 0.6, rel=1e-10)
        assert sc2 == pytest.approx(1.7 * 0.9 + 0.3, rel=1e-10)

    @pytest.mark.parametrize("name", ["tanh", "relu"])
    def test_nested_route_agrees_with_bivariate(self, quad, name):
        act, h = resolve(name), hyper(1.3, 0.2)
        nested = step_igb(act, h, 0.8, 0.5, quad, route="nested")
        bivariate = step_igb(act, h, 0.8, 0.5, quad, route="bivariate")
        assert nested == pytest.approx(bivariate, rel=1e-7)

    def test_igb_step_domain(self, quad):
        with pytest.raises(DomainError):
            step_igb(resolve("relu"), hyper(1.0, 0.0), 0.0, 1.0, quad)
        with pytest.raises(DomainError):
            step_igb(resolve("relu"), hyper(1.0, 0.0), 1.0, 1.0, quad, route="sideways")


class TestDepthTrace:
    def test_critical_relu_keeps_variance_and_correlates(self, quad):
        tr = depth_trace(resolve("relu"), hyper(2.0, 0.0), 50, quad)
        assert len(tr.layers) == 51
        assert tr.variance_fate is None
        assert all(s.lam == pytest.approx(1.0) for s in tr.layers)
        cs = [s.c for s in tr.layers]
        assert all(b >= a for a, b in zip(cs, cs[1:]))
        assert all(-1.0 <= c <= 1.0 for c in cs)
        assert tr.layers[-1].gamma > tr.layers[10].gamma

    def test_linear_unit_gain_is_critical(self, quad):
        tr = depth_trace(resolve("linear"), hyper(1.0, 0.0), 20, quad)
        assert tr.variance_fate is None
        assert all(s.lam == pytest.approx(tr.layers[0].lam, rel=1e-10) for s in tr.layers)
        assert all(s.chi_tilde == pytest.approx(1.0, rel=1e-10) for s in tr.layers)

    def test_divergence_stops_trace(self, quad):
        tr = depth_trace(resolve("relu"), hyper(4.0, 0.0), 100, quad)
        assert tr.variance_fate is VarianceFate.DIVERGES
        assert tr.stopped_at == 40

    def test_collapse_stops_trace(self, quad):
        tr = depth_trace(resolve("relu"), hyper(1.0, 0.0), 100, quad)
        assert tr.variance_fate is VarianceFate.COLLAPSES
        assert tr.stopped_at == 40

    def test_depth_must_be_positive(self, quad):
        with pytest.raises(DomainError):
            depth_trace(resolve("relu"), hyper(1.0, 0.0), 0, quad)


class TestFixedPoints:
    def test_relu_converges(self, quad):
        fp = fixed_point_variance(resolve("relu"), hyper(1.0, 1.0), quad)
        assert fp.fate is VarianceFate.CONVERGES
        assert fp.q_star == pytest.approx(2.0, rel=1e-9)

    def test_relu_diverges_and_collapses(self, quad):
        assert fixed_point_variance(resolve("relu"), hyper(3.0, 0.0), quad).fate is VarianceFate.DIVERGES
        assert fixed_point_variance(resolve("relu"), hyper(1.0, 0.0), quad).fate is VarianceFate.COLLAPSES

    def test_tanh_fixed_point_is_stationary(self, quad):
        act, h = resolve("tanh"), hyper(1.5, 0.3)
        fp = fixed_point_variance(act, h, quad)
        assert fp.fate is VarianceFate.CONVERGES
        assert variance_map(act, h, fp.q_star, quad) == pytest.approx(fp.q_star, rel=1e-8)

    def test_odd_activation_without_bias_decorrelates(self, quad):
        act, h = resolve("tanh"), hyper(4.0, 0.0)
        lam = fixed_point_variance(act, h, quad).q_star
        assert correlation_fixed_point(act, h, lam, quad) == pytest.approx(0.0, abs=1e-10)


class TestPhases:
    def test_relu_labels(self, quad):
        relu = resolve("relu")
        assert classify_phase(relu, hyper(1.0, 0.0), quad).phase is Phase.ORDERED_DEEP_PREJUDICE
        assert classify_phase(relu, hyper(1.5, 0.5), quad).phase is Phase.ORDERED_DEEP_PREJUDICE
        assert classify_phase(relu, hyper(2.0, 0.0), quad).phase is Phase.TRANSIENT_DEEP_PREJUDICE
        assert classify_phase(relu, hyper(3.0, 0.0), quad).phase is Phase.CHAOTIC_DEEP_PREJUDICE
        assert classify_phase(relu, hyper(3.0, 0.5), quad).phase is Phase.CHAOTIC_DEEP_PREJUDICE

    def test_tanh_labels(self, quad):
        tanh = resolve("tanh")
        assert classify_phase(tanh, hyper(0.5, 0.1), quad).phase is Phase.ORDERED_DEEP_PREJUDICE
        chaotic = classify_phase(tanh, hyper(4.0, 0.0), quad)
        assert chaotic.phase is Phase.CHAOTIC_NEUTRALITY
        assert chaotic.c_star == pytest.approx(0.0, abs=1e-10)
        assert chaotic.chi_limit > 1.0

    def test_relu_grid(self, quad):
        cells = phase_diagram(resolve("relu"), [1.0, 1.5, 2.0, 2.5, 3.0], [0.0, 0.5, 1.0], quad)
        assert len(cells) == 15
        # σ²_b: внешний цикл
        assert [c.sigma_b2 for c in cells[:5]] == [0.0] * 5
        assert [c.sigma_w2 for c in cells[:5]] == [1.0, 1.5, 2.0, 2.5, 3.0]
        labels = {c.phase for c in cells}
        assert labels == {
            Phase.ORDERED_DEEP_PREJUDICE,
            Phase.TRANSIENT_DEEP_PREJUDICE,
            Phase.CHAOTIC_DEEP_PREJUDICE,
        }

    def test_tanh_grid_never_diverges(self, quad):
        cells = phase_diagram(resolve("tanh"), [0.5, 1.5, 3.0, 5.0], [0.0, 0.5, 2.0], quad, threads=2)
        assert Phase.CHAOTIC_DEEP_PREJUDICE not in {c.phase for c in cells}
        assert all(c.variance_fate in (VarianceFate.CONVERGES, VarianceFate.COLLAPSES) for c in cells)

    def test_row_snaps_to_nearest_crossing(self, quad):
        cells = phase_diagram(resolve("tanh"), [0.6, 1.3], [0.0], quad)
        snapped = [c for c in cells if c.eoc_snapped]
        assert len(snapped) == 1
        assert snapped[0].phase is Phase.TRANSIENT_DEEP_PREJUDICE
        raw = phase_diagram(resolve("tanh"), [0.6, 1.3], [0.0], quad, snap_eoc=False)
        assert not any(c.eoc_snapped for c in raw)

    def test_threads_do_not_change_result(self, quad):
        act = resolve("tanh")
        one = phase_diagram(act, [0.8, 2.0], [0.0, 0.3], quad, threads=1)
        many = phase_diagram(act, [0.8, 2.0], [0.0, 0.3], quad, threads=4)
        assert one == many


def test_gradient_profile_is_normalized_at_output(quad):
    profile = gradient_profile(resolve("relu"), hyper(1.5, 0.2), 10, quad)
    assert len(profile) == 10
    assert profile[-1] == 1.0
    # χ̃ = 0.75 на каждом слое
    assert profile[0] == pytest.approx(0.75**9)


def test_gradient_profile_from_first_layer(quad):
    act, h = resolve("tanh"), hyper(1.5, 0.1)
    init = initial_stats(act, h, quad, lam=1.6, q=0.1, layer=1)
    profile = gradient_profile(act, h, 8, quad, init=init)
    assert len(profile) == 8
    assert profile[-1] == 1.0
    layers = depth_trace(act, h, 7, quad, init=init).layers
    assert profile[-2] == pytest.approx(layers[-2].chi_tilde)
    assert profile[0] == pytest.approx(math.prod(s.chi_tilde for s in layers[:-1]))
    assert gradient_profile(act, h, 1, quad, init=init) == [1.0]


class TestCorrelationLimit:
    def test_horizon_matches_root_solve(self, quad):
        act, h = resolve("tanh"), hyper(3.0, 0.1)
        lam = fixed_point_variance(act, h, quad).q_star
        walked = correlation_at_horizon(act, h, lam, quad, c0=0.0, horizon=500)
        assert walked is not None
        assert walked == pytest.approx(correlation_fixed_point(act, h, lam, quad), abs=1e-7)

    def test_short_horizon_falls_back_to_root_solve(self, quad):
        act, h = resolve("tanh"), hyper(3.0, 0.1)
        lam = fixed_point_variance(act, h, quad).q_star
        assert correlation_at_horizon(act, h, lam, quad, c0=0.0, horizon=2) is None
        short = classify_phase(act, h, quad, PhaseOptions(horizon=2))
        full = classify_phase(act, h, quad)
        assert short.phase is full.phase
        assert short.c_star == pytest.approx(full.c_star, abs=1e-7)


class TestIgbTrace:
    def test_matches_mean_field_trace(self, quad):
        act, h = resolve("tanh"), hyper(1.5, 0.05)
        igb = igb_depth_trace(act, h, 20, quad, sd2=1.0, sc2=0.0)
        mf = depth_trace(act, h, 20, quad)
        assert [s.layer for s in igb.layers] == [s.layer for s in mf.layers]
        for a, b in zip(igb.layers, mf.layers):
            assert a.sd2 == pytest.approx(b.sd2, rel=1e-9, abs=1e-12)
            assert a.sc2 == pytest.approx(b.sc2, rel=1e-9, abs=1e-12)

    def test_relu_critical_total_variance_is_constant(self, quad):
        igb = igb_depth_trace(resolve("relu"), hyper(2.0, 0.0), 30, quad)
        assert igb.variance_fate is None
        assert [s.sd2 + s.sc2 for s in igb.layers] == pytest.approx([1.0] * 31)
        assert all(b.gamma > a.gamma for a, b in zip(igb.layers[1:], igb.layers[2:]))

    def test_stops_on_divergence(self, quad):
        igb = igb_depth_trace(resolve("relu"), hyper(3.0, 0.0), 200, quad)
        assert igb.variance_fate is VarianceFate.DIVERGES
        assert igb.stopped_at < 200

    def test_stops_when_data_variance_vanishes(self, quad):
        igb = igb_depth_trace(resolve("tanh"), hyper(1.0, 0.0), 5, quad, sd2=0.0, sc2=1.0)
        assert igb.stopped_at == 0
        assert igb.layers[0].gamma == 1e12


def _semilog_r2(layers, dist):
    fit = linregress(layers, [math.log(d) for d in dist])
    return fit.rvalue**2, fit.slope


@pytest.mark.parametrize("sw, sb", [(1.2, 0.05), (3.0, 0.1)])
def test_tanh_correlation_converges_exponentially(quad, sw, sb):
    act, h = resolve("tanh"), hyper(sw, sb)
    lam = fixed_point_variance(act, h, quad).q_star
    c_star = correlation_fixed_point(act, h, lam, quad)
    tr = depth_trace(act, h, 100, quad, init=initial_stats(act, h, quad, lam=lam, q=0.0))
    points = [(s.layer, abs(s.c - c_star)) for s in tr.layers if s.layer >= 20 and abs(s.c - c_star) > 1e-8]
    assert len(points) >= 10
    r2, slope = _semilog_r2(*zip(*points))
    assert r2 > 0.99
    assert slope < 0.0
