"""
Рекурсии сигнала через глубину: (Λ, q) в координатах среднего поля (MF)
и (σ²_data, σ²_centers) в координатах IGB, производные χ и фазы.

Состояние хранится как (Λ, q); c и Γ выводятся из него, Γ насыщается
на GAMMA_CAP, чтобы предел c = 1 не переполнялся.
"""

import logging
import math
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from opentelemetry import trace
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq, fixed_point

from .activations import ActivationSpec, Integrand, conditional_mean, v_operator
from .errors import CritnetError, DegenerateVariance, DomainError, InvariantViolation
from .parallel import parallel_map
from .quadrature import QuadratureSpec, expect_g1, expect_g2, expect_gn

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

GAMMA_CAP = 1e12
DIVERGENCE_THRESHOLD = 1e12
COLLAPSE_THRESHOLD = 1e-12
FIXED_POINT_TOL = 1e-10
FIXED_POINT_STEPS = 10_000
C_STEP_TOL = 1e-9


class InitHyper(BaseModel):
    """Дисперсии инициализации: W ~ N(0, σ²_w / N), b ~ N(0, σ²_b)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sigma_w2: float = Field(gt=0.0, allow_inf_nan=False, description="Дисперсия весов σ²_w")
    sigma_b2: float = Field(ge=0.0, allow_inf_nan=False, description="Дисперсия смещений σ²_b")


class VarianceFate(str, Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    COLLAPSES = "collapses"
    NONCONVERGENT = "nonconvergent"


class Phase(str, Enum):
    ORDERED_DEEP_PREJUDICE = "OrderedDeepPrejudice"
    TRANSIENT_DEEP_PREJUDICE = "TransientDeepPrejudice"
    CHAOTIC_DEEP_PREJUDICE = "ChaoticDeepPrejudice"
    CHAOTIC_PREJUDICE = "ChaoticPrejudice"
    CHAOTIC_NEUTRALITY = "ChaoticNeutrality"


def gamma_from_c(c: float) -> float:
    """Γ = c / (1 - c) с насыщением на GAMMA_CAP."""
    if c >= 1.0:
        return GAMMA_CAP
    return min(max(c, 0.0) / (1.0 - c), GAMMA_CAP)


def c_from_gamma(gamma: float) -> float:
    if gamma < 0.0:
        raise DomainError(f"Γ должно быть >= 0, получено {gamma!r}")
    if math.isinf(gamma):
        return 1.0
    return gamma / (1.0 + gamma)


class LayerStats(BaseModel):
    """Статистики одного слоя; c, Γ и χ выводятся из (Λ, q)."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    layer: int = Field(ge=0)
    lam: float = Field(alias="lambda", ge=0.0)
    q: float
    c: float
    gamma: float = Field(ge=0.0)
    chi_tilde: float
    chi1: Optional[float] = None
    alpha: float
    variance_fate: Optional[VarianceFate] = None

    @property
    def sd2(self) -> float:
        return self.lam - self.q

    @property
    def sc2(self) -> float:
        return self.q


class DepthTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    activation: str
    hyper: InitHyper
    layers: List[LayerStats]
    variance_fate: Optional[VarianceFate] = None
    stopped_at: Optional[int] = None


class VarianceFixedPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    fate: VarianceFate
    q_star: Optional[float] = None
    last: float
    iterations: int
    residual: float


class PhaseOptions(BaseModel):
    """Допуски классификации фаз."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    eoc_tol: float = Field(default=1e-3, gt=0.0)
    tie_tol: float = Field(default=1e-6, gt=0.0)
    horizon: int = Field(default=500, ge=1)
    c0: float = Field(default=0.0, ge=0.0, lt=1.0)
    scan_points: int = Field(default=64, ge=4)


class PhaseResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma_w2: float
    sigma_b2: float
    phase: Phase
    c_star: float
    chi_limit: float
    variance_fate: VarianceFate
    q_star: Optional[float] = None
    ambiguous: bool = False
    eoc_snapped: bool = False


# --- одношаговые отображения ---


def variance_map(act: ActivationSpec, h: InitHyper, lam: float, quad: QuadratureSpec) -> float:
    """Λ' = σ²_w V[f^2](Λ) + σ²_b."""
    return h.sigma_w2 * v_operator(act, Integrand.F2, lam, quad) + h.sigma_b2


def _origin_value(act: ActivationSpec) -> float:
    zero = np.zeros(1)
    return float(act.output(*([zero] * act.arity))[0])


def covariance_map(act: ActivationSpec, h: InitHyper, lam: float, q: float, quad: QuadratureSpec) -> float:
    """
    q' = σ²_w E[f(u) f(u')] + σ²_b, u = sqrt(Λ) z, u' = sqrt(Λ)(c z + sqrt(1 - c^2) z').

    Для двух-узловых активаций внутренний интеграл по u' берётся как
    условное среднее m(c u) = E_ε[f_1(c u + σ ε)], σ = sqrt(Λ (1 - c^2)).
    """
    if lam < 0.0 or abs(q) > lam * (1.0 + 1e-8):
        raise InvariantViolation(f"Нарушено |q| <= Λ: Λ={lam!r}, q={q!r}")
    if lam == 0.0:
        return h.sigma_w2 * _origin_value(act) ** 2 + h.sigma_b2

    c = float(np.clip(q / lam, -1.0, 1.0))
    root = math.sqrt(lam)
    qk = act.scaled_quad(quad, lam)
    if act.arity == 1:
        e = expect_g2(lambda z1, z2: act.output(root * z1) * act.output(root * z2), c, qk)
    else:
        sigma = root * math.sqrt(max(1.0 - c * c, 0.0))
        inner = quad.with_kinks(())

        def integrand(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
            u1, u2 = root * z1, root * z2
            return act.output(u1, u2) * conditional_mean(act, (c * u1, c * u2), sigma, inner)

        e = expect_gn(integrand, 2, qk, fold_tie=act.tie_kink)
    return h.sigma_w2 * e + h.sigma_b2


def chi_tilde(act: ActivationSpec, h: InitHyper, lam: float, quad: QuadratureSpec) -> float:
    """χ̃ = σ²_w V[f'^2](Λ); для двух узлов: квадрат нормы градиента."""
    return h.sigma_w2 * v_operator(act, Integrand.FPRIME2, lam, quad)


def chi1(act: ActivationSpec, h: InitHyper, lam_l: float, lam_l1: float, quad: QuadratureSpec) -> float:
    """χ₁ = (Λ^l / Λ^{l+1}) χ̃(Λ^l)."""
    if lam_l1 <= 0.0:
        raise DegenerateVariance(f"Λ^(l+1) = {lam_l1!r}, χ₁ не определён")
    return lam_l / lam_l1 * chi_tilde(act, h, lam_l, quad)


def alpha(act: ActivationSpec, h: InitHyper, lam: float, quad: QuadratureSpec) -> float:
    """α = dΛ'/dΛ = σ²_w (V[f'^2] + V[f Δf])."""
    return h.sigma_w2 * (
        v_operator(act, Integrand.FPRIME2, lam, quad) + v_operator(act, Integrand.F_LAPLACIAN, lam, quad)
    )


def layer_stats(
    act: ActivationSpec,
    h: InitHyper,
    layer: int,
    lam: float,
    q: float,
    quad: QuadratureSpec,
    fate: Optional[VarianceFate] = None,
) -> LayerStats:
    """Собирает LayerStats со всеми производными полями в точке (Λ, q)."""
    if lam < 0.0 or abs(q) > lam * (1.0 + 1e-8) + 1e-300:
        raise InvariantViolation(f"Нарушено |q| <= Λ в слое {layer}: Λ={lam!r}, q={q!r}")
    q = min(q, lam)
    c = q / lam if lam > 0.0 else 1.0
    chi = chi_tilde(act, h, lam, quad)
    lam_next = variance_map(act, h, lam, quad)
    return LayerStats(
        layer=layer,
        lam=lam,
        q=q,
        c=c,
        gamma=gamma_from_c(c),
        chi_tilde=chi,
        chi1=lam / lam_next * chi if lam_next > 0.0 else None,
        alpha=alpha(act, h, lam, quad),
        variance_fate=fate,
    )


def step_mf(act: ActivationSpec, h: InitHyper, s: LayerStats, quad: QuadratureSpec) -> LayerStats:
    """Один слой MF-рекурсии (Λ, q) -> (Λ', q')."""
    lam_next = variance_map(act, h, s.lam, quad)
    if not math.isfinite(lam_next):
        return LayerStats(
            layer=s.layer + 1,
            lam=math.inf,
            q=math.nan,
            c=math.nan,
            gamma=GAMMA_CAP,
            chi_tilde=math.nan,
            alpha=math.nan,
            variance_fate=VarianceFate.DIVERGES,
        )
    q_next = covariance_map(act, h, s.lam, s.q, quad)
    fate = None
    if lam_next > DIVERGENCE_THRESHOLD:
        fate = VarianceFate.DIVERGES
    elif lam_next < COLLAPSE_THRESHOLD:
        fate = VarianceFate.COLLAPSES
    return layer_stats(act, h, s.layer + 1, lam_next, q_next, quad, fate)


def mf_to_igb(lam: float, q: float) -> Tuple[float, float]:
    """(Λ, q) -> (σ²_data, σ²_centers) = (Λ - q, q)."""
    if q < 0.0 or q > lam:
        raise InvariantViolation(f"Требуется 0 <= q <= Λ: Λ={lam!r}, q={q!r}")
    return lam - q, q


def igb_to_mf(sd2: float, sc2: float) -> Tuple[float, float]:
    if sd2 < 0.0 or sc2 < 0.0:
        raise InvariantViolation(f"Дисперсии IGB должны быть >= 0: sd2={sd2!r}, sc2={sc2!r}")
    return sd2 + sc2, sc2


def step_igb(
    act: ActivationSpec,
    h: InitHyper,
    sd2: float,
    sc2: float,
    quad: QuadratureSpec,
    route: str = "bivariate",
) -> Tuple[float, float]:
    """
    Один слой в координатах IGB: (σ²_data, σ²_centers) -> (σ²_data', σ²_centers').

    route="bivariate": двумерное гауссово представление при c = Γ/(1+Γ).
    route="nested": σ²_centers' = σ²_w E_μ[m(μ)^2] + σ²_b, где
    μ ~ N(0, σ²_centers), m(μ) = E_ε[f(μ + σ_data ε)].
    """
    if sd2 <= 0.0 or not math.isfinite(sd2):
        raise DomainError(f"σ²_data должно быть > 0, получено {sd2!r}")
    if sc2 < 0.0:
        raise DomainError(f"σ²_centers должно быть >= 0, получено {sc2!r}")
    lam, q = igb_to_mf(sd2, sc2)
    lam_next = variance_map(act, h, lam, quad)

    if route == "bivariate":
        sc2_next = covariance_map(act, h, lam, q, quad)
    elif route == "nested":
        sigma, spread = math.sqrt(sd2), math.sqrt(sc2)
        inner = quad.with_kinks(())
        if act.arity == 1:
            mean_sq = expect_g1(lambda z: conditional_mean(act, (spread * z,), sigma, inner) ** 2, inner)
        else:
            mean_sq = expect_gn(
                lambda z1, z2: conditional_mean(act, (spread * z1, spread * z2), sigma, inner) ** 2, 2, inner
            )
        sc2_next = h.sigma_w2 * mean_sq + h.sigma_b2
    else:
        raise DomainError(f"Неизвестный маршрут IGB {route!r}: bivariate или nested")
    return lam_next - sc2_next, sc2_next


# --- траектории и неподвижные точки ---


def initial_stats(
    act: ActivationSpec, h: InitHyper, quad: QuadratureSpec, lam: float = 1.0, q: float = 0.0, layer: int = 0
) -> LayerStats:
    return layer_stats(act, h, layer, lam, q, quad)


def depth_trace(
    act: ActivationSpec,
    h: InitHyper,
    depth: int,
    quad: QuadratureSpec,
    init: Optional[LayerStats] = None,
) -> DepthTrace:
    """Итерирует step_mf depth раз; останавливается при расходимости или коллапсе Λ."""
    if depth < 1:
        raise DomainError(f"depth должно быть >= 1, получено {depth}")
    with tracer.start_as_current_span("depth_trace") as span:
        span.set_attribute("activation", act.name)
        span.set_attribute("sigma_w2", h.sigma_w2)
        span.set_attribute("sigma_b2", h.sigma_b2)
        span.set_attribute("depth", depth)

        s = init if init is not None else initial_stats(act, h, quad)
        layers = [s]
        last = s.layer + depth
        while s.layer < last:
            s = step_mf(act, h, s, quad)
            if math.isfinite(s.lam):
                layers.append(s)
            if s.variance_fate is not None:
                logger.info("depth_trace %s: Λ %s на слое %d", act.name, s.variance_fate.value, s.layer)
                return DepthTrace(
                    activation=act.name, hyper=h, layers=layers, variance_fate=s.variance_fate, stopped_at=s.layer
                )
        return DepthTrace(activation=act.name, hyper=h, layers=layers)


class IgbLayer(BaseModel):
    model_config = ConfigDict(frozen=True)

    layer: int = Field(ge=0)
    sd2: float = Field(ge=0.0)
    sc2: float = Field(ge=0.0)
    gamma: float = Field(ge=0.0)


class IgbTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    layers: List[IgbLayer]
    variance_fate: Optional[VarianceFate] = None
    stopped_at: Optional[int] = None


def _igb_layer(layer: int, sd2: float, sc2: float) -> IgbLayer:
    gamma = min(sc2 / sd2, GAMMA_CAP) if sd2 > 0.0 else GAMMA_CAP
    return IgbLayer(layer=layer, sd2=max(sd2, 0.0), sc2=sc2, gamma=gamma)


def igb_depth_trace(
    act: ActivationSpec,
    h: InitHyper,
    depth: int,
    quad: QuadratureSpec,
    sd2: float = 1.0,
    sc2: float = 0.0,
    route: str = "bivariate",
) -> IgbTrace:
    """
    Итерирует step_igb depth раз из (σ²_data, σ²_centers).

    Останавливается, когда σ²_data обнуляется (c = 1, Γ на насыщении)
    или полная дисперсия уходит за порог расходимости / коллапса.
    """
    if depth < 1:
        raise DomainError(f"depth должно быть >= 1, получено {depth}")
    with tracer.start_as_current_span("igb_depth_trace") as span:
        span.set_attribute("activation", act.name)
        span.set_attribute("depth", depth)

        layers = [_igb_layer(0, sd2, sc2)]
        for layer in range(1, depth + 1):
            if sd2 <= 0.0:
                logger.info("igb_depth_trace %s: σ²_data обнулилась на слое %d", act.name, layer - 1)
                return IgbTrace(layers=layers, stopped_at=layer - 1)
            sd2, sc2 = step_igb(act, h, sd2, sc2, quad, route)
            total = sd2 + sc2
            fate = None
            if not math.isfinite(total) or total > DIVERGENCE_THRESHOLD:
                fate = VarianceFate.DIVERGES
            elif total < COLLAPSE_THRESHOLD:
                fate = VarianceFate.COLLAPSES
            if math.isfinite(total):
                layers.append(_igb_layer(layer, sd2, sc2))
            if fate is not None:
                logger.info("igb_depth_trace %s: дисперсия %s на слое %d", act.name, fate.value, layer)
                return IgbTrace(layers=layers, variance_fate=fate, stopped_at=layer)
        return IgbTrace(layers=layers)


def _polish(act: ActivationSpec, h: InitHyper, lam: float, quad: QuadratureSpec) -> Optional[float]:
    """Ускорение Стеффенсена для медленно сходящейся Λ; None, если притягивающей точки нет."""
    try:
        p = float(fixed_point(lambda x: variance_map(act, h, float(x), quad), lam, xtol=1e-12, maxiter=500))
    except (RuntimeError, FloatingPointError, CritnetError):
        return None
    if not math.isfinite(p) or p < 0.0 or alpha(act, h, p, quad) >= 1.0:
        return None
    return p


def fixed_point_variance(
    act: ActivationSpec, h: InitHyper, quad: QuadratureSpec, lam0: float = 1.0
) -> VarianceFixedPoint:
    """
    Неподвижная точка Λ* = σ²_w V[f^2](Λ*) + σ²_b из Λ = lam0.

    Простая итерация до 1e4 шагов с допуском 1e-10; если Λ всё ещё
    монотонно растёт, пробуем ускорение Стеффенсена, иначе: расходимость.
    Монотонное убывание при σ²_b = 0 считается коллапсом.
    """
    with tracer.start_as_current_span("fixed_point_variance") as span:
        span.set_attribute("activation", act.name)
        span.set_attribute("sigma_w2", h.sigma_w2)
        span.set_attribute("sigma_b2", h.sigma_b2)

        lam = lam0
        ups = downs = 0
        nxt = lam
        for i in range(1, FIXED_POINT_STEPS + 1):
            nxt = variance_map(act, h, lam, quad)
            if not math.isfinite(nxt) or nxt > DIVERGENCE_THRESHOLD:
                return VarianceFixedPoint(fate=VarianceFate.DIVERGES, last=lam, iterations=i, residual=math.inf)
            if nxt < COLLAPSE_THRESHOLD:
                return VarianceFixedPoint(fate=VarianceFate.COLLAPSES, last=nxt, iterations=i, residual=nxt)
            step = nxt - lam
            if abs(step) < FIXED_POINT_TOL:
                return VarianceFixedPoint(
                    fate=VarianceFate.CONVERGES, q_star=nxt, last=nxt, iterations=i, residual=abs(step)
                )
            ups, downs = (ups + 1, 0) if step > 0 else (0, downs + 1)
            lam = nxt

        residual = abs(nxt - lam)
        if ups >= FIXED_POINT_STEPS // 2:
            p = _polish(act, h, lam, quad)
            if p is not None and p >= lam:
                return VarianceFixedPoint(
                    fate=VarianceFate.CONVERGES, q_star=p, last=p, iterations=FIXED_POINT_STEPS, residual=residual
                )
            return VarianceFixedPoint(
                fate=VarianceFate.DIVERGES, last=lam, iterations=FIXED_POINT_STEPS, residual=residual
            )
        if downs >= FIXED_POINT_STEPS // 2:
            if h.sigma_b2 == 0.0:
                return VarianceFixedPoint(
                    fate=VarianceFate.COLLAPSES, last=lam, iterations=FIXED_POINT_STEPS, residual=residual
                )
            p = _polish(act, h, lam, quad)
            if p is not None and p <= lam:
                return VarianceFixedPoint(
                    fate=VarianceFate.CONVERGES, q_star=p, last=p, iterations=FIXED_POINT_STEPS, residual=residual
                )
        logger.warning("Λ не сошлась за %d шагов: %s %s", FIXED_POINT_STEPS, act.name, h)
        return VarianceFixedPoint(
            fate=VarianceFate.NONCONVERGENT, last=lam, iterations=FIXED_POINT_STEPS, residual=residual
        )


def correlation_fixed_point(
    act: ActivationSpec, h: InitHyper, lam_star: float, quad: QuadratureSpec, c0: float = 0.0, points: int = 64
) -> float:
    """
    Наименьший корень c-отображения c -> q'(c Λ*) / Λ* на [c0, 1).

    Это предел c^l из c0 при сходящейся Λ; 1.0, если корня ниже 1 нет.
    """

    def residual(c: float) -> float:
        return covariance_map(act, h, lam_star, c * lam_star, quad) / lam_star - c

    grid = np.linspace(c0, 1.0, points + 1)[:-1]
    prev_c, prev_r = grid[0], residual(grid[0])
    if prev_r <= 0.0:
        return float(prev_c)
    for c in grid[1:]:
        r = residual(float(c))
        if r <= 0.0:
            return float(brentq(residual, prev_c, c, xtol=1e-13))
        prev_c, prev_r = c, r
    return 1.0


def correlation_at_horizon(
    act: ActivationSpec, h: InitHyper, lam_star: float, quad: QuadratureSpec, c0: float, horizon: int
) -> Optional[float]:
    """c^l при Λ = Λ* из c0; значение, как только |c^l - c^{l-1}| < 1e-9, иначе None через horizon слоёв."""
    c = c0
    for _ in range(horizon):
        nxt = min(covariance_map(act, h, lam_star, c * lam_star, quad) / lam_star, 1.0)
        if abs(nxt - c) < C_STEP_TOL:
            return nxt
        c = nxt
    return None


def classify_phase(
    act: ActivationSpec,
    h: InitHyper,
    quad: QuadratureSpec,
    opts: Optional[PhaseOptions] = None,
) -> PhaseResult:
    """Фаза по судьбе дисперсии, χ̃ в пределе и пределу c*."""
    opts = opts or PhaseOptions()
    with tracer.start_as_current_span("classify_phase") as span:
        span.set_attribute("activation", act.name)
        span.set_attribute("sigma_w2", h.sigma_w2)
        span.set_attribute("sigma_b2", h.sigma_b2)

        fp = fixed_point_variance(act, h, quad)
        lam = fp.q_star if fp.fate is VarianceFate.CONVERGES else (0.0 if fp.fate is VarianceFate.COLLAPSES else fp.last)
        chi = chi_tilde(act, h, lam, quad)
        dist = abs(chi - 1.0)
        # попадание на край полосы допуска делает метку неустойчивой
        ambiguous = abs(dist - opts.eoc_tol) < 0.1 * opts.eoc_tol
        c_star = 1.0

        if fp.fate in (VarianceFate.DIVERGES, VarianceFate.NONCONVERGENT):
            phase = Phase.CHAOTIC_DEEP_PREJUDICE if chi >= 1.0 else Phase.ORDERED_DEEP_PREJUDICE
            ambiguous = ambiguous or dist < opts.eoc_tol or fp.fate is VarianceFate.NONCONVERGENT
        elif dist < opts.eoc_tol:
            phase = Phase.TRANSIENT_DEEP_PREJUDICE
        elif chi < 1.0:
            phase = Phase.ORDERED_DEEP_PREJUDICE
        elif fp.fate is VarianceFate.COLLAPSES:
            phase, ambiguous = Phase.CHAOTIC_DEEP_PREJUDICE, True
        else:
            c_star = correlation_at_horizon(act, h, lam, quad, opts.c0, opts.horizon)
            if c_star is None:
                c_star = correlation_fixed_point(act, h, lam, quad, opts.c0, opts.scan_points)
            if c_star >= 1.0:
                phase = Phase.CHAOTIC_DEEP_PREJUDICE
            else:
                phase = Phase.CHAOTIC_NEUTRALITY if c_star < 0.5 else Phase.CHAOTIC_PREJUDICE
                ambiguous = ambiguous or abs(c_star - 0.5) < opts.tie_tol

        if ambiguous:
            logger.warning("Неоднозначная фаза %s для %s %s", phase.value, act.name, h)
        return PhaseResult(
            sigma_w2=h.sigma_w2,
            sigma_b2=h.sigma_b2,
            phase=phase,
            c_star=c_star,
            chi_limit=chi,
            variance_fate=fp.fate,
            q_star=fp.q_star,
            ambiguous=ambiguous,
        )


def _snap_eoc_rows(cells: List[PhaseResult], n_w: int) -> List[PhaseResult]:
    """В каждой строке σ²_b без EOC-клеток помечает клетку, ближайшую к пересечению χ̃ = 1."""
    eligible = (VarianceFate.CONVERGES, VarianceFate.COLLAPSES)
    out = list(cells)
    for start in range(0, len(cells), n_w):
        row = cells[start : start + n_w]
        if any(c.phase is Phase.TRANSIENT_DEEP_PREJUDICE for c in row):
            continue
        best: Optional[int] = None
        for i in range(len(row) - 1):
            a, b = row[i], row[i + 1]
            if a.variance_fate not in eligible or b.variance_fate not in eligible:
                continue
            if (a.chi_limit - 1.0) * (b.chi_limit - 1.0) > 0.0:
                continue
            j = i if abs(a.chi_limit - 1.0) <= abs(b.chi_limit - 1.0) else i + 1
            if best is None or abs(row[j].chi_limit - 1.0) < abs(row[best].chi_limit - 1.0):
                best = j
        if best is not None:
            cell = row[best]
            out[start + best] = cell.model_copy(
                update={"phase": Phase.TRANSIENT_DEEP_PREJUDICE, "c_star": 1.0, "eoc_snapped": True}
            )
    return out


def phase_diagram(
    act: ActivationSpec,
    sw_values: Sequence[float],
    sb_values: Sequence[float],
    quad: QuadratureSpec,
    opts: Optional[PhaseOptions] = None,
    threads: int = 1,
    snap_eoc: bool = True,
) -> List[PhaseResult]:
    """Сетка фаз; порядок строк: σ²_b внешний цикл, σ²_w внутренний."""
    with tracer.start_as_current_span("phase_diagram") as span:
        span.set_attribute("activation", act.name)
        span.set_attribute("cells", len(sw_values) * len(sb_values))
        grid = [InitHyper(sigma_w2=sw, sigma_b2=sb) for sb in sb_values for sw in sw_values]
        cells = parallel_map(lambda hh: classify_phase(act, hh, quad, opts), grid, threads)
        return _snap_eoc_rows(cells, len(sw_values)) if snap_eoc else cells


def gradient_profile(
    act: ActivationSpec,
    h: InitHyper,
    depth: int,
    quad: QuadratureSpec,
    init: Optional[LayerStats] = None,
) -> List[float]:
    """
    Ожидаемая сумма δ_i(a)δ_i(b) по узлам на слоях 1..depth при c = 1, нормированная на 1 в выходном слое.

    Обратная рекурсия: g^l = χ̃(Λ^l) g^{l+1}. init задаёт слой 1 (например, по
    статистикам входных данных); без него траектория стартует из Λ⁰ = 1, q⁰ = 0.
    """
    if depth < 1:
        raise DomainError(f"depth должно быть >= 1, получено {depth}")
    if init is None:
        layers = [s for s in depth_trace(act, h, depth, quad).layers if s.layer >= 1]
    elif depth == 1:
        layers = [init]
    else:
        layers = depth_trace(act, h, depth - 1, quad, init=init).layers
    profile = [1.0] * len(layers)
    for i in range(len(layers) - 2, -1, -1):
        profile[i] = profile[i + 1] * layers[i].chi_tilde
    return profile
