"""Кривая края хаоса (EOC) в плоскости (σ²_b, σ²_w)."""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from opentelemetry import trace
from pydantic import BaseModel, ConfigDict
from scipy.optimize import brentq

from .activations import ActivationSpec, Integrand, is_relu_family, v_operator
from .errors import EmptyCurve, Unsupported
from .parallel import parallel_map
from .propagation import (
    InitHyper,
    VarianceFate,
    alpha,
    chi1,
    chi_tilde,
    fixed_point_variance,
    variance_map,
)
from .quadrature import QuadratureSpec, default_spec

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

VERIFY_STEPS = 200
VERIFY_TOL = 1e-8


class EocPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma_b2: float
    sigma_w2: float
    q_star: float
    res_var: float
    res_chi: float
    note: Optional[str] = None


class EocCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    on_eoc: bool
    variance_fate: VarianceFate
    q_star: Optional[float] = None
    res_var: Optional[float] = None
    res_chi: Optional[float] = None


def default_q_grid(q_max: float = 20.0, points: int = 200, q_min: float = 1e-4) -> List[float]:
    """Логарифмическая сетка q в [q_min, q_max]."""
    return [float(q) for q in np.geomspace(q_min, q_max, points)]


def _returns_to(act: ActivationSpec, h: InitHyper, q: float, quad: QuadratureSpec) -> bool:
    """
    Λ из q/2 и 2q возвращается к q: либо попадает в 1e-8 за 200 шагов,
    либо монотонно приближается к q, а сама точка притягивающая (α(q) < 1).
    """
    attracting: Optional[bool] = None
    for lam0 in (0.5 * q, 2.0 * q):
        lam, dist = lam0, abs(lam0 - q)
        monotone = True
        for _ in range(VERIFY_STEPS):
            lam = variance_map(act, h, lam, quad)
            d = abs(lam - q)
            if not math.isfinite(d):
                return False
            monotone = monotone and d <= dist
            dist = d
            if d <= VERIFY_TOL * q:
                break
        if dist <= VERIFY_TOL * q:
            continue
        if not monotone:
            return False
        if attracting is None:
            attracting = alpha(act, h, q, quad) < 1.0 - VERIFY_TOL
        if not attracting:
            return False
    return True


def _eoc_point(act: ActivationSpec, q: float, quad: QuadratureSpec) -> Optional[EocPoint]:
    ef2 = v_operator(act, Integrand.F2, q, quad)
    efp = v_operator(act, Integrand.FPRIME2, q, quad)
    if efp <= 0.0:
        return None
    sw = 1.0 / efp
    sb = q - sw * ef2
    if sb < 0.0:
        if sb > -1e-14 * q:
            sb = 0.0
        else:
            return None
    h = InitHyper(sigma_w2=sw, sigma_b2=sb)
    # Λ' аффинно по σ²_b: один шаг Ньютона сводит невязку дисперсии к округлению
    sb = max(sb - (variance_map(act, h, q, quad) - q), 0.0)
    h = InitHyper(sigma_w2=sw, sigma_b2=sb)
    if not _returns_to(act, h, q, quad):
        logger.debug("q=%g: неподвижная точка не притягивает, пропускаем", q)
        return None
    lam_next = variance_map(act, h, q, quad)
    return EocPoint(
        sigma_b2=sb,
        sigma_w2=sw,
        q_star=q,
        res_var=lam_next - q,
        res_chi=chi1(act, h, q, lam_next, quad) - 1.0,
    )


def eoc_curve(
    act: ActivationSpec,
    q_grid: Sequence[float],
    quad: QuadratureSpec,
    threads: int = 1,
) -> List[EocPoint]:
    """
    Для каждого q: σ²_w = 1 / E[f'^2], σ²_b = q - σ²_w E[f^2]; точка
    остаётся, если σ²_b >= 0 и отображение дисперсии действительно сходится к q.
    """
    q_grid = [float(q) for q in q_grid]
    if any(q <= 0.0 for q in q_grid) or any(b <= a for a, b in zip(q_grid, q_grid[1:])):
        raise Unsupported("q_grid должна быть положительной и строго возрастающей")
    with tracer.start_as_current_span("eoc_curve") as span:
        span.set_attribute("activation", act.name)
        span.set_attribute("points", len(q_grid))

        found = parallel_map(lambda q: _eoc_point(act, q, quad), q_grid, threads)
        points = [p for p in found if p is not None]
        if not points:
            raise EmptyCurve(f"Для {act.name} ни одна точка q-сетки не дала допустимую точку EOC")
        if any(b.sigma_b2 < a.sigma_b2 for a, b in zip(points, points[1:])):
            logger.warning("Вдоль EOC %s σ²_b не монотонна по q*", act.name)
        span.set_attribute("emitted", len(points))
        return points


def eoc_relu_family(act: ActivationSpec, quad: Optional[QuadratureSpec] = None) -> EocPoint:
    """Единственная точка EOC семейства ReLU: σ²_b = 0, α(σ²_w) = 1."""
    if not is_relu_family(act):
        raise Unsupported(f"{act.name} не из семейства ReLU с замкнутыми формами")
    quad = quad or default_spec()

    # при σ²_b = 0 и замкнутых формах α не зависит от Λ
    def residual(sw: float) -> float:
        return alpha(act, InitHyper(sigma_w2=sw, sigma_b2=0.0), 1.0, quad) - 1.0

    sw = brentq(residual, 1e-3, 100.0, xtol=1e-14)
    h = InitHyper(sigma_w2=sw, sigma_b2=0.0)
    lam_next = variance_map(act, h, 1.0, quad)
    return EocPoint(
        sigma_b2=0.0,
        sigma_w2=sw,
        q_star=1.0,
        res_var=lam_next - 1.0,
        res_chi=chi_tilde(act, h, 1.0, quad) - 1.0,
        note="EOC семейства ReLU вырождается в точку; любое Λ неподвижно",
    )


def is_on_eoc(act: ActivationSpec, h: InitHyper, tol: float, quad: QuadratureSpec) -> EocCheck:
    """Истина, если дисперсия сходится и |χ₁(q*) - 1| < tol."""
    fp = fixed_point_variance(act, h, quad)
    if fp.fate is not VarianceFate.CONVERGES:
        return EocCheck(on_eoc=False, variance_fate=fp.fate)
    q = fp.q_star
    lam_next = variance_map(act, h, q, quad)
    res_chi = chi1(act, h, q, lam_next, quad) - 1.0
    return EocCheck(
        on_eoc=abs(res_chi) < tol,
        variance_fate=fp.fate,
        q_star=q,
        res_var=lam_next - q,
        res_chi=res_chi,
    )
