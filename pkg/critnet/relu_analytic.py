"""Замкнутые формы для ReLU: f, g, точные рекурсии (σ²_data, σ²_centers) и Γ.

Независимый оракул для квадратурного движка: ничего здесь не интегрируется.
"""

import math
from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict

from .errors import DomainError
from .propagation import GAMMA_CAP, InitHyper, VarianceFate

# допуск сравнения σ²_w с критическим значением 2
_CRITICAL_TOL = 1e-12


def _check_gamma(gamma: float) -> None:
    if gamma < 0.0 or math.isnan(gamma):
        raise DomainError(f"Γ должно быть >= 0, получено {gamma!r}")


def g_fn(gamma: float) -> float:
    """g(Γ) = (2/π) Γ arctan sqrt(2Γ+1) + sqrt(2Γ+1)/π."""
    _check_gamma(gamma)
    y = math.sqrt(2.0 * gamma + 1.0)
    return 2.0 / math.pi * gamma * math.atan(y) + y / math.pi


def f_fn(gamma: float) -> float:
    """f(Γ) = 1 + Γ - g(Γ), через arctan(1/y): при больших Γ не вычитаем Γ из Γ."""
    _check_gamma(gamma)
    y = math.sqrt(2.0 * gamma + 1.0)
    return 1.0 + 2.0 / math.pi * gamma * math.atan(1.0 / y) - y / math.pi


def relu_covariance(lam: float, c: float) -> float:
    """E[ReLU(u) ReLU(u')] при Var u = Var u' = Λ, corr = c (арккосинусное ядро)."""
    if lam < 0.0 or abs(c) > 1.0 + 1e-12:
        raise DomainError(f"Нужны Λ >= 0 и |c| <= 1: Λ={lam!r}, c={c!r}")
    c = max(-1.0, min(1.0, c))
    return lam / (2.0 * math.pi) * (math.sqrt(1.0 - c * c) + (math.pi - math.acos(c)) * c)


def step_relu(h: InitHyper, sd2: float, sc2: float) -> Tuple[float, float]:
    """
    Точный шаг ReLU в координатах IGB:

        σ²_data'    = σ²_w σ²_data f(Γ) / 2
        σ²_centers' = σ²_w σ²_data g(Γ) / 2 + σ²_b

    (σ²_centers g(Γ)/Γ переписано как σ²_data g(Γ), деления на Γ = 0 нет).
    """
    if sd2 <= 0.0 or not math.isfinite(sd2):
        raise DomainError(f"σ²_data должно быть > 0, получено {sd2!r}")
    if sc2 < 0.0:
        raise DomainError(f"σ²_centers должно быть >= 0, получено {sc2!r}")
    gamma = min(sc2 / sd2, GAMMA_CAP)
    half = 0.5 * h.sigma_w2 * sd2
    return half * f_fn(gamma), half * g_fn(gamma) + h.sigma_b2


def gamma_step(h: InitHyper, gamma: float, sd2_next: float) -> float:
    """Γ' = g(Γ)/f(Γ) + σ²_b / σ²_data' с насыщением на GAMMA_CAP."""
    _check_gamma(gamma)
    if sd2_next <= 0.0:
        raise DomainError(f"σ²_data' должно быть > 0, получено {sd2_next!r}")
    gamma = min(gamma, GAMMA_CAP)
    return min(g_fn(gamma) / f_fn(gamma) + h.sigma_b2 / sd2_next, GAMMA_CAP)


class DataVariance(str, Enum):
    TO_ZERO = "DataVarToZero"
    DIVERGES = "DataVarDiverges"


class CentersVariance(str, Enum):
    FINITE = "CentersFinite"
    DIVERGE = "CentersDiverge"


class GammaGrowth(str, Enum):
    EXPONENTIAL = "GammaExponential"
    QUADRATIC = "GammaQuadratic"


class ReluRegime(BaseModel):
    model_config = ConfigDict(frozen=True)

    data_variance: DataVariance
    centers_variance: CentersVariance
    gamma_growth: GammaGrowth
    total_variance: VarianceFate
    total_constant: bool = False


def asymptotic_class(h: InitHyper) -> ReluRegime:
    """Предельный режим ReLU-сети по (σ²_w, σ²_b)."""
    sw, sb = h.sigma_w2, h.sigma_b2
    critical = abs(sw - 2.0) < _CRITICAL_TOL

    if sw < 2.0 and not critical:
        return ReluRegime(
            data_variance=DataVariance.TO_ZERO,
            centers_variance=CentersVariance.FINITE,
            gamma_growth=GammaGrowth.EXPONENTIAL if sb > 0.0 else GammaGrowth.QUADRATIC,
            total_variance=VarianceFate.CONVERGES if sb > 0.0 else VarianceFate.COLLAPSES,
        )
    if critical:
        # Λ' = Λ + σ²_b: постоянна при σ²_b = 0, линейно растёт иначе
        return ReluRegime(
            data_variance=DataVariance.TO_ZERO,
            centers_variance=CentersVariance.FINITE if sb == 0.0 else CentersVariance.DIVERGE,
            gamma_growth=GammaGrowth.QUADRATIC,
            total_variance=VarianceFate.CONVERGES if sb == 0.0 else VarianceFate.DIVERGES,
            total_constant=sb == 0.0,
        )
    return ReluRegime(
        data_variance=DataVariance.DIVERGES,
        centers_variance=CentersVariance.DIVERGE,
        gamma_growth=GammaGrowth.QUADRATIC,
        total_variance=VarianceFate.DIVERGES,
    )


def relu_trace(h: InitHyper, depth: int, sd2: float = 1.0, sc2: float = 0.0) -> list[Tuple[float, float, float]]:
    """Траектория (σ²_data, σ²_centers, Γ) по слоям 0..depth; Γ идёт по своей рекурсии."""
    gamma = sc2 / sd2
    rows = [(sd2, sc2, gamma)]
    for _ in range(depth):
        sd2, sc2 = step_relu(h, sd2, sc2)
        if sd2 <= 0.0 or not math.isfinite(sd2 + sc2):
            break
        gamma = gamma_step(h, gamma, sd2)
        rows.append((sd2, sc2, gamma))
    return rows
