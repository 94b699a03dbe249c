"""Квадратуры для матожиданий по стандартной гауссовой мере.

Все рекурсии MF/IGB сводятся к интегралам вида E[f(z)] и
E[f(z, c z + sqrt(1 - c^2) z')]. Функции здесь векторные:
f получает numpy-массивы узлов и возвращает массив значений.

Бэкенды:
- ``truncated-panels`` (по умолчанию): отрезок [-R, R] режется в точках
  излома (kink_points) на панели, на каждой: Gauss-Legendre;
- ``hermite``: Gauss-Hermite (вероятностная нормировка), эталон для
  гладких активаций.
"""

from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import DomainError, NonFiniteIntegrand, Unsupported

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)

DEFAULT_PANEL_NODES = 64
DEFAULT_HERMITE_NODES = 128
DEFAULT_RADIUS = 10.0


class Backend(str, Enum):
    HERMITE = "hermite"
    PANELS = "truncated-panels"


class QuadratureSpec(BaseModel):
    """Параметры правила интегрирования. Неизменяемый и хешируемый: ключ кеша правил."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    backend: Backend = Backend.PANELS
    node_count: int = Field(default=DEFAULT_PANEL_NODES, ge=2)
    truncation_radius: float = Field(default=DEFAULT_RADIUS, ge=6.0)
    kink_points: Tuple[float, ...] = ()

    @field_validator("kink_points")
    @classmethod
    def _strictly_increasing(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(not np.isfinite(k) for k in v):
            raise ValueError("kink_points должны быть конечными")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("kink_points должны строго возрастать")
        return v

    def with_kinks(self, kinks: Sequence[float]) -> "QuadratureSpec":
        """Копия с другими точками излома (сортировка и удаление дублей)."""
        return self.model_copy(update={"kink_points": tuple(sorted(set(float(k) for k in kinks)))})

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return self.model_copy(update={"node_count": self.node_count * factor})


def default_spec(backend: Backend | str = Backend.PANELS, node_count: Optional[int] = None) -> QuadratureSpec:
    """Спека по умолчанию: 64 узла на панель или 128 узлов Эрмита."""
    backend = Backend(backend)
    if node_count is None:
        node_count = DEFAULT_HERMITE_NODES if backend is Backend.HERMITE else DEFAULT_PANEL_NODES
    return QuadratureSpec(backend=backend, node_count=node_count)


def _pdf(x: np.ndarray) -> np.ndarray:
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _frozen(*arrays: np.ndarray) -> Tuple[np.ndarray, ...]:
    for a in arrays:
        a.setflags(write=False)
    return arrays


@lru_cache(maxsize=64)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return _frozen(*leggauss(n))


def _panel_nodes(edges: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Узлы и веса (с гауссовой плотностью) для панелей между соседними edges.

    edges имеет форму (..., m + 1); результат (..., m * n).
    Панели нулевой длины дают нулевые веса.
    """
    t, tw = _legendre(n)
    a = edges[..., :-1, None]
    b = edges[..., 1:, None]
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * t
    w = half * tw * _pdf(x)
    shape = edges.shape[:-1] + (-1,)
    return x.reshape(shape), w.reshape(shape)


@lru_cache(maxsize=256)
def rule_1d(spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Узлы z и веса w такие, что E[f(z)] ~ sum(w * f(z)). Кешируется по spec."""
    if spec.backend is Backend.HERMITE:
        x, w = hermegauss(spec.node_count)
        return _frozen(x, w * _INV_SQRT_2PI)

    r = spec.truncation_radius
    inner = [k for k in spec.kink_points if -r < k < r]
    edges = np.array([-r, *inner, r], dtype=float)
    return _frozen(*_panel_nodes(edges, spec.node_count))


def row_rule(
    breaks: np.ndarray,
    spec: QuadratureSpec,
    upper: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Построчные правила: для каждой строки свои точки разбиения.

    breaks: (rows, m): изломы внутренней переменной в каждой строке.
    upper: (rows,): верхний предел (для свёртки по линии z1 = z2); по умолчанию R.
    Для бэкенда hermite разбиения игнорируются (upper не поддерживается).
    """
    breaks = np.atleast_2d(np.asarray(breaks, dtype=float))
    rows = breaks.shape[0]
    if spec.backend is Backend.HERMITE:
        if upper is not None:
            raise Unsupported("Свёртка по полуплоскости требует бэкенд truncated-panels")
        z, w = rule_1d(spec)
        return np.broadcast_to(z, (rows, z.size)), np.broadcast_to(w, (rows, w.size))

    r = spec.truncation_radius
    hi = np.full(rows, r) if upper is None else np.clip(np.asarray(upper, dtype=float), -r, r)
    lo = np.full(rows, -r)
    inner = np.clip(np.sort(breaks, axis=1), lo[:, None], hi[:, None])
    edges = np.concatenate([lo[:, None], inner, hi[:, None]], axis=1)
    return _panel_nodes(edges, spec.node_count)


def _check_finite(values: np.ndarray, *points: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.unravel_index(int(np.argmax(bad)), values.shape)
        where = tuple(float(np.broadcast_to(p, values.shape)[idx]) for p in points)
        raise NonFiniteIntegrand(where[0] if len(where) == 1 else where)


def _evaluate(f: Callable[..., np.ndarray], shape: Tuple[int, ...], *args: np.ndarray) -> np.ndarray:
    values = np.broadcast_to(np.asarray(f(*args), dtype=float), shape)
    _check_finite(values, *args)
    return values


def expect_g1(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec) -> float:
    """E[f(z)], z ~ N(0, 1)."""
    z, w = rule_1d(spec)
    return float(np.dot(w, _evaluate(f, z.shape, z)))


def expect_g2(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    c: float,
    spec: QuadratureSpec,
) -> float:
    """
    E[f(z, c z + sqrt(1 - c^2) z')] по независимым z, z' ~ N(0, 1).

    Изломы kink_points относятся к обоим аргументам f. При |c| = 1
    интеграл вырождается в expect_g1 на тех же узлах.
    """
    if not np.isfinite(c) or abs(c) > 1.0 + 1e-12:
        raise DomainError(f"Коэффициент корреляции вне [-1, 1]: c={c!r}")
    c = float(np.clip(c, -1.0, 1.0))
    s = float(np.sqrt(1.0 - c * c))
    if s == 0.0:
        return expect_g1(lambda z: f(z, c * z), spec)

    z, wz = rule_1d(spec)
    if spec.backend is Backend.HERMITE:
        zp, wp = rule_1d(spec)
        zp, wp = zp[None, :], wp[None, :]
    else:
        kinks = np.asarray(spec.kink_points, dtype=float)
        breaks = (kinks[None, :] - c * z[:, None]) / s
        zp, wp = row_rule(breaks, spec)

    zz = z[:, None]
    weights = wz[:, None] * wp
    values = _evaluate(f, weights.shape, zz, c * zz + s * zp)
    return float(np.sum(weights * values))


def expect_gn(
    f: Callable[..., np.ndarray],
    n: int,
    spec: QuadratureSpec,
    fold_tie: bool = False,
) -> float:
    """
    E[f(z_1, ..., z_n)] по n независимым стандартным гауссовым.

    Поддерживаются n = 1 и n = 2. fold_tie=True для функций,
    симметричных относительно перестановки z1 <-> z2 и с изломом на
    диагонали (MaxPool): считаем 2 * интеграл по полуплоскости z1 > z2,
    так что диагональ становится краем панели.
    """
    if n == 1:
        return expect_g1(f, spec)
    if n != 2:
        raise Unsupported(f"Поддерживаются только окна n <= 2, запрошено n={n}")

    z, w = rule_1d(spec)
    if fold_tie and spec.backend is Backend.PANELS:
        kinks = np.asarray(spec.kink_points, dtype=float)
        breaks = np.broadcast_to(kinks, (z.size, kinks.size))
        z2, w2 = row_rule(breaks, spec, upper=z)
        weights = 2.0 * w[:, None] * w2
    else:
        z2, w2 = z[None, :], w[None, :]
        weights = w[:, None] * w2

    z1 = np.broadcast_to(z[:, None], weights.shape)
    z2 = np.broadcast_to(z2, weights.shape)
    return float(np.sum(weights * _evaluate(f, weights.shape, z1, z2)))
