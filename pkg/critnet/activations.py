"""Реестр активаций: одно-узловые φ и двух-узловые композиции Pool ∘ φ.

Двух-узловая активация отображает R^2 -> R^2, оба выхода равны
(max или среднее). Все моменты считаются на один выходной узел:
V[f^2](x) = E[f_1(sqrt(x) z)^2], градиент берётся от f_1.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.special import ndtr

from .errors import ArityError, DomainError, UnknownActivation, Unsupported
from .quadrature import QuadratureSpec, expect_g1, expect_gn, row_rule

Array = np.ndarray


class Symmetry(str, Enum):
    ODD = "odd"
    EVEN = "even"
    NONE = "none"


class PoolKind(str, Enum):
    """Окно пулинга фиксировано: 2."""

    MAXPOOL2 = "maxpool2"
    AVERAGEPOOL2 = "averagepool2"


class Integrand(str, Enum):
    """Производные подынтегральные выражения V-оператора."""

    F2 = "f2"
    FPRIME2 = "fprime2"
    F_LAPLACIAN = "f_laplacian"


@dataclass(frozen=True)
class MomentOverrides:
    """Замкнутые формы V[g](x) для g из Integrand."""

    f2: Callable[[float], float]
    fprime2: Callable[[float], float]
    f_laplacian: Callable[[float], float]

    def get(self, g: Integrand) -> Callable[[float], float]:
        return {Integrand.F2: self.f2, Integrand.FPRIME2: self.fprime2, Integrand.F_LAPLACIAN: self.f_laplacian}[g]


@dataclass(frozen=True)
class ActivationSpec:
    """
    Активация с производными и метаданными для квадратур.

    value / first_derivative для arity=1: векторные функции R -> R.
    Для arity=2 value(x1, x2) -> (y1, y2), а first_derivative(x1, x2)
    возвращает градиент первого выхода (d y1/d x1, d y1/d x2).
    Производная в изломе берётся справа-открытой (ReLU'(0) = 0).
    """

    name: str
    arity: int
    value: Callable[..., object]
    first_derivative: Callable[..., object]
    kinks: Tuple[float, ...] = ()
    bounded: bool = False
    bound: Optional[float] = None
    symmetry: Symmetry = Symmetry.NONE
    moment_overrides: Optional[MomentOverrides] = None
    # гладкая часть второй производной и скачки φ' в изломах (только arity=1)
    second_derivative: Optional[Callable[[Array], Array]] = None
    kink_jumps: Tuple[float, ...] = ()
    monotone: bool = False
    tie_kink: bool = False
    base: Optional["ActivationSpec"] = field(default=None, repr=False)
    pool: Optional[PoolKind] = None

    def output(self, *x: Array) -> Array:
        """Первый выход активации."""
        if self.arity == 1:
            return np.asarray(self.value(x[0]), dtype=float)
        return np.asarray(self.value(*x)[0], dtype=float)

    def grad_sq(self, *x: Array) -> Array:
        """Квадрат нормы градиента первого выхода."""
        if self.arity == 1:
            return np.asarray(self.first_derivative(x[0]), dtype=float) ** 2
        g1, g2 = self.first_derivative(*x)
        return np.asarray(g1, dtype=float) ** 2 + np.asarray(g2, dtype=float) ** 2

    def grad_dot(self, *x: Array) -> Array:
        """∇f_1(x) · x: нужен для формы Штейна производной дисперсии."""
        if self.arity == 1:
            return np.asarray(self.first_derivative(x[0]), dtype=float) * x[0]
        g1, g2 = self.first_derivative(*x)
        return np.asarray(g1, dtype=float) * x[0] + np.asarray(g2, dtype=float) * x[1]

    def scaled_quad(self, quad: QuadratureSpec, x: float) -> QuadratureSpec:
        """Спека с изломами в стандартизованной переменной z, где аргумент = sqrt(x) z."""
        if x <= 0.0 or not self.kinks:
            return quad.with_kinks(())
        root = math.sqrt(x)
        return quad.with_kinks([k / root for k in self.kinks])


# --- встроенные одно-узловые активации ---


def _linear() -> ActivationSpec:
    return ActivationSpec(
        name="linear",
        arity=1,
        value=lambda x: np.asarray(x, dtype=float),
        first_derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        second_derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        symmetry=Symmetry.ODD,
        monotone=True,
    )


def _relu() -> ActivationSpec:
    return ActivationSpec(
        name="relu",
        arity=1,
        value=lambda x: np.maximum(np.asarray(x, dtype=float), 0.0),
        first_derivative=lambda x: (np.asarray(x, dtype=float) > 0.0).astype(float),
        second_derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        kinks=(0.0,),
        kink_jumps=(1.0,),
        symmetry=Symmetry.NONE,
        monotone=True,
        # E[ReLU(sqrt(x) z)^2] = x/2, E[ReLU'^2] = 1/2, δ-член равен нулю: ReLU(0) = 0
        moment_overrides=MomentOverrides(
            f2=lambda x: 0.5 * x,
            fprime2=lambda x: 0.5,
            f_laplacian=lambda x: 0.0,
        ),
    )


def _tanh() -> ActivationSpec:
    def d1(x: Array) -> Array:
        t = np.tanh(x)
        return 1.0 - t * t

    def d2(x: Array) -> Array:
        t = np.tanh(x)
        return -2.0 * t * (1.0 - t * t)

    return ActivationSpec(
        name="tanh",
        arity=1,
        value=np.tanh,
        first_derivative=d1,
        second_derivative=d2,
        bounded=True,
        bound=1.0,
        symmetry=Symmetry.ODD,
        monotone=True,
    )


_BUILTINS: Dict[str, Callable[[], ActivationSpec]] = {
    "linear": _linear,
    "relu": _relu,
    "tanh": _tanh,
}

# Замкнутые формы для Pool ∘ ReLU (на один выходной узел)
_POOL_OVERRIDES: Dict[Tuple[str, PoolKind], MomentOverrides] = {
    ("relu", PoolKind.MAXPOOL2): MomentOverrides(
        f2=lambda x: x * (3.0 * math.pi + 2.0) / (4.0 * math.pi),
        fprime2=lambda x: 0.75,
        f_laplacian=lambda x: 1.0 / (2.0 * math.pi),
    ),
    ("relu", PoolKind.AVERAGEPOOL2): MomentOverrides(
        f2=lambda x: x * (math.pi + 1.0) / (4.0 * math.pi),
        fprime2=lambda x: 0.25,
        f_laplacian=lambda x: 1.0 / (4.0 * math.pi),
    ),
}

_POOL_SUFFIX = {"maxpool": PoolKind.MAXPOOL2, "avgpool": PoolKind.AVERAGEPOOL2}

ACTIVATION_NAMES = (
    "linear",
    "relu",
    "tanh",
    "relu+maxpool",
    "relu+avgpool",
    "tanh+maxpool",
    "tanh+avgpool",
)


def builtin(name: str) -> ActivationSpec:
    """Одно-узловая активация по имени: linear, relu, tanh."""
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise UnknownActivation(f"Неизвестная активация {name!r}; доступны: {', '.join(_BUILTINS)}") from None


def compose_pool(base: ActivationSpec, pool: PoolKind) -> ActivationSpec:
    """Pool ∘ φ: оба выходных слота несут max(φ(x1), φ(x2)) или их среднее."""
    if base.arity != 1:
        raise ArityError(f"Пулинг применяется к одно-узловой активации, получена arity={base.arity}")
    pool = PoolKind(pool)
    phi, dphi = base.value, base.first_derivative

    if pool is PoolKind.MAXPOOL2:

        def value(x1: Array, x2: Array) -> Tuple[Array, Array]:
            y1, y2 = np.asarray(phi(x1), dtype=float), np.asarray(phi(x2), dtype=float)
            m = np.where(y1 >= y2, y1, y2)  # при равенстве выигрывает первый слот
            return m, m

        def gradient(x1: Array, x2: Array) -> Tuple[Array, Array]:
            first = np.asarray(phi(x1), dtype=float) >= np.asarray(phi(x2), dtype=float)
            return np.asarray(dphi(x1), dtype=float) * first, np.asarray(dphi(x2), dtype=float) * ~first

        suffix, symmetry, tie = "maxpool", Symmetry.NONE, True
    else:

        def value(x1: Array, x2: Array) -> Tuple[Array, Array]:
            v = 0.5 * (np.asarray(phi(x1), dtype=float) + np.asarray(phi(x2), dtype=float))
            return v, v

        def gradient(x1: Array, x2: Array) -> Tuple[Array, Array]:
            return 0.5 * np.asarray(dphi(x1), dtype=float), 0.5 * np.asarray(dphi(x2), dtype=float)

        suffix, symmetry, tie = "avgpool", base.symmetry, False

    return ActivationSpec(
        name=f"{base.name}+{suffix}",
        arity=2,
        value=value,
        first_derivative=gradient,
        kinks=base.kinks,
        bounded=base.bounded,
        bound=base.bound,
        symmetry=symmetry,
        moment_overrides=_POOL_OVERRIDES.get((base.name, pool)),
        monotone=base.monotone,
        tie_kink=tie,
        base=base,
        pool=pool,
    )


def resolve(name: str) -> ActivationSpec:
    """Имя из словаря CLI (например, 'relu+maxpool') -> ActivationSpec."""
    base_name, _, suffix = name.strip().lower().partition("+")
    base = builtin(base_name)
    if not suffix:
        return base
    if suffix not in _POOL_SUFFIX:
        raise UnknownActivation(f"Неизвестный пулинг {suffix!r} в {name!r}; доступны: maxpool, avgpool")
    return compose_pool(base, _POOL_SUFFIX[suffix])


def is_relu_family(act: ActivationSpec) -> bool:
    root = act.base if act.base is not None else act
    return root.name == "relu" and act.moment_overrides is not None


# --- V-оператор ---


def _expect(act: ActivationSpec, f: Callable[..., Array], quad: QuadratureSpec) -> float:
    if act.arity == 1:
        return expect_g1(f, quad)
    return expect_gn(f, 2, quad, fold_tie=act.tie_kink)


def v_operator(
    act: ActivationSpec,
    g: Integrand | str,
    x: float,
    quad: QuadratureSpec,
    use_overrides: bool = True,
) -> float:
    """
    V[g](x) = ∫ ∏ Dz_i g(sqrt(x) z) для g ∈ {f^2, f'^2, f·Δf}.

    Если у активации есть замкнутые формы, используются они;
    use_overrides=False принудительно считает квадратурой.
    """
    g = Integrand(g)
    if x < 0.0 or not np.isfinite(x):
        raise DomainError(f"V-оператор определён для x >= 0, получено x={x!r}")
    if use_overrides and act.moment_overrides is not None:
        return float(act.moment_overrides.get(g)(x))

    root = math.sqrt(x)
    q = act.scaled_quad(quad, x)

    if g is Integrand.F2:
        return _expect(act, lambda *z: act.output(*(root * zi for zi in z)) ** 2, q)
    if g is Integrand.FPRIME2:
        return _expect(act, lambda *z: act.grad_sq(*(root * zi for zi in z)), q)
    return _laplacian_term(act, x, q)


def _laplacian_term(act: ActivationSpec, x: float, q: QuadratureSpec) -> float:
    """E[f Δf](sqrt(x) z) с учётом распределительных вкладов изломов."""
    if x == 0.0:
        zero = np.zeros(1)
        base = act if act.arity == 1 else act.base
        phi0 = float(np.asarray(base.value(zero))[0])
        dd = base.second_derivative(zero)[0] if base.second_derivative is not None else 0.0
        return phi0 * float(dd)

    root = math.sqrt(x)
    if act.arity == 1:
        smooth = 0.0
        if act.second_derivative is not None:
            smooth = expect_g1(lambda z: act.output(root * z) * act.second_derivative(root * z), q)
        # δ-вклады: Σ J_k φ(k) E[δ(sqrt(x) z - k)] = Σ J_k φ(k) pdf(k / sqrt(x)) / sqrt(x)
        jumps = 0.0
        for k, jump in zip(act.kinks, act.kink_jumps):
            phi_k = float(np.asarray(act.value(np.array([k])))[0])
            jumps += jump * phi_k * math.exp(-0.5 * k * k / x) / math.sqrt(2.0 * math.pi * x)
        return smooth + jumps

    # Для Pool ∘ φ через форму Штейна: d/dx V[f^2] = E[f (∇f · z)] / sqrt(x) = V[f'^2] + V[f Δf]
    stein = _expect(act, lambda z1, z2: act.output(root * z1, root * z2) * act.grad_dot(root * z1, root * z2), q) / x
    return stein - v_operator(act, Integrand.FPRIME2, x, q, use_overrides=False)


def variance_derivative_stein(act: ActivationSpec, x: float, quad: QuadratureSpec) -> float:
    """d/dx V[f^2](x) = E[f(sqrt(x) z) (∇f · sqrt(x) z)] / x; независимая проверка α."""
    if x <= 0.0:
        raise DomainError("Форма Штейна требует x > 0")
    root = math.sqrt(x)
    q = act.scaled_quad(quad, x)
    return _expect(act, lambda *z: act.output(*(root * zi for zi in z)) * act.grad_dot(*(root * zi for zi in z)), q) / x


def maxpool_cdf_form(
    base: ActivationSpec,
    x: float,
    quad: QuadratureSpec,
    transform: Callable[[Array], Array] = np.square,
) -> float:
    """
    E[h(max(φ(sqrt(x) z1), φ(sqrt(x) z2)))] = 2 E[h(φ(sqrt(x) z)) Φ(z)]

    для неубывающей φ; Φ: стандартная нормальная функция распределения.
    """
    if base.arity != 1:
        raise ArityError("Ожидается одно-узловая активация")
    if not base.monotone:
        raise Unsupported(f"Тождество для MaxPool требует неубывающую φ, {base.name} не такова")
    root = math.sqrt(x)
    q = base.scaled_quad(quad, x)
    return 2.0 * expect_g1(lambda z: transform(base.output(root * z)) * ndtr(z), q)


# --- условное среднее (IGB): m(a) = E_ε[f_1(a + σ ε)] ---


def _base_conditional_mean(base: ActivationSpec, a: Array, sigma: float, quad: QuadratureSpec, weight=None) -> Array:
    kinks = np.asarray(base.kinks, dtype=float)
    breaks = (kinks[None, :] - a[:, None]) / sigma
    eps, w = row_rule(breaks, quad)
    y = base.output(a[:, None] + sigma * eps)
    if weight is not None:
        y = y * weight(eps)
    return np.sum(w * y, axis=1)


def conditional_mean(act: ActivationSpec, centers: Tuple[Array, ...], sigma: float, quad: QuadratureSpec) -> Array:
    """
    m(a) = E_ε[f_1(a + σ ε)], ε ~ N(0, I), для массива центров a.

    centers: кортеж из arity массивов одной формы. Для MaxPool
    используется E[φ(max(X1, X2))] = Σ_i E[φ(X_i) Φ((X_i - a_j) / σ)],
    что требует неубывающую φ.
    """
    if len(centers) != act.arity:
        raise ArityError(f"Ожидалось {act.arity} массивов центров, получено {len(centers)}")
    shape = np.shape(centers[0])
    flat = [np.asarray(c, dtype=float).reshape(-1) for c in centers]
    if sigma <= 0.0:
        return act.output(*flat).reshape(shape)

    if act.arity == 1:
        return _base_conditional_mean(act, flat[0], sigma, quad).reshape(shape)

    base = act.base
    a1, a2 = flat
    if act.pool is PoolKind.AVERAGEPOOL2:
        m = 0.5 * (_base_conditional_mean(base, a1, sigma, quad) + _base_conditional_mean(base, a2, sigma, quad))
        return m.reshape(shape)

    if not base.monotone:
        raise Unsupported(f"Ковариация MaxPool требует неубывающую φ, {base.name} не такова")
    shift = (a1 - a2)[:, None] / sigma
    m = _base_conditional_mean(base, a1, sigma, quad, weight=lambda eps: ndtr(eps + shift))
    m += _base_conditional_mean(base, a2, sigma, quad, weight=lambda eps: ndtr(eps - shift))
    return m.reshape(shape)
