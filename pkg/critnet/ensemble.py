"""
Монте-Карло: ансамбль конечных случайных MLP на гауссовых (или загруженных) данных.

Сеть глубины L: слой 1 линеен по входу (h¹ = W¹x + b¹, Var W¹ = σ²_w/d),
слои 2..L считают h^l = W^l φ(h^{l-1}) + b^l с Var W^l = σ²_w/N; слой L:
считывающий, у него output_dim узлов. Потоки ГСЧ ключуются
(seed, вид, реализация, слой), так что параллельный и последовательный
прогоны совпадают побитно.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from opentelemetry import trace
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import ndtr, softmax

from .activations import ActivationSpec, resolve
from .errors import DatasetError, DomainError
from .parallel import parallel_map
from .propagation import InitHyper, depth_trace, gradient_profile, initial_stats
from .quadrature import QuadratureSpec

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

# виды потоков ГСЧ
STREAM_DATA = 0
STREAM_NETWORK = 1
STREAM_LABELS = 2
STREAM_PAIRS = 3
STREAM_G0_LAW = 4

QUANTILES = (0.05, 0.5, 0.95)
# больше пар внутри класса не перечисляем, берём случайные
PAIR_ENUM_LIMIT = 1_000_000


def stream(seed: int, *key: int) -> np.random.Generator:
    """Независимый поток Philox для ключа (seed, *key)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


class ResidualSpec(BaseModel):
    """x' = x + L^(-scale_exponent) (W φ(x) + b) в скрытых слоях одинаковой ширины."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scale_exponent: float = Field(default=1.0, ge=0.0)


class ArchSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    depth: int = Field(ge=1, description="Число слоёв L, включая считывающий")
    width: int = Field(ge=1)
    input_dim: Optional[int] = Field(default=None, ge=1, description="d; по умолчанию равно width")
    output_dim: int = Field(default=2, ge=2)
    activation: str = "relu"
    residual: Optional[ResidualSpec] = None

    @model_validator(mode="after")
    def _pooled_width(self) -> "ArchSpec":
        if resolve(self.activation).arity == 2 and self.width % 2:
            raise ValueError(f"Пулинг требует чётной ширины, получено width={self.width}")
        return self

    @property
    def d(self) -> int:
        return self.input_dim if self.input_dim is not None else self.width

    def dims(self) -> List[int]:
        return [self.d] + [self.width] * (self.depth - 1) + [self.output_dim]


class EnsembleConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    arch: ArchSpec
    hyper: InitHyper
    n_samples: int = Field(ge=2)
    n_realizations: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    pair_count: int = Field(default=200, ge=1)


@dataclass(frozen=True)
class Network:
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    residual_scale: Optional[float] = None


def make_dataset(n: int, dim: int, seed: int) -> np.ndarray:
    """n x dim стандартных гауссовых, детерминированно по seed."""
    if n < 1 or dim < 1:
        raise DomainError(f"Нужны n, dim >= 1: n={n}, dim={dim}")
    return stream(seed, STREAM_DATA).standard_normal((n, dim))


def load_dataset(path: str | Path, standardize: bool = True) -> np.ndarray:
    """
    CSV-матрица: строки: примеры, столбцы: признаки, заголовок необязателен.

    По умолчанию каждый столбец приводится к нулевому среднему и единичной дисперсии.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as e:
        raise DatasetError(f"Не удалось прочитать {path}: {e}") from e
    if not rows:
        raise DatasetError(f"{path}: пустой файл")
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]  # заголовок
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as e:
        raise DatasetError(f"{path}: нечисловое значение ({e})") from e
    if data.ndim != 2 or data.shape[0] < 2:
        raise DatasetError(f"{path}: нужна прямоугольная матрица минимум из двух строк")
    if not np.all(np.isfinite(data)):
        raise DatasetError(f"{path}: встречены inf/nan")
    if standardize:
        std = data.std(axis=0)
        data = (data - data.mean(axis=0)) / np.where(std > 0.0, std, 1.0)
    return data


def sample_network(arch: ArchSpec, hyper: InitHyper, seed: int, realization: int = 0) -> Network:
    """W^l ~ N(0, σ²_w / N_{l-1}), b^l ~ N(0, σ²_b); по потоку на слой."""
    dims = arch.dims()
    weights, biases = [], []
    for layer in range(1, len(dims)):
        rng = stream(seed, STREAM_NETWORK, realization, layer)
        fan_in, fan_out = dims[layer - 1], dims[layer]
        weights.append(rng.standard_normal((fan_out, fan_in)) * math.sqrt(hyper.sigma_w2 / fan_in))
        if hyper.sigma_b2 > 0.0:
            biases.append(rng.standard_normal(fan_out) * math.sqrt(hyper.sigma_b2))
        else:
            biases.append(np.zeros(fan_out))
    scale = arch.depth ** (-arch.residual.scale_exponent) if arch.residual is not None else None
    return Network(weights=tuple(weights), biases=tuple(biases), residual_scale=scale)


# --- прямой и обратный проходы ---


def _apply(act: ActivationSpec, h: np.ndarray) -> np.ndarray:
    """φ по узлам; для пулинга пары (2i, 2i+1) получают одно и то же значение."""
    if act.arity == 1:
        return act.output(h)
    pooled = act.output(h[:, 0::2], h[:, 1::2])
    return np.repeat(pooled, 2, axis=1)


def _backprop_activation(act: ActivationSpec, h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """dL/dh по dL/dy, y = φ(h)."""
    if act.arity == 1:
        return np.asarray(act.first_derivative(h), dtype=float) * g
    d1, d2 = act.first_derivative(h[:, 0::2], h[:, 1::2])
    pair = g[:, 0::2] + g[:, 1::2]
    out = np.empty_like(h)
    out[:, 0::2] = pair * d1
    out[:, 1::2] = pair * d2
    return out


def _is_residual(net: Network, layer: int, dims: Sequence[int]) -> bool:
    # слой 1 линеен по входу, считывающий слой всегда обычный
    return net.residual_scale is not None and 1 < layer < len(dims) - 1 and dims[layer - 1] == dims[layer]


def forward(net: Network, act: ActivationSpec, data: np.ndarray) -> List[np.ndarray]:
    """Предактивации h^1..h^L формы (P, N_l); обрывается на первом неконечном слое."""
    dims = [net.weights[0].shape[1]] + [w.shape[0] for w in net.weights]
    if data.shape[1] != dims[0]:
        raise DatasetError(f"Размерность данных {data.shape[1]} не совпадает с input_dim={dims[0]}")
    out: List[np.ndarray] = []
    h = data @ net.weights[0].T + net.biases[0]
    with np.errstate(over="ignore", invalid="ignore"):
        for layer in range(1, len(net.weights) + 1):
            if layer > 1:
                branch = _apply(act, h) @ net.weights[layer - 1].T + net.biases[layer - 1]
                h = h + net.residual_scale * branch if _is_residual(net, layer, dims) else branch
            if not np.all(np.isfinite(h)):
                logger.info("Переполнение предактиваций на слое %d", layer)
                break
            out.append(h)
    return out


def backward(net: Network, act: ActivationSpec, pre: List[np.ndarray], labels: np.ndarray) -> List[np.ndarray]:
    """δ^l = dL/dh^l для софтмакс-кросс-энтропии, l = 1..len(pre)."""
    dims = [net.weights[0].shape[1]] + [w.shape[0] for w in net.weights]
    logits = pre[-1]
    delta = softmax(logits, axis=1)
    delta[np.arange(len(labels)), labels] -= 1.0
    deltas = [delta]
    for layer in range(len(pre), 1, -1):
        g = delta @ net.weights[layer - 1]
        local = _backprop_activation(act, pre[layer - 2], g)
        if _is_residual(net, layer, dims):
            delta = delta + net.residual_scale * local
        else:
            delta = local
        deltas.append(delta)
    return deltas[::-1]


# --- измерения одной реализации ---


class Band(BaseModel):
    model_config = ConfigDict(frozen=True)

    p05: float
    p50: float
    p95: float

    @classmethod
    def of(cls, values: np.ndarray) -> "Band":
        lo, mid, hi = np.quantile(np.asarray(values, dtype=float).ravel(), QUANTILES)
        return cls(p05=float(lo), p50=float(mid), p95=float(hi))

    def contains(self, x: float) -> bool:
        return self.p05 <= x <= self.p95


@dataclass(frozen=True)
class RealizationStats:
    lam: List[np.ndarray]  # по слоям: (P,)
    q: List[np.ndarray]  # по слоям: (pairs,)
    c: List[np.ndarray]
    sd2: List[float]
    sc2: List[float]
    g0: float
    class_freq: np.ndarray
    grad: Optional[List[np.ndarray]]  # по слоям: (пары одного класса,) mean_i δ_i(a)δ_i(b)
    grad_self: Optional[List[np.ndarray]]  # по слоям: (P,) mean_i δ_i(a)^2
    favored: int
    unfavored: int
    diverged_at: Optional[int]


def layer_statistics(h: np.ndarray, pairs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float, float]:
    """λ̂_a, q̂_ab, ĉ_ab и прокси IGB (σ̂²_data, σ̂²_centers) по узлам слоя."""
    n = h.shape[1]
    lam = np.einsum("ai,ai->a", h, h) / n
    a, b = pairs[:, 0], pairs[:, 1]
    q = np.einsum("ai,ai->a", h[a], h[b]) / n
    denom = np.sqrt(lam[a] * lam[b])
    c = np.divide(q, denom, out=np.zeros_like(q), where=denom > 0.0)
    centers = h.mean(axis=0)
    sc2 = float(np.mean(centers * centers))
    sd2 = float(np.mean(h.var(axis=0)))
    return lam, q, c, sd2, sc2


def class_frequencies(logits: np.ndarray) -> np.ndarray:
    """Доля argmax по классам; ничьи уходят к меньшему индексу."""
    winners = np.argmax(logits, axis=1)
    return np.bincount(winners, minlength=logits.shape[1]) / logits.shape[0]


def measure_g0(logits: np.ndarray) -> Tuple[float, float]:
    """(доля класса 0, максимальная доля класса)."""
    freq = class_frequencies(logits)
    return float(freq[0]), float(freq.max())


def gradient_correlations(deltas: List[np.ndarray], pairs: np.ndarray) -> List[np.ndarray]:
    """χ̂_ab^l = mean_i δ_i^l(a) δ_i^l(b) для каждой пары (a, b) и каждого слоя."""
    a, b = pairs[:, 0], pairs[:, 1]
    return [np.einsum("ai,ai->a", d[a], d[b]) / d.shape[1] for d in deltas]


def _realization(
    cfg: EnsembleConfig,
    act: ActivationSpec,
    data: np.ndarray,
    pairs: np.ndarray,
    labels: np.ndarray,
    r: int,
    grad_pairs: Optional[np.ndarray],
) -> RealizationStats:
    net = sample_network(cfg.arch, cfg.hyper, cfg.seed, r)
    pre = forward(net, act, data)
    diverged = len(pre) + 1 if len(pre) < cfg.arch.depth else None
    lam, q, c, sd2, sc2 = [], [], [], [], []
    for h in pre:
        lam_l, q_l, c_l, sd2_l, sc2_l = layer_statistics(h, pairs)
        lam.append(lam_l)
        q.append(q_l)
        c.append(c_l)
        sd2.append(sd2_l)
        sc2.append(sc2_l)

    g0, freq = math.nan, np.full(cfg.arch.output_dim, math.nan)
    grad = grad_self = None
    favored = unfavored = -1
    if diverged is None:
        logits = pre[-1]
        freq = class_frequencies(logits)
        g0 = float(freq[0])
        # предубеждение сети: средняя вероятность класса по датасету
        mean_prob = softmax(logits, axis=1).mean(axis=0)
        favored, unfavored = int(np.argmax(mean_prob)), int(np.argmin(mean_prob))
        if grad_pairs is not None:
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                deltas = backward(net, act, pre, labels)
                grad = gradient_correlations(deltas, grad_pairs)
                grad_self = [np.einsum("ai,ai->a", d, d) / d.shape[1] for d in deltas]
    return RealizationStats(lam, q, c, sd2, sc2, g0, freq, grad, grad_self, favored, unfavored, diverged)


# --- агрегированный результат ---


class LayerBand(BaseModel):
    model_config = ConfigDict(frozen=True)

    layer: int
    lambda_hat: Band
    q_hat: Band
    c_hat: Band
    sd2_hat: Band
    sc2_hat: Band
    gamma_hat: Band


class GradientMeasurement(BaseModel):
    """
    Градиентные корреляции χ̂_ab^l = mean_i δ_i^l(a) δ_i^l(b) по слоям 1..L.

    all / favored / unfavored: медианы по парам a < b с одинаковой меткой
    (по всем классам, по самому предпочитаемому и по наименее предпочитаемому
    классу реализации); None, если значений меньше двух.
    Профили пересчитаны в суммы по узлам слоя и нормированы на 1 в выходном
    слое, как и propagation.gradient_profile. self_profile строится по a = b:
    для него c = 1 на каждом слое, и рекурсия χ̃ точна.
    """

    model_config = ConfigDict(frozen=True)

    all: List[Optional[float]]
    favored: List[Optional[float]]
    unfavored: List[Optional[float]]
    profile: List[float] = Field(description="all, нормированное на выходной слой")
    self_profile: List[float] = Field(description="медиана δ(a)^2, нормированная на выходной слой")


class EnsembleMeasurement(BaseModel):
    model_config = ConfigDict(frozen=True)

    layers: List[LayerBand]
    input_lambda: float
    input_q: float
    g0_samples: List[float]
    max_class_freq: List[float]
    grad_corr: Optional[GradientMeasurement] = None
    diverged_at_layer: Optional[int] = None


def _sample_pairs(n: int, count: int, seed: int) -> np.ndarray:
    a, b = np.triu_indices(n, k=1)
    total = a.size
    pick = stream(seed, STREAM_PAIRS).choice(total, size=min(count, total), replace=False)
    pick.sort()
    return np.stack([a[pick], b[pick]], axis=1)


def class_pairs(labels: np.ndarray, count: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    До count пар (a < b) внутри каждого класса: (пары формы (M, 2), класс каждой пары).

    Пары с разными метками не берутся: у выходного слоя знак δ(a)·δ(b)
    для них отрицателен, и медиана по смеси теряет смысл.
    """
    labels = np.asarray(labels)
    chunks, owners = [], []
    for i, k in enumerate(np.unique(labels)):
        idx = np.flatnonzero(labels == k)
        m = idx.size
        if m < 2:
            continue
        rng = stream(seed, STREAM_PAIRS, 1 + i)
        total = m * (m - 1) // 2
        if total <= PAIR_ENUM_LIMIT:
            a, b = np.triu_indices(m, k=1)
            pick = np.sort(rng.choice(total, size=min(count, total), replace=False))
            a, b = a[pick], b[pick]
        else:
            a = rng.integers(0, m, size=count)
            b = rng.integers(0, m - 1, size=count)
            b = b + (b >= a)
            a, b = np.minimum(a, b), np.maximum(a, b)
        chunks.append(np.stack([idx[a], idx[b]], axis=1))
        owners.append(np.full(a.size, k))
    if not chunks:
        return np.empty((0, 2), dtype=int), np.empty(0, dtype=labels.dtype)
    return np.concatenate(chunks), np.concatenate(owners)


def _median_or_none(values: List[np.ndarray], masks: Optional[List[np.ndarray]] = None) -> Optional[float]:
    if masks is not None:
        values = [v[m] for v, m in zip(values, masks)]
    flat = np.concatenate(values) if values else np.empty(0)
    if flat.size < 2:
        return None
    return float(np.median(flat))


def run_ensemble(
    cfg: EnsembleConfig,
    data: Optional[np.ndarray] = None,
    labels: Optional[np.ndarray] = None,
    grads: bool = True,
    threads: int = 1,
) -> EnsembleMeasurement:
    """Ансамбль по реализациям θ при фиксированных данных; слияние упорядочено по индексу реализации."""
    act = resolve(cfg.arch.activation)
    with tracer.start_as_current_span("run_ensemble") as span:
        span.set_attribute("activation", act.name)
        span.set_attribute("width", cfg.arch.width)
        span.set_attribute("depth", cfg.arch.depth)
        span.set_attribute("realizations", cfg.n_realizations)

        if data is None:
            data = make_dataset(cfg.n_samples, cfg.arch.d, cfg.seed)
        if data.shape[1] != cfg.arch.d:
            raise DatasetError(f"Размерность данных {data.shape[1]} не совпадает с input_dim={cfg.arch.d}")
        n = data.shape[0]
        if labels is None:
            labels = stream(cfg.seed, STREAM_LABELS).integers(0, cfg.arch.output_dim, size=n)
        pairs = _sample_pairs(n, cfg.pair_count, cfg.seed)
        grad_pairs, pair_class = class_pairs(labels, cfg.pair_count, cfg.seed)
        if grads and grad_pairs.shape[0] == 0:
            logger.warning("Нет ни одного класса с двумя примерами: градиентные корреляции не считаются")
        use_pairs = grad_pairs if grads else None

        runs = parallel_map(
            lambda r: _realization(cfg, act, data, pairs, labels, r, use_pairs), range(cfg.n_realizations), threads
        )

        depth = min(len(r.lam) for r in runs)
        diverged = min((r.diverged_at for r in runs if r.diverged_at is not None), default=None)
        if diverged is not None:
            logger.warning("Расходимость предактиваций начиная со слоя %d", diverged)

        layers = []
        for l in range(depth):
            sd2 = np.array([r.sd2[l] for r in runs])
            sc2 = np.array([r.sc2[l] for r in runs])
            gamma = np.divide(sc2, sd2, out=np.full_like(sc2, np.inf), where=sd2 > 0.0)
            layers.append(
                LayerBand(
                    layer=l + 1,
                    lambda_hat=Band.of(np.concatenate([r.lam[l] for r in runs])),
                    q_hat=Band.of(np.concatenate([r.q[l] for r in runs])),
                    c_hat=Band.of(np.concatenate([r.c[l] for r in runs])),
                    sd2_hat=Band.of(sd2),
                    sc2_hat=Band.of(sc2),
                    gamma_hat=Band.of(gamma),
                )
            )

        grad_corr = None
        complete = [r for r in runs if r.grad is not None]
        if grads and complete and grad_pairs.shape[0] > 0:
            grad_corr = _aggregate_gradients(complete, pair_class, cfg.arch.dims()[1:])

        x_pairs = data[pairs[:, 0]] * data[pairs[:, 1]]
        return EnsembleMeasurement(
            layers=layers,
            input_lambda=float(np.mean(np.sum(data * data, axis=1)) / data.shape[1]),
            input_q=float(np.mean(np.sum(x_pairs, axis=1)) / data.shape[1]),
            g0_samples=[r.g0 for r in runs if not math.isnan(r.g0)],
            max_class_freq=[float(r.class_freq.max()) for r in runs if not math.isnan(r.g0)],
            grad_corr=grad_corr,
            diverged_at_layer=diverged,
        )


def _output_normalized(medians: List[Optional[float]], widths: Sequence[int]) -> List[float]:
    # суммы по узлам: χ̃ связывает именно их, ширина выходного слоя другая
    sums = [m * w if m is not None else None for m, w in zip(medians, widths)]
    ref = sums[-1]
    if not ref:
        return [math.nan] * len(sums)
    return [s / ref if s is not None else math.nan for s in sums]


def _aggregate_gradients(
    runs: List[RealizationStats], pair_class: np.ndarray, widths: Sequence[int]
) -> GradientMeasurement:
    n_layers = len(runs[0].grad)
    favored_masks = [pair_class == r.favored for r in runs]
    unfavored_masks = [pair_class == r.unfavored for r in runs]
    all_, fav, unfav, diag = [], [], [], []
    for l in range(n_layers):
        per_layer = [r.grad[l] for r in runs]
        all_.append(_median_or_none(per_layer))
        fav.append(_median_or_none(per_layer, favored_masks))
        unfav.append(_median_or_none(per_layer, unfavored_masks))
        diag.append(_median_or_none([r.grad_self[l] for r in runs]))
    return GradientMeasurement(
        all=all_,
        favored=fav,
        unfavored=unfav,
        profile=_output_normalized(all_, widths),
        self_profile=_output_normalized(diag, widths),
    )


# --- сравнение с теорией ---


class TheoryLayer(BaseModel):
    model_config = ConfigDict(frozen=True)

    layer: int
    lam: float
    q: float
    c: float
    inside_c_band: Optional[bool] = None
    inside_lambda_band: Optional[bool] = None


def theory_alignment(
    cfg: EnsembleConfig, meas: EnsembleMeasurement, quad: QuadratureSpec
) -> List[TheoryLayer]:
    """
    Теоретическая траектория, выровненная по слоям ансамбля.

    Старт из слоя 1: Λ¹ = σ²_w λ̂_in + σ²_b, q¹ = σ²_w q̂_in + σ²_b.
    Для остаточных сетей теории нет: возвращается пустой список.
    """
    if cfg.arch.residual is not None:
        return []
    act = resolve(cfg.arch.activation)
    h = cfg.hyper
    lam1 = h.sigma_w2 * meas.input_lambda + h.sigma_b2
    q1 = min(h.sigma_w2 * meas.input_q + h.sigma_b2, lam1)
    init = initial_stats(act, h, quad, lam=lam1, q=q1, layer=1)
    steps = max(len(meas.layers) - 1, 1)
    tr = depth_trace(act, h, steps, quad, init=init)
    out = []
    for s, band in zip(tr.layers, meas.layers):
        out.append(
            TheoryLayer(
                layer=s.layer,
                lam=s.lam,
                q=s.q,
                c=s.c,
                inside_c_band=band.c_hat.contains(s.c),
                inside_lambda_band=band.lambda_hat.contains(s.lam),
            )
        )
    return out


def theory_gradient_profile(
    cfg: EnsembleConfig, quad: QuadratureSpec, meas: Optional[EnsembleMeasurement] = None
) -> List[float]:
    """
    Теоретический профиль по слоям 1..L, нормированный на 1 в выходном слое.

    Λ¹ берётся из входных данных ансамбля, если передано измерение, иначе Λ¹ = σ²_w + σ²_b.
    """
    act = resolve(cfg.arch.activation)
    h = cfg.hyper
    lam_in = meas.input_lambda if meas is not None else 1.0
    q_in = meas.input_q if meas is not None else 0.0
    lam1 = h.sigma_w2 * lam_in + h.sigma_b2
    init = initial_stats(act, h, quad, lam=lam1, q=min(h.sigma_w2 * q_in + h.sigma_b2, lam1), layer=1)
    return gradient_profile(act, h, cfg.arch.depth, quad, init=init)


# --- закон G₀ ---


def sample_g0_law(gamma: float, draws: int, seed: int) -> np.ndarray:
    """G₀ = ½(1 + erf(sqrt(Γ/2) δ)) = Φ(sqrt(Γ) δ), δ ~ N(0, 1)."""
    if gamma < 0.0 or not math.isfinite(gamma):
        raise DomainError(f"Γ должно быть конечным и >= 0, получено {gamma!r}")
    if draws < 1:
        raise DomainError(f"draws должно быть >= 1, получено {draws}")
    delta = stream(seed, STREAM_G0_LAW).standard_normal(draws)
    return ndtr(math.sqrt(gamma) * delta)


def g0_histogram(samples: np.ndarray, bins: int) -> Tuple[np.ndarray, np.ndarray]:
    """Нормированная гистограмма на [0, 1]: (края, плотность)."""
    if bins < 1:
        raise DomainError(f"bins должно быть >= 1, получено {bins}")
    density, edges = np.histogram(samples, bins=bins, range=(0.0, 1.0), density=True)
    return edges, density
