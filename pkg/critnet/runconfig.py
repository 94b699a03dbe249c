"""Конфигурации запусков: по модели на команду, один JSON-документ на запуск."""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator, model_validator

from .activations import ACTIVATION_NAMES
from .errors import ConfigError
from .quadrature import Backend, QuadratureSpec, default_spec


class GridRange(BaseModel):
    """Равномерная сетка lo:hi:n (включая концы)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lo: float
    hi: float
    n: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "GridRange":
        if self.hi < self.lo or (self.n > 1 and self.hi == self.lo):
            raise ValueError(f"Неверный диапазон {self.lo}:{self.hi}:{self.n}")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridRange":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"Диапазон должен иметь вид lo:hi:n, получено {text!r}")
        try:
            return cls(lo=float(parts[0]), hi=float(parts[1]), n=int(parts[2]))
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"Неверный диапазон {text!r}: {e}") from e

    def values(self) -> List[float]:
        if self.n == 1:
            return [self.lo]
        step = (self.hi - self.lo) / (self.n - 1)
        return [self.lo + i * step for i in range(self.n - 1)] + [self.hi]


class _Base(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default=0, ge=0, lt=2**64)
    quad_backend: Backend = Backend.PANELS
    quad_nodes: Optional[int] = Field(default=None, ge=2)

    def quad(self) -> QuadratureSpec:
        return default_spec(self.quad_backend, self.quad_nodes)


class _WithActivation(_Base):
    activation: str = "relu"

    @field_validator("activation")
    @classmethod
    def _known(cls, v: str) -> str:
        v = v.strip().lower()
        if v not in ACTIVATION_NAMES:
            raise ValueError(f"Неизвестная активация {v!r}; доступны: {', '.join(ACTIVATION_NAMES)}")
        return v


class DepthTraceConfig(_WithActivation):
    command: Literal["depth-trace"] = "depth-trace"
    sigma_w2: float = Field(gt=0.0)
    sigma_b2: float = Field(ge=0.0)
    depth: int = Field(default=100, ge=1)
    lambda0: float = Field(default=1.0, ge=0.0)
    q0: float = 0.0
    igb_coords: bool = False


class PhaseDiagramConfig(_WithActivation):
    command: Literal["phase-diagram"] = "phase-diagram"
    sw_range: GridRange
    sb_range: GridRange
    eoc_tol: float = Field(default=1e-3, gt=0.0)
    snap_eoc: bool = True


class EocConfig(_WithActivation):
    command: Literal["eoc"] = "eoc"
    q_max: float = Field(default=20.0, gt=0.0)
    q_min: float = Field(default=1e-4, gt=0.0)
    points: int = Field(default=200, ge=1)


class McConfig(_WithActivation):
    command: Literal["mc"] = "mc"
    sigma_w2: float = Field(gt=0.0)
    sigma_b2: float = Field(ge=0.0)
    width: int = Field(default=500, ge=1)
    depth: int = Field(default=50, ge=1)
    input_dim: Optional[int] = Field(default=None, ge=1)
    samples: int = Field(default=100, ge=2)
    ensemble: int = Field(default=10, ge=1)
    classes: int = Field(default=2, ge=2)
    pair_count: int = Field(default=200, ge=1)
    measure: List[Literal["mf", "igb", "g0", "grads"]] = Field(default_factory=lambda: ["mf", "igb", "g0", "grads"])
    residual: Optional[float] = Field(default=None, ge=0.0, description="Показатель масштаба остаточной ветви")
    data: Optional[str] = None
    standardize: bool = True


class G0Config(_Base):
    command: Literal["g0"] = "g0"
    gamma: float = Field(ge=0.0)
    draws: int = Field(default=100_000, ge=1)
    bins: int = Field(default=20, ge=1)


RunConfig = Annotated[
    Union[DepthTraceConfig, PhaseDiagramConfig, EocConfig, McConfig, G0Config],
    Field(discriminator="command"),
]

_ADAPTER: TypeAdapter = TypeAdapter(RunConfig)


def parse_run_config(text: str | bytes):
    """JSON -> конфиг нужной команды; лишние ключи отвергаются."""
    try:
        return _ADAPTER.validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"Неверная конфигурация запуска: {e}") from e


def dump_run_config(cfg) -> str:
    return _ADAPTER.dump_json(cfg).decode()
