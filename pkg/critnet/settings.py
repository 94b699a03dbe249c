"""Настройки процесса из переменных окружения (.env подхватывается при старте)."""

import os
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .quadrature import Backend

# поле -> переменная окружения
ENV_VARS = {
    "threads": "CRITNET_THREADS",
    "quad_backend": "CRITNET_QUAD_BACKEND",
    "quad_nodes": "CRITNET_QUAD_NODES",
    "out_dir": "CRITNET_OUT_DIR",
}


class Settings(BaseModel):
    """Значения по умолчанию, которые можно переопределить флагами CLI."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    threads: int = Field(default=1, ge=1, le=512)
    quad_backend: Backend = Backend.PANELS
    quad_nodes: Optional[int] = Field(default=None, ge=2)
    out_dir: str = Field(default="out", min_length=1)

    @classmethod
    def from_env(cls) -> "Settings":
        """Собирает настройки из CRITNET_*; HOST и PORT читает mcp_instance."""
        raw = {field: os.getenv(var) for field, var in ENV_VARS.items()}
        try:
            return cls(**{k: v for k, v in raw.items() if v not in (None, "")})
        except ValidationError as e:
            bad = ", ".join(f"{ENV_VARS[str(err['loc'][0])]}={raw[str(err['loc'][0])]!r}" for err in e.errors())
            raise ConfigError(f"Неверные переменные окружения: {bad}") from e
