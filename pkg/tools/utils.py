"""Общие утилиты и типы для MCP-инструментов."""

import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from mcp.shared.exceptions import ErrorData, McpError
from mcp.types import TextContent
from pydantic import BaseModel

from critnet.commands import CommandResult
from critnet.errors import INTERNAL_ERROR, ConfigError, CritnetError
from critnet.io import write_text
from critnet.settings import Settings


class ToolResult(BaseModel):
    """
    Стандартизированный результат MCP-инструмента.

    content:
        Список блоков текста, который увидит пользователь.
    structured_content:
        Структурированные данные (для агента / дальнейшей обработки).
    meta:
        Метаданные: что угодно полезное (например, время, параметры).
    """

    content: List[TextContent]
    structured_content: Optional[Dict[str, Any]] = None
    meta: Optional[Dict[str, Any]] = None


def as_mcp_error(e: Exception, what: str) -> McpError:
    """Ошибка библиотеки -> McpError с кодом из её класса."""
    code = e.mcp_code if isinstance(e, CritnetError) else INTERNAL_ERROR
    return McpError(ErrorData(code=code, message=f"{what}: {e}"))


def confined_path(name: str, settings: Optional[Settings] = None) -> Path:
    """
    Путь внутри CRITNET_OUT_DIR: относительные имена берутся от него.

    Всё, что после resolve() оказывается снаружи каталога (абсолютные пути,
    `..`, симлинки наружу), отклоняется с ConfigError.
    """
    root = Path((settings or Settings.from_env()).out_dir).resolve()
    path = (root / name).resolve()
    if not path.is_relative_to(root):
        raise ConfigError(f"Путь {name!r} выходит за пределы CRITNET_OUT_DIR ({root})")
    return path


def save_result(result: CommandResult, out: Optional[str]) -> Optional[str]:
    """
    Пишет CSV результата, если задан out (путь внутри CRITNET_OUT_DIR).

    Возвращает итоговый путь или None.
    """
    if not out:
        return None
    path = confined_path(out)
    write_text(result.to_csv(), path)
    return str(path)


def _plain(v: Any) -> Any:
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def result_payload(result: CommandResult, saved: Optional[str] = None) -> Dict[str, Any]:
    """structured_content: те же строки, что CLI записал бы в CSV."""
    payload: Dict[str, Any] = {
        "schema": result.schema,
        "columns": list(result.columns),
        "rows": [{k: _plain(v) for k, v in r.items()} for r in result.records()],
        "config": result.config.model_dump(mode="json"),
    }
    if result.note:
        payload["note"] = result.note
    if saved:
        payload["file"] = saved
    return payload


def quad_kwargs(settings: Settings) -> Dict[str, Any]:
    """Квадратура из окружения: CRITNET_QUAD_BACKEND / CRITNET_QUAD_NODES."""
    return {"quad_backend": settings.quad_backend, "quad_nodes": settings.quad_nodes}
