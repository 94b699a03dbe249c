"""Инструмент: проверка схем ранее записанных CSV."""

from typing import List

from mcp.server.fastmcp import Context
from mcp.types import TextContent
from opentelemetry import trace
from pydantic import Field

from critnet.commands import run_self_check
from critnet.errors import CritnetError
from mcp_instance import mcp
from .utils import ToolResult, as_mcp_error, confined_path

tracer = trace.get_tracer(__name__)


@mcp.tool()
async def self_check(
    paths: List[str] = Field(..., min_length=1, description="Пути к CSV-файлам внутри CRITNET_OUT_DIR."),
    ctx: Context | None = None,
) -> ToolResult:
    """
    ✅ Проверяет шапку, версию схемы, столбцы и числовые значения CSV.
    """
    from mcp.shared.exceptions import McpError, ErrorData

    if ctx is None:
        ctx = Context()

    with tracer.start_as_current_span("self_check") as span:
        span.set_attribute("files", len(paths))

        try:
            # читаем только то, что сервер сам мог записать
            resolved = [str(confined_path(p)) for p in paths]
            report = run_self_check(resolved)
            bad = {p: problems for p, problems in report.items() if problems}
            if bad:
                lines = [f"Файлов с проблемами: {len(bad)}"]
                lines.extend(f"- {p}: {'; '.join(problems)}" for p, problems in bad.items())
                await ctx.info(lines[0])
            else:
                lines = [f"Все файлы ({len(report)}) соответствуют схемам"]

            return ToolResult(
                content=[TextContent(type="text", text="\n".join(lines))],
                structured_content={"ok": not bad, "problems": report},
            )

        except CritnetError as e:
            await ctx.error(f"❌ {e}")
            raise as_mcp_error(e, "Проверка отклонена") from e
        except Exception as e:
            await ctx.error(f"💥 Неожиданная ошибка: {e}")
            raise McpError(ErrorData(code=-32603, message=f"Неожиданная ошибка: {e}")) from e
