"""Инструмент: кривая края хаоса."""

import asyncio
from typing import Optional

from mcp.server.fastmcp import Context
from mcp.types import TextContent
from opentelemetry import trace
from pydantic import Field, ValidationError

from critnet.commands import run_eoc
from critnet.errors import INVALID_PARAMS, CritnetError
from critnet.runconfig import EocConfig
from critnet.settings import Settings
from mcp_instance import mcp
from .utils import ToolResult, as_mcp_error, quad_kwargs, result_payload, save_result

tracer = trace.get_tracer(__name__)


@mcp.tool()
async def eoc_curve(
    activation: str = Field(..., description="Активация; для семейства ReLU вернётся одна точка."),
    q_max: float = Field(20.0, gt=0, description="Верхняя граница сетки q*."),
    points: int = Field(200, ge=1, le=10_000, description="Число точек логарифмической сетки q*."),
    out: Optional[str] = Field(None, description="Файл CSV (относительно CRITNET_OUT_DIR)."),
    ctx: Context | None = None,
) -> ToolResult:
    """
    🌀 Точки (σ²_b, σ²_w), где дисперсия сходится и χ̃ = 1.
    """
    from mcp.shared.exceptions import McpError, ErrorData

    if ctx is None:
        ctx = Context()

    with tracer.start_as_current_span("eoc_curve") as span:
        span.set_attribute("activation", activation)
        span.set_attribute("points", points)

        try:
            await ctx.info(f"🌀 Ищем EOC для {activation}")
            await ctx.report_progress(progress=0, total=100)

            settings = Settings.from_env()
            cfg = EocConfig(activation=activation, q_max=q_max, points=points, **quad_kwargs(settings))
            result = await asyncio.to_thread(run_eoc, cfg, settings.threads)

            saved = save_result(result, out)
            await ctx.report_progress(progress=100, total=100)

            if not result.rows:
                text = f"Точек EOC не найдено. {result.note or ''}".strip()
            else:
                first = result.records()[0]
                text = (
                    f"Точек EOC: {len(result.rows)}; первая: σ²_b={first['sigma_b2']:.6g}, "
                    f"σ²_w={first['sigma_w2']:.6g}"
                )
                if result.note:
                    text += f"\n{result.note}"

            return ToolResult(
                content=[TextContent(type="text", text=text)],
                structured_content=result_payload(result, saved),
                meta={"activation": activation},
            )

        except ValidationError as e:
            await ctx.error(f"❌ Неверные параметры: {e}")
            raise McpError(ErrorData(code=INVALID_PARAMS, message=f"Неверные параметры: {e}")) from e
        except CritnetError as e:
            await ctx.error(f"❌ {e}")
            raise as_mcp_error(e, "Ошибка поиска EOC") from e
        except Exception as e:
            await ctx.error(f"💥 Неожиданная ошибка: {e}")
            raise McpError(ErrorData(code=-32603, message=f"Неожиданная ошибка: {e}")) from e
