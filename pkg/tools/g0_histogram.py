"""Инструмент: гистограмма доли примеров, отнесённых к опорному классу."""

import asyncio
from typing import Optional

from mcp.server.fastmcp import Context
from mcp.types import TextContent
from opentelemetry import trace
from pydantic import Field, ValidationError

from critnet.commands import run_g0
from critnet.errors import INVALID_PARAMS, CritnetError
from critnet.runconfig import G0Config
from mcp_instance import mcp
from .utils import ToolResult, as_mcp_error, result_payload, save_result

tracer = trace.get_tracer(__name__)


@mcp.tool()
async def g0_histogram(
    gamma: float = Field(..., ge=0, description="Отношение дрейфа активаций Γ на выходе."),
    draws: int = Field(100_000, ge=1, le=10_000_000, description="Число выборок δ."),
    bins: int = Field(20, ge=1, le=1_000, description="Число корзин на [0, 1]."),
    seed: int = Field(0, ge=0, description="Seed ГСЧ."),
    out: Optional[str] = Field(None, description="Файл CSV (относительно CRITNET_OUT_DIR)."),
    ctx: Context | None = None,
) -> ToolResult:
    """
    📊 Закон G₀ = Φ(sqrt(Γ) δ):
    - Γ < 1: пик у 0.5 (нейтральность)
    - Γ = 1: равномерно
    - Γ > 1: масса у краёв (предвзятость)
    """
    from mcp.shared.exceptions import McpError, ErrorData

    if ctx is None:
        ctx = Context()

    with tracer.start_as_current_span("g0_histogram") as span:
        span.set_attribute("gamma", gamma)
        span.set_attribute("draws", draws)

        try:
            await ctx.report_progress(progress=0, total=100)
            cfg = G0Config(gamma=gamma, draws=draws, bins=bins, seed=seed)
            result = await asyncio.to_thread(run_g0, cfg)
            saved = save_result(result, out)
            await ctx.report_progress(progress=100, total=100)

            text = (
                f"Γ={gamma:g}: масса вне [0.05, 0.95] = {result.report['extreme_mass']:.3f}, "
                f"среднее G₀ = {result.report['mean']:.3f}"
            )
            payload = result_payload(result, saved)
            payload.update(result.report)
            return ToolResult(
                content=[TextContent(type="text", text=text)],
                structured_content=payload,
                meta={"gamma": gamma, "seed": seed},
            )

        except ValidationError as e:
            await ctx.error(f"❌ Неверные параметры: {e}")
            raise McpError(ErrorData(code=INVALID_PARAMS, message=f"Неверные параметры: {e}")) from e
        except CritnetError as e:
            await ctx.error(f"❌ {e}")
            raise as_mcp_error(e, "Ошибка выборки G₀") from e
        except Exception as e:
            await ctx.error(f"💥 Неожиданная ошибка: {e}")
            raise McpError(ErrorData(code=-32603, message=f"Неожиданная ошибка: {e}")) from e
