"""Инструмент: траектория (Λ, q, c, Γ, χ) через глубину бесконечно широкой сети."""

import asyncio
from typing import Optional

from mcp.server.fastmcp import Context
from mcp.types import TextContent
from opentelemetry import trace
from pydantic import Field, ValidationError

from critnet.commands import run_depth_trace
from critnet.errors import INVALID_PARAMS, CritnetError
from critnet.runconfig import DepthTraceConfig
from critnet.settings import Settings
from mcp_instance import mcp
from .utils import ToolResult, as_mcp_error, quad_kwargs, result_payload, save_result

tracer = trace.get_tracer(__name__)


@mcp.tool()
async def depth_trace(
    activation: str = Field(..., description="Активация: linear, relu, tanh, relu+maxpool, tanh+avgpool, ..."),
    sigma_w2: float = Field(..., gt=0, description="Дисперсия весов σ²_w."),
    sigma_b2: float = Field(..., ge=0, description="Дисперсия смещений σ²_b."),
    depth: int = Field(100, ge=1, le=100_000, description="Число слоёв."),
    igb_coords: bool = Field(False, description="Считать рекурсию в координатах IGB: столбцы sd2, sc2, gamma."),
    out: Optional[str] = Field(None, description="Файл CSV (относительно CRITNET_OUT_DIR)."),
    ctx: Context | None = None,
) -> ToolResult:
    """
    📉 Рекурсия среднего поля по глубине:
    - Λ, q, c = q/Λ, Γ = c/(1-c) на каждом слое
    - χ̃, χ₁ и отметка о расходимости / коллапсе дисперсии
    """
    from mcp.shared.exceptions import McpError, ErrorData

    if ctx is None:
        ctx = Context()

    with tracer.start_as_current_span("depth_trace") as span:
        span.set_attribute("activation", activation)
        span.set_attribute("sigma_w2", sigma_w2)
        span.set_attribute("sigma_b2", sigma_b2)
        span.set_attribute("depth", depth)

        try:
            await ctx.info(f"🚀 Считаем траекторию {activation} на {depth} слоёв")
            await ctx.report_progress(progress=0, total=100)

            # 1) Конфиг в том же виде, что встраивается в CSV
            cfg = DepthTraceConfig(
                activation=activation, sigma_w2=sigma_w2, sigma_b2=sigma_b2, depth=depth, igb_coords=igb_coords,
                **quad_kwargs(Settings.from_env()),
            )

            # 2) Расчёт вне цикла событий
            result = await asyncio.to_thread(run_depth_trace, cfg)
            await ctx.report_progress(progress=80, total=100)

            saved = save_result(result, out)
            await ctx.report_progress(progress=100, total=100)

            last = result.records()[-1]
            if igb_coords:
                text = f"Слой {last['layer']}: sd2={last['sd2']:.6g}, sc2={last['sc2']:.6g}, Γ={last['gamma']:.6g}"
            else:
                text = f"Слой {last['layer']}: Λ={last['lambda']:.6g}, c={last['c']:.6g}, χ̃={last['chi_tilde']:.6g}"
            if result.note:
                text += f"\n{result.note}"

            return ToolResult(
                content=[TextContent(type="text", text=text)],
                structured_content=result_payload(result, saved),
                meta={"activation": activation, "depth": depth},
            )

        except ValidationError as e:
            await ctx.error(f"❌ Неверные параметры: {e}")
            raise McpError(ErrorData(code=INVALID_PARAMS, message=f"Неверные параметры: {e}")) from e
        except CritnetError as e:
            await ctx.error(f"❌ {e}")
            raise as_mcp_error(e, "Ошибка расчёта траектории") from e
        except Exception as e:
            await ctx.error(f"💥 Неожиданная ошибка: {e}")
            raise McpError(ErrorData(code=-32603, message=f"Неожиданная ошибка: {e}")) from e
