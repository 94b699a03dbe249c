"""Инструмент: Монте-Карло ансамбль конечных сетей против теории."""

import asyncio
from typing import List, Optional

from mcp.server.fastmcp import Context
from mcp.types import TextContent
from opentelemetry import trace
from pydantic import Field, ValidationError

from critnet.commands import run_mc
from critnet.errors import INVALID_PARAMS, CritnetError
from critnet.runconfig import McConfig
from critnet.settings import Settings
from mcp_instance import mcp
from .utils import ToolResult, as_mcp_error, quad_kwargs, result_payload

tracer = trace.get_tracer(__name__)


@mcp.tool()
async def monte_carlo(
    activation: str = Field(..., description="Активация сети."),
    sigma_w2: float = Field(..., gt=0, description="Дисперсия весов σ²_w."),
    sigma_b2: float = Field(..., ge=0, description="Дисперсия смещений σ²_b."),
    width: int = Field(500, ge=2, le=10_000, description="Ширина скрытых слоёв."),
    depth: int = Field(50, ge=1, le=1_000, description="Число слоёв, включая считывающий."),
    samples: int = Field(100, ge=2, le=100_000, description="Размер гауссова датасета."),
    ensemble: int = Field(10, ge=1, le=10_000, description="Число реализаций весов."),
    seed: int = Field(0, ge=0, description="Seed ГСЧ."),
    measure: List[str] = Field(["mf", "igb", "g0", "grads"], description="Что измерять: mf, igb, g0, grads."),
    classes: int = Field(2, ge=2, le=1_000, description="Число классов на выходе."),
    residual: Optional[float] = Field(None, ge=0, description="Показатель e: остаточная ветвь делится на L^e."),
    ctx: Context | None = None,
) -> ToolResult:
    """
    🎲 Ансамбль случайных MLP:
    - полосы 5/50/95% для λ̂, ĉ и прокси IGB по слоям
    - доля попаданий теоретической c^l в полосу
    - распределение G₀ и градиенты по классам
    """
    from mcp.shared.exceptions import McpError, ErrorData

    if ctx is None:
        ctx = Context()

    with tracer.start_as_current_span("monte_carlo") as span:
        span.set_attribute("activation", activation)
        span.set_attribute("width", width)
        span.set_attribute("depth", depth)
        span.set_attribute("ensemble", ensemble)
        span.set_attribute("seed", seed)

        try:
            await ctx.info(f"🎲 Сэмплируем {ensemble} сетей {activation} шириной {width}")
            await ctx.report_progress(progress=0, total=100)

            settings = Settings.from_env()
            cfg = McConfig(
                activation=activation, sigma_w2=sigma_w2, sigma_b2=sigma_b2, width=width, depth=depth,
                samples=samples, ensemble=ensemble, seed=seed, measure=measure, classes=classes, residual=residual,
                **quad_kwargs(settings),
            )
            result = await asyncio.to_thread(run_mc, cfg, settings.threads)
            await ctx.report_progress(progress=100, total=100)

            frac = result.report.get("inside_band_fraction")
            text = f"Слоёв измерено: {len(result.rows)}"
            if frac is not None:
                text += f"; теория внутри полосы 5–95% на {frac:.0%} слоёв"
            if result.note:
                text += f"\n{result.note}"

            payload = result_payload(result)
            payload["report"] = result.report
            return ToolResult(
                content=[TextContent(type="text", text=text)],
                structured_content=payload,
                meta={"activation": activation, "seed": seed},
            )

        except ValidationError as e:
            await ctx.error(f"❌ Неверные параметры: {e}")
            raise McpError(ErrorData(code=INVALID_PARAMS, message=f"Неверные параметры: {e}")) from e
        except CritnetError as e:
            await ctx.error(f"❌ {e}")
            raise as_mcp_error(e, "Ошибка Монте-Карло") from e
        except Exception as e:
            await ctx.error(f"💥 Неожиданная ошибка: {e}")
            raise McpError(ErrorData(code=-32603, message=f"Неожиданная ошибка: {e}")) from e
