"""Инструмент: фазовая диаграмма на сетке (σ²_b, σ²_w)."""

import asyncio
from collections import Counter
from typing import Optional

from mcp.server.fastmcp import Context
from mcp.types import TextContent
from opentelemetry import trace
from pydantic import Field, ValidationError

from critnet.commands import run_phase_diagram
from critnet.errors import INVALID_PARAMS, CritnetError
from critnet.runconfig import GridRange, PhaseDiagramConfig
from critnet.settings import Settings
from mcp_instance import mcp
from .utils import ToolResult, as_mcp_error, quad_kwargs, result_payload, save_result

tracer = trace.get_tracer(__name__)


@mcp.tool()
async def phase_diagram(
    activation: str = Field(..., description="Активация, например relu или tanh."),
    sw_range: str = Field(..., description="Сетка σ²_w в виде lo:hi:n."),
    sb_range: str = Field(..., description="Сетка σ²_b в виде lo:hi:n."),
    eoc_tol: float = Field(1e-3, gt=0, description="Допуск |χ̃ - 1| для EOC."),
    out: Optional[str] = Field(None, description="Файл CSV (относительно CRITNET_OUT_DIR)."),
    ctx: Context | None = None,
) -> ToolResult:
    """
    🗺️ Классификация фаз на сетке:
    - OrderedDeepPrejudice / TransientDeepPrejudice (EOC)
    - ChaoticDeepPrejudice / ChaoticPrejudice / ChaoticNeutrality
    """
    from mcp.shared.exceptions import McpError, ErrorData

    if ctx is None:
        ctx = Context()

    with tracer.start_as_current_span("phase_diagram") as span:
        span.set_attribute("activation", activation)
        span.set_attribute("sw_range", sw_range)
        span.set_attribute("sb_range", sb_range)

        try:
            await ctx.info(f"🗺️ Строим фазовую диаграмму {activation}")
            await ctx.report_progress(progress=0, total=100)

            settings = Settings.from_env()
            cfg = PhaseDiagramConfig(
                activation=activation,
                sw_range=GridRange.parse(sw_range),
                sb_range=GridRange.parse(sb_range),
                eoc_tol=eoc_tol,
                **quad_kwargs(settings),
            )
            threads = settings.threads
            result = await asyncio.to_thread(run_phase_diagram, cfg, threads)
            await ctx.report_progress(progress=90, total=100)

            saved = save_result(result, out)
            await ctx.report_progress(progress=100, total=100)

            counts = Counter(str(r["phase"].value) for r in result.records())
            lines = [f"Клеток: {len(result.rows)}"]
            lines.extend(f"- {phase}: {n}" for phase, n in sorted(counts.items()))

            return ToolResult(
                content=[TextContent(type="text", text="\n".join(lines))],
                structured_content=result_payload(result, saved),
                meta={"activation": activation, "threads": threads},
            )

        except ValidationError as e:
            await ctx.error(f"❌ Неверные параметры: {e}")
            raise McpError(ErrorData(code=INVALID_PARAMS, message=f"Неверные параметры: {e}")) from e
        except CritnetError as e:
            await ctx.error(f"❌ {e}")
            raise as_mcp_error(e, "Ошибка построения диаграммы") from e
        except Exception as e:
            await ctx.error(f"💥 Неожиданная ошибка: {e}")
            raise McpError(ErrorData(code=-32603, message=f"Неожиданная ошибка: {e}")) from e
