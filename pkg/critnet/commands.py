"""
Команды верхнего уровня: общие для CLI и MCP-инструментов.

Каждая команда получает готовый конфиг и возвращает CommandResult:
строки основной таблицы, необязательные сопутствующие таблицы и JSON-отчёт.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .activations import is_relu_family, resolve
from .ensemble import (
    ArchSpec,
    EnsembleConfig,
    ResidualSpec,
    g0_histogram,
    load_dataset,
    run_ensemble,
    sample_g0_law,
    theory_alignment,
    theory_gradient_profile,
)
from .eoc import EocPoint, default_q_grid, eoc_curve, eoc_relu_family
from .errors import EmptyCurve
from .io import SCHEMAS, render_csv, render_json, validate_csv
from .propagation import (
    InitHyper,
    PhaseOptions,
    depth_trace,
    igb_depth_trace,
    initial_stats,
    mf_to_igb,
    phase_diagram,
)
from .runconfig import DepthTraceConfig, EocConfig, G0Config, McConfig, PhaseDiagramConfig

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    schema: str
    config: Any
    rows: List[List[Any]]
    note: Optional[str] = None
    companions: Dict[str, "CommandResult"] = field(default_factory=dict)
    report: Optional[Dict[str, Any]] = None

    @property
    def columns(self) -> Sequence[str]:
        return SCHEMAS[self.schema]

    def records(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def to_csv(self) -> str:
        return render_csv(self.schema, self.config, self.rows)

    def to_json(self) -> str:
        return render_json(self.config, self.report or {})


def run_depth_trace(cfg: DepthTraceConfig) -> CommandResult:
    """Траектория в координатах MF; с igb_coords: рекурсия IGB и схема depth-trace-igb."""
    act = resolve(cfg.activation)
    h = InitHyper(sigma_w2=cfg.sigma_w2, sigma_b2=cfg.sigma_b2)
    quad = cfg.quad()
    if cfg.igb_coords:
        sd2, sc2 = mf_to_igb(cfg.lambda0, cfg.q0)
        igb = igb_depth_trace(act, h, cfg.depth, quad, sd2=sd2, sc2=sc2)
        rows = [[s.layer, s.sd2, s.sc2, s.gamma] for s in igb.layers]
        fate, stopped = igb.variance_fate, igb.stopped_at
        schema = "depth-trace-igb"
        if fate is None and stopped is not None:
            note = f"σ²_data обнулилась на слое {stopped} (c = 1); траектория оборвана"
        else:
            note = None
    else:
        init = initial_stats(act, h, quad, lam=cfg.lambda0, q=cfg.q0)
        tr = depth_trace(act, h, cfg.depth, quad, init=init)
        rows = [[s.layer, s.lam, s.q, s.c, s.gamma, s.chi_tilde, s.chi1, s.sd2, s.sc2] for s in tr.layers]
        fate, stopped, schema, note = tr.variance_fate, tr.stopped_at, "depth-trace", None
    if fate is not None:
        note = f"Λ {fate.value} на слое {stopped}; траектория оборвана"
    return CommandResult(schema=schema, config=cfg, rows=rows, note=note)


def run_phase_diagram(cfg: PhaseDiagramConfig, threads: int = 1) -> CommandResult:
    act = resolve(cfg.activation)
    cells = phase_diagram(
        act,
        cfg.sw_range.values(),
        cfg.sb_range.values(),
        cfg.quad(),
        PhaseOptions(eoc_tol=cfg.eoc_tol),
        threads=threads,
        snap_eoc=cfg.snap_eoc,
    )
    rows = [
        [c.sigma_b2, c.sigma_w2, c.phase, c.c_star, c.chi_limit, c.variance_fate, c.ambiguous, c.eoc_snapped]
        for c in cells
    ]
    return CommandResult(schema="phase-diagram", config=cfg, rows=rows)


def _eoc_row(p: EocPoint) -> List[Any]:
    return [p.sigma_b2, p.sigma_w2, p.q_star, p.res_var, p.res_chi, p.note]


def run_eoc(cfg: EocConfig, threads: int = 1) -> CommandResult:
    """Кривая EOC; семейство ReLU даёт точку-синглтон с пометкой, пустая кривая: не ошибка."""
    act = resolve(cfg.activation)
    if is_relu_family(act):
        p = eoc_relu_family(act, cfg.quad())
        return CommandResult(schema="eoc", config=cfg, rows=[_eoc_row(p)], note=p.note)
    try:
        points = eoc_curve(act, default_q_grid(cfg.q_max, cfg.points, cfg.q_min), cfg.quad(), threads)
    except EmptyCurve as e:
        return CommandResult(schema="eoc", config=cfg, rows=[], note=str(e))
    return CommandResult(schema="eoc", config=cfg, rows=[_eoc_row(p) for p in points])


def _json_float(x: Optional[float]) -> Optional[float]:
    return None if x is None or not math.isfinite(x) else x


def run_mc(cfg: McConfig, threads: int = 1) -> CommandResult:
    """Ансамбль + выровненная теория; JSON-отчёт и CSV-компаньоны."""
    data = None
    input_dim = cfg.input_dim
    if cfg.data is not None:
        data = load_dataset(Path(cfg.data), standardize=cfg.standardize)
        if input_dim is None:
            input_dim = data.shape[1]
    arch = ArchSpec(
        depth=cfg.depth,
        width=cfg.width,
        input_dim=input_dim,
        output_dim=cfg.classes,
        activation=cfg.activation,
        residual=ResidualSpec(scale_exponent=cfg.residual) if cfg.residual is not None else None,
    )
    ens = EnsembleConfig(
        arch=arch,
        hyper=InitHyper(sigma_w2=cfg.sigma_w2, sigma_b2=cfg.sigma_b2),
        n_samples=data.shape[0] if data is not None else cfg.samples,
        n_realizations=cfg.ensemble,
        seed=cfg.seed,
        pair_count=cfg.pair_count,
    )
    want_grads = "grads" in cfg.measure
    meas = run_ensemble(ens, data=data, grads=want_grads, threads=threads)
    quad = cfg.quad()
    theory = theory_alignment(ens, meas, quad)
    by_layer = {t.layer: t for t in theory}

    layer_rows = []
    for band in meas.layers:
        t = by_layer.get(band.layer)
        layer_rows.append(
            [
                band.layer,
                band.lambda_hat.p05, band.lambda_hat.p50, band.lambda_hat.p95,
                band.c_hat.p05, band.c_hat.p50, band.c_hat.p95,
                band.sd2_hat.p50, band.sc2_hat.p50, band.gamma_hat.p50,
                t.lam if t else None, t.c if t else None, t.inside_c_band if t else None,
            ]
        )
    inside = [t.inside_c_band for t in theory if t.inside_c_band is not None]
    report: Dict[str, Any] = {
        "measurement": meas.model_dump(mode="json"),
        "theory": [t.model_dump(mode="json") for t in theory],
        "inside_band_fraction": (sum(inside) / len(inside)) if inside else None,
    }

    companions: Dict[str, CommandResult] = {
        "layers": CommandResult(schema="mc-layers", config=cfg, rows=layer_rows),
    }
    if "g0" in cfg.measure:
        companions["g0"] = CommandResult(
            schema="mc-g0",
            config=cfg,
            rows=[[i, g, m] for i, (g, m) in enumerate(zip(meas.g0_samples, meas.max_class_freq))],
        )
        if theory:
            gamma_out = theory[-1].c / (1.0 - theory[-1].c) if theory[-1].c < 1.0 else math.inf
            report["theory_gamma_output"] = _json_float(gamma_out)
    if want_grads and meas.grad_corr is not None:
        gc = meas.grad_corr
        theory_profile = theory_gradient_profile(ens, quad, meas) if arch.residual is None else []
        rows = []
        for i, (a, f, u) in enumerate(zip(gc.all, gc.favored, gc.unfavored)):
            tp = theory_profile[i] if i < len(theory_profile) else None
            rows.append([i + 1, a, f, u, gc.profile[i], gc.self_profile[i], tp])
        companions["grads"] = CommandResult(schema="mc-grads", config=cfg, rows=rows)
        report["theory_gradient_profile"] = theory_profile

    note = None
    if meas.diverged_at_layer is not None:
        note = f"Предактивации разошлись на слое {meas.diverged_at_layer}; статистики оборваны"
    return CommandResult(
        schema="mc-layers", config=cfg, rows=layer_rows, note=note, companions=companions, report=report
    )


def run_g0(cfg: G0Config) -> CommandResult:
    samples = sample_g0_law(cfg.gamma, cfg.draws, cfg.seed)
    edges, density = g0_histogram(samples, cfg.bins)
    rows = [[float(lo), float(hi), float(d)] for lo, hi, d in zip(edges[:-1], edges[1:], density)]
    extremes = float(np.mean((samples < 0.05) | (samples > 0.95)))
    return CommandResult(
        schema="g0", config=cfg, rows=rows, report={"extreme_mass": extremes, "mean": float(samples.mean())}
    )


def run_self_check(paths: Sequence[Path | str]) -> Dict[str, List[str]]:
    """Проверка схем CSV-файлов: путь -> список проблем."""
    return {str(p): validate_csv(p) for p in paths}


def run(cfg, threads: int = 1) -> CommandResult:
    """Диспетчер по типу конфига."""
    if isinstance(cfg, DepthTraceConfig):
        return run_depth_trace(cfg)
    if isinstance(cfg, PhaseDiagramConfig):
        return run_phase_diagram(cfg, threads)
    if isinstance(cfg, EocConfig):
        return run_eoc(cfg, threads)
    if isinstance(cfg, McConfig):
        return run_mc(cfg, threads)
    return run_g0(cfg)
