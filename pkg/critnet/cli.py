"""
Командная строка critnet.

Подкоманды: depth-trace, phase-diagram, eoc, mc, g0, self-check.
Коды выхода: 0: успех, 2: ошибка использования/конфигурации,
3: численный сбой.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import find_dotenv, load_dotenv
from pydantic import ValidationError

from . import __version__
from .activations import ACTIVATION_NAMES
from .commands import CommandResult, run, run_self_check
from .errors import EXIT_NUMERIC, EXIT_USAGE, ConfigError, CritnetError
from .io import embedded_config, read_csv, strip_timestamp, write_text
from .quadrature import Backend
from .runconfig import DepthTraceConfig, EocConfig, G0Config, GridRange, McConfig, PhaseDiagramConfig
from .settings import Settings

logger = logging.getLogger("critnet")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("общие")
    g.add_argument("--seed", type=int, default=None, help="Seed ГСЧ (по умолчанию 0).")
    g.add_argument("--quad-backend", choices=[b.value for b in Backend], default=None, help="Бэкенд квадратур.")
    g.add_argument("--quad-nodes", type=int, default=None, help="Число узлов (на панель для truncated-panels).")
    g.add_argument("--threads", type=int, default=None, help="Потоки; по умолчанию CRITNET_THREADS или 1.")
    g.add_argument("--out", type=Path, default=None, help="Файл результата; без него: stdout.")
    g.add_argument("--config", type=Path, default=None, help="JSON-конфиг или ранее записанный результат.")
    g.add_argument("--log-level", default="WARNING", help="Уровень логирования (DEBUG, INFO, ...).")
    return p


def _activation(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--activation", choices=ACTIVATION_NAMES, required=required, default=None)


def _parse_range(text: str) -> GridRange:
    try:
        return GridRange.parse(text)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="critnet", description="Среднее поле, IGB и края хаоса широких MLP.")
    p.add_argument("--version", action="version", version=f"critnet {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    dt = sub.add_parser("depth-trace", parents=[common], help="Траектория (Λ, q, c, Γ, χ) по глубине.")
    _activation(dt, required=False)
    dt.add_argument("--sigma-w2", type=float)
    dt.add_argument("--sigma-b2", type=float)
    dt.add_argument("--depth", type=int, default=100)
    dt.add_argument("--lambda0", type=float, default=1.0)
    dt.add_argument("--q0", type=float, default=0.0)
    dt.add_argument("--igb-coords", action="store_true", help="Рекурсия в координатах IGB: CSV со столбцами layer, sd2, sc2, gamma.")

    pd = sub.add_parser("phase-diagram", parents=[common], help="Фазовая диаграмма на сетке (σ²_b, σ²_w).")
    _activation(pd, required=False)
    pd.add_argument("--sw-range", type=_parse_range, help="lo:hi:n для σ²_w")
    pd.add_argument("--sb-range", type=_parse_range, help="lo:hi:n для σ²_b")
    pd.add_argument("--eoc-tol", type=float, default=1e-3)
    pd.add_argument("--no-snap", action="store_true", help="Не отмечать ближайшую к EOC клетку в строке.")

    eo = sub.add_parser("eoc", parents=[common], help="Кривая края хаоса.")
    _activation(eo, required=False)
    eo.add_argument("--q-max", type=float, default=20.0)
    eo.add_argument("--q-min", type=float, default=1e-4)
    eo.add_argument("--points", type=int, default=200)

    mc = sub.add_parser("mc", parents=[common], help="Монте-Карло ансамбль конечных сетей.")
    _activation(mc, required=False)
    mc.add_argument("--sigma-w2", type=float)
    mc.add_argument("--sigma-b2", type=float)
    mc.add_argument("--width", type=int, default=500)
    mc.add_argument("--depth", type=int, default=50)
    mc.add_argument("--input-dim", type=int, default=None)
    mc.add_argument("--samples", type=int, default=100)
    mc.add_argument("--ensemble", type=int, default=10)
    mc.add_argument("--classes", type=int, default=2)
    mc.add_argument("--pair-count", type=int, default=200)
    mc.add_argument("--measure", nargs="+", choices=["mf", "igb", "g0", "grads"], default=None)
    mc.add_argument("--residual", type=float, default=None, help="Показатель e: ветвь делится на L^e.")
    mc.add_argument("--data", type=Path, default=None, help="CSV-датасет вместо гауссовых данных.")
    mc.add_argument("--no-standardize", action="store_true")

    g0 = sub.add_parser("g0", parents=[common], help="Гистограмма закона G₀ при заданном Γ.")
    g0.add_argument("--gamma", type=float)
    g0.add_argument("--draws", type=int, default=100_000)
    g0.add_argument("--bins", type=int, default=20)

    sc = sub.add_parser("self-check", parents=[common], help="Проверка схем CSV и воспроизводимости.")
    sc.add_argument("paths", nargs="+", type=Path)
    sc.add_argument("--rerun", action="store_true", help="Перезапустить встроенный конфиг и сравнить побитно.")
    return p


def _quad_fields(args: argparse.Namespace, settings: Settings) -> dict:
    fields = {"quad_backend": args.quad_backend or settings.quad_backend}
    nodes = args.quad_nodes if args.quad_nodes is not None else settings.quad_nodes
    if nodes is not None:
        fields["quad_nodes"] = nodes
    fields["seed"] = args.seed if args.seed is not None else 0
    return fields


def config_from_args(args: argparse.Namespace, settings: Settings):
    """Namespace -> конфиг команды; --config имеет приоритет над флагами."""
    if args.config is not None:
        return embedded_config(args.config)
    base = _quad_fields(args, settings)
    try:
        if args.cmd == "depth-trace":
            return DepthTraceConfig(
                activation=args.activation or "relu", sigma_w2=args.sigma_w2, sigma_b2=args.sigma_b2,
                depth=args.depth, lambda0=args.lambda0, q0=args.q0, igb_coords=args.igb_coords, **base,
            )
        if args.cmd == "phase-diagram":
            return PhaseDiagramConfig(
                activation=args.activation or "relu", sw_range=args.sw_range, sb_range=args.sb_range,
                eoc_tol=args.eoc_tol, snap_eoc=not args.no_snap, **base,
            )
        if args.cmd == "eoc":
            return EocConfig(
                activation=args.activation or "tanh", q_max=args.q_max, q_min=args.q_min, points=args.points, **base
            )
        if args.cmd == "mc":
            extra = {"measure": args.measure} if args.measure else {}
            return McConfig(
                activation=args.activation or "relu", sigma_w2=args.sigma_w2, sigma_b2=args.sigma_b2,
                width=args.width, depth=args.depth, input_dim=args.input_dim, samples=args.samples,
                ensemble=args.ensemble, classes=args.classes, pair_count=args.pair_count,
                residual=args.residual, data=str(args.data) if args.data else None,
                standardize=not args.no_standardize, **extra, **base,
            )
        return G0Config(gamma=args.gamma, draws=args.draws, bins=args.bins, **base)
    except ValidationError as e:
        raise ConfigError(f"Неверные параметры {args.cmd}: {e}") from e


def _companion_path(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}_{suffix}.csv")


def emit(result: CommandResult, out: Optional[Path]) -> None:
    """Основной файл + компаньоны; для mc основной файл: JSON-отчёт."""
    if result.report is not None and result.companions:
        write_text(result.to_json(), out)
        if out is not None:
            for suffix, comp in result.companions.items():
                write_text(comp.to_csv(), _companion_path(out, suffix))
        return
    write_text(result.to_csv(), out)


def _self_check(args: argparse.Namespace, threads: int) -> int:
    report = run_self_check(args.paths)
    failed = False
    for path, problems in report.items():
        for problem in problems:
            print(f"{path}: {problem}", file=sys.stderr)
        failed = failed or bool(problems)
        if args.rerun and not problems:
            original = Path(path).read_text(encoding="utf-8")
            schema = read_csv(path)[0]["schema"].partition("/")[0]
            again = run(embedded_config(path), threads)
            candidates = [again, *again.companions.values()]
            text = next(r.to_csv() for r in candidates if r.schema == schema)
            if strip_timestamp(text) != strip_timestamp(original):
                print(f"{path}: повторный запуск даёт другой результат", file=sys.stderr)
                failed = True
    if not failed:
        print(f"self-check: {len(report)} файл(ов) в порядке", file=sys.stderr)
    return EXIT_USAGE if failed else 0


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(find_dotenv(usecwd=True))
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")

    try:
        settings = Settings.from_env()
        threads = args.threads if args.threads is not None else settings.threads
        if threads < 1:
            raise ConfigError(f"--threads должно быть >= 1, получено {threads}")
        if args.cmd == "self-check":
            return _self_check(args, threads)

        cfg = config_from_args(args, settings)
        result = run(cfg, threads)
        if result.note:
            print(result.note, file=sys.stderr)
        emit(result, args.out)
        return 0
    except CritnetError as e:
        print(f"critnet: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"critnet: неверные параметры: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as e:
        # scipy (brentq, fixed_point) и numpy сообщают о численных сбоях так
        logger.debug("Численная ошибка", exc_info=True)
        print(f"critnet: численная ошибка: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
