"""
Файлы результатов: CSV с закомментированной шапкой и JSON-отчёты.

Шапка CSV (строки с '# '):
    # critnet <версия>
    # schema: <команда>/<версия схемы>
    # seed: <seed>
    # timestamp: <UTC ISO-8601>
    # config: <JSON конфигурации>
Числа пишутся с 17 значащими цифрами, чтобы повторный запуск давал тот же файл.
"""

import csv
import io as _io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

from . import __version__
from .errors import ConfigError
from .runconfig import dump_run_config, parse_run_config

SCHEMA_VERSION = 1

SCHEMAS: Dict[str, Tuple[str, ...]] = {
    "depth-trace": ("layer", "lambda", "q", "c", "gamma", "chi_tilde", "chi1", "sd2", "sc2"),
    "depth-trace-igb": ("layer", "sd2", "sc2", "gamma"),
    "phase-diagram": (
        "sigma_b2", "sigma_w2", "phase", "c_star", "chi_limit", "variance_fate", "ambiguous", "eoc_snapped",
    ),
    "eoc": ("sigma_b2", "sigma_w2", "q_star", "res_var", "res_chi", "note"),
    "mc-layers": (
        "layer",
        "lambda_p05", "lambda_p50", "lambda_p95",
        "c_p05", "c_p50", "c_p95",
        "sd2_p50", "sc2_p50", "gamma_p50",
        "theory_lambda", "theory_c", "inside_band",
    ),
    "mc-grads": (
        "layer", "grad_all", "grad_favored", "grad_unfavored", "profile", "self_profile", "theory_profile",
    ),
    "mc-g0": ("realization", "g0", "max_class_freq"),
    "g0": ("bin_lo", "bin_hi", "density"),
}

# нечисловые столбцы
_TEXT_COLUMNS = {"phase", "variance_fate", "note", "ambiguous", "eoc_snapped", "inside_band"}


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def render_csv(schema: str, config, rows: Iterable[Sequence[Any]]) -> str:
    """CSV-текст со шапкой; rows: значения в порядке столбцов схемы."""
    if schema not in SCHEMAS:
        raise ConfigError(f"Неизвестная схема {schema!r}")
    buf = _io.StringIO()
    buf.write(f"# critnet {__version__}\n")
    buf.write(f"# schema: {schema}/{SCHEMA_VERSION}\n")
    buf.write(f"# seed: {config.seed}\n")
    buf.write(f"# timestamp: {_timestamp()}\n")
    buf.write(f"# config: {dump_run_config(config)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCHEMAS[schema])
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text(text: str, out: Optional[Path | str], stream: Optional[TextIO] = None) -> None:
    """В файл (родительские каталоги создаются) или в поток."""
    if out is None:
        (stream or sys.stdout).write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def render_json(config, payload: Dict[str, Any]) -> str:
    doc = {
        "critnet": __version__,
        "schema": f"{config.command}/{SCHEMA_VERSION}",
        "seed": config.seed,
        "timestamp": _timestamp(),
        "config": json.loads(dump_run_config(config)),
        **payload,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def read_csv(path: Path | str) -> Tuple[Dict[str, str], List[str], List[List[str]]]:
    """(шапка, столбцы, строки) файла, записанного render_csv."""
    meta: Dict[str, str] = {}
    body: List[str] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# "):
                key, sep, value = line[2:].rstrip("\n").partition(": ")
                if sep:
                    meta[key] = value
                elif key.startswith("critnet "):
                    meta["critnet"] = key.split(" ", 1)[1]
            else:
                body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        return meta, [], []
    return meta, rows[0], rows[1:]


def embedded_config(path: Path | str):
    """Конфигурация, встроенная в CSV или JSON результат."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        if "config" in doc and isinstance(doc["config"], dict):
            return parse_run_config(json.dumps(doc["config"]))
        return parse_run_config(path.read_text(encoding="utf-8"))
    meta, _, _ = read_csv(path)
    if "config" not in meta:
        raise ConfigError(f"{path}: нет встроенной конфигурации")
    return parse_run_config(meta["config"])


def validate_csv(path: Path | str) -> List[str]:
    """Проблемы файла по его схеме; пустой список: файл корректен."""
    problems: List[str] = []
    try:
        meta, columns, rows = read_csv(path)
    except OSError as e:
        return [f"не читается: {e}"]
    for key in ("critnet", "schema", "seed", "timestamp", "config"):
        if key not in meta:
            problems.append(f"в шапке нет поля {key!r}")
    schema, _, version = meta.get("schema", "").partition("/")
    if schema not in SCHEMAS:
        problems.append(f"неизвестная схема {meta.get('schema')!r}")
        return problems
    if version != str(SCHEMA_VERSION):
        problems.append(f"версия схемы {version!r}, ожидалась {SCHEMA_VERSION}")
    if tuple(columns) != SCHEMAS[schema]:
        problems.append(f"столбцы {columns} не совпадают со схемой {list(SCHEMAS[schema])}")
        return problems
    if "config" in meta:
        try:
            parse_run_config(meta["config"])
        except ConfigError as e:
            problems.append(str(e))
    for i, row in enumerate(rows, start=1):
        if len(row) != len(columns):
            problems.append(f"строка {i}: {len(row)} значений вместо {len(columns)}")
            continue
        for name, value in zip(columns, row):
            if name in _TEXT_COLUMNS or value == "":
                continue
            try:
                float(value)
            except ValueError:
                problems.append(f"строка {i}: {name}={value!r} не число")
    return problems


def strip_timestamp(text: str) -> str:
    """Текст результата без строки/поля timestamp: для сравнения повторных запусков."""
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        doc.pop("timestamp", None)
        return json.dumps(doc, sort_keys=True)
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("# timestamp: "))
