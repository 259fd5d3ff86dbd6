"""Deterministic report files: JSON, CSV and whitespace plot data."""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

SIG_DIGITS = 12


def round_sig(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def clean(obj):
    """Recursively convert to JSON-safe builtins with floats at 12 significant digits."""
    if isinstance(obj, Mapping):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return round_sig(x)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def to_json(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def _cell(v) -> str:
    v = clean(v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def to_csv(rows: Sequence[Mapping], columns: Optional[Sequence[str]] = None) -> str:
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def to_plot_dat(series: Mapping[str, Iterable[Tuple[float, float]]]) -> str:
    """Gnuplot-style blocks: one ``# name`` header per series, blank line between."""
    out: List[str] = []
    for name, pts in series.items():
        out.append(f"# {name}")
        for x, y in pts:
            out.append(f"{_cell(float(x))} {_cell(float(y))}")
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def run_directory(out: Path, command: str, now: Optional[datetime] = None) -> Path:
    """Create ``<out>/<command>-<UTC timestamp>`` with a numeric suffix on collision."""
    now = now or datetime.now(timezone.utc)
    stamp = now.strftime("%Y%m%dT%H%M%SZ")
    out.mkdir(parents=True, exist_ok=True)
    base = out / f"{command}-{stamp}"
    path, k = base, 1
    while True:
        try:
            path.mkdir()
            return path
        except FileExistsError:
            path = Path(f"{base}-{k}")
            k += 1


def write_run(
    out: Path,
    command: str,
    report: dict,
    rows: Sequence[Mapping],
    series: Mapping[str, Iterable[Tuple[float, float]]],
    fmt: str = "both",
    timing: Optional[Dict[str, float]] = None,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    path = run_directory(Path(out), command)
    if fmt in ("json", "both"):
        (path / "report.json").write_text(to_json(report), newline="\n")
    if fmt in ("csv", "both"):
        (path / "curve.csv").write_text(to_csv(rows, columns), newline="\n")
    (path / "plot.dat").write_text(to_plot_dat(series), newline="\n")
    if timing is not None:
        (path / "timing.json").write_text(to_json(timing), newline="\n")
    return path
