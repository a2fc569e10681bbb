"""Run configuration and report emitters (CSV, JSON, SVG)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

SUBCOMMANDS = ("material", "ellipticity", "dispersion", "waves", "lattice", "reduce", "fracture")


class ConfigError(ValueError):
    """Bad key or value in a run configuration; maps to exit code 2."""


class ReportError(OSError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    material: str | None = None
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "params": dict(self.params),
            "material": self.material,
            "out": self.out,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(data: dict) -> RunConfig:
        unknown = set(data) - {"subcommand", "params", "material", "out", "seed"}
        if unknown:
            raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
        return RunConfig(
            data["subcommand"], dict(data.get("params", {})), data.get("material"), data.get("out"), int(data.get("seed", 0))
        )


def read_key_values(path) -> dict[str, str]:
    """``key = value`` lines, ``#`` comments; keys normalized to underscores."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


# -- number formatting ----------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.17g" % float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# -- emitters -----------------------------------------------------------------------


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ReportError(exc.errno, f"cannot write {path}: {exc.strerror}") from None
    return path


def csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(columns)}")
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return _write(path, csv_text(columns, rows))


def summary_text(config: RunConfig, results: dict, version: str) -> str:
    doc = {"version": version, "seed": config.seed, "config": config.to_dict(), "results": results}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def write_summary(path, config: RunConfig, results: dict, version: str) -> Path:
    return _write(path, summary_text(config, results, version))


def load_summary(path) -> tuple[RunConfig, dict]:
    doc = json.loads(Path(path).read_text())
    return RunConfig.from_dict(doc["config"]), doc


def svg_text(
    series: dict[str, tuple[Sequence[float], Sequence[float]]],
    xlabel: str,
    ylabel: str,
    width: int = 640,
    height: int = 420,
    logx: bool = False,
    logy: bool = False,
) -> str:
    """Line plot with one polyline per series and labeled axes."""
    margin = 60
    tx = (lambda v: np.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: np.log10(v)) if logy else (lambda v: v)
    data = {}
    for name, (x, y) in series.items():
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        data[name] = (tx(x[ok]), ty(y[ok]))
    allx = np.concatenate([d[0] for d in data.values()] or [np.zeros(1)])
    ally = np.concatenate([d[1] for d in data.values()] or [np.zeros(1)])
    x0, x1 = (allx.min(), allx.max()) if allx.size else (0.0, 1.0)
    y0, y1 = (ally.min(), ally.max()) if ally.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = width - 2 * margin, height - 2 * margin

    def px(v):
        return margin + (v - x0) / (x1 - x0) * pw

    def py(v):
        return height - margin - (v - y0) / (y1 - y0) * ph

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" font-size="14">{escape(xlabel)}</text>',
        f'<text x="15" y="{height / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 15 {height / 2:.1f})">{escape(ylabel)}</text>',
        f'<text x="{margin}" y="{height - margin + 16}" font-size="10">{x0:.4g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 16}" font-size="10" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{margin - 4}" y="{height - margin}" font-size="10" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{margin - 4}" y="{margin + 8}" font-size="10" text-anchor="end">{y1:.4g}</text>',
    ]
    for n, (name, (x, y)) in enumerate(data.items()):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = colors[n % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"><title>{escape(name)}</title></polyline>')
        out.append(f'<text x="{width - margin - 4}" y="{margin + 16 + 14 * n}" font-size="11" fill="{color}" text-anchor="end">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, xlabel: str, ylabel: str, **kw) -> Path:
    return _write(path, svg_text(series, xlabel, ylabel, **kw))
