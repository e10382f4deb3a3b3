"""Cross-seed summaries of metrics CSVs: medians and interquartile ranges."""

from __future__ import annotations

import csv
from pathlib import Path

from .runner import CSV_HEADER, fmt

METRIC_COLS = ("throughput_bps", "drop_rate", "mean_delay_s", "mean_episode_reward")

SUMMARY_HEADER = "scenario,algorithm,sweep_value,n_seeds," + ",".join(
    f"{m}_{s}" for m in METRIC_COLS for s in ("median", "q25", "q75"))


class SchemaError(ValueError):
    pass


def quantile(values: list[float], q: float) -> float:
    """Linear-interpolation quantile over sorted values (inclusive method)."""
    if not values:
        raise ValueError("quantile of empty data")
    xs = sorted(values)
    if len(xs) == 1:
        return xs[0]
    pos = (len(xs) - 1) * q
    lo = int(pos)
    hi = min(lo + 1, len(xs) - 1)
    frac = pos - lo
    return xs[lo] * (1.0 - frac) + xs[hi] * frac


def _read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise SchemaError(f"{path}: header does not match {CSV_HEADER!r}")
        cols = header
        return [dict(zip(cols, row)) for row in reader]


def compare(paths: list[str | Path], out_path: str | Path) -> Path:
    """Summarize one or more metrics files into a plot-ready CSV."""
    rows: list[dict[str, str]] = []
    for p in paths:
        rows.extend(_read_rows(Path(p)))
    groups: dict[tuple[str, str, str], list[dict[str, str]]] = {}
    for r in rows:
        if r["status"] != "ok":
            continue
        groups.setdefault((r["scenario"], r["algorithm"], r["sweep_value"]), []).append(r)
    lines = [SUMMARY_HEADER]
    for (scenario, algorithm, sweep_value) in sorted(
            groups, key=lambda k: (k[0], k[1], float(k[2]))):
        members = groups[(scenario, algorithm, sweep_value)]
        cells = [scenario, algorithm, sweep_value, str(len(members))]
        for m in METRIC_COLS:
            vals = [float(r[m]) for r in members]
            cells += [fmt(quantile(vals, 0.5)), fmt(quantile(vals, 0.25)),
                      fmt(quantile(vals, 0.75))]
        lines.append(",".join(cells))
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    return out
