"""Result tables and reproducibility manifests.

CSV contract: UTF-8, comma-separated, one header row, floats serialized
with 17 significant digits (``%.17g``), which round-trips IEEE doubles
exactly.  Manifests are JSON with sorted keys; re-running a command from
its manifest (same seed, same config, same backend) reproduces every CSV
byte for byte — timestamps live only in the manifest itself.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .backend import backend_name

_SCHEMA = 1


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


@dataclass
class ResultTable:
    """Rectangular named-column table with typed cells."""

    columns: list
    rows: list = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(
                f"row width {len(row)} != {len(self.columns)} columns")
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def write_csv(self, path) -> None:
        lines = [",".join(self.columns)]
        lines.extend(",".join(_cell(v) for v in row) for row in self.rows)
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def write_json(self, path) -> None:
        payload = [dict(zip(self.columns, row)) for row in self.rows]
        Path(path).write_text(
            json.dumps(payload, sort_keys=True, indent=1, default=_cell)
            + "\n", encoding="utf-8")

    def write(self, path, fmt: str = "csv") -> str:
        path = Path(path).with_suffix(".json" if fmt == "json" else ".csv")
        if fmt == "json":
            self.write_json(path)
        else:
            self.write_csv(path)
        return path.name


def read_csv(path) -> ResultTable:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    table = ResultTable(columns=lines[0].split(","))
    for line in lines[1:]:
        table.rows.append(tuple(line.split(",")))
    return table


def write_manifest(outdir, command: str, seed, config: dict,
                   outputs: list[str], started: float) -> Path:
    """Drop manifest.json next to a command's outputs."""
    from . import __version__

    doc = {
        "schema": _SCHEMA,
        "command": command,
        "version": __version__,
        "backend": backend_name(),
        "seed": seed,
        "config": config,
        "started": _iso(started),
        "finished": _iso(time.time()),
        "outputs": sorted(outputs),
    }
    path = Path(outdir) / "manifest.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n",
                    encoding="utf-8")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _iso(ts: float) -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(ts)) + "Z"
