"""CSV and run-manifest output.

Floats are written with ``repr`` so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import platform
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np


# formula corrections; a run sets the flag when its output depends on one
CORRECTIONS = ("pair_operator_assembly", "simplex_laplacian")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row[h] for h in header]
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = np.array([[float(x) for x in row] for row in r], dtype=float)
    return header, data


def version() -> str:
    try:
        return metadata.version("intricacy")
    except metadata.PackageNotFoundError:
        return "unknown"


@dataclass
class RunManifest:
    command: str
    config_echo: str
    seed: int | None = None
    outputs: list[str] = field(default_factory=list)
    # formula corrections this run relied on
    flags: dict[str, bool] = field(default_factory=lambda: dict.fromkeys(CORRECTIONS, False))
    notes: list[str] = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def add(self, path: Path | str):
        self.outputs.append(Path(path).name)

    def write(self, out_dir: str | Path) -> Path:
        wall = time.perf_counter() - self.started
        lines = [
            f"command = {self.command}",
            f"version = {version()}",
            f"python = {platform.python_version()}",
            f"numpy = {np.__version__}",
            f"seed = {'' if self.seed is None else self.seed}",
            f"wall_time_s = {wall:.3f}",
            "outputs = " + " ".join(self.outputs),
        ]
        lines += [f"flag.{k} = {str(v).lower()}" for k, v in sorted(self.flags.items())]
        lines += [f"note = {n}" for n in self.notes]
        lines += ["", "# resolved configuration", self.config_echo]
        path = Path(out_dir) / "manifest.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines), encoding="utf-8")
        return path
