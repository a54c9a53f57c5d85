"""CSV/JSON emission for bound series and optimization runs.

Numeric cells are written with 17 significant digits so that runs are
reproducible bit-for-bit from the files; every CSV gets a JSON sidecar
recording the full configuration that produced it.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int,)):
        return str(v)
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_sidecar(path: str, config: dict) -> str:
    """JSON sidecar next to a CSV, recording the producing configuration."""
    base, _ = os.path.splitext(path)
    side = base + ".config.json"
    with open(side, "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return side


@dataclass
class RunReport:
    """One produced artifact: where it went and what made it."""

    path: str
    config: dict
    rows: int
    sidecar: Optional[str] = None

    def emit(self, header, rows_iter) -> "RunReport":
        rows = list(rows_iter)
        write_csv(self.path, header, rows)
        self.rows = len(rows)
        self.sidecar = write_sidecar(self.path, self.config)
        return self


def residual_rows(values, bounds=None, certified=None):
    """(n, residual[, bound][, certificate]) rows for a residual series."""
    for n, v in enumerate(values):
        row = [n, v]
        if bounds is not None:
            row.append(bounds[n])
        if certified is not None:
            row.append("witness-verified" if certified else "unverified")
        yield row
