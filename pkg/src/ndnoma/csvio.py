"""CSV result tables and their metadata sidecar."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable

from .params import ConfigError
from .sweep import BerPoint

HEADER = [
    "link", "user", "delta_db", "k_db", "n", "bits", "errors",
    "ber", "ci95_low", "ci95_high", "bep_theory", "bep_theory_stderr",
]
_PROB_FIELDS = ("ber", "ci95_low", "ci95_high", "bep_theory", "bep_theory_stderr")


def _prob(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.5e}"


def format_rows(rows: Iterable[BerPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in sorted(rows, key=BerPoint.sort_key):
        w.writerow(
            [r.link, r.user, f"{r.delta_db:g}", f"{r.k_db:g}", r.n, r.bits_simulated, r.errors]
            + [_prob(getattr(r, f)) for f in _PROB_FIELDS]
        )
    return buf.getvalue()


def emit_csv(rows: Iterable[BerPoint], path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_rows(rows))
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list[BerPoint]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                BerPoint(
                    link=rec["link"],
                    user=int(rec["user"]),
                    delta_db=float(rec["delta_db"]),
                    k_db=float(rec["k_db"]),
                    n=int(rec["n"]),
                    bits_simulated=int(rec["bits"]),
                    errors=int(rec["errors"]),
                    **{f: float(rec[f]) if rec[f] else math.nan for f in _PROB_FIELDS},
                )
            )
    return rows


def emit_metadata(meta: dict, csv_path) -> Path:
    """Write ``<csv>.meta.json`` next to the table; content must be deterministic."""
    path = Path(str(csv_path) + ".meta.json")
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return path
