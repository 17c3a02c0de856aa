"""BER/BEP sweeps over (delta, K, N) with per-cell seeding and a resume journal.

Every cell's random streams are derived from ``(master_seed, cell
coordinates)`` only, so results do not depend on execution order, thread
count, or which other cells are in the grid.

Journal format: one JSON object per line,
``{"cell": [link, delta_db, k_db, n], "config": <hex>, "digest": <hex>, "rows": [...]}``
where ``digest`` is the SHA-256 of the canonical JSON of ``rows`` and
``config`` fingerprints everything else that affects the numbers.  Lines
whose digest or config do not match are ignored on resume.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .channel import downlink_receive, uplink_combine
from .detectors import (
    Diagnostics,
    detect_u1_dl,
    detect_u1_ul,
    detect_u2_dl,
    detect_u2_ul,
    detect_u3_dl,
    detect_u3_ul,
)
from .noise import SeedSpec, rician_channel
from .params import BETA_DL, BETA_UL, ConfigError, SystemParams, db_to_linear, derive
from .theory import U3_INNER_DRAWS, average_over_fading, conditional_bep
from .waveforms import dl_bs_frame, ul_correlation_frame, ul_mean_frame, ul_variance_frame

log = logging.getLogger(__name__)

USERS = (1, 2, 3)


@dataclass(frozen=True)
class SweepGrid:
    delta_start: float = -30.0
    delta_stop: float = 10.0
    delta_step: float = 5.0
    k_db: tuple = (10.0,)
    n: tuple = (200,)
    link: str = "uplink"
    min_bits: int = 100_000
    max_bits: int = 10_000_000
    target_errors: int = 200
    batch_frames: int = 2000

    def __post_init__(self):
        if self.link not in ("uplink", "downlink"):
            raise ConfigError(f"link must be 'uplink' or 'downlink', got {self.link!r}")
        if not self.delta_start <= self.delta_stop:
            raise ConfigError("delta_start must be <= delta_stop")
        if not self.delta_step > 0:
            raise ConfigError("delta_step must be > 0")
        if self.min_bits < 1000:
            raise ConfigError(f"min_bits must be >= 1000, got {self.min_bits}")
        if self.max_bits < self.min_bits:
            raise ConfigError("max_bits must be >= min_bits")
        if self.target_errors < 1 or self.batch_frames < 1:
            raise ConfigError("target_errors and batch_frames must be >= 1")
        for n in self.n:
            if int(n) != n or n < 4 or n % 2:
                raise ConfigError(f"N must be an even integer >= 4, got {n}")
        object.__setattr__(self, "k_db", tuple(float(k) for k in self.k_db))
        object.__setattr__(self, "n", tuple(int(n) for n in self.n))

    def deltas(self) -> list[float]:
        count = int(math.floor((self.delta_stop - self.delta_start) / self.delta_step + 1e-9)) + 1
        return [round(self.delta_start + i * self.delta_step, 10) for i in range(count)]

    def cells(self) -> list["Cell"]:
        return [Cell(self.link, d, k, n) for d in self.deltas() for k in self.k_db for n in self.n]


@dataclass(frozen=True, order=True)
class Cell:
    link: str
    delta_db: float
    k_db: float
    n: int

    def key(self) -> tuple:
        return (self.link, f"{self.delta_db:.6g}", f"{self.k_db:.6g}", int(self.n))


@dataclass
class BerPoint:
    link: str
    user: int
    delta_db: float
    k_db: float
    n: int
    bits_simulated: int = 0
    errors: int = 0
    ber: float = math.nan
    ci95_low: float = math.nan
    ci95_high: float = math.nan
    bep_theory: float = math.nan
    bep_theory_stderr: float = math.nan

    def sort_key(self):
        return (self.link, self.user, self.delta_db, self.k_db, self.n)


def wilson_interval(errors: int, bits: int) -> tuple[float, float]:
    lo, hi = proportion_confint(errors, bits, alpha=0.05, method="wilson")
    return float(lo), float(hi)


def cell_params(base: SystemParams, cell: Cell) -> SystemParams:
    return replace(base, delta=db_to_linear(cell.delta_db), K=db_to_linear(cell.k_db), N=cell.n)


def default_params(link: str, **overrides) -> SystemParams:
    beta = BETA_UL if link == "uplink" else BETA_DL
    return SystemParams.from_db(P_dBm=40.0, K_dB=10.0, delta_dB=0.0, **{"beta": beta, **overrides})


def _simulate_batch(powers, K, B, rng, dl_model, diag):
    ch = rician_channel(K, rng, size=B)
    b1, b2, b3 = rng.integers(0, 2, (3, B), dtype=np.int8)
    if powers.link == "uplink":
        y = uplink_combine(
            ul_mean_frame(b1, powers, rng),
            ul_variance_frame(b2, powers, rng),
            ul_correlation_frame(b3, powers, rng),
            ch,
            powers.sigmaw_sq,
            rng,
        )
        d1 = detect_u1_ul(y, ch, powers)
        d2 = detect_u2_ul(y, ch, powers, diag)
        d3 = detect_u3_ul(y, ch, powers)
    else:
        s = dl_bs_frame((b1, b2, b3), powers, dl_model, rng)
        d1 = detect_u1_dl(downlink_receive(s, ch.h1, powers.sigmaw_sq, rng), ch.h1, powers)
        d2 = detect_u2_dl(downlink_receive(s, ch.h2, powers.sigmaw_sq, rng), ch.h2, powers, diag)
        d3 = detect_u3_dl(downlink_receive(s, ch.h3, powers.sigmaw_sq, rng), ch.h3, powers)
    return np.array(
        [np.count_nonzero(d1 != b1), np.count_nonzero(d2 != b2), np.count_nonzero(d3 != b3)],
        dtype=np.int64,
    )


def simulate_point(
    base: SystemParams,
    cell: Cell,
    grid: SweepGrid,
    seed: int,
    dl_model: str = "superposed",
    diag: Diagnostics | None = None,
) -> list[BerPoint]:
    """Frame-level simulation of one cell; one fresh channel per frame."""
    params = cell_params(base, cell)
    powers = derive(params, cell.link)
    root = SeedSpec(seed, ("sim",) + cell.key())
    bits = 0
    errors = np.zeros(3, dtype=np.int64)
    batch = 0
    while bits < grid.max_bits:
        B = min(grid.batch_frames, grid.max_bits - bits)
        errors += _simulate_batch(powers, params.K, B, root.child(batch).rng(), dl_model, diag)
        bits += B
        batch += 1
        if bits >= grid.min_bits and errors.min() >= grid.target_errors:
            break
    out = []
    for u in USERS:
        e = int(errors[u - 1])
        lo, hi = wilson_interval(e, bits)
        out.append(
            BerPoint(cell.link, u, cell.delta_db, cell.k_db, cell.n, bits, e, e / bits, lo, hi)
        )
    return out


def theory_point(
    base: SystemParams,
    cell: Cell,
    seed: int,
    J: Optional[int] = None,
    dl_model: str = "superposed",
    u3_method: str = "moments",
    inner_draws: int = U3_INNER_DRAWS,
) -> dict[int, tuple[float, float]]:
    """Fading-averaged BEP and its standard error for each user."""
    params = cell_params(base, cell)
    powers = derive(params, cell.link)
    J = params.J if J is None else J
    out = {}
    for u in USERS:
        f = conditional_bep(
            cell.link, u, powers, u3_method=u3_method, inner_draws=inner_draws, dl_model=dl_model
        )
        est = average_over_fading(f, params.K, J, SeedSpec(seed, ("theory", u) + cell.key()))
        out[u] = (est.value, est.std_error)
    return out


def _rows_digest(rows: list[dict]) -> str:
    return hashlib.sha256(json.dumps(rows, sort_keys=True).encode()).hexdigest()


def config_fingerprint(base: SystemParams, grid: SweepGrid, seed: int, **extra) -> str:
    blob = json.dumps(
        {"params": asdict(base), "grid": asdict(grid), "seed": seed, **extra},
        sort_keys=True,
        default=repr,
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_journal(path: Path, fingerprint: str) -> dict[tuple, list[BerPoint]]:
    done = {}
    if not path.exists():
        return done
    for line in path.read_text().splitlines():
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            continue
        if rec.get("config") != fingerprint or _rows_digest(rec.get("rows", [])) != rec.get("digest"):
            continue
        link, d, k, n = rec["cell"]
        done[Cell(link, d, k, n).key()] = [BerPoint(**r) for r in rec["rows"]]
    return done


@dataclass
class SweepResult:
    rows: list[BerPoint]
    diagnostics: Diagnostics = field(default_factory=Diagnostics)


def run_sweep(
    grid: SweepGrid,
    seed: int,
    base: Optional[SystemParams] = None,
    *,
    simulate: bool = True,
    theory: bool = True,
    J: Optional[int] = None,
    dl_model: str = "superposed",
    threads: int = 1,
    journal: Optional[Path] = None,
    cells: Optional[Sequence[Cell]] = None,
) -> SweepResult:
    """Simulation and/or theory for every cell of ``grid``, rows in canonical order."""
    base = default_params(grid.link) if base is None else base
    cells = grid.cells() if cells is None else list(cells)
    fp = config_fingerprint(base, grid, seed, simulate=simulate, theory=theory, J=J, dl_model=dl_model)
    done = load_journal(journal, fp) if journal is not None else {}
    lock = threading.Lock()
    diag = Diagnostics()

    def run_cell(cell: Cell) -> list[BerPoint]:
        if cell.key() in done:
            return done[cell.key()]
        try:
            local = Diagnostics()
            if simulate:
                rows = simulate_point(base, cell, grid, seed, dl_model, local)
            else:
                rows = [BerPoint(cell.link, u, cell.delta_db, cell.k_db, cell.n) for u in USERS]
            if theory:
                th = theory_point(base, cell, seed, J=J, dl_model=dl_model)
                for r in rows:
                    r.bep_theory, r.bep_theory_stderr = th[r.user]
        except Exception as exc:
            raise RuntimeError(f"cell {cell.key()} failed: {exc}") from exc
        with lock:
            diag.degenerate_threshold += local.degenerate_threshold
            if journal is not None:
                payload = [asdict(r) for r in rows]
                rec = {
                    "cell": [cell.link, cell.delta_db, cell.k_db, cell.n],
                    "config": fp,
                    "digest": _rows_digest(payload),
                    "rows": payload,
                }
                with open(journal, "a") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        log.info("cell %s done", cell.key())
        return rows

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]
    rows = sorted((r for rs in results for r in rs), key=BerPoint.sort_key)
    return SweepResult(rows, diag)
