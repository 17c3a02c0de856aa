"""Command-line entry point: ``ndnoma {sweep,theory,validate,reproduce}``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.  The master
seed comes from ``--seed``, else ``$NDNOMA_SEED``, else the config file.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .checks import run_all
from .config import RunConfig, config_dict, parse_config
from .csvio import emit_csv, emit_metadata
from .params import ConfigError
from .sweep import run_sweep
from .waveforms import DL_MODELS

SEED_ENV = "NDNOMA_SEED"

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

# desk-scale presets over the figures' axes; 5 dB delta step
_PRESET_BUDGET = dict(min_bits=10_000, max_bits=500_000, target_errors=200, J=1_000_000)
PRESETS = {
    "fig3": dict(link="uplink", k_db=(10.0,), n=(150, 200), **_PRESET_BUDGET),
    "fig4": dict(link="uplink", k_db=(5.0, 10.0), n=(200,), **_PRESET_BUDGET),
    "fig5": dict(link="downlink", k_db=(10.0,), n=(150, 200), **_PRESET_BUDGET),
    "fig6": dict(link="downlink", k_db=(5.0, 10.0), n=(200,), **_PRESET_BUDGET),
}

DL_U1_NOTE = (
    "downlink U1 theory uses the closed-form interference coefficient beta*P^2/sigma_w^2, "
    "which does not track the simulated waveform; it is reported, not validated"
)


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return RunConfig(**PRESETS[name]).validate()


def _load_config(path) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text())


def _resolve_seed(args, cfg: RunConfig) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"${SEED_ENV} must be an integer, got {env!r}") from None
    return cfg.seed


def _execute(cfg: RunConfig, args, *, simulate: bool, label: str) -> int:
    seed = _resolve_seed(args, cfg)
    if args.dl_model:
        cfg = replace(cfg, dl_model=args.dl_model)
    if getattr(args, "max_bits", None):
        cfg = replace(cfg, max_bits=args.max_bits, min_bits=min(cfg.min_bits, args.max_bits))
    if getattr(args, "J", None):
        cfg = replace(cfg, J=args.J)
    cfg.validate()
    out = Path(args.out or cfg.csv or f"{label}.csv")
    journal = Path(args.journal or cfg.journal) if (args.journal or cfg.journal) else None
    t0 = time.perf_counter()
    res = run_sweep(
        cfg.grid(),
        seed,
        cfg.params(),
        simulate=simulate,
        theory=True,
        J=cfg.J,
        dl_model=cfg.dl_model,
        threads=args.threads,
        journal=journal,
    )
    emit_csv(res.rows, out)
    notes = [
        "theory uses the closed-form conditional BEPs averaged over Rician fading",
        "U3 decision-statistic variance: exact second moments of the half-frame estimator",
    ]
    if cfg.link == "downlink":
        notes.append(DL_U1_NOTE)
        if cfg.dl_model == "superposed":
            notes.append("superposed downlink waveform: total transmit power exceeds P by (1-psi)P")
    emit_metadata(
        {
            "tool": f"ndnoma {__version__}",
            "run": label,
            "seed": seed,
            "config": config_dict(cfg),
            "degenerate_threshold_frames": res.diagnostics.degenerate_threshold,
            "notes": notes,
        },
        out,
    )
    logging.getLogger(__name__).info("wrote %s (%d rows) in %.1fs", out, len(res.rows), time.perf_counter() - t0)
    print(f"wrote {out} ({len(res.rows)} rows)")
    return EXIT_OK


def _cmd_sweep(args):
    return _execute(_load_config(args.config), args, simulate=True, label="sweep")


def _cmd_theory(args):
    return _execute(_load_config(args.config), args, simulate=False, label="theory")


def _cmd_reproduce(args):
    cfg = preset_config(args.figure)
    return _execute(cfg, args, simulate=True, label=args.figure)


def _cmd_validate(args):
    results = run_all(quick=args.quick)
    for c in results:
        print(c.line())
    ok = all(c.passed for c in results)
    print(f"{sum(c.passed for c in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ndnoma", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or config)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--journal", help="resume journal (JSON lines)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--dl-model", choices=DL_MODELS)
        p.add_argument("--max-bits", type=int, help="override the per-cell bit budget")
        p.add_argument("--J", type=int, help="override the channel draws for theory")

    p = sub.add_parser("sweep", help="simulation + theory over the configured grid")
    run_flags(p)
    p.set_defaults(func=_cmd_sweep)
    p = sub.add_parser("theory", help="theory only")
    run_flags(p)
    p.set_defaults(func=_cmd_theory)
    p = sub.add_parser("reproduce", help="preset grids on the figures' axes")
    p.add_argument("figure", choices=sorted(PRESETS))
    run_flags(p)
    p.set_defaults(func=_cmd_reproduce)
    p = sub.add_parser("validate", help="run the statistical self-checks")
    p.add_argument("--quick", action="store_true", help="10x smaller sample sizes")
    p.set_defaults(func=_cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
