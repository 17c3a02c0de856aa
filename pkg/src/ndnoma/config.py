"""Run configuration: a small ``[section]`` / ``key = value`` text format.

Sections and keys::

    [system]  P_dBm alpha beta psi rho_l rho_h m3 J dl_model
    [sweep]   link delta_start delta_stop delta_step k_db n
              min_bits max_bits target_errors batch_frames seed
    [output]  csv journal

``k_db`` and ``n`` take comma-separated lists.  ``#`` starts a comment.
Omitted keys take the reference defaults (P = 40 dBm, alpha = 10, psi = 0.5); ``beta`` and the delta range depend
on ``link`` when omitted.  Unknown sections/keys and out-of-range values are
rejected with the key name and line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

from .params import BETA_DL, BETA_UL, ConfigError, SystemParams
from .sweep import SweepGrid
from .waveforms import DL_MODELS


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(s):
    v = float(s)
    if not v.is_integer():
        raise ValueError("must be an integer")
    return int(v)


def _floats(s):
    return tuple(_float(x) for x in s.split(",") if x.strip())


def _ints(s):
    return tuple(_int(x) for x in s.split(",") if x.strip())


def _str(s):
    return s


# key -> (parser, per-key validator returning an error message or None)
_SCHEMA = {
    "system": {
        "P_dBm": (_float, None),
        "alpha": (_float, lambda v: None if v > 1 else "alpha must be > 1"),
        "beta": (_float, lambda v: None if 0 < v < 1 else "beta must lie in (0, 1)"),
        "psi": (_float, lambda v: None if 0 < v < 1 else "psi must lie in (0, 1)"),
        "rho_l": (_float, lambda v: None if -1 <= v <= 1 else "rho_l must lie in [-1, 1]"),
        "rho_h": (_float, lambda v: None if -1 <= v <= 1 else "rho_h must lie in [-1, 1]"),
        "m3": (_float, None),
        "J": (_int, lambda v: None if v >= 1 else "J must be >= 1"),
        "dl_model": (_str, lambda v: None if v in DL_MODELS else f"dl_model must be one of {DL_MODELS}"),
    },
    "sweep": {
        "link": (_str, lambda v: None if v in ("uplink", "downlink") else "link must be uplink or downlink"),
        "delta_start": (_float, None),
        "delta_stop": (_float, None),
        "delta_step": (_float, lambda v: None if v > 0 else "delta_step must be > 0"),
        "k_db": (_floats, lambda v: None if v else "k_db needs at least one value"),
        "n": (
            _ints,
            lambda v: None
            if v and all(n >= 4 and n % 2 == 0 for n in v)
            else "n must be even integers >= 4",
        ),
        "min_bits": (_int, lambda v: None if v >= 1000 else "min_bits must be >= 1000"),
        "max_bits": (_int, lambda v: None if v >= 1000 else "max_bits must be >= 1000"),
        "target_errors": (_int, lambda v: None if v >= 1 else "target_errors must be >= 1"),
        "batch_frames": (_int, lambda v: None if v >= 1 else "batch_frames must be >= 1"),
        "seed": (_int, lambda v: None if v >= 0 else "seed must be >= 0"),
    },
    "output": {
        "csv": (_str, None),
        "journal": (_str, None),
    },
}

DELTA_RANGE = {"uplink": (-30.0, 10.0), "downlink": (-40.0, 10.0)}


@dataclass
class RunConfig:
    P_dBm: float = 40.0
    alpha: float = 10.0
    beta: Optional[float] = None
    psi: float = 0.5
    rho_l: float = -1.0
    rho_h: float = 1.0
    m3: Optional[float] = None
    J: int = 1_000_000
    dl_model: str = "superposed"
    link: str = "uplink"
    delta_start: Optional[float] = None
    delta_stop: Optional[float] = None
    delta_step: float = 5.0
    k_db: tuple = (10.0,)
    n: tuple = (200,)
    min_bits: int = 10_000
    max_bits: int = 10_000_000
    target_errors: int = 200
    batch_frames: int = 2000
    seed: int = 1
    csv: Optional[str] = None
    journal: Optional[str] = None
    _lines: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        lo, hi = DELTA_RANGE.get(self.link, DELTA_RANGE["uplink"])
        if self.beta is None:
            self.beta = BETA_UL if self.link == "uplink" else BETA_DL
        if self.delta_start is None:
            self.delta_start = lo
        if self.delta_stop is None:
            self.delta_stop = hi

    def params(self) -> SystemParams:
        return SystemParams.from_db(
            P_dBm=self.P_dBm,
            K_dB=self.k_db[0],
            delta_dB=0.0,
            N=self.n[0],
            alpha=self.alpha,
            beta=self.beta,
            psi=self.psi,
            rho_l=self.rho_l,
            rho_h=self.rho_h,
            m3=self.m3,
            J=self.J,
        )

    def grid(self) -> SweepGrid:
        return SweepGrid(
            delta_start=self.delta_start,
            delta_stop=self.delta_stop,
            delta_step=self.delta_step,
            k_db=self.k_db,
            n=self.n,
            link=self.link,
            min_bits=self.min_bits,
            max_bits=self.max_bits,
            target_errors=self.target_errors,
            batch_frames=self.batch_frames,
        )

    def validate(self):
        def fail(msg, *keys):
            where = ", ".join(f"line {self._lines[k]}" for k in keys if k in self._lines)
            raise ConfigError(f"{'/'.join(keys)}: {msg}" + (f" ({where})" if where else ""))

        if not self.rho_l < self.rho_h:
            fail("need rho_l < rho_h", "rho_l", "rho_h")
        if not self.delta_start <= self.delta_stop:
            fail("need delta_start <= delta_stop", "delta_start", "delta_stop")
        if not self.min_bits <= self.max_bits:
            fail("need min_bits <= max_bits", "min_bits", "max_bits")
        try:
            self.params()
            self.grid()
        except ConfigError as exc:
            raise ConfigError(str(exc)) from None
        return self


def parse_config(text: str) -> RunConfig:
    values = {}
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside of any section")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        parse, check = _SCHEMA[section][key]
        try:
            v = parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: cannot parse {value!r} ({exc})") from None
        msg = check(v) if check else None
        if msg:
            raise ConfigError(f"line {lineno}: {key}: {msg}, got {value}")
        values[key] = v
        lines[key] = lineno
    cfg = RunConfig(**values)
    cfg._lines = lines
    return cfg.validate()


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    out = []
    for section, keys in _SCHEMA.items():
        out.append(f"[{section}]")
        for key in keys:
            v = getattr(cfg, key)
            if v is not None:
                out.append(f"{key} = {_fmt(v)}")
        out.append("")
    return "\n".join(out)


def config_dict(cfg: RunConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg) if not f.name.startswith("_")}
