"""System configuration and the power algebra shared by every link model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

Link = Literal["uplink", "downlink"]

BETA_UL = 1 / 100
BETA_DL = 1 / 1024


class ConfigError(ValueError):
    """Raised for invalid or inconsistent configuration values."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(p_dbm: float) -> float:
    return db_to_linear(p_dbm) * 1e-3


def watts_to_dbm(p_w: float) -> float:
    return linear_to_db(p_w * 1e3)


@dataclass(frozen=True)
class SystemParams:
    """Scalar configuration in linear units.

    ``m3`` defaults to ``0.1 * sqrt(P)`` when left as ``None``.
    """

    P: float = 10.0
    K: float = 10.0
    N: int = 200
    alpha: float = 10.0
    delta: float = 1.0
    beta: float = BETA_UL
    psi: float = 0.5
    rho_l: float = -1.0
    rho_h: float = 1.0
    m3: Optional[float] = None
    J: int = 1_000_000

    def __post_init__(self):
        for name in ("P", "K", "alpha", "delta", "beta", "psi", "rho_l", "rho_h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}")
        if self.m3 is not None and not math.isfinite(self.m3):
            raise ConfigError(f"m3 must be finite, got {self.m3!r}")
        if self.P <= 0:
            raise ConfigError(f"P must be > 0, got {self.P}")
        if self.K < 0:
            raise ConfigError(f"K must be >= 0, got {self.K}")
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise ConfigError(f"N must be an even integer >= 4, got {self.N}")
        if not self.alpha > 1:
            raise ConfigError(
                f"alpha must be > 1 (variance levels indistinguishable otherwise), got {self.alpha}"
            )
        if self.delta <= 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if not 0 < self.beta < 1:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0 < self.psi < 1:
            raise ConfigError(f"psi must lie in (0, 1), got {self.psi}")
        if not -1 <= self.rho_l < self.rho_h <= 1:
            raise ConfigError(
                f"need -1 <= rho_l < rho_h <= 1, got rho_l={self.rho_l}, rho_h={self.rho_h}"
            )
        if int(self.J) != self.J or self.J < 1:
            raise ConfigError(f"J must be an integer >= 1, got {self.J}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "J", int(self.J))

    @classmethod
    def from_db(
        cls,
        P_dBm: float = 40.0,
        K_dB: float = 10.0,
        delta_dB: float = 0.0,
        **kwargs,
    ) -> "SystemParams":
        for name, v in (("P_dBm", P_dBm), ("K_dB", K_dB), ("delta_dB", delta_dB)):
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}")
        return cls(
            P=dbm_to_watts(P_dBm), K=db_to_linear(K_dB), delta=db_to_linear(delta_dB), **kwargs
        )

    def to_db(self) -> dict:
        return {
            "P_dBm": watts_to_dbm(self.P),
            "K_dB": linear_to_db(self.K) if self.K > 0 else -math.inf,
            "delta_dB": linear_to_db(self.delta),
        }

    @property
    def m3_value(self) -> float:
        return 0.1 * math.sqrt(self.P) if self.m3 is None else self.m3

    def with_delta_db(self, delta_dB: float) -> "SystemParams":
        return replace(self, delta=db_to_linear(delta_dB))


@dataclass(frozen=True)
class DerivedPowers:
    """Resolved per-link signal statistics.

    ``sigma3_sq`` is the power of the correlation-modulated component: the
    U3 marginal variance on the uplink, the AC share ``(1 - psi) P`` on the
    downlink.
    """

    link: Link
    m1l: float
    m1h: float
    sigma1_sq: float
    sigma2l_sq: float
    sigma2h_sq: float
    sigma3_sq: float
    sigmaw_sq: float
    eta: float
    epsilon: float
    m3: float
    params: SystemParams = field(repr=False)

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def rho_l(self) -> float:
        return self.params.rho_l

    @property
    def rho_h(self) -> float:
        return self.params.rho_h

    def sigma2_sq(self, bit):
        """U2 variance for ``bit`` (scalar or array)."""
        return _pick(bit, self.sigma2l_sq, self.sigma2h_sq)

    def m1(self, bit):
        return _pick(bit, self.m1l, self.m1h)

    def rho(self, bit):
        return _pick(bit, self.rho_l, self.rho_h)


def _pick(bit, low, high):
    if np.ndim(bit) == 0:
        return high if bit else low
    return np.where(np.asarray(bit) != 0, high, low)


def _variance_levels(mean_power: float, alpha: float) -> tuple[float, float]:
    low = 2.0 * mean_power / (1.0 + alpha)
    return low, alpha * low


def derive_uplink(params: SystemParams) -> DerivedPowers:
    if params.alpha <= 1:
        raise ConfigError("alpha must be > 1")
    P = params.P
    sigma1_sq = params.beta * P
    m1h = math.sqrt((1.0 - params.beta) * P)
    s2l, s2h = _variance_levels(P, params.alpha)
    sigmaw_sq = s2l / params.delta
    eta = (1.0 + params.alpha) * params.delta * params.beta / 2.0
    return DerivedPowers(
        link="uplink",
        m1l=-m1h,
        m1h=m1h,
        sigma1_sq=sigma1_sq,
        sigma2l_sq=s2l,
        sigma2h_sq=s2h,
        sigma3_sq=eta * P,
        sigmaw_sq=sigmaw_sq,
        eta=eta,
        epsilon=eta * P / sigmaw_sq,
        m3=params.m3_value,
        params=params,
    )


def derive_downlink(params: SystemParams) -> DerivedPowers:
    if params.alpha <= 1:
        raise ConfigError("alpha must be > 1")
    P = params.P
    m1h = math.sqrt(params.psi * P)
    ac = (1.0 - params.psi) * P
    s2l, s2h = _variance_levels(ac, params.alpha)
    if s2l <= 0 or not math.isfinite(s2l):
        raise ConfigError("downlink AC power is degenerate (psi too close to 1)")
    sigmaw_sq = s2l / params.delta
    eta = (1.0 + params.alpha) * params.delta * params.beta / 2.0
    return DerivedPowers(
        link="downlink",
        m1l=-m1h,
        m1h=m1h,
        sigma1_sq=0.0,
        sigma2l_sq=s2l,
        sigma2h_sq=s2h,
        sigma3_sq=ac,
        sigmaw_sq=sigmaw_sq,
        eta=eta,
        epsilon=eta * P / sigmaw_sq,
        m3=params.m3_value,
        params=params,
    )


def derive(params: SystemParams, link: Link) -> DerivedPowers:
    if link == "uplink":
        return derive_uplink(params)
    if link == "downlink":
        return derive_downlink(params)
    raise ConfigError(f"unknown link {link!r}")
