"""Sample statistics and the six per-user decision rules (genie CSI).

All functions vectorize over leading axes: ``y`` is ``(..., N)`` complex and
channel taps are broadcastable against ``y[..., 0]``.  Exact ties in a
minimum-distance rule resolve to bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ReceivedFrame
from .noise import ChannelRealization
from .params import DerivedPowers, Link


def _samples(y) -> np.ndarray:
    if isinstance(y, ReceivedFrame):
        y = y.samples
    return np.asarray(y)


def sample_mean(y):
    y = _samples(y)
    if y.shape[-1] == 0:
        raise ValueError("empty frame")
    return y.mean(axis=-1)


def sample_variance(y):
    y = _samples(y)
    N = y.shape[-1]
    if N < 2:
        raise ValueError(f"sample variance needs N >= 2, got {N}")
    d = y - y.mean(axis=-1, keepdims=True)
    return (d.real**2 + d.imag**2).sum(axis=-1) / (N - 1)


def empirical_cross_cov(y):
    """Half-frame cross-covariance (2/N) sum Re{(y1 - mean1)(y2 - mean2)^*}."""
    y = _samples(y)
    N = y.shape[-1]
    if N % 2 or N < 4:
        raise ValueError(f"cross-covariance needs even N >= 4, got {N}")
    M = N // 2
    a = y[..., :M] - y[..., :M].mean(axis=-1, keepdims=True)
    b = y[..., M:] - y[..., M:].mean(axis=-1, keepdims=True)
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        return (a.real * b.real + a.imag * b.imag).sum(axis=-1) / M
    return (a * b).sum(axis=-1) / M


def variance_threshold(s0_sq, s1_sq):
    """ML threshold between zero-mean Gaussians of variance s0_sq and s1_sq.

    Returns NaN where the two variances coincide.
    """
    s0_sq = np.asarray(s0_sq, dtype=float)
    s1_sq = np.asarray(s1_sq, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.log(s1_sq / s0_sq) * s1_sq * s0_sq / (s1_sq - s0_sq)
    return np.where(s1_sq == s0_sq, np.nan, gamma)


@dataclass
class Diagnostics:
    degenerate_threshold: int = 0


@dataclass(frozen=True)
class DetectorInputs:
    y: object
    ch: ChannelRealization
    powers: DerivedPowers
    link: Link


def _min_distance(stat, ref0, ref1):
    d0 = np.abs(stat - ref0) ** 2
    d1 = np.abs(stat - ref1) ** 2
    return (d1 < d0).astype(np.int8)


def _threshold_decision(s_y_sq, s0_sq, s1_sq, diag: Diagnostics | None):
    gamma = variance_threshold(s0_sq, s1_sq)
    bad = np.isnan(gamma)
    if diag is not None:
        diag.degenerate_threshold += int(np.count_nonzero(np.broadcast_to(bad, np.shape(s_y_sq))))
    with np.errstate(invalid="ignore"):
        return np.where(bad, 0, s_y_sq > gamma).astype(np.int8)


def _abs2(h):
    h = np.asarray(h)
    return h.real**2 + h.imag**2


def detect_u1_ul(y, ch: ChannelRealization, powers: DerivedPowers):
    ybar = sample_mean(y)
    offset = ch.h3 * powers.m3
    return _min_distance(ybar, ch.h1 * powers.m1l + offset, ch.h1 * powers.m1h + offset)


def ul_u2_variances(ch: ChannelRealization, powers: DerivedPowers):
    common = (
        powers.sigma1_sq * _abs2(ch.h1)
        + powers.eta * powers.params.P * _abs2(ch.h3)
        + powers.sigmaw_sq
    )
    g2 = _abs2(ch.h2)
    return common + powers.sigma2l_sq * g2, common + powers.sigma2h_sq * g2


def detect_u2_ul(y, ch: ChannelRealization, powers: DerivedPowers, diag: Diagnostics | None = None):
    s0_sq, s1_sq = ul_u2_variances(ch, powers)
    return _threshold_decision(sample_variance(y), s0_sq, s1_sq, diag)


def correlation_references(h3, powers: DerivedPowers):
    """Expected half-frame cross-covariance under bit 0 and bit 1."""
    scale = _abs2(h3) * powers.sigma3_sq
    return scale * powers.rho_l, scale * powers.rho_h


def detect_u3_ul(y, ch: ChannelRealization, powers: DerivedPowers):
    ref0, ref1 = correlation_references(ch.h3, powers)
    return _min_distance(empirical_cross_cov(y), ref0, ref1)


def detect_u1_dl(y, h1, powers: DerivedPowers):
    return _min_distance(sample_mean(y), h1 * powers.m1l, h1 * powers.m1h)


def dl_u2_variances(h2, powers: DerivedPowers):
    g2 = _abs2(h2)
    common = g2 * powers.sigma3_sq + powers.sigmaw_sq
    return g2 * powers.sigma2l_sq + common, g2 * powers.sigma2h_sq + common


def detect_u2_dl(y, h2, powers: DerivedPowers, diag: Diagnostics | None = None):
    s0_sq, s1_sq = dl_u2_variances(h2, powers)
    return _threshold_decision(sample_variance(y), s0_sq, s1_sq, diag)


def detect_u3_dl(y, h3, powers: DerivedPowers):
    ref0, ref1 = correlation_references(h3, powers)
    return _min_distance(empirical_cross_cov(y), ref0, ref1)


def detect(inputs: DetectorInputs, user: int, diag: Diagnostics | None = None):
    """Dispatch on link and user (1, 2 or 3)."""
    y, ch, pw = inputs.y, inputs.ch, inputs.powers
    if inputs.link == "uplink":
        if user == 1:
            return detect_u1_ul(y, ch, pw)
        if user == 2:
            return detect_u2_ul(y, ch, pw, diag)
        if user == 3:
            return detect_u3_ul(y, ch, pw)
    elif inputs.link == "downlink":
        if user == 1:
            return detect_u1_dl(y, ch.h1, pw)
        if user == 2:
            return detect_u2_dl(y, ch.h2, pw, diag)
        if user == 3:
            return detect_u3_dl(y, ch.h3, pw)
    raise ValueError(f"no detector for link={inputs.link!r}, user={user!r}")
