"""Transmit frames for the uplink users and the downlink base station.

A frame is a real array whose last axis has length N.  Bits may be scalars
(one frame) or 1-D arrays (a batch of frames, shape ``(B, N)``).  Correlated
samples are laid out so that sample ``n`` pairs with sample ``n + N/2``.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from .noise import SeedLike, as_rng
from .params import DerivedPowers

DlModel = Literal["joint", "superposed"]
DL_MODELS = ("joint", "superposed")


def _frame_shape(bit, N: int) -> tuple:
    return np.shape(bit) + (N,)


def _col(x):
    """Per-frame scalar -> broadcastable against (..., N)."""
    return np.asarray(x, dtype=float)[..., None]


def _check_even(N: int):
    if N % 2:
        raise ValueError(f"frame length must be even for pairing, got N={N}")


def paired_block(mean, variance: float, rho, bit_shape: tuple, N: int, rng) -> np.ndarray:
    """N/2 correlated pairs laid out as [first members | second members]."""
    _check_even(N)
    M = N // 2
    rho = _col(rho)
    sd = math.sqrt(variance)
    x = rng.standard_normal(bit_shape + (M,))
    z = rng.standard_normal(bit_shape + (M,))
    y = rho * x + np.sqrt(1.0 - rho * rho) * z
    return mean + sd * np.concatenate([x, y], axis=-1)


def ul_mean_frame(bit, powers: DerivedPowers, seed: SeedLike) -> np.ndarray:
    rng = as_rng(seed)
    shape = _frame_shape(bit, powers.N)
    m = _col(powers.m1(bit))
    return m + math.sqrt(powers.sigma1_sq) * rng.standard_normal(shape)


def ul_variance_frame(bit, powers: DerivedPowers, seed: SeedLike) -> np.ndarray:
    rng = as_rng(seed)
    shape = _frame_shape(bit, powers.N)
    sd = np.sqrt(_col(powers.sigma2_sq(bit)))
    return sd * rng.standard_normal(shape)


def ul_correlation_frame(bit, powers: DerivedPowers, seed: SeedLike) -> np.ndarray:
    rng = as_rng(seed)
    return paired_block(
        powers.m3, powers.sigma3_sq, powers.rho(bit), np.shape(bit), powers.N, rng
    )


def dl_bs_frame(bits, powers: DerivedPowers, model: DlModel = "superposed", seed: SeedLike = 0):
    """Base-station frame carrying ``bits = (b1, b2, b3)``.

    ``joint``: pairs drawn from N(m1, sigma2k^2 [[1, rho], [rho, 1]]).
    ``superposed``: DC level m1 + i.i.d. N(0, sigma2k^2) + an independent
    zero-mean correlated-pair component of power ``(1 - psi) P``.
    """
    if model not in DL_MODELS:
        raise ValueError(f"unknown downlink model {model!r}; expected one of {DL_MODELS}")
    b1, b2, b3 = bits
    N = powers.N
    _check_even(N)
    rng = as_rng(seed)
    shape = np.broadcast_shapes(np.shape(b1), np.shape(b2), np.shape(b3))
    mean = _col(np.broadcast_to(powers.m1(b1), shape))
    var2 = np.broadcast_to(powers.sigma2_sq(b2), shape)
    rho = np.broadcast_to(powers.rho(b3), shape)
    if model == "joint":
        return mean + np.sqrt(_col(var2)) * paired_block(0.0, 1.0, rho, shape, N, rng)
    s2 = np.sqrt(_col(var2)) * rng.standard_normal(shape + (N,))
    s3 = paired_block(0.0, powers.sigma3_sq, rho, shape, N, rng)
    return mean + s2 + s3
