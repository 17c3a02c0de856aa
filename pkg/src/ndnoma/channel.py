"""Block-fading propagation: one channel realization per frame, plus AWGN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import ChannelRealization, SeedLike, as_rng, awgn_block


@dataclass(frozen=True)
class ReceivedFrame:
    """Complex samples plus the taps that produced them (held over the frame)."""

    samples: np.ndarray
    channel: object


def _tap(h) -> np.ndarray:
    return np.asarray(h, dtype=complex)[..., None]


def uplink_combine(f1, f2, f3, ch: ChannelRealization, sigmaw_sq: float, seed: SeedLike) -> ReceivedFrame:
    f1, f2, f3 = (np.asarray(f, dtype=float) for f in (f1, f2, f3))
    if not (f1.shape == f2.shape == f3.shape):
        raise ValueError(f"frame shapes differ: {f1.shape}, {f2.shape}, {f3.shape}")
    y = _tap(ch.h1) * f1 + _tap(ch.h2) * f2 + _tap(ch.h3) * f3
    y = y + awgn_block(sigmaw_sq, f1.shape, as_rng(seed))
    return ReceivedFrame(y, ch)


def downlink_receive(f, h, sigmaw_sq: float, seed: SeedLike) -> ReceivedFrame:
    """What one downlink user with tap ``h`` observes."""
    f = np.asarray(f, dtype=float)
    return ReceivedFrame(_tap(h) * f + awgn_block(sigmaw_sq, f.shape, as_rng(seed)), h)
