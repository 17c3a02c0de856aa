"""Seedable random sources: Gaussian blocks, correlated pairs, Rician taps, AWGN.

Every function takes either a :class:`SeedSpec` or a ready
``numpy.random.Generator``.  A SeedSpec is hashed into its own PCG64 stream,
so two specs with different ``stream_id`` never share state and the same
spec always replays the same samples.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

Shape = Union[int, tuple]

_MASK64 = (1 << 64) - 1


def _tag_to_int(tag) -> int:
    if isinstance(tag, (bool, np.bool_)):
        tag = int(tag)
    if isinstance(tag, (int, np.integer)) and 0 <= int(tag) <= _MASK64:
        return int(tag)
    digest = hashlib.blake2b(repr(tag).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: tuple = ()

    def entropy(self) -> list[int]:
        return [self.master_seed & _MASK64] + [_tag_to_int(t) for t in self.stream_id]

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.entropy())))

    def child(self, *tags) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_id + tags)


SeedLike = Union[SeedSpec, np.random.Generator, int]


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.rng()
    return SeedSpec(int(seed)).rng()


@dataclass(frozen=True)
class ChannelRealization:
    """Complex taps for the three users; scalars or equally shaped arrays."""

    h1: complex
    h2: complex
    h3: complex

    def __post_init__(self):
        for name in ("h1", "h2", "h3"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"channel coefficient {name} is not finite")

    def components(self) -> np.ndarray:
        """Real view ``(..., 6)`` ordered h1R, h1I, h2R, h2I, h3R, h3I."""
        h = [np.asarray(x, dtype=complex) for x in (self.h1, self.h2, self.h3)]
        return np.stack([p for x in h for p in (x.real, x.imag)], axis=-1)

    @classmethod
    def from_components(cls, c) -> "ChannelRealization":
        c = np.asarray(c, dtype=float)
        return cls(c[..., 0] + 1j * c[..., 1], c[..., 2] + 1j * c[..., 3], c[..., 4] + 1j * c[..., 5])

    def __getitem__(self, idx) -> "ChannelRealization":
        return ChannelRealization(
            np.asarray(self.h1)[idx], np.asarray(self.h2)[idx], np.asarray(self.h3)[idx]
        )

    def rotated(self, phase: float) -> "ChannelRealization":
        u = np.exp(1j * phase)
        return ChannelRealization(self.h1 * u, self.h2 * u, self.h3 * u)


def rician_component_law(K: float) -> tuple[float, float]:
    """(mean, variance) of each real/imaginary tap component."""
    return math.sqrt(K / (2.0 * (1.0 + K))), 1.0 / (2.0 * (1.0 + K))


def gaussian_block(mean, variance: float, n: Shape, seed: SeedLike) -> np.ndarray:
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    shape = tuple(int(k) for k in np.atleast_1d(n))
    if np.prod(shape) < 1:
        raise ValueError("n must be >= 1")
    if variance == 0:
        return np.broadcast_to(np.asarray(mean, dtype=float), shape).copy()
    return mean + math.sqrt(variance) * as_rng(seed).standard_normal(shape)


def correlated_pairs(
    mean, variance: float, rho, n_pairs: Shape, seed: SeedLike
) -> tuple[np.ndarray, np.ndarray]:
    """Two vectors with the given marginals and cross-correlation ``rho``.

    ``rho`` may be an array broadcastable against the leading axes of
    ``n_pairs`` (one coefficient per frame).
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) > 1):
        raise ValueError(f"|rho| must be <= 1, got {rho}")
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    rng = as_rng(seed)
    sd = math.sqrt(variance)
    x = rng.standard_normal(n_pairs)
    z = rng.standard_normal(n_pairs)
    y = rho * x + np.sqrt(1.0 - rho * rho) * z
    return mean + sd * x, mean + sd * y


def rician_channel(K: float, seed: SeedLike, size: Shape | None = None) -> ChannelRealization:
    """Draw h1, h2, h3; ``size`` adds leading batch dimensions."""
    if not (K >= 0 and math.isfinite(K)):
        raise ValueError(f"K must be finite and >= 0, got {K}")
    mu, var = rician_component_law(K)
    shape = (6,) if size is None else tuple(np.atleast_1d(size)) + (6,)
    c = mu + math.sqrt(var) * as_rng(seed).standard_normal(shape)
    return ChannelRealization.from_components(c)


def awgn_block(sigmaw_sq: float, n: Shape, seed: SeedLike) -> np.ndarray:
    if sigmaw_sq < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigmaw_sq}")
    if sigmaw_sq == 0:
        return np.zeros(n, dtype=complex)
    rng = as_rng(seed)
    sd = math.sqrt(sigmaw_sq / 2.0)
    # interleaved draw keeps one stream call per block
    w = rng.standard_normal(tuple(np.atleast_1d(n)) + (2,))
    return (sd * w).view(np.complex128)[..., 0]
