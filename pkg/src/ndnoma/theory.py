"""Conditional and fading-averaged bit error probabilities.

Conditional forms take a :class:`~ndnoma.noise.ChannelRealization` whose taps
may be arrays; the result has the taps' shape.  Interferer bits that change a
form (U2's variance level) are averaged over their two equiprobable values.

U3's decision-statistic variance has no closed form.  Two routes
estimate it for a fixed channel:

* ``method="mc"``: empirical variance of the half-frame cross-covariance over
  synthetic frames (the reference route);
* ``method="moments"``: the exact variance of that same estimator.  Given the
  channel and bits, the ``N/2`` pairs ``(y[n], y[n + N/2])`` are i.i.d.
  4-variate real Gaussians, so ``M * C_hat`` is Wishart with ``M - 1`` degrees
  of freedom and its entry covariances are known.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import erfc

from .channel import downlink_receive, uplink_combine
from .detectors import empirical_cross_cov
from .noise import ChannelRealization, SeedSpec, as_rng, rician_component_law
from .params import DerivedPowers
from .waveforms import DlModel, dl_bs_frame, ul_correlation_frame, ul_mean_frame, ul_variance_frame

U3_INNER_DRAWS = 10_000
FADING_CHUNK = 1 << 15


def q_function(x):
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def _parts(h):
    h = np.asarray(h, dtype=complex)
    return h.real, h.imag


def _ratio_q(num, den):
    """Q(num/den) with den == 0 mapped to 0 (separable) or 0.5 (num == 0)."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 0.0))
    return q_function(x)


def _mean_detection_bep(h1, m, var_r, var_i, cov):
    h1r, h1i = _parts(h1)
    m_d = (h1r**2 + h1i**2) * m * m
    var_d = m * m * (h1r**2 * var_r + h1i**2 * var_i + 2.0 * h1r * h1i * cov)
    return _ratio_q(m_d, np.sqrt(np.maximum(var_d, 0.0)))


# ---------------------------------------------------------------- U1


def bep_u1_ul(ch: ChannelRealization, powers: DerivedPowers):
    N = powers.N
    (h1r, h1i), (h2r, h2i), (h3r, h3i) = _parts(ch.h1), _parts(ch.h2), _parts(ch.h3)
    s1, u3, sw = powers.sigma1_sq, powers.eta * powers.params.P, powers.sigmaw_sq
    out = 0.0
    for s2 in (powers.sigma2l_sq, powers.sigma2h_sq):
        var_r = (h1r**2 * s1 + h2r**2 * s2 + u3 * h3r**2 + sw / 2) / N
        var_i = (h1i**2 * s1 + h2i**2 * s2 + u3 * h3i**2 + sw / 2) / N
        cov = (h1r * h1i * s1 + h2r * h2i * s2 + u3 * h3r * h3i) / N
        out = out + 0.5 * _mean_detection_bep(ch.h1, powers.m1l, var_r, var_i, cov)
    return out


def bep_u1_dl(ch: ChannelRealization, powers: DerivedPowers):
    """Downlink U1 with the h1-only variance block of the closed form.

    The interference coefficient ``beta P^2 / sigma_w^2`` is kept as stated
    even though it does not track the transmitted waveform.
    """
    N = powers.N
    p = powers.params
    h1r, h1i = _parts(ch.h1)
    sw = powers.sigmaw_sq
    x = p.beta * p.P**2 / sw
    out = 0.0
    for s2 in (powers.sigma2l_sq, powers.sigma2h_sq):
        var_r = (h1r**2 * s2 + x * h1r**2 + sw / 2) / N
        var_i = (h1i**2 * s2 + x * h1i**2 + sw / 2) / N
        cov = (h1r * h1i * s2 + x * h1r * h1i) / N
        out = out + 0.5 * _mean_detection_bep(ch.h1, powers.m1l, var_r, var_i, cov)
    return out


# ---------------------------------------------------------------- U2


def variance_stat_moments(sr2, si2, c, N: int):
    """CLT mean and variance of the sample variance for R/I covariance (sr2, si2, c)."""
    mu = N / (N - 1) * (sr2 + si2)
    var = 2.0 * N / (N - 1) ** 2 * (sr2**2 + si2**2 + 2.0 * c**2)
    return mu, var


def _variance_detection_bep(stats0, stats1, N):
    mu0, v0 = variance_stat_moments(*stats0, N)
    mu1, v1 = variance_stat_moments(*stats1, N)
    return _ratio_q(mu1 - mu0, np.sqrt(v0) + np.sqrt(v1))


def ul_u2_components(ch: ChannelRealization, powers: DerivedPowers, sigma2_sq: float):
    (h1r, h1i), (h2r, h2i), (h3r, h3i) = _parts(ch.h1), _parts(ch.h2), _parts(ch.h3)
    s1, sw, eps = powers.sigma1_sq, powers.sigmaw_sq, powers.epsilon
    sr2 = h1r**2 * s1 + h2r**2 * sigma2_sq + eps * sw * h3r**2 + sw / 2
    si2 = h1i**2 * s1 + h2i**2 * sigma2_sq + eps * sw * h3i**2 + sw / 2
    c = h1r * h1i * s1 + h2r * h2i * sigma2_sq + eps * sw * h3r * h3i
    return sr2, si2, c


def dl_u2_components(ch: ChannelRealization, powers: DerivedPowers, sigma2_sq: float):
    h2r, h2i = _parts(ch.h2)
    sw, ac = powers.sigmaw_sq, (1.0 - powers.params.psi) * powers.params.P
    sr2 = h2r**2 * sigma2_sq + ac * h2r**2 + sw / 2
    si2 = h2i**2 * sigma2_sq + ac * h2i**2 + sw / 2
    c = h2r * h2i * sigma2_sq + ac * h2r * h2i
    return sr2, si2, c


def bep_u2_ul(ch: ChannelRealization, powers: DerivedPowers):
    return _variance_detection_bep(
        ul_u2_components(ch, powers, powers.sigma2l_sq),
        ul_u2_components(ch, powers, powers.sigma2h_sq),
        powers.N,
    )


def bep_u2_dl(ch: ChannelRealization, powers: DerivedPowers):
    return _variance_detection_bep(
        dl_u2_components(ch, powers, powers.sigma2l_sq),
        dl_u2_components(ch, powers, powers.sigma2h_sq),
        powers.N,
    )


# ---------------------------------------------------------------- U3


def _outer2(h):
    hr, hi = _parts(h)
    return np.stack(
        [np.stack([hr * hr, hr * hi], axis=-1), np.stack([hr * hi, hi * hi], axis=-1)], axis=-2
    )


def pair_covariance(ch, powers: DerivedPowers, b2: int, b3: int, dl_model: DlModel = "superposed"):
    """Covariance of (uR, uI, vR, vI) with u = y[n], v = y[n + N/2]; shape (..., 4, 4)."""
    s2 = powers.sigma2_sq(b2)
    rho = powers.rho(b3)
    if powers.link == "uplink":
        indep = [(ch.h1, powers.sigma1_sq), (ch.h2, s2)]
        paired = (ch.h3, powers.sigma3_sq)
        sw = powers.sigmaw_sq
    else:
        h = ch if not isinstance(ch, ChannelRealization) else ch.h3
        if dl_model == "joint":
            indep, paired = [], (h, s2)
        else:
            indep, paired = [(h, s2)], (h, powers.sigma3_sq)
        sw = powers.sigmaw_sq
    hp, vp = paired
    same = vp * _outer2(hp) + (sw / 2) * np.eye(2)
    for h, v in indep:
        same = same + v * _outer2(h)
    cross = rho * vp * _outer2(hp)
    top = np.concatenate([same, cross], axis=-1)
    bottom = np.concatenate([np.swapaxes(cross, -1, -2), same], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def cross_cov_moments(S, N: int):
    """Exact mean and variance of the half-frame cross-covariance statistic."""
    M = N // 2
    n = M - 1
    mean = n / M * (S[..., 0, 2] + S[..., 1, 3])
    var = (
        n
        / M**2
        * (
            S[..., 0, 0] * S[..., 2, 2]
            + S[..., 0, 2] ** 2
            + S[..., 1, 1] * S[..., 3, 3]
            + S[..., 1, 3] ** 2
            + 2.0 * (S[..., 0, 1] * S[..., 2, 3] + S[..., 0, 3] * S[..., 2, 1])
        )
    )
    return mean, var


def _u3_tap(ch):
    return ch.h3 if isinstance(ch, ChannelRealization) else ch


def sigma_c_sq_moments(ch, powers: DerivedPowers, b2: int, dl_model: DlModel = "superposed"):
    """Decision-statistic variance for U2 bit ``b2``, averaged over both U3 bits."""
    v = [cross_cov_moments(pair_covariance(ch, powers, b2, b3, dl_model), powers.N)[1] for b3 in (0, 1)]
    return 0.5 * (v[0] + v[1])


def _synthetic_stats(ch: ChannelRealization, powers, b2: int, b3, n_frames, rng, dl_model):
    b1 = rng.integers(0, 2, n_frames)
    b2v = np.full(n_frames, b2)
    if powers.link == "uplink":
        f1 = ul_mean_frame(b1, powers, rng)
        f2 = ul_variance_frame(b2v, powers, rng)
        f3 = ul_correlation_frame(b3, powers, rng)
        y = uplink_combine(f1, f2, f3, ch, powers.sigmaw_sq, rng)
    else:
        s = dl_bs_frame((b1, b2v, b3), powers, dl_model, rng)
        y = downlink_receive(s, ch.h3, powers.sigmaw_sq, rng)
    return empirical_cross_cov(y)


def sigma_c_sq_mc(
    ch: ChannelRealization,
    powers: DerivedPowers,
    b2: int,
    inner_draws: int = U3_INNER_DRAWS,
    seed=0,
    dl_model: DlModel = "superposed",
):
    """Inner Monte Carlo estimate for one scalar channel; half the frames per U3 bit."""
    if inner_draws < 1000:
        raise ValueError(f"inner_draws must be >= 1000, got {inner_draws}")
    rng = as_rng(seed)
    half = inner_draws // 2
    out = []
    for b3 in (0, 1):
        stats = _synthetic_stats(ch, powers, b2, np.full(half, b3), half, rng, dl_model)
        out.append(np.var(stats, ddof=1))
    return 0.5 * (out[0] + out[1])


def _bep_u3(ch, powers, method, inner_draws, seed, dl_model):
    ref0, ref1 = _references(ch, powers)
    gap = np.abs(ref1 - ref0)
    if method == "moments":
        out = 0.0
        for b2 in (0, 1):
            out = out + 0.5 * _ratio_q(gap, 2.0 * np.sqrt(sigma_c_sq_moments(ch, powers, b2, dl_model)))
        return out
    if method != "mc":
        raise ValueError(f"unknown sigma_C method {method!r}")
    rng = as_rng(seed)
    shape = np.shape(ch.h3)
    out = np.empty(shape)
    for idx in np.ndindex(*shape):
        one = ch[idx] if shape else ch
        p = 0.0
        for b2 in (0, 1):
            s = sigma_c_sq_mc(one, powers, b2, inner_draws, rng, dl_model)
            p += 0.5 * float(_ratio_q(gap[idx], 2.0 * math.sqrt(s)))
        out[idx] = p
    return out if shape else float(out)


def _references(ch, powers):
    h3 = _u3_tap(ch)
    g = np.abs(np.asarray(h3)) ** 2 * powers.sigma3_sq
    return g * powers.rho_l, g * powers.rho_h


def bep_u3_ul(ch, powers, inner_draws: int = U3_INNER_DRAWS, seed=0, method: str = "mc"):
    return _bep_u3(ch, powers, method, inner_draws, seed, "superposed")


def bep_u3_dl(ch, powers, inner_draws: int = U3_INNER_DRAWS, seed=0, method: str = "mc", dl_model: DlModel = "superposed"):
    return _bep_u3(ch, powers, method, inner_draws, seed, dl_model)


def conditional_bep(link: str, user: int, powers: DerivedPowers, *, u3_method="moments", inner_draws=U3_INNER_DRAWS, dl_model: DlModel = "superposed"):
    """Return ``f(ch, rng) -> probability`` for use with :func:`average_over_fading`."""
    table = {
        ("uplink", 1): lambda ch, rng: bep_u1_ul(ch, powers),
        ("uplink", 2): lambda ch, rng: bep_u2_ul(ch, powers),
        ("uplink", 3): lambda ch, rng: bep_u3_ul(ch, powers, inner_draws, rng, u3_method),
        ("downlink", 1): lambda ch, rng: bep_u1_dl(ch, powers),
        ("downlink", 2): lambda ch, rng: bep_u2_dl(ch, powers),
        ("downlink", 3): lambda ch, rng: bep_u3_dl(ch, powers, inner_draws, rng, u3_method, dl_model),
    }
    try:
        return table[(link, user)]
    except KeyError:
        raise ValueError(f"no BEP form for link={link!r}, user={user!r}") from None


# ---------------------------------------------------------------- fading average


@dataclass(frozen=True)
class BepEstimate:
    value: float
    std_error: float
    J_used: int


@dataclass(frozen=True)
class GaussianProposal:
    """Independent Gaussian sampling density for each of the six tap components."""

    mean: float
    std: float


def _log_normal_pdf(x, mean, std):
    return -0.5 * ((x - mean) / std) ** 2 - math.log(std) - 0.5 * math.log(2 * math.pi)


def _chunk_stats(conditional, K, n, seed: SeedSpec, proposal):
    rng = seed.rng()
    mu, var = rician_component_law(K)
    sd = math.sqrt(var)
    if proposal is None:
        comps = mu + sd * rng.standard_normal((n, 6))
        weights = None
    else:
        comps = proposal.mean + proposal.std * rng.standard_normal((n, 6))
        logw = (
            _log_normal_pdf(comps, mu, sd) - _log_normal_pdf(comps, proposal.mean, proposal.std)
        ).sum(axis=-1)
        weights = np.exp(logw)
    x = np.asarray(conditional(ChannelRealization.from_components(comps), rng), dtype=float)
    if weights is not None:
        x = x * weights
    m = float(x.mean())
    return n, m, float(((x - m) ** 2).sum())


def average_over_fading(
    conditional: Callable,
    K: float,
    J: int,
    seed: SeedSpec,
    proposal: Optional[GaussianProposal] = None,
    workers: int = 1,
    chunk: int = FADING_CHUNK,
) -> BepEstimate:
    """Estimate E_h[P_b(h)] as (1/J) sum g/z over J channel draws.

    With ``proposal=None`` the sampling density equals the Rician component
    density and every weight is exactly 1.  ``J`` is split into fixed-size
    chunks, each with its own sub-stream, and merged in chunk order, so the
    result does not depend on ``workers``.
    """
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    sizes = [chunk] * (J // chunk) + ([J % chunk] if J % chunk else [])
    seeds = [seed.child("fading-chunk", i) for i in range(len(sizes))]

    def run(i):
        return _chunk_stats(conditional, K, sizes[i], seeds[i], proposal)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]

    n, mean, m2 = parts[0]
    for nb, mb, m2b in parts[1:]:
        tot = n + nb
        d = mb - mean
        mean = mean + d * nb / tot
        m2 = m2 + m2b + d * d * n * nb / tot
        n = tot
    se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    return BepEstimate(mean, se, n)
