"""Statistical self-checks run by ``ndnoma validate`` and the acceptance suite.

Each check compares an implementation path with an independent oracle
(empirical moments, root finding, quadrature) and returns a :class:`Check`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .detectors import sample_variance, variance_threshold
from .noise import SeedSpec, correlated_pairs, rician_channel
from .theory import q_function


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def rician_second_moment(K: float, draws: int = 1_000_000, seed: int = 11, tol: float = 0.01) -> Check:
    ch = rician_channel(K, SeedSpec(seed, ("check-rician", K)), size=draws)
    worst = max(abs(float(np.mean(np.abs(h) ** 2)) - 1.0) for h in (ch.h1, ch.h2, ch.h3))
    return Check(f"rician E|h|^2=1 K={K:g}", worst <= tol, f"max |E|h|^2 - 1| = {worst:.2e} (tol {tol:g})")


def correlated_pair_rho(rho: float, pairs: int = 1_000_000, seed: int = 12, tol: float = 0.01) -> Check:
    x, y = correlated_pairs(0.0, 1.0, rho, pairs, SeedSpec(seed, ("check-rho", rho)))
    if np.std(y) == 0 or np.std(x) == 0:
        est = math.nan
    else:
        est = float(np.corrcoef(x, y)[0, 1])
    err = abs(est - rho)
    return Check(f"pair correlation rho={rho:g}", err <= tol, f"empirical {est:.5f} (tol {tol:g})")


def _pdf_equality_root(s0_sq: float, s1_sq: float) -> float:
    """x^2 where N(0, s0_sq) and N(0, s1_sq) densities cross, by bracketing."""
    def diff(x):
        return (-0.5 * math.log(s0_sq) - x * x / (2 * s0_sq)) - (
            -0.5 * math.log(s1_sq) - x * x / (2 * s1_sq)
        )

    hi = math.sqrt(s1_sq)
    while diff(hi) > 0:
        hi *= 2
    x = optimize.brentq(diff, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return x * x


def threshold_vs_pdf_root(pairs: int = 10_000, seed: int = 13, rtol: float = 1e-9) -> Check:
    rng = SeedSpec(seed, ("check-threshold",)).rng()
    s0 = 10 ** rng.uniform(-3, 3, pairs)
    s1 = s0 * (1 + 10 ** rng.uniform(-3, 3, pairs))
    gamma = variance_threshold(s0, s1)
    worst = 0.0
    for g, a, b in zip(gamma, s0, s1):
        ref = _pdf_equality_root(a, b)
        worst = max(worst, abs(g - ref) / ref)
    return Check("variance threshold vs pdf-equality root", worst <= rtol, f"max rel err {worst:.2e} over {pairs} pairs")


def q_function_vs_quadrature(points: int = 801, atol: float = 1e-10) -> Check:
    xs = np.linspace(0.0, 8.0, points)

    def pdf(t):
        return math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)

    worst = 0.0
    for x in xs:
        ref, _ = integrate.quad(pdf, x, x + 40.0, epsabs=1e-15, epsrel=1e-13, limit=200)
        worst = max(worst, abs(float(q_function(x)) - ref))
    return Check("Q-function vs tail quadrature on [0, 8]", worst <= atol, f"max abs err {worst:.2e}")


def sample_variance_unbiased(frames: int = 100_000, N: int = 200, var: float = 3.0, seed: int = 14, rtol: float = 0.005) -> Check:
    rng = SeedSpec(seed, ("check-svar",)).rng()
    sd = math.sqrt(var / 2)
    est = 0.0
    done = 0
    while done < frames:
        b = min(10_000, frames - done)
        y = sd * (rng.standard_normal((b, N)) + 1j * rng.standard_normal((b, N))) + (0.7 - 0.2j)
        est += float(sample_variance(y).sum())
        done += b
    est /= frames
    err = abs(est / var - 1)
    return Check("sample variance unbiased", err <= rtol, f"mean {est:.5f} vs {var} (rel err {err:.2e})")


def run_all(quick: bool = False) -> list[Check]:
    scale = 10 if quick else 1
    out = [rician_second_moment(K, 1_000_000 // scale) for K in (1.0, 3.162, 10.0)]
    out += [correlated_pair_rho(r, 1_000_000 // scale) for r in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    out.append(threshold_vs_pdf_root(10_000 // scale))
    out.append(q_function_vs_quadrature(801 // scale + 1))
    out.append(sample_variance_unbiased(100_000 // scale))
    return out
