import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ndnoma import SystemParams, derive
from ndnoma.channel import downlink_receive, uplink_combine
from ndnoma.detectors import detect_u1_ul, detect_u2_dl, detect_u2_ul, detect_u3_ul, dl_u2_variances
from ndnoma.noise import ChannelRealization, SeedSpec
from ndnoma.theory import (
    GaussianProposal,
    average_over_fading,
    bep_u1_dl,
    bep_u1_ul,
    bep_u2_dl,
    bep_u2_ul,
    bep_u3_dl,
    bep_u3_ul,
    conditional_bep,
    cross_cov_moments,
    pair_covariance,
    q_function,
    sigma_c_sq_mc,
    sigma_c_sq_moments,
    variance_stat_moments,
)
from ndnoma.waveforms import dl_bs_frame, ul_correlation_frame, ul_mean_frame, ul_variance_frame

SQ = math.sqrt(0.5)
LOS = ChannelRealization(complex(SQ, SQ), complex(SQ, SQ), complex(SQ, SQ))


def ul_at(delta_db, **kw):
    return derive(SystemParams(**kw).with_delta_db(delta_db), "uplink")


def dl_at(delta_db, **kw):
    return derive(SystemParams(beta=1 / 1024, **kw).with_delta_db(delta_db), "downlink")


def simulate_uplink(pw, ch, frames, seed):
    """Error counts per user at a fixed channel."""
    r = SeedSpec(seed).rng()
    errs = np.zeros(3, dtype=int)
    B = 5000
    for _ in range(frames // B):
        b = r.integers(0, 2, (3, B))
        y = uplink_combine(
            ul_mean_frame(b[0], pw, r),
            ul_variance_frame(b[1], pw, r),
            ul_correlation_frame(b[2], pw, r),
            ch,
            pw.sigmaw_sq,
            r,
        )
        errs += [
            np.count_nonzero(detect_u1_ul(y, ch, pw) != b[0]),
            np.count_nonzero(detect_u2_ul(y, ch, pw) != b[1]),
            np.count_nonzero(detect_u3_ul(y, ch, pw) != b[2]),
        ]
    return errs


def within_3_sigma(errors, frames, p):
    return abs(errors / frames - p) <= 3 * math.sqrt(max(p * (1 - p), 1e-12) / frames)


# ------------------------------------------------------------- Q


def test_q_function_values():
    assert q_function(0.0) == 0.5
    assert q_function(40.0) < 1e-300
    ref, _ = integrate.quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 1.2816, np.inf)
    assert q_function(1.2816) == pytest.approx(0.1, abs=1e-4)
    assert q_function(1.2816) == pytest.approx(ref, abs=1e-12)


# ------------------------------------------------------------- U1


def test_u1_noiseless_is_zero(ul_powers):
    quiet = replace(ul_powers, sigma1_sq=0.0, sigma2l_sq=0.0, sigma2h_sq=0.0, eta=0.0, sigmaw_sq=0.0)
    assert bep_u1_ul(LOS, quiet) == 0.0


def test_u1_zero_separation(ul_powers):
    assert bep_u1_ul(LOS, replace(ul_powers, m1l=0.0, m1h=0.0)) == pytest.approx(0.5)


def test_u1_fixed_channel_simulation():
    pw = ul_at(-25.0)
    frames = 200_000
    errs = simulate_uplink(pw, LOS, frames, seed=21)
    assert within_3_sigma(errs[0], frames, float(bep_u1_ul(LOS, pw)))


def test_u1_symmetric_in_bit(ul_powers):
    # m1h = -m1l, so conditioning on either bit gives the same Q argument
    flipped = replace(ul_powers, m1l=ul_powers.m1h, m1h=ul_powers.m1l)
    assert bep_u1_ul(LOS, flipped) == pytest.approx(bep_u1_ul(LOS, ul_powers), rel=1e-14)


# ------------------------------------------------------------- U2


def test_variance_stat_moments_example():
    mu, var = variance_stat_moments(0.6, 0.4, 0.1, 200)
    assert mu == pytest.approx(1.005025, abs=1e-6)
    assert var == pytest.approx(0.0054545, abs=1e-7)


def test_variance_stat_moments_empirical():
    r = np.random.default_rng(22)
    cov = np.array([[0.6, 0.1], [0.1, 0.4]])
    L = np.linalg.cholesky(cov)
    frames, N = 100_000, 200
    s = np.empty(frames)
    for i in range(0, frames, 10_000):
        z = r.standard_normal((10_000, N, 2)) @ L.T
        y = z[..., 0] + 1j * z[..., 1]
        d = y - y.mean(axis=-1, keepdims=True)
        s[i : i + 10_000] = (np.abs(d) ** 2).sum(axis=-1) / (N - 1)
    mu, var = variance_stat_moments(0.6, 0.4, 0.1, N)
    # mean of s_y^2 is exactly (sr2 + si2) for the unbiased estimator; the closed form has N/(N-1)
    assert s.mean() == pytest.approx(mu, abs=0.006)
    assert s.var() == pytest.approx(var, rel=0.03)


def test_u2_degenerate_limits(ul_powers):
    assert bep_u2_ul(LOS, ul_at(0.0, alpha=1 + 1e-12)) == pytest.approx(0.5, abs=1e-6)
    assert bep_u2_ul(ChannelRealization(LOS.h1, 0.0, LOS.h3), ul_powers) == pytest.approx(0.5)


def test_u2_fixed_channel_simulation():
    pw = ul_at(-15.0)
    frames = 100_000
    errs = simulate_uplink(pw, LOS, frames, seed=23)
    assert within_3_sigma(errs[1], frames, float(bep_u2_ul(LOS, pw)))


# ------------------------------------------------------------- U3


def test_u3_clean_limit():
    pw = replace(ul_at(60.0), sigma1_sq=0.0, sigma2l_sq=0.0, sigma2h_sq=0.0)
    ch = ChannelRealization(0.0, 0.0, 1.0)
    assert bep_u3_ul(ch, pw, method="moments") < 1e-10


def test_u3_equal_rho_limit():
    pw = ul_at(0.0, rho_l=0.3, rho_h=0.3 + 1e-10)
    assert bep_u3_ul(LOS, pw, method="moments") == pytest.approx(0.5, abs=1e-6)


def test_cross_cov_moments_match_simulation():
    """Exact mean/variance of the estimator vs direct sampling of Gaussian pairs."""
    pw = ul_at(0.0)
    S = pair_covariance(LOS, pw, 1, 1)
    mean, var = cross_cov_moments(S, pw.N)
    r = np.random.default_rng(24)
    M = pw.N // 2
    L = np.linalg.cholesky(S + 1e-12 * np.eye(4))
    z = r.standard_normal((50_000, M, 4)) @ L.T
    u = z[..., 0] + 1j * z[..., 1]
    v = z[..., 2] + 1j * z[..., 3]
    u = u - u.mean(axis=-1, keepdims=True)
    v = v - v.mean(axis=-1, keepdims=True)
    c = (u.real * v.real + u.imag * v.imag).sum(axis=-1) / M
    assert c.mean() == pytest.approx(mean, abs=4 * math.sqrt(var / 50_000))
    assert c.var() == pytest.approx(var, rel=0.03)


@pytest.mark.parametrize(
    "link,model", [("uplink", "superposed"), ("downlink", "superposed"), ("downlink", "joint")]
)
@pytest.mark.parametrize("b2", [0, 1])
def test_sigma_c_routes_agree(link, model, b2):
    pw = ul_at(0.0) if link == "uplink" else dl_at(-10.0)
    ch = ChannelRealization(0.9 + 0.3j, 0.5 - 0.6j, 0.7 + 0.8j)
    exact = sigma_c_sq_moments(ch, pw, b2, model)
    n = 20_000
    mc = sigma_c_sq_mc(ch, pw, b2, n, SeedSpec(25, (link, model, b2)), model)
    # each half-sample variance has relative s.e. about sqrt(2/(n/2)) (fourth moments of a
    # near-Gaussian statistic); the two halves are averaged
    se = exact * math.sqrt(2 / (n / 2)) / math.sqrt(2) * 1.5
    assert abs(mc - exact) <= 3 * se


def test_u3_inner_mc_stable():
    pw = ul_at(0.0)
    a = bep_u3_ul(LOS, pw, 10_000, SeedSpec(26, ("a",)))
    b = bep_u3_ul(LOS, pw, 10_000, SeedSpec(26, ("b",)))
    # dp/dsigma: Q(x) with x = gap / (2 sigma); a 2% s.e. on sigma_C^2 moves x by 1%
    x = float(np.abs(pw.sigma3_sq * 2) / (2 * math.sqrt(sigma_c_sq_moments(LOS, pw, 0))))
    se = math.exp(-x * x / 2) / math.sqrt(2 * math.pi) * x * 0.5 * math.sqrt(2 / 5000)
    assert abs(a - b) <= 3 * math.sqrt(2) * se


def test_u3_fixed_channel_simulation():
    pw = ul_at(0.0)
    frames = 100_000
    errs = simulate_uplink(pw, LOS, frames, seed=27)
    assert within_3_sigma(errs[2], frames, float(bep_u3_ul(LOS, pw, method="moments")))


def test_u3_unknown_method(ul_powers):
    with pytest.raises(ValueError):
        bep_u3_ul(LOS, ul_powers, method="guess")


# ------------------------------------------------------------- downlink


def test_dl_psi_limit():
    # hold the noise floor fixed; at fixed delta it would shrink with the AC power
    pw = replace(dl_at(0.0, psi=1 - 1e-10), sigmaw_sq=dl_at(0.0).sigmaw_sq)
    assert bep_u2_dl(LOS, pw) == pytest.approx(0.5, abs=1e-4)
    assert bep_u3_dl(LOS, pw, method="moments") == pytest.approx(0.5, abs=1e-4)


def test_dl_u2_worked_example_value(dl_powers):
    # h2 = 1 (real): the imaginary part carries noise only and c = 0
    ch = ChannelRealization(1.0, 1.0, 1.0)
    N = dl_powers.N
    s0, s1 = dl_u2_variances(1.0, dl_powers)
    sw2 = dl_powers.sigmaw_sq / 2
    mu0, v0 = N / (N - 1) * s0, 2 * N / (N - 1) ** 2 * ((s0 - sw2) ** 2 + sw2**2)
    mu1, v1 = N / (N - 1) * s1, 2 * N / (N - 1) ** 2 * ((s1 - sw2) ** 2 + sw2**2)
    expected = q_function((mu1 - mu0) / (math.sqrt(v0) + math.sqrt(v1)))
    assert bep_u2_dl(ch, dl_powers) == pytest.approx(float(expected), rel=1e-12)


def test_dl_u2_worked_example_vs_simulation(dl_powers):
    """Closed-form DL U2 at the worked point vs a fixed-channel simulation (3 sigma)."""
    frames = 200_000
    r = SeedSpec(28).rng()
    errors = 0
    for _ in range(frames // 5000):
        b = r.integers(0, 2, (3, 5000))
        y = downlink_receive(dl_bs_frame(tuple(b), dl_powers, "superposed", r), 1.0, dl_powers.sigmaw_sq, r)
        errors += np.count_nonzero(detect_u2_dl(y, 1.0, dl_powers) != b[1])
    p = float(bep_u2_dl(ChannelRealization(1.0, 1.0, 1.0), dl_powers))
    assert within_3_sigma(errors, frames, p), f"sim {errors / frames:.3e} vs theory {p:.3e}"


def test_dl_u1_finite(dl_powers):
    assert 0.0 <= bep_u1_dl(LOS, dl_powers) <= 0.5


# ------------------------------------------------------------- shape / bounds


@settings(max_examples=60, deadline=None)
@given(
    comps=st.lists(st.floats(-2, 2, allow_nan=False), min_size=6, max_size=6),
    delta_db=st.floats(-40, 20),
)
def test_beps_are_probabilities(comps, delta_db):
    ch = ChannelRealization.from_components(np.array(comps))
    for link in ("uplink", "downlink"):
        pw = ul_at(delta_db) if link == "uplink" else dl_at(delta_db)
        for u in (1, 2, 3):
            v = float(conditional_bep(link, u, pw)(ch, None))
            assert 0.0 <= v <= 0.5 + 1e-12


@pytest.mark.parametrize("user", [1, 2, 3])
def test_more_samples_help(user):
    f = [float(conditional_bep("uplink", user, ul_at(-20.0, N=n))(LOS, None)) for n in (50, 100, 150, 200, 400)]
    assert all(b <= a for a, b in zip(f, f[1:]))


def test_u1_lowest_on_uplink():
    seed = SeedSpec(29)
    pw = ul_at(0.0)
    est = {u: average_over_fading(conditional_bep("uplink", u, pw), 10.0, 20_000, seed.child(u)).value for u in (1, 2, 3)}
    assert est[1] < est[2] and est[1] < est[3]


# ------------------------------------------------------------- fading average


def test_constant_conditional_exact():
    est = average_over_fading(lambda ch, rng: np.full(np.shape(ch.h1), 0.123), 10.0, 70_000, SeedSpec(30))
    assert est.value == 0.123 and est.std_error == 0.0 and est.J_used == 70_000


def test_worker_count_does_not_matter():
    f = conditional_bep("uplink", 2, ul_at(-10.0))
    a = average_over_fading(f, 10.0, 100_000, SeedSpec(31), workers=1)
    b = average_over_fading(f, 10.0, 100_000, SeedSpec(31), workers=3)
    assert a == b


@pytest.mark.parametrize("link,delta", [("uplink", -25.0), ("downlink", -20.0)])
def test_near_deterministic_channel(link, delta):
    pw = ul_at(delta) if link == "uplink" else dl_at(delta)
    for u in (1, 2, 3):
        f = conditional_bep(link, u, pw)
        est = average_over_fading(f, 1e6, 5_000, SeedSpec(32, (link, u)))
        assert est.value == pytest.approx(float(f(LOS, None)), rel=1e-3)


def test_independent_seeds_agree():
    f = conditional_bep("uplink", 3, ul_at(0.0))
    a = average_over_fading(f, 10.0, 100_000, SeedSpec(33, ("a",)))
    b = average_over_fading(f, 10.0, 100_000, SeedSpec(33, ("b",)))
    assert abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error)


def test_unit_weight_proposal_matches_plain():
    from ndnoma.noise import rician_component_law

    mu, var = rician_component_law(10.0)
    f = conditional_bep("uplink", 2, ul_at(-10.0))
    plain = average_over_fading(f, 10.0, 50_000, SeedSpec(34))
    same = average_over_fading(f, 10.0, 50_000, SeedSpec(34), proposal=GaussianProposal(mu, math.sqrt(var)))
    assert same.value == pytest.approx(plain.value, rel=1e-12)
    wide = average_over_fading(f, 10.0, 200_000, SeedSpec(35), proposal=GaussianProposal(mu, 1.2 * math.sqrt(var)))
    assert abs(wide.value - plain.value) <= 3 * math.hypot(wide.std_error, plain.std_error)


def test_rejects_bad_J():
    with pytest.raises(ValueError):
        average_over_fading(lambda ch, rng: 0.0, 10.0, 0, SeedSpec(1))
