"""Spread of the sample variance at one fixed channel versus the CLT form used by the U2 theory.

Shows how the paired U3 samples inflate the spread of s_y^2 relative to the
i.i.d. approximation, which is where U2 theory and simulation part ways at high delta.
"""

import argparse
import math

import numpy as np

from ndnoma import SystemParams, derive
from ndnoma.channel import downlink_receive, uplink_combine
from ndnoma.detectors import sample_variance
from ndnoma.noise import ChannelRealization, SeedSpec
from ndnoma.theory import dl_u2_components, ul_u2_components, variance_stat_moments
from ndnoma.waveforms import dl_bs_frame, ul_correlation_frame, ul_mean_frame, ul_variance_frame


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--link", choices=("uplink", "downlink"), default="uplink")
    ap.add_argument("--delta-db", type=float, default=10.0)
    ap.add_argument("--frames", type=int, default=100_000)
    args = ap.parse_args()

    beta = 0.01 if args.link == "uplink" else 1 / 1024
    pw = derive(SystemParams(beta=beta).with_delta_db(args.delta_db), args.link)
    h = complex(math.sqrt(0.5), math.sqrt(0.5))
    ch = ChannelRealization(h, h, h)
    rng = SeedSpec(1, ("u2-probe",)).rng()
    for b2 in (0, 1):
        F = args.frames
        b = rng.integers(0, 2, (3, F))
        b[1] = b2
        if args.link == "uplink":
            y = uplink_combine(
                ul_mean_frame(b[0], pw, rng), ul_variance_frame(b[1], pw, rng),
                ul_correlation_frame(b[2], pw, rng), ch, pw.sigmaw_sq, rng,
            )
            comps = ul_u2_components(ch, pw, pw.sigma2_sq(b2))
        else:
            y = downlink_receive(dl_bs_frame(tuple(b), pw, "superposed", rng), h, pw.sigmaw_sq, rng)
            comps = dl_u2_components(ch, pw, pw.sigma2_sq(b2))
        s = sample_variance(y)
        mu, var = variance_stat_moments(*comps, pw.N)
        print(
            f"b2={b2}: mean {s.mean():.4f} (CLT {mu:.4f})  std {s.std():.4f} (CLT {math.sqrt(var):.4f})"
            f"  ratio {s.std() / math.sqrt(var):.3f}"
        )


if __name__ == "__main__":
    main()
