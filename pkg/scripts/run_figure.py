"""Run one figure preset and print the table as BER/BEP columns per user.

    python3 scripts/run_figure.py fig5 --out results/fig5.csv
"""

import argparse
import sys
from collections import defaultdict

from ndnoma.cli import PRESETS, main as cli_main
from ndnoma.csvio import read_csv


def show(path):
    table = defaultdict(dict)
    for r in read_csv(path):
        table[(r.k_db, r.n, r.delta_db)][r.user] = r
    for (k, n, d), users in sorted(table.items()):
        cols = "  ".join(f"U{u} {users[u].ber:9.2e}/{users[u].bep_theory:9.2e}" for u in sorted(users))
        print(f"K={k:g}dB N={n} delta={d:+4g}dB  {cols}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("figure", choices=sorted(PRESETS))
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", default="1")
    ap.add_argument("--threads", default="1")
    ap.add_argument("--max-bits")
    ap.add_argument("--J")
    args = ap.parse_args()
    out = args.out or f"{args.figure}.csv"
    argv = ["reproduce", args.figure, "--out", out, "--seed", args.seed, "--threads", args.threads]
    if args.max_bits:
        argv += ["--max-bits", args.max_bits]
    if args.J:
        argv += ["--J", args.J]
    rc = cli_main(argv)
    if rc == 0:
        show(out)
    return rc


if __name__ == "__main__":
    sys.exit(main())
