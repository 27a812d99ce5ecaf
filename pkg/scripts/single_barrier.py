"""Magnitude and phase of F and B for one barrier across momentum.

    python scripts/single_barrier.py --m 10 --gamma 0.999 > barrier.csv
"""

import argparse
import sys

import numpy as np

from cqtm import ModelParams, single_barrier_coeffs
from cqtm.output import csv_text, header_fields, header_lines


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--gamma", type=float, default=0.999)
    ap.add_argument("--kmin", type=float, default=0.001)
    ap.add_argument("--kmax", type=float, default=0.5)
    ap.add_argument("--points", type=int, default=2000)
    args = ap.parse_args()

    params = ModelParams(args.gamma)
    k = np.linspace(args.kmin, args.kmax, args.points)
    c = single_barrier_coeffs(args.m, k, params)
    rows = zip(k, c.abs_F, c.phase_F, c.abs_B, c.phase_B)
    head = header_lines("single barrier", header_fields(vars(args)))
    sys.stdout.write(csv_text(["k", "absF", "phaseF", "absB", "phaseB"], rows, head))

    i = int(np.argmin(c.abs_B))
    at = single_barrier_coeffs(args.m, params.k_star, params)
    print(f"k*={params.k_star:.4f}: |F|={at.abs_F:.4f} |B|={at.abs_B:.4f}", file=sys.stderr)
    print(f"smallest |B|={c.abs_B[i]:.2e} at k={k[i]:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
