"""Coherent transmission of the full distribution against the incoherent product.

The incoherent estimate treats the barriers of width m as independent
scatterers: (1 - |B_m|^2)^count, count taken from the census of R_N.
"""

import argparse

import numpy as np

from cqtm import ModelParams, barrier_census, expand_sequence, incoherent_transmission, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=18)
    ap.add_argument("--gamma", type=float, default=0.999)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--kmin", type=float, default=0.05)
    ap.add_argument("--kmax", type=float, default=0.22)
    ap.add_argument("--points", type=int, default=2000)
    args = ap.parse_args()

    params = ModelParams(args.gamma, args.n)
    count = barrier_census(expand_sequence(args.n))[args.m]
    recs = sweep(args.n, params, args.kmin, args.kmax, args.points)
    k = np.array([r.k for r in recs])
    coherent = np.array([r.transmission for r in recs])
    band = np.array([r.band for r in recs])
    incoherent = incoherent_transmission(args.m, count, k, params)

    ratio = coherent[band] / incoherent[band]
    print(f"{count} barriers of width {args.m} at N={args.n}, gamma={args.gamma}")
    print(f"band points: {band.sum()} of {len(recs)}")
    print(f"median coherent T on bands: {np.median(coherent[band]):.3g}")
    print(f"median incoherent T on bands: {np.median(incoherent[band]):.3g}")
    print(f"band points with coherent >= 10x incoherent: {(ratio >= 10).sum()}")
    print(f"largest ratio: {ratio.max():.3g} at k={k[band][np.argmax(ratio)]:.5f}")


if __name__ == "__main__":
    main()
