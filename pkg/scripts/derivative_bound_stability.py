"""Seed spread of the normalised derivative bound, per derivative order."""

import argparse

import numpy as np

from anisohardy import suite
from anisohardy.atoms import AdmissibleTriplet, make_atom
from anisohardy.fourier import all_derivative_orders, derivative_bound, log_radial_freqs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--directions", type=int, default=8)
    args = ap.parse_args()
    D, Q, _ = suite.build(suite.RunConfig())
    t = AdmissibleTriplet.for_dilation(0.5, 2.0, "auto", D)
    freqs = log_radial_freqs(2, count=200, directions=args.directions)
    atoms = [make_atom(Q, t, k=0, grid_res=args.grid, seed=s) for s in range(args.seeds)]
    for alpha in all_derivative_orders(2, t.s):
        v = np.array([derivative_bound(a, alpha, freqs) for a in atoms])
        med = np.median(v)
        print(f"alpha={alpha}  median {med:.4g}  spread [{v.min() / med:.2f}, {v.max() / med:.2f}]")


if __name__ == "__main__":
    main()
