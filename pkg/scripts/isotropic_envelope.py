"""Envelope slope of |a^| over rho_*-annuli for A = 2I."""

import argparse

from anisohardy import suite
from anisohardy.atoms import AdmissibleTriplet
from anisohardy.verify import envelope_slope, make_annuli


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--seeds", default="0..49")
    args = ap.parse_args()
    cfg = suite.RunConfig(matrix=[[2, 0], [0, 2]], seeds=args.seeds)
    D, Q, Qs = suite.build(cfg)
    t = AdmissibleTriplet.for_dilation(args.p, 2.0, "auto", D)
    sw = suite.Sweep(cfg, t, D, Q, Qs)
    slope, levels = envelope_slope(sw.atoms, make_annuli(Qs, cfg.m_lo, cfg.m_hi, cfg.annulus_points), D.b)
    print(f"triplet {t.label()}  slope {slope:.4f}  target {1 / t.p - 1:.4f}  levels {levels[0]}..{levels[-1]}")


if __name__ == "__main__":
    main()
