"""Closed-form Lorentz integrals against a truncated trapezoid rule.

With eps * p small the weight t^{eps p - 1} is barely integrable at 0, so a
geometric grid on [1e-6, 1e6] misses a large share of the integral.
"""

import numpy as np

from anisohardy import suite
from anisohardy.atoms import AdmissibleTriplet, make_atom
from anisohardy.rearrange import lorentz_functional
from anisohardy.verify import make_annuli, spectrum


def main():
    cfg = suite.RunConfig()
    D, Q, Qs = suite.build(cfg)
    t = AdmissibleTriplet.for_dilation(0.5, 2.0, "auto", D)
    ann = make_annuli(Qs, cfg.m_lo, cfg.m_hi, cfg.annulus_points)
    pts = np.concatenate([A.points for A in ann])
    for seed in range(3):
        v = spectrum(make_atom(Q, t, k=0, seed=seed), pts)
        ex = lorentz_functional(v, ann, D.b, 0.5, 0.1)
        tr = lorentz_functional(v, ann, D.b, 0.5, 0.1, method="trapezoid")
        head, tail = tr.tails
        print(f"seed {seed}: exact I_w {ex.weighted:.4f}  trapezoid {tr.weighted:.4f}  "
              f"head estimate {head:.4f}  tail estimate {tail:.2e}  I_avg/I_w {ex.averaged / ex.weighted:.6f}")


if __name__ == "__main__":
    main()
