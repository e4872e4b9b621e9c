"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Default setting: A = [[2, 1], [0, 3]], p = 1/2, q = 2, s = auto, 50 atoms with
k in [-3, 3], grid_res 64, frequency annuli m in [-12, 12]. Criterion 12 uses
A = 2I. Run on its own with ``pytest -s tests/test_acceptance.py``.
"""

import math

import numpy as np
import pytest

from anisohardy import rearrange as rr
from anisohardy import suite
from anisohardy.atoms import AdmissibleTriplet, check_atom, min_moment_order
from anisohardy.dilation import power_apply
from anisohardy.fourier import all_derivative_orders, check_commutation, derivative_bound, log_radial_freqs
from anisohardy.quasinorm import comparison_violations, rho, sample_vectors, step_index, verify_comparison
from anisohardy.verify import envelope_slope, make_annuli, make_annulus_test

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def sweep():
    cfg = suite.RunConfig()
    D, Q, Qs = suite.build(cfg)
    spec = cfg.triplets[0]
    t = AdmissibleTriplet.for_dilation(spec["p"], spec["q"], spec["s"], D)
    sw = suite.Sweep(cfg, t, D, Q, Qs)
    sw.spectra  # noqa: B018 - computed once for every criterion
    return sw


@pytest.fixture
def verdict(capsys):
    def emit(number: int, name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {name}: {detail}")
        assert ok, detail
    return emit


def _failures(records, prefix):
    sel = [r for r in records if r["check"] == prefix or r["check"].startswith(prefix + ".")]
    return sel, [r for r in sel if not r["pass"]]


def test_01_homogeneity(sweep, verdict):
    Q, D = sweep.Q, sweep.D
    rng = np.random.default_rng(101)
    X = sample_vectors(rng, 2, 10_000)
    ks = rng.integers(-20, 21, size=len(X))
    j = step_index(Q, X)
    bad = 0
    worst = 0.0
    for k in range(-20, 21):
        sel = ks == k
        Y = power_apply(D, k, X[sel])
        bad += int(np.sum(step_index(Q, Y) != j[sel] + k))
        worst = max(worst, float(np.max(np.abs(rho(Q, Y) / (D.b**k * rho(Q, X[sel])) - 1.0), initial=0.0)))
    # the index identity is an integer identity; rho = b^j is a float power
    verdict(1, "exact homogeneity", bad == 0 and worst <= 1e-14,
            f"{bad} index mismatches over 10^4 vectors, |k| <= 20; max rel rho deviation {worst:.1e}")


def test_02_comparison(sweep, verdict):
    Q = sweep.Q
    fit = sample_vectors(np.random.default_rng(201), 2, 10_000)
    held = sample_vectors(np.random.default_rng(202), 2, 10_000)
    c_A, fit_bad = verify_comparison(Q, fit)
    bad = comparison_violations(Q, held, 1.05 * c_A)
    verdict(2, "norm comparison", fit_bad == 0 and bad == 0,
            f"c_A = {c_A:.4f}; {bad} held-out violations at 1.05 c_A")


def test_03_atom_contract(sweep, verdict):
    reps = [check_atom(a) for a in sweep.atoms]
    moments = max(r.max_moment_residual for r in reps)
    size = max(abs(r.size_ratio - 1.0) for r in reps)
    supp = all(r.support_ok for r in reps)
    m1 = min_moment_order(1.0, sweep.D)
    ok = moments <= 1e-8 and size <= 1e-10 and supp and m1 == 0
    verdict(3, "atom contract", ok,
            f"{len(reps)} atoms; max moment residual {moments:.1e}; max size deviation {size:.1e}; "
            f"min_moment_order(1) = {m1}")


def test_04_commutation(sweep, verdict):
    freqs = sample_vectors(np.random.default_rng(401), 2, 20, log_radius=3.0)
    worst = max(check_commutation(a, j, freqs) for a in sweep.atoms[:20] for j in range(-3, 4))
    verdict(4, "dilation commutes with the transform", worst <= 1e-10,
            f"max residual {worst:.2e} over 20 atoms x j in [-3, 3] x 20 frequencies")


def test_05_pointwise(sweep, verdict):
    recs, bad = _failures(suite.check_pointwise(sweep), "pointwise")
    main = [r for r in recs if r["check"] == "pointwise"]
    inv = [r for r in recs if r["check"] == "pointwise.dilation"]
    finite = all(math.isfinite(r["constant"]) for r in main)
    verdict(5, "pointwise bound", finite and not bad,
            f"max/median {main[0]['spread']:.2f} over {len(main)} atoms; "
            f"max dilation deviation {max(r['constant'] for r in inv):.1e}; {len(bad)} failing records")


def test_06_derivative_bound(sweep, verdict):
    freqs = log_radial_freqs(2, count=200, directions=8)
    orders = all_derivative_orders(2, sweep.triplet.s)
    atoms = sweep.atoms[:20]
    table = np.array([[derivative_bound(a, alpha, freqs) for alpha in orders] for a in atoms])
    finite = bool(np.all(np.isfinite(table)))
    rel = table / np.median(table, axis=0)
    lo, hi = float(rel.min()), float(rel.max())
    stable = 0.8 <= lo and hi <= 1.2
    verdict(6, "derivative bound", finite and stable,
            f"finite for all {len(orders)} orders |alpha| <= {sweep.triplet.s}: {finite}; "
            f"seed spread [{lo:.2f}, {hi:.2f}] x median (band [0.80, 1.20])")


def test_07_origin_decay(sweep, verdict):
    recs = suite.check_origin(sweep)
    bad = [r for r in recs if not r["pass"]]
    slopes = [r["constant"] for r in recs]
    verdict(7, "decay at the origin", not bad,
            f"required slope {recs[0]['tolerance']:.4f}; measured min {min(slopes):.4f}, "
            f"median {float(np.median(slopes)):.4f}; {len(bad)}/{len(recs)} atoms below")


def test_08_hl_sum(sweep, verdict):
    recs, bad = _failures(suite.check_hl(sweep), "hl")
    main = [r for r in recs if r["check"] == "hl"]
    combo = [r for r in recs if r["check"] == "hl.combination"]
    verdict(8, "annulus sum", not bad and len(combo) == 10,
            f"max/median {main[0]['spread']:.2f}; worst tail rate {max(r['tail_rate'] for r in main):.3f}; "
            f"worst combination / bound {max(r['constant'] for r in combo):.3f}")


def test_09_multiplier(sweep, verdict):
    Qs = sweep.Qstar
    bump = make_annulus_test(Qs)
    pts = np.concatenate([sweep.points, sample_vectors(np.random.default_rng(901), 2, 10_000)])
    g = bump(pts)
    j = step_index(Qs, pts)
    props = bool(np.all((g >= 0) & (g <= 1)) and np.all(g[j == 0] == 1.0) and np.all(g[(j >= 2) | (j < -1)] == 0.0))
    recs, bad = _failures(suite.check_multiplier(sweep), "multiplier")
    inv = [r for r in recs if r.get("case") == "rho_inverse"]
    growth = [r["constant"] for r in inv]
    verdict(9, "annulus multiplier", props and not bad,
            f"bump properties exact: {props}; identity and sign pass; rho^-1 sup / b^-k in "
            f"[{min(growth):.3f}, {max(growth):.3f}] (band [1/b, b])")


def test_10_rearrangement(sweep, verdict):
    recs, bad = _failures(suite.check_rearrange(sweep), "rearrange")
    power = max(r["constant"] for r in recs if r["check"] == "rearrange.power")
    scale = max(r["constant"] for r in recs if r["check"] == "rearrange.scaling")
    pair = max(r["constant"] for r in recs if r["check"] == "rearrange.pairing")
    # 100 random tuples of atom fields with random coefficients
    rng = np.random.default_rng(1001)
    lam = 1.0 / sweep.triplet.p - 1.0 + sweep.cfg.eps
    fields = [rr.annulus_field(v, sweep.annuli, sweep.D.b, lam) for v in sweep.spectra]
    sub_bad = 0
    for _ in range(100):
        idx = rng.choice(len(fields), size=int(rng.integers(2, 6)), replace=False)
        Fs = [rr.MeasuredField(abs(rng.normal()) * fields[i].values, fields[i].measures, "frequency", fields[i].points)
              for i in idx]
        t = float(np.exp(rng.uniform(np.log(Fs[0].measures.min()), np.log(Fs[0].total_measure))))
        lhs, rhs = rr.subadditivity_check(Fs, t)
        sub_bad += lhs > rhs * (1 + 1e-12)
    ok = not bad and power == 0.0 and scale <= 1e-12 and pair <= 1e-10 and sub_bad == 0
    verdict(10, "rearrangement exactness", ok,
            f"power identity {power:.1e}; scaling {scale:.1e}; pairing gap {pair:.1e}; "
            f"subadditivity violations {sub_bad}/100")


def test_11_lorentz(sweep, verdict):
    recs, bad = _failures(suite.check_lorentz(sweep), "lorentz")
    main = [r for r in recs if r["check"] == "lorentz"]
    inv = [r for r in recs if r["check"] == "lorentz.dilation"]
    major = all(r["majorized"] for r in recs)
    verdict(11, "Lorentz functional", not bad and major,
            f"max/median {main[0]['spread']:.2f} over {len(main)} unit atoms; "
            f"max dilation deviation {max(r['constant'] for r in inv):.1e}; majorized on every run: {major}")


def test_12_isotropic_slope(verdict):
    cfg = suite.RunConfig(matrix=[[2.0, 0.0], [0.0, 2.0]])
    D, Q, Qs = suite.build(cfg)
    t = AdmissibleTriplet.for_dilation(0.5, 2.0, "auto", D)
    sw = suite.Sweep(cfg, t, D, Q, Qs)
    slope, levels = envelope_slope(sw.atoms, make_annuli(Qs, -12, 12, cfg.annulus_points), D.b)
    target = 1.0 / t.p - 1.0
    verdict(12, "isotropic reduction", abs(slope - target) <= 0.1 * target,
            f"envelope slope {slope:.4f} vs {target:.1f} over levels {levels[0]}..{levels[-1]}")
