"""Desk-scale verification of the Fourier-side estimates for H^p_A.

Frequency space is covered by annuli ``B*_{m+1} \\ B*_m`` on which the dual
quasi-norm is constant (= b^m). Every annulus is the image under (A*)^m of one
rejection-sampled unit annulus, so the annulus families for an atom and for
its dilates are exact images of each other ("matched").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atoms import Atom, AtomicCombination
from .errors import EmptyAnnuli, ScaleMismatch
from .fourier import ft
from .quasinorm import QuasiNorm, step_index


@dataclass(frozen=True, eq=False)
class FrequencyAnnulus:
    level: int
    points: np.ndarray
    measures: np.ndarray

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.measures))


@dataclass(frozen=True)
class VerificationReport:
    check: str
    constant: float
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {"check": self.check, "constant": self.constant, "tolerance": self.tolerance, "pass": self.passed}
        rec.update(self.metadata)
        return rec


def sample_unit_annulus(Qstar: QuasiNorm, count: int, seed: int = 0) -> np.ndarray:
    """Uniform points of B*_1 minus B*_0 by rejection from the bounding box of B*_1."""
    rng = np.random.default_rng(seed)
    h = Qstar.bounding_halfwidths(1)
    kept: list[np.ndarray] = []
    have = 0
    while have < count:
        X = rng.uniform(-h, h, size=(max(4 * count, 256), Qstar.dim))
        X = X[Qstar.contains(X, 1) & ~Qstar.contains(X, 0)]
        kept.append(X)
        have += len(X)
    return np.concatenate(kept)[:count]


def make_annuli(Qstar: QuasiNorm, m_lo: int, m_hi: int, points: int = 256, seed: int = 0) -> list[FrequencyAnnulus]:
    base = sample_unit_annulus(Qstar, points, seed)
    b = Qstar.b
    out = []
    for m in range(m_lo, m_hi + 1):
        X = base @ Qstar.dilation.power(m).T
        # rounding may push a boundary point into a neighbouring shell
        X = X[step_index(Qstar, X) == m]
        w = np.full(len(X), b**m * (b - 1.0) / len(X))
        out.append(FrequencyAnnulus(level=m, points=X, measures=w))
    return out


def shift_annuli(annuli: list[FrequencyAnnulus], Qstar: QuasiNorm, j: int) -> list[FrequencyAnnulus]:
    """Images of the annuli under (A*)^j: level m goes to m + j, measures scale by b^j."""
    P = Qstar.dilation.power(j)
    return [FrequencyAnnulus(level=A.level + j, points=A.points @ P.T, measures=A.measures * Qstar.b**j) for A in annuli]


def _stack(annuli: list[FrequencyAnnulus]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not annuli or all(len(A.points) == 0 for A in annuli):
        raise EmptyAnnuli("no annulus samples")
    pts = np.concatenate([A.points for A in annuli])
    lev = np.concatenate([np.full(len(A.points), A.level) for A in annuli])
    w = np.concatenate([A.measures for A in annuli])
    return pts, lev, w


def spectrum(f, freqs) -> np.ndarray:
    """f^ at the frequencies for an atom or an atomic combination."""
    if isinstance(f, AtomicCombination):
        out = np.zeros(len(freqs), dtype=complex)
        for lam, a in zip(f.coefficients, f.atoms):
            out += lam * ft(a, freqs).values
        return out
    return ft(f, freqs).values


def _norm_proxy(f) -> float:
    return f.lp_norm if isinstance(f, AtomicCombination) else 1.0


def per_annulus_sup(values: np.ndarray, annuli: list[FrequencyAnnulus]) -> dict[int, float]:
    out = {}
    i = 0
    for A in annuli:
        out[A.level] = float(np.max(np.abs(values[i : i + len(A.points)]), initial=0.0))
        i += len(A.points)
    return out


def pointwise_ratio(f, annuli: list[FrequencyAnnulus], b: float, values: np.ndarray | None = None) -> float:
    """sup |f^(xi)| / rho_*(xi)^{1/p - 1}, normalised by the l^p coefficient norm."""
    pts, lev, _ = _stack(annuli)
    p = f.triplet.p
    if values is None:
        values = spectrum(f, pts)
    ratio = np.abs(values) / b ** (lev * (1.0 / p - 1.0))
    return float(np.max(ratio)) / _norm_proxy(f)


def two_regime_check(a: Atom, annuli: list[FrequencyAnnulus], values: np.ndarray | None = None) -> tuple[float, float]:
    pts, lev, _ = _stack(annuli)
    t = a.triplet
    b = a.quasinorm.b
    zeta = a.dilation.zeta_minus
    if values is None:
        values = spectrum(a, pts)
    mag = np.abs(values)
    base = b ** (a.k * (1.0 - 1.0 / t.p))
    near = lev <= -a.k
    if near.any():
        # rho_* = b^lev on each annulus
        denom = base * b ** ((t.s + 1) * zeta * (a.k + lev[near]))
        c_near = float(np.max(mag[near] / denom))
    else:
        c_near = 0.0
    return c_near, float(np.max(mag) / base)


@dataclass(frozen=True)
class DecayReport:
    slope: float
    required: float
    exponent: float
    levels: tuple[int, ...]
    ratios: tuple[float, ...]
    passed: bool


def origin_levels(b: float, lo: float = 1e-6, hi: float = 1e-2) -> tuple[int, int]:
    return math.ceil(math.log(lo) / math.log(b) - 1e-12), math.floor(math.log(hi) / math.log(b) + 1e-12)


def origin_decay(f, annuli: list[FrequencyAnnulus], b: float, zeta_minus: float, noise: float = 1e-9) -> DecayReport:
    """Log-log slope of sup_annulus |f^| / rho_*^{1/p-1} against rho_* near the origin.

    Only annuli with rho_* <= b^{-k} enter the fit (for combinations, the
    smallest such bound over the atoms): that is where the near-origin
    estimate for an atom supported on a translate of B_k applies.
    """
    kmax = max(a.k for a in f.atoms) if isinstance(f, AtomicCombination) else f.k
    annuli = [A for A in annuli if A.level <= -kmax]
    pts, lev, _ = _stack(annuli)
    t = f.triplet
    values = spectrum(f, pts) / _norm_proxy(f)
    sups = per_annulus_sup(values, annuli)
    levels = sorted(sups)
    ratios = np.array([sups[m] / b ** (m * (1.0 / t.p - 1.0)) for m in levels])
    exponent = (t.s + 1) * zeta_minus - (1.0 / t.p - 1.0)
    keep = ratios > noise
    if keep.sum() >= 2:
        x = np.array(levels, dtype=float)[keep] * math.log(b)
        slope = float(np.polyfit(x, np.log(ratios[keep]), 1)[0])
    else:
        slope = math.nan
    required = 0.9 * exponent
    return DecayReport(
        slope=slope,
        required=required,
        exponent=exponent,
        levels=tuple(levels),
        ratios=tuple(float(r) for r in ratios),
        passed=bool(exponent > 0 and keep.sum() >= 2 and slope >= required),
    )


@dataclass(frozen=True)
class HLResult:
    total: float
    contributions: dict[int, float]


def hl_integral(f, annuli: list[FrequencyAnnulus], b: float, m_lo: int | None = None, m_hi: int | None = None,
                values: np.ndarray | None = None) -> HLResult:
    """Truncated sum over annuli of |f^|^p rho_*^{p-2} times the cell measures."""
    sel = [A for A in annuli if (m_lo is None or A.level >= m_lo) and (m_hi is None or A.level <= m_hi)]
    pts, lev, w = _stack(sel)
    p = f.triplet.p
    if values is None:
        values = spectrum(f, pts)
    elif len(values) != len(pts):
        raise ValueError("values must align with the selected annuli")
    dens = np.abs(values) ** p * b ** (lev * (p - 2.0)) * w
    contrib = {}
    i = 0
    for A in sel:
        contrib[A.level] = float(np.sum(dens[i : i + len(A.points)]))
        i += len(A.points)
    # summing per-annulus contributions keeps totals monotone in the range
    return HLResult(total=float(sum(contrib[m] for m in sorted(contrib))), contributions=contrib)


def geometric_tail(contributions: dict[int, float], start: int) -> tuple[float, bool]:
    """Fitted per-annulus decay rate beyond ``start`` and whether the tail decays geometrically."""
    levels = sorted(m for m in contributions if m >= start)
    c = np.array([contributions[m] for m in levels])
    if len(c) < 3 or np.any(c <= 0):
        return math.nan, False
    rate = float(np.exp(np.polyfit(levels, np.log(c), 1)[0]))
    return rate, bool(rate < 1.0 and np.all(c[1:] < c[:-1]))


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, all derivatives vanish at both ends."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        f1 = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return f0 / (f0 + f1)


@dataclass(frozen=True, eq=False)
class AnnulusBump:
    """Smooth g with g = 1 on B*_1 minus B*_0 and support in B*_2 minus B*_{-1}.

    Built from a continuous radial coordinate R = j + tau on the shell j, where
    tau interpolates the quadratic forms of the two bounding ellipsoids.
    """

    Qstar: QuasiNorm

    def radial(self, xi) -> np.ndarray:
        X = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.full(len(X), -np.inf)
        nz = np.any(X != 0.0, axis=1)
        if not nz.any():
            return out
        Xn = X[nz]
        j = step_index(self.Qstar, Xn)
        c = self.Qstar.level
        q_in = np.empty(len(Xn))
        q_out = np.empty(len(Xn))
        for m in np.unique(j):
            sel = j == m
            q_in[sel] = self.Qstar.quadratic(Xn[sel], int(m))
            q_out[sel] = self.Qstar.quadratic(Xn[sel], int(m) + 1)
        tau = (q_in - c) / (q_in - q_out)
        out[nz] = j + tau
        return out

    def __call__(self, xi) -> np.ndarray:
        R = self.radial(xi)
        g = np.zeros(len(R))
        rise = (R >= -1) & (R < 0)
        g[rise] = _smooth_step(R[rise] + 1.0)
        g[(R >= 0) & (R < 1)] = 1.0
        fall = (R >= 1) & (R < 2)
        g[fall] = _smooth_step(2.0 - R[fall])
        return g


def make_annulus_test(Qstar: QuasiNorm) -> AnnulusBump:
    return AnnulusBump(Qstar)


def calibrate_bump_constant(bump: AnnulusBump, annuli: list[FrequencyAnnulus], p: float) -> float:
    """Empirical C ||f|| in the pointwise bound for the test field with f^ = g."""
    pts, lev, _ = _stack(annuli)
    g = bump(pts)
    return float(np.max(g / bump.Qstar.b ** (lev * (1.0 / p - 1.0))))


@dataclass(frozen=True)
class MultiplierVerdict:
    level: int
    sup_m: float
    sup_product: float
    bound: float
    passed: bool


def multiplier_annulus_bound(m_values, annulus: FrequencyAnnulus, k: int, M: float, bump: AnnulusBump,
                             constant: float) -> MultiplierVerdict:
    """Check sup |m(xi) g((A*)^{-k} xi)| <= C M on the annulus of level k."""
    Qs = bump.Qstar
    m_values = np.asarray(m_values, dtype=float)
    if annulus.level != k or len(m_values) != len(annulus.points):
        raise ScaleMismatch(f"samples are not on the annulus of level {k}")
    if np.any(step_index(Qs, annulus.points) != k):
        raise ScaleMismatch(f"sample points leave the annulus of level {k}")
    pulled = annulus.points @ Qs.dilation.power(-k).T
    prod = np.abs(m_values * bump(pulled))
    sup_prod = float(np.max(prod, initial=0.0))
    bound = constant * M
    return MultiplierVerdict(level=k, sup_m=float(np.max(np.abs(m_values), initial=0.0)), sup_product=sup_prod,
                             bound=bound, passed=sup_prod <= bound)


def envelope_slope(atoms: list[Atom], annuli: list[FrequencyAnnulus], b: float) -> tuple[float, list[int]]:
    """Log-log slope (in the rho_* variable) of the envelope max_atoms sup_annulus |a^|.

    The fit uses the annuli where the atoms' pointwise ratios peak, i.e. where
    the envelope is carried by atoms of different scales.
    """
    pts, lev, _ = _stack(annuli)
    p = atoms[0].triplet.p
    env = {A.level: 0.0 for A in annuli}
    peak_levels = []
    for a in atoms:
        vals = spectrum(a, pts)
        sups = per_annulus_sup(vals, annuli)
        for m, v in sups.items():
            env[m] = max(env[m], v)
        ratios = {m: v / b ** (m * (1.0 / p - 1.0)) for m, v in sups.items()}
        peak_levels.append(max(ratios, key=ratios.get))
    levels = list(range(min(peak_levels), max(peak_levels) + 1))
    x = np.array(levels, dtype=float) * math.log(b)
    y = np.log([env[m] for m in levels])
    return float(np.polyfit(x, y, 1)[0]), levels
