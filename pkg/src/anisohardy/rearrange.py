"""Distribution functions, decreasing rearrangements and the Lorentz-type functional.

Fields are finite weighted samples, so every rearrangement here is a step
function and the identities between them hold exactly (same sort, same
cumulative sums), not approximately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import BadExponent, GridMismatch, NonpositiveThreshold, ScaleMismatch


@dataclass(frozen=True, eq=False)
class MeasuredField:
    values: np.ndarray
    measures: np.ndarray
    domain: str = "spatial"
    points: np.ndarray | None = None

    def __post_init__(self):
        v = np.abs(np.asarray(self.values, dtype=float)).ravel()
        w = np.asarray(self.measures, dtype=float).ravel()
        if v.shape != w.shape:
            raise GridMismatch("values and measures differ in length")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if np.any(w <= 0):
            raise ValueError("measures must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "measures", w)

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.measures))

    def _sorted(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(-self.values, kind="stable")
        return self.values[order], np.cumsum(self.measures[order])


@dataclass(frozen=True, eq=False)
class RearrangementProfile:
    """Right-continuous f* = levels[i] on [breakpoints[i], breakpoints[i+1]), 0 afterwards."""

    breakpoints: np.ndarray  # t_0 = 0 < t_1 < ... < t_N
    levels: np.ndarray  # v_1 > v_2 > ... > v_N > 0

    @property
    def support_measure(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.breakpoints, t, side="right") - 1
        padded = np.append(self.levels, 0.0)
        i = np.clip(i, 0, len(self.levels))
        return padded[i]

    def distribution(self, s: float) -> float:
        """d(s) recovered from the profile: total length of the levels above s."""
        if s <= 0:
            raise NonpositiveThreshold(f"threshold must be positive, got {s!r}")
        j = int(np.sum(self.levels > s))
        return float(self.breakpoints[j])

    def integral(self, t: float, power: float = 1.0) -> float:
        """int_0^t f*(u)^power du."""
        T = self.breakpoints
        seg = np.minimum(T[1:], t) - np.minimum(T[:-1], t)
        return float(np.sum(seg * self.levels**power))

    def to_records(self) -> list[dict]:
        return [{"t": float(t), "level": float(v)} for t, v in zip(self.breakpoints[:-1], self.levels)]


def distribution(F: MeasuredField, t: float) -> float:
    """d_f(t): total measure of the samples with value > t."""
    if t <= 0:
        raise NonpositiveThreshold(f"threshold must be positive, got {t!r}")
    v, cum = F._sorted()
    count = int(np.sum(F.values > t))
    return float(cum[count - 1]) if count else 0.0


def rearrangement(F: MeasuredField) -> RearrangementProfile:
    v, cum = F._sorted()
    pos = v > 0
    v, cum = v[pos], cum[pos]
    if len(v) == 0:
        return RearrangementProfile(breakpoints=np.zeros(1), levels=np.zeros(0))
    # last index of each run of equal values
    last = np.flatnonzero(np.append(v[1:] != v[:-1], True))
    return RearrangementProfile(breakpoints=np.concatenate([[0.0], cum[last]]), levels=v[last])


def power_field(F: MeasuredField, lam: float) -> MeasuredField:
    return MeasuredField(values=F.values**lam, measures=F.measures, domain=F.domain, points=F.points)


def power_identity_check(F: MeasuredField, lam: float) -> float:
    """max over breakpoints of |(|f|^lam)*(t) - f*(t)^lam|."""
    if lam <= 0:
        raise BadExponent("lambda must be positive")
    P = rearrangement(F)
    Pl = rearrangement(power_field(F, lam))
    t = np.union1d(P.breakpoints, Pl.breakpoints)
    return float(np.max(np.abs(Pl(t) - P(t) ** lam), initial=0.0))


def _common_grid(Fs: list[MeasuredField]) -> None:
    ref = Fs[0]
    for G in Fs[1:]:
        if G.measures.shape != ref.measures.shape or not np.array_equal(G.measures, ref.measures):
            raise GridMismatch("fields live on different grids")
        if (ref.points is None) != (G.points is None) or (ref.points is not None and not np.array_equal(ref.points, G.points)):
            raise GridMismatch("fields live on different sample points")


def subadditivity_check(Fs: list[MeasuredField], t: float) -> tuple[float, float]:
    """(int_0^t (sum f_j)*, sum_j int_0^t f_j*) on a shared grid."""
    if not Fs:
        raise GridMismatch("no fields supplied")
    _common_grid(Fs)
    total = MeasuredField(values=sum(F.values for F in Fs), measures=Fs[0].measures, domain=Fs[0].domain, points=Fs[0].points)
    lhs = rearrangement(total).integral(t)
    rhs = float(sum(rearrangement(F).integral(t) for F in Fs))
    return lhs, rhs


def product_integral(P: RearrangementProfile, R: RearrangementProfile) -> float:
    """int_0^inf P(t) R(t) dt for two step profiles."""
    T = np.union1d(P.breakpoints, R.breakpoints)
    T = T[T <= min(P.support_measure, R.support_measure)]
    if len(T) < 2:
        return 0.0
    return float(np.sum(np.diff(T) * P(T[:-1]) * R(T[:-1])))


def hardy_littlewood_pairing(F: MeasuredField, G: MeasuredField) -> tuple[float, float]:
    """(sum f g w, int f* g* dt); the first never exceeds the second."""
    _common_grid([F, G])
    lhs = float(np.sum(F.values * G.values * F.measures))
    return lhs, product_integral(rearrangement(F), rearrangement(G))


def p_subadditivity_transfer(F: MeasuredField, parts: list[MeasuredField], coefficients, p: float, ts) -> float:
    """max over t of int_0^t F*^p - sum_j |c_j|^p int_0^t A_j*^p (should be <= 0)."""
    _common_grid([F, *parts])
    PF = rearrangement(F)
    Ps = [rearrangement(A) for A in parts]
    c = np.abs(np.asarray(coefficients, dtype=float)) ** p
    worst = -math.inf
    for t in np.atleast_1d(ts):
        lhs = PF.integral(t, p)
        rhs = float(sum(cj * Pj.integral(t, p) for cj, Pj in zip(c, Ps)))
        worst = max(worst, lhs - rhs)
    return worst


def annulus_field(values, annuli, b: float, weight_exponent: float = 0.0) -> MeasuredField:
    """rho_*^{-weight_exponent} |values| over the stacked annulus samples."""
    pts = np.concatenate([A.points for A in annuli])
    lev = np.concatenate([np.full(len(A.points), A.level, dtype=float) for A in annuli])
    w = np.concatenate([A.measures for A in annuli])
    vals = np.abs(np.asarray(values)) * b ** (-weight_exponent * lev)
    return MeasuredField(values=vals, measures=w, domain="frequency", points=pts)


@dataclass(frozen=True)
class ReciprocalProfile:
    profile: RearrangementProfile
    t: np.ndarray
    products: np.ndarray  # t * g*(t)
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.products >= self.lower) and np.all(self.products <= self.upper))


def rho_reciprocal_profile(Qstar, annuli, count: int = 1000) -> ReciprocalProfile:
    """Profile of g = 1/rho_* over the annuli, with t g*(t) checked against [1/b, b]."""
    from .quasinorm import step_index

    b = Qstar.b
    pts = np.concatenate([A.points for A in annuli])
    w = np.concatenate([A.measures for A in annuli])
    g = b ** (-step_index(Qstar, pts).astype(float))
    P = rearrangement(MeasuredField(values=g, measures=w, domain="frequency", points=pts))
    levels = [A.level for A in annuli]
    # below b^{M_lo + 1} the missing core B*_{M_lo} distorts the staircase
    t = np.geomspace(b ** (min(levels) + 1), b ** max(levels), count)
    prod = t * P(t)
    return ReciprocalProfile(profile=P, t=t, products=prod, lower=1.0 / b, upper=b)


def dilate_frequency_field(F: MeasuredField, Qstar, k: int, eps: float) -> MeasuredField:
    """G(xi) = b^{-eps k} F((A*)^{-k} xi) sampled on the image lattice (A*)^k xi_i."""
    if F.points is None:
        raise ScaleMismatch("frequency field has no sample points")
    b = Qstar.b
    P = Qstar.dilation.power(k)
    return MeasuredField(values=b ** (-eps * k) * F.values, measures=F.measures * b**k, domain="frequency", points=F.points @ P.T)


def scaling_law_check(F: MeasuredField, Qstar, k: int, eps: float, G: MeasuredField | None = None) -> float:
    """Max relative deviation between G* and t -> b^{-eps k} F*(b^{-k} t).

    With ``G`` omitted it is built on the image lattice and the identity is
    compared step by step (levels v -> b^{-eps k} v, breakpoints t -> b^k t).
    A caller-supplied ``G`` (e.g. from a dilated atom's own transform) may
    order near-equal values differently, so only the pointwise comparison at
    the midpoints of the merged steps is used.
    """
    if F.domain != "frequency":
        raise ScaleMismatch("scaling law applies to frequency-domain fields")
    b = Qstar.b
    stepwise = G is None
    if G is None:
        G = dilate_frequency_field(F, Qstar, k, eps)
    if not math.isclose(G.total_measure, b**k * F.total_measure, rel_tol=1e-9):
        raise ScaleMismatch("fields are not on matched lattices")
    PF, PG = rearrangement(F), rearrangement(G)
    dev = 0.0
    if stepwise and len(PF.levels) == len(PG.levels):
        dev = max(
            _rel(PG.levels, b ** (-eps * k) * PF.levels),
            _rel(PG.breakpoints, b**k * PF.breakpoints),
        )
    T = np.union1d(PG.breakpoints, b**k * PF.breakpoints)
    # the two breakpoint sets agree up to rounding; merge near-duplicates
    T = T[np.concatenate([[True], np.diff(T) > 1e-12 * T[1:]])]
    mid = 0.5 * (T[1:] + T[:-1])
    return max(dev, _rel(PG(mid), b ** (-eps * k) * PF(b ** (-k) * mid)))


def _rel(x: np.ndarray, y: np.ndarray) -> float:
    scale = np.maximum(np.abs(x), np.abs(y))
    d = np.abs(x - y) / np.where(scale > 0, scale, 1.0)
    return float(np.max(d, initial=0.0))


@dataclass(frozen=True)
class LorentzValue:
    p: float
    eps: float
    lam: float
    weighted: float  # int_0^inf t^{eps p - 1} F*(t)^p dt
    averaged: float  # int_0^inf t^{eps p - 2} int_0^t F*(u)^p du dt
    majorized: bool
    method: str
    tails: tuple[float, float] = (0.0, 0.0)

    @property
    def a_weighted(self) -> float:
        return self.weighted ** (1.0 / self.p)

    @property
    def a_averaged(self) -> float:
        return self.averaged ** (1.0 / self.p)

    def to_record(self) -> dict:
        return {
            "p": self.p,
            "eps": self.eps,
            "lambda": self.lam,
            "weighted": self.weighted,
            "averaged": self.averaged,
            "a_weighted": self.a_weighted,
            "a_averaged": self.a_averaged,
            "majorized": self.majorized,
            "method": self.method,
        }


def _exact_integrals(P: RearrangementProfile, p: float, eps: float) -> tuple[float, float]:
    T, v = P.breakpoints, P.levels**p
    if len(v) == 0:
        return 0.0, 0.0
    e = eps * p
    lo, hi = T[:-1], T[1:]
    weighted = float(np.sum(v * (hi**e - lo**e)) / e)
    H = np.concatenate([[0.0], np.cumsum(v * np.diff(T))])
    # on [t_{i-1}, t_i): H(t) = C + v t with C = H_{i-1} - v t_{i-1}
    C = H[:-1] - v * lo
    lo_pow = np.zeros_like(lo)
    lo_pow[1:] = lo[1:] ** (e - 1)
    first = C * (hi ** (e - 1) - lo_pow) / (e - 1)
    first[0] = 0.0  # C = 0 on the first segment
    second = v * (hi**e - lo**e) / e
    tail = H[-1] * T[-1] ** (e - 1) / (1 - e)
    return weighted, float(np.sum(first + second) + tail)


def _trapezoid_integrals(P: RearrangementProfile, p: float, eps: float, t_min: float, t_max: float, per_decade: int):
    n = int(round(per_decade * math.log10(t_max / t_min))) + 1
    t = np.geomspace(t_min, t_max, n)
    e = eps * p
    fs = P(t) ** p
    H = np.array([P.integral(x, p) for x in t])
    weighted = float(trapezoid(t ** (e - 1) * fs, t))
    averaged = float(trapezoid(t ** (e - 2) * H, t))
    # contributions outside [t_min, t_max] using f* <= f*(0) near 0 and H <= H(inf)
    head = P.levels[0] ** p * t_min**e / e if len(P.levels) else 0.0
    tail = P.integral(math.inf, p) * t_max ** (e - 1) / (1 - e)
    return weighted, averaged, (head, tail)


def lorentz_functional(values, annuli, b: float, p: float, eps: float = 0.1, method: str = "exact",
                       t_min: float = 1e-6, t_max: float = 1e6, per_decade: int = 200) -> LorentzValue:
    """Both Lorentz-type integrals of F = rho_*^{-lambda} |f^| over the annuli, lambda = 1/p - 1 + eps."""
    if not (0 < p < 1):
        raise BadExponent(f"p must lie in (0, 1), got {p!r}")
    if not eps > 0:
        raise BadExponent(f"eps must be positive, got {eps!r}")
    if eps * p >= 1:
        raise BadExponent("eps * p >= 1: the outer integral diverges")
    lam = 1.0 / p - 1.0 + eps
    P = rearrangement(annulus_field(values, annuli, b, lam))
    tails = (0.0, 0.0)
    if method == "exact":
        weighted, averaged = _exact_integrals(P, p, eps)
    elif method == "trapezoid":
        weighted, averaged, tails = _trapezoid_integrals(P, p, eps, t_min, t_max, per_decade)
    else:
        raise ValueError(f"unknown method {method!r}")
    majorized = majorization_holds(P, p) and averaged >= weighted * (1 - 1e-12)
    return LorentzValue(p=p, eps=eps, lam=lam, weighted=weighted, averaged=averaged, majorized=bool(majorized), method=method, tails=tails)


def majorization_holds(P: RearrangementProfile, p: float) -> bool:
    """f*(t)^p <= (1/t) int_0^t f*^p at every breakpoint and segment midpoint."""
    T = P.breakpoints
    t = np.concatenate([T[1:], 0.5 * (T[1:] + T[:-1])])
    if len(t) == 0:
        return True
    avg = np.array([P.integral(x, p) for x in t]) / t
    return bool(np.all(P(t) ** p <= avg * (1 + 1e-12)))
