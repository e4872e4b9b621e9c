"""Nested ellipsoids B_k = A^k(B_0) and the canonical step quasi-norm.

The ellipsoid B_0 = {x : x^T Q x <= c} uses the series form

    Q = sum_{j=0}^{J} r^{2j} (A^{-j})^T A^{-j},

which contracts under A^{-1} by the factor r as long as the truncation tail
is small; the build checks this with an explicit semidefinite certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dilation import DilationMatrix, adjoint
from .errors import BadRatio, ContractionFailed, EmptySamples, ZeroVector

_MAX_TERMS = 10_000


@dataclass(frozen=True, eq=False)
class QuasiNorm:
    dilation: DilationMatrix
    form: np.ndarray
    level: float
    series_ratio: float
    series_terms: int
    doubling_estimate: float | None = None
    comparison_constant: float | None = None

    @property
    def b(self) -> float:
        return self.dilation.det_abs

    @property
    def dim(self) -> int:
        return self.dilation.dim

    def quadratic(self, x, m: int = 0) -> np.ndarray:
        """(A^{-m} x)^T Q (A^{-m} x) for each row of ``x``."""
        y = np.atleast_2d(x) @ self.dilation.power(-m).T
        return np.einsum("ij,jk,ik->i", y, self.form, y)

    def contains(self, x, m: int = 0) -> np.ndarray:
        return self.quadratic(x, m) <= self.level

    def bounding_halfwidths(self, m: int = 0) -> np.ndarray:
        """Half-widths of the axis-aligned box enclosing B_m."""
        P = self.dilation.power(m)
        cov = P @ np.linalg.inv(self.form) @ P.T
        return np.sqrt(self.level * np.diag(cov))

    def volume(self, m: int = 0) -> float:
        P = self.dilation.power(-m)
        return _ellipsoid_volume(P.T @ self.form @ P, self.level)

    def certificate_min_eig(self) -> float:
        Ainv = self.dilation.power(-1)
        r = self.series_ratio
        C = self.form / r**2 - Ainv.T @ self.form @ Ainv
        return float(np.linalg.eigvalsh(0.5 * (C + C.T))[0])

    def to_record(self) -> dict:
        rec = self.dilation.to_record()
        rec.update(
            form=[float(v) for v in self.form.ravel()],
            level=self.level,
            r=self.series_ratio,
            J=self.series_terms,
        )
        return rec


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def _ellipsoid_volume(Q: np.ndarray, c: float) -> float:
    n = Q.shape[0]
    return _unit_ball_volume(n) * c ** (n / 2) / math.sqrt(np.linalg.det(Q))


def _default_terms(D: DilationMatrix, r: float) -> int:
    for J in range(1, _MAX_TERMS):
        if r**J * np.linalg.norm(D.power(-J), 2) <= 1e-3:
            return J
    raise ContractionFailed("series did not reach the truncation threshold")


def build_quasinorm(D: DilationMatrix, r: float | None = None, J: int | None = None) -> QuasiNorm:
    lam = D.lambda_minus
    if r is None:
        r = math.sqrt(lam)
    if not (1.0 < r < lam):
        raise BadRatio(f"series ratio {r!r} must lie in (1, {lam!r})")
    if J is None:
        J = _default_terms(D, r)
    if J < 1:
        raise ValueError("series_terms must be >= 1")
    n = D.dim
    Q = np.zeros((n, n))
    for j in range(J + 1):
        P = D.power(-j)
        Q += r ** (2 * j) * (P.T @ P)
    Q = 0.5 * (Q + Q.T)
    # |B_0| = V_n c^{n/2} / sqrt(det Q) = 1
    c = (math.sqrt(np.linalg.det(Q)) / _unit_ball_volume(n)) ** (2 / n)
    Q.setflags(write=False)
    qn = QuasiNorm(dilation=D, form=Q, level=c, series_ratio=float(r), series_terms=int(J))
    cert = qn.certificate_min_eig()
    if cert < -1e-10 * max(1.0, float(np.linalg.norm(Q, 2))):
        raise ContractionFailed(f"certificate eigenvalue {cert:.3e} < 0; increase J")
    return qn


def dual_quasinorm(Q: QuasiNorm, r: float | None = None, J: int | None = None) -> QuasiNorm:
    """Canonical quasi-norm of the adjoint dilation, i.e. rho_*."""
    return build_quasinorm(adjoint(Q.dilation), r=r, J=J)


def _initial_guess(Q: QuasiNorm, X: np.ndarray) -> np.ndarray:
    q = np.einsum("ij,jk,ik->i", X, Q.form, X)
    ratio = np.maximum(q / Q.level, 1e-300)
    # |A^m x| grows roughly like b^{m/n}
    return np.floor(Q.dim * 0.5 * np.log(ratio) / math.log(Q.b)).astype(np.int64)


def _member(Q: QuasiNorm, X: np.ndarray, M: np.ndarray) -> np.ndarray:
    out = np.empty(len(X), dtype=bool)
    for m in np.unique(M):
        sel = M == m
        out[sel] = Q.contains(X[sel], int(m))
    return out


def step_index(Q: QuasiNorm, x) -> np.ndarray | int:
    """The integer j with x in B_{j+1} minus B_j.

    Accepts a single vector (returns an int) or an array of row vectors.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if np.any(np.all(X == 0.0, axis=1)):
        raise ZeroVector("step_index is undefined at the origin")
    guess = _initial_guess(Q, X)
    inside = _member(Q, X, guess)
    # hi: member index, lo: non-member index
    hi = np.where(inside, guess, guess + 1)
    lo = np.where(inside, guess - 1, guess)
    gap = np.ones_like(guess)
    while True:
        bad_hi = ~_member(Q, X, hi)
        bad_lo = _member(Q, X, lo)
        if not (bad_hi.any() or bad_lo.any()):
            break
        lo = np.where(bad_hi, hi, lo)
        hi = np.where(bad_hi, hi + gap, hi)
        hi = np.where(bad_lo, lo, hi)
        lo = np.where(bad_lo, lo - gap, lo)
        gap = gap * 2
    while np.any(hi - lo > 1):
        mid = (lo + hi) // 2
        open_ = hi - lo > 1
        mem = _member(Q, X, mid)
        hi = np.where(open_ & mem, mid, hi)
        lo = np.where(open_ & ~mem, mid, lo)
    j = lo
    return int(j[0]) if single else j


def rho(Q: QuasiNorm, x) -> np.ndarray | float:
    """Canonical quasi-norm: b^j on B_{j+1} minus B_j, 0 at the origin."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    zero = np.all(X == 0.0, axis=1)
    out = np.zeros(len(X))
    if (~zero).any():
        j = step_index(Q, X[~zero])
        out[~zero] = Q.b ** j.astype(float)
    return float(out[0]) if single else out


def comparison_ratios(Q: QuasiNorm, samples) -> np.ndarray:
    """Per-sample smallest constant c_A for which the Euclidean comparison holds."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    r = rho(Q, X)
    if np.any(r == 0.0):
        raise ZeroVector("comparison samples must be nonzero")
    nx = np.linalg.norm(X, axis=1)
    zm, zp = Q.dilation.zeta_minus, Q.dilation.zeta_plus
    big = r >= 1.0
    # rho >= 1: rho^zm / c <= |x| <= c rho^zp ; rho < 1: exponents swap
    low_exp = np.where(big, zm, zp)
    high_exp = np.where(big, zp, zm)
    return np.maximum(r**low_exp / nx, nx / r**high_exp)


def comparison_violations(Q: QuasiNorm, samples, c_A: float) -> int:
    return int(np.sum(comparison_ratios(Q, samples) > c_A))


def verify_comparison(Q: QuasiNorm, samples) -> tuple[float, int]:
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if X.size == 0:
        raise EmptySamples("no samples supplied")
    c_A = float(np.max(comparison_ratios(Q, X)))
    return c_A, comparison_violations(Q, X, c_A)


def doubling_estimate(Q: QuasiNorm, pairs) -> float:
    P = np.asarray(pairs, dtype=float)
    if P.size == 0:
        return 0.0
    X, Y = P[:, 0, :], P[:, 1, :]
    num = rho(Q, X + Y)
    den = rho(Q, X) + rho(Q, Y)
    ratios = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(np.max(ratios))


def with_estimates(Q: QuasiNorm, samples, pairs) -> QuasiNorm:
    c_A, _ = verify_comparison(Q, samples)
    return replace(Q, comparison_constant=c_A, doubling_estimate=doubling_estimate(Q, pairs))


def sample_vectors(rng: np.random.Generator, n: int, count: int, log_radius: float = 8.0) -> np.ndarray:
    """Random directions with log-uniform radii in [e^{-log_radius}, e^{log_radius}]."""
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    radius = np.exp(rng.uniform(-log_radius, log_radius, size=count))
    return d * radius[:, None]
