"""Sampled (p, q, s)-atoms on anisotropic lattices.

An atom lives on the lattice ``x0 + A^k u`` where ``u`` runs over the cell
centres of a uniform grid covering the bounding box of ``B_0``. Each sample is
the value of the atom on the whole (parallelepiped) cell around its lattice
point, so the sampled atom is a genuine piecewise-constant function: its
``L^q`` norm is the weighted lattice sum, and vanishing lattice moments imply
vanishing continuous moments because cell averages of monomials are
polynomials of the same degree in the cell centre.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .dilation import MAX_POWER, DilationMatrix
from .errors import BadExponent, DegenerateProjection, OrderTooHigh, PowerOutOfRange, TooCoarse
from .quasinorm import QuasiNorm

MOMENT_TOL = 1e-8
SIZE_TOL = 1e-10


@dataclass(frozen=True)
class AdmissibleTriplet:
    p: float
    q: float
    s: int

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise BadExponent(f"p = {self.p!r} not in (0, 1]")
        if not (1.0 <= self.q <= math.inf) or not (self.p < self.q):
            raise BadExponent(f"q = {self.q!r} must satisfy 1 <= q <= inf and p < q")
        if int(self.s) != self.s or self.s < 0:
            raise BadExponent(f"s = {self.s!r} must be a nonnegative integer")

    @classmethod
    def for_dilation(cls, p: float, q: float, s, D: DilationMatrix) -> "AdmissibleTriplet":
        """Build a triplet, resolving ``s="auto"`` to the minimal moment order."""
        smin = min_moment_order(p, D)
        if s is None or s == "auto":
            s = smin
        trip = cls(float(p), float(q), int(s))
        if trip.s < smin:
            raise BadExponent(f"s = {trip.s} below the minimal order {smin} for p = {p}")
        return trip

    def label(self) -> str:
        q = "inf" if math.isinf(self.q) else f"{self.q:g}"
        return f"({self.p:g},{q},{self.s})"


def min_moment_order(p: float, D: DilationMatrix | float) -> int:
    """floor((1/p - 1) / zeta_minus); ``D`` may also be the eccentricity itself."""
    if not (0.0 < p <= 1.0):
        raise BadExponent(f"p = {p!r} not in (0, 1]")
    zeta = D if isinstance(D, (int, float)) else D.zeta_minus
    return int(math.floor((1.0 / p - 1.0) / zeta))


def multi_indices(n: int, max_degree: int) -> list[tuple[int, ...]]:
    out = []
    for deg in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), deg):
            alpha = [0] * n
            for d in combo:
                alpha[d] += 1
            out.append(tuple(alpha))
    return out


@dataclass(frozen=True, eq=False)
class LatticeField:
    """Piecewise-constant function on the cells ``center + frame @ (u_i + box)``."""

    center: np.ndarray
    frame: np.ndarray
    grid_lo: np.ndarray
    grid_step: np.ndarray
    samples: np.ndarray
    cell_measure: float

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.samples.shape

    def axes(self) -> list[np.ndarray]:
        return [self.grid_lo[d] + self.grid_step[d] * np.arange(N) for d, N in enumerate(self.shape)]

    def u_points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def points(self) -> np.ndarray:
        return self.center + self.u_points() @ self.frame.T

    def with_samples(self, samples) -> "LatticeField":
        return replace(self, samples=np.asarray(samples, dtype=float).reshape(self.shape))

    def lq_norm(self, q: float) -> float:
        v = np.abs(self.samples)
        if math.isinf(q):
            return float(v.max(initial=0.0))
        return float((np.sum(v**q) * self.cell_measure) ** (1.0 / q))


@dataclass(frozen=True, eq=False)
class Atom:
    triplet: AdmissibleTriplet
    quasinorm: QuasiNorm
    k: int
    field: LatticeField
    seed: int | None = None

    @property
    def dilation(self) -> DilationMatrix:
        return self.quasinorm.dilation

    @property
    def center(self) -> np.ndarray:
        return self.field.center

    @property
    def samples(self) -> np.ndarray:
        return self.field.samples

    @property
    def base_cell_volume(self) -> float:
        return float(np.prod(self.field.grid_step))

    @property
    def cell_measure(self) -> float:
        return self.field.cell_measure

    @property
    def q_norm(self) -> float:
        return self.field.lq_norm(self.triplet.q)

    @property
    def size_bound(self) -> float:
        t = self.triplet
        inv_q = 0.0 if math.isinf(t.q) else 1.0 / t.q
        return self.quasinorm.b ** (self.k * (inv_q - 1.0 / t.p))

    @cached_property
    def support_mask(self) -> np.ndarray:
        return cells_inside(self.quasinorm, self.field.grid_lo, self.field.grid_step, self.field.shape)

    def lattice(self) -> np.ndarray:
        return self.field.points()


@dataclass(frozen=True, eq=False)
class AtomicCombination:
    atoms: list[Atom]
    coefficients: np.ndarray
    lp_norm: float = field(default=math.nan)

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        if len(coef) != len(self.atoms) or not self.atoms:
            raise ValueError("need one coefficient per atom and at least one atom")
        trips = {a.triplet for a in self.atoms}
        if len(trips) != 1:
            raise ValueError("atoms in a combination must share a triplet")
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "lp_norm", _lp(coef, self.triplet.p))

    @property
    def triplet(self) -> AdmissibleTriplet:
        return self.atoms[0].triplet

    @property
    def quasinorm(self) -> QuasiNorm:
        return self.atoms[0].quasinorm

    def lp_sum(self) -> float:
        """sum |lambda_i|^p"""
        return float(np.sum(np.abs(self.coefficients) ** self.triplet.p))


def _lp(c: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(c) ** p) ** (1.0 / p))


def unit_grid(Q: QuasiNorm, grid_res: int) -> tuple[np.ndarray, np.ndarray]:
    h = Q.bounding_halfwidths(0)
    step = 2.0 * h / grid_res
    return -h + 0.5 * step, step


def cells_inside(Q: QuasiNorm, grid_lo, grid_step, shape) -> np.ndarray:
    """Cells of the u-grid lying entirely in the closed ellipsoid B_0."""
    n = len(shape)
    mesh = np.meshgrid(*[grid_lo[d] + grid_step[d] * np.arange(N) for d, N in enumerate(shape)], indexing="ij")
    U = np.stack([m.ravel() for m in mesh], axis=1)
    ok = np.ones(len(U), dtype=bool)
    # B_0 is convex, so it suffices that every corner is inside
    for signs in itertools.product((-0.5, 0.5), repeat=n):
        ok &= Q.contains(U + np.asarray(signs) * grid_step, 0)
    return ok.reshape(shape)


def _moment_basis(U: np.ndarray, scale: np.ndarray, s: int) -> np.ndarray:
    Z = U / scale
    cols = [np.prod(Z ** np.asarray(alpha), axis=1) for alpha in multi_indices(U.shape[1], s)]
    return np.stack(cols, axis=1)


def project_moments(values: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the complement of span(basis)."""
    Qb, _ = np.linalg.qr(basis)
    out = values - Qb @ (Qb.T @ values)
    # second pass removes the residual left by the first in floating point
    return out - Qb @ (Qb.T @ out)


def make_atom(
    Q: QuasiNorm,
    triplet: AdmissibleTriplet,
    x0=None,
    k: int = 0,
    grid_res: int = 64,
    seed: int = 0,
) -> Atom:
    """Random (p, q, s)-atom supported in ``x0 + B_k``, deterministic given ``seed``."""
    n = Q.dim
    if grid_res < 16:
        raise TooCoarse("grid_res must be at least 16 per axis")
    if abs(k) > MAX_POWER:
        raise PowerOutOfRange(f"|k| = {abs(k)} exceeds {MAX_POWER}")
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    lo, step = unit_grid(Q, grid_res)
    shape = (grid_res,) * n
    mask = cells_inside(Q, lo, step, shape)
    field_ = LatticeField(
        center=x0,
        frame=Q.dilation.power(k),
        grid_lo=lo,
        grid_step=step,
        samples=np.zeros(shape),
        cell_measure=Q.b**k * float(np.prod(step)),
    )
    U = field_.u_points()[mask.ravel()]
    basis = _moment_basis(U, Q.bounding_halfwidths(0), triplet.s)
    if len(U) <= basis.shape[1] or np.linalg.cond(basis) > 1e10:
        raise TooCoarse(f"moment system ill-conditioned at grid_res={grid_res}, s={triplet.s}")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(-1.0, 1.0, size=len(U))
    vals = project_moments(raw, basis)
    if np.linalg.norm(vals) <= 1e-8 * np.linalg.norm(raw):
        raise DegenerateProjection("projection annihilated the random draw; use another seed")
    samples = np.zeros(mask.size)
    samples[mask.ravel()] = vals
    atom = Atom(triplet=triplet, quasinorm=Q, k=int(k), field=field_.with_samples(samples), seed=seed)
    scaled = atom.field.with_samples(atom.samples * (atom.size_bound / atom.q_norm))
    return replace(atom, field=scaled)


def dilate_atom(a: Atom, j: int) -> Atom:
    """f_j(x) = b^{j/p} a(A^j x); the support scale moves from k to k - j."""
    j = int(j)
    if j == 0:
        return a
    knew = a.k - j
    if abs(knew) > MAX_POWER or abs(j) > MAX_POWER:
        raise PowerOutOfRange(f"dilation by {j} leaves the supported power range")
    D = a.dilation
    fld = a.field
    new = LatticeField(
        center=D.power(-j) @ fld.center,
        frame=D.power(knew),
        grid_lo=fld.grid_lo,
        grid_step=fld.grid_step,
        samples=fld.samples * D.det_abs ** (j / a.triplet.p),
        cell_measure=D.det_abs**knew * a.base_cell_volume,
    )
    return Atom(triplet=a.triplet, quasinorm=a.quasinorm, k=knew, field=new, seed=a.seed)


def translate_atom(a: Atom, v) -> Atom:
    fld = replace(a.field, center=a.field.center + np.asarray(v, dtype=float))
    return replace(a, field=fld)


def moment_residuals(a: Atom, max_degree: int | None = None) -> dict[tuple[int, ...], float]:
    """Relative lattice moments |sum a x^alpha w| / sum |a| |x^alpha| w."""
    s = a.triplet.s if max_degree is None else max_degree
    X = a.lattice()
    v = a.samples.ravel()
    out = {}
    for alpha in multi_indices(a.quasinorm.dim, s):
        mono = np.prod(X ** np.asarray(alpha), axis=1)
        scale = np.sum(np.abs(v * mono))
        out[alpha] = float(abs(np.sum(v * mono)) / scale) if scale > 0 else 0.0
    return out


@dataclass(frozen=True)
class AtomReport:
    support_ok: bool
    moments_ok: bool
    size_ok: bool
    degenerate: bool
    support_leak: float
    max_moment_residual: float
    size_ratio: float

    @property
    def ok(self) -> bool:
        return self.support_ok and self.moments_ok and self.size_ok and not self.degenerate


def check_atom(a: Atom) -> AtomReport:
    mask = a.support_mask
    leak = float(np.max(np.abs(a.samples[~mask]), initial=0.0))
    norm = a.q_norm
    degenerate = norm == 0.0
    res = moment_residuals(a) if not degenerate else {}
    max_res = max(res.values(), default=0.0)
    ratio = norm / a.size_bound
    return AtomReport(
        support_ok=leak == 0.0,
        moments_ok=max_res <= MOMENT_TOL and not degenerate,
        size_ok=(not degenerate) and abs(ratio - 1.0) <= SIZE_TOL,
        degenerate=degenerate,
        support_leak=leak,
        max_moment_residual=max_res,
        size_ratio=ratio,
    )


def check_derivative_order(a: Atom, alpha) -> tuple[int, ...]:
    alpha = tuple(int(v) for v in alpha)
    if len(alpha) != a.quasinorm.dim or min(alpha) < 0:
        raise ValueError(f"multi-index {alpha} does not match dimension {a.quasinorm.dim}")
    if sum(alpha) > a.triplet.s:
        raise OrderTooHigh(f"|alpha| = {sum(alpha)} exceeds s = {a.triplet.s}")
    return alpha
