"""Fourier transforms of lattice-sampled atoms at arbitrary frequencies.

Convention: f^(xi) = int f(x) exp(-2 pi i <x, xi>) dx.

All transforms are direct sums over lattice points. Because the lattice is
``center + frame @ u`` with ``u`` on a tensor grid, the phase factorises per
u-axis and the sum is evaluated by successive axis contractions; this is the
same finite sum as the naive double loop (see ``ft_direct``), only cheaper.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .atoms import Atom, LatticeField, check_derivative_order, multi_indices, translate_atom

_CHUNK = 4096
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class SpectralSamples:
    freqs: np.ndarray
    values: np.ndarray
    deriv_order: tuple[int, ...]
    quad_error_bound: float
    crude_bound: float = math.inf

    def within_bound(self) -> bool:
        return bool(np.all(np.isfinite(self.values)) and np.all(np.abs(self.values) <= self.crude_bound * (1 + 1e-12)))

    def to_records(self) -> list[dict]:
        out = []
        for xi, v in zip(self.freqs, self.values):
            rec = {f"xi{d}": float(c) for d, c in enumerate(xi)}
            rec.update(re=float(v.real), im=float(v.imag))
            out.append(rec)
        return out


def _as_field(f) -> LatticeField:
    return f.field if isinstance(f, Atom) else f


def _grid_sum(samples: np.ndarray, axes: list[np.ndarray], eta: np.ndarray) -> np.ndarray:
    """sum over the grid of samples[i] * exp(-2 pi i <u_i, eta_f>) for each row eta_f."""
    n = samples.ndim
    out = np.empty(len(eta), dtype=complex)
    for start in range(0, len(eta), _CHUNK):
        e = eta[start : start + _CHUNK]
        E = np.exp(-2j * np.pi * axes[n - 1][:, None] * e[None, :, n - 1])
        T = np.tensordot(samples, E, axes=([n - 1], [0]))
        for d in range(n - 2, -1, -1):
            E = np.exp(-2j * np.pi * axes[d][:, None] * e[None, :, d])
            T = np.einsum("...if,if->...f", T, E)
        out[start : start + _CHUNK] = T
    return out


def _cell_factor(fld: LatticeField, eta: np.ndarray) -> np.ndarray:
    # transform of the indicator of one cell, normalised to 1 at eta = 0
    return np.prod(np.sinc(fld.grid_step[None, :] * eta), axis=1)


def lattice_sum(fld: LatticeField, freqs, weights: np.ndarray | None = None) -> np.ndarray:
    """sum_i v_i exp(-2 pi i <x_i, xi>) with v = samples (times optional grid weights)."""
    xi = np.atleast_2d(np.asarray(freqs, dtype=float))
    vals = fld.samples if weights is None else fld.samples * weights
    eta = xi @ fld.frame
    phase = np.exp(-2j * np.pi * (xi @ fld.center))
    return phase * _grid_sum(vals.astype(complex), fld.axes(), eta)


def _coarsen(fld: LatticeField) -> LatticeField | None:
    shape = fld.shape
    if any(N % 2 for N in shape):
        return None
    v = fld.samples
    for d in range(v.ndim):
        v = v.reshape(v.shape[:d] + (shape[d] // 2, 2) + v.shape[d + 1 :]).mean(axis=d + 1)
    return LatticeField(
        center=fld.center,
        frame=fld.frame,
        grid_lo=fld.grid_lo + 0.5 * fld.grid_step,
        grid_step=2.0 * fld.grid_step,
        samples=v,
        cell_measure=fld.cell_measure * 2**fld.dim,
    )


_SERIES_TERMS = 24


def _cell_power_moments(axis: np.ndarray, delta: float, top: int) -> np.ndarray:
    """P[m, i] = (1/delta) * int over cell i of t^m dt, for m = 0..top."""
    hi = axis + 0.5 * delta
    lo = axis - 0.5 * delta
    m = np.arange(top + 1)[:, None]
    return (hi[None, :] ** (m + 1) - lo[None, :] ** (m + 1)) / ((m + 1) * delta)


def _series_radius(fld: LatticeField) -> float:
    return float(np.max([np.max(np.abs(ax)) for ax in fld.axes()]) + 0.5 * np.max(fld.grid_step))


def moment_series(fld: LatticeField, freqs, skip_degree: int) -> np.ndarray:
    """Cell-model transform from its Taylor series in eta = frame^T xi.

    Moments of total degree <= ``skip_degree`` are dropped: for an atom they
    vanish by construction, and summing them only adds rounding noise that
    swamps the true transform near the origin. Accurate (to ~N!^{-1}) where
    2 pi R |eta|_1 <= 1, with R the u-extent of the grid.
    """
    xi = np.atleast_2d(np.asarray(freqs, dtype=float))
    eta = xi @ fld.frame
    n = fld.dim
    top = skip_degree + _SERIES_TERMS
    P = [_cell_power_moments(ax, fld.grid_step[d], top) for d, ax in enumerate(fld.axes())]
    # M[beta] = w * sum_i a_i prod_d P_d[beta_d, i_d]
    M = fld.samples
    for d in range(n):
        M = np.tensordot(M, P[d], axes=([0], [1]))
    M = M * fld.cell_measure
    out = np.zeros(len(xi), dtype=complex)
    for beta in itertools.product(range(top + 1), repeat=n):
        deg = sum(beta)
        if deg <= skip_degree or deg > top:
            continue
        coef = M[beta] * (-2j * np.pi) ** deg / float(np.prod([math.factorial(b) for b in beta]))
        out += coef * np.prod(eta ** np.asarray(beta), axis=1)
    return out * np.exp(-2j * np.pi * (xi @ fld.center))


def ft(f, freqs, cells: bool = True) -> SpectralSamples:
    """Fourier transform of an atom (or bare lattice field) at the given frequencies.

    With ``cells=True`` (default) the result is the exact transform of the
    piecewise-constant function; ``cells=False`` gives the bare lattice sum
    ``sum_i a(x_i) exp(-2 pi i <x_i, xi>) w``. For atoms, frequencies close
    to the origin are evaluated with ``moment_series``.
    """
    fld = _as_field(f)
    xi = np.atleast_2d(np.asarray(freqs, dtype=float))
    S = lattice_sum(fld, xi)
    l1 = float(np.sum(np.abs(fld.samples)) * fld.cell_measure)
    if cells:
        vals = fld.cell_measure * S * _cell_factor(fld, xi @ fld.frame)
        if isinstance(f, Atom):
            near = 2 * np.pi * _series_radius(fld) * np.sum(np.abs(xi @ fld.frame), axis=1) <= 1.0
            if near.any():
                vals[near] = moment_series(fld, xi[near], f.triplet.s)
        # the transform is exact; only floating-point accumulation remains
        err = fld.samples.size * _EPS * l1
    else:
        vals = fld.cell_measure * S
        coarse = _coarsen(fld)
        err = math.inf if coarse is None else float(np.max(np.abs(vals - coarse.cell_measure * lattice_sum(coarse, xi)), initial=0.0))
    return SpectralSamples(freqs=xi, values=vals, deriv_order=(0,) * fld.dim, quad_error_bound=err, crude_bound=l1)


def ft_direct(f, freqs, cells: bool = True) -> np.ndarray:
    """Reference double loop over lattice points; used to cross-check ``ft``."""
    fld = _as_field(f)
    xi = np.atleast_2d(np.asarray(freqs, dtype=float))
    X = fld.points()
    v = fld.samples.ravel()
    keep = v != 0
    X, v = X[keep], v[keep]
    out = np.exp(-2j * np.pi * (xi @ X.T)) @ v * fld.cell_measure
    if cells:
        out = out * _cell_factor(fld, xi @ fld.frame)
    return out


def rescaled_unit_field(a: Atom) -> LatticeField:
    """Lattice field of D_A^k a : x -> a(A^k x), supported in A^{-k} x0 + B_0."""
    D = a.dilation
    fld = a.field
    return LatticeField(
        center=D.power(-a.k) @ fld.center,
        frame=np.eye(fld.dim),
        grid_lo=fld.grid_lo,
        grid_step=fld.grid_step,
        samples=fld.samples,
        cell_measure=a.base_cell_volume,
    )


def _cell_moment_factor(m: int, delta: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """int_{-delta/2}^{delta/2} (-2 pi i t)^m exp(-2 pi i t eta) dt, elementwise."""
    if m == 0:
        return delta * np.sinc(delta * eta)
    y = delta * eta
    nodes = 32 + 4 * int(math.ceil(float(np.max(np.abs(y), initial=0.0))))
    tau, wts = np.polynomial.legendre.leggauss(nodes)
    tau = 0.5 * tau
    wts = 0.5 * wts
    integrand = (-2j * np.pi * tau[None, :]) ** m * np.exp(-2j * np.pi * tau[None, :] * np.ravel(y)[:, None])
    K = integrand @ wts
    return (delta ** (m + 1) * K).reshape(np.shape(y))


def ft_derivative(a: Atom, alpha, freqs, cells: bool = True) -> SpectralSamples:
    """d^alpha of the transform of D_A^k a, the rescaled unit-support atom."""
    alpha = check_derivative_order(a, alpha)
    fld = rescaled_unit_field(a)
    xi = np.atleast_2d(np.asarray(freqs, dtype=float))
    n = fld.dim
    mesh = np.meshgrid(*[fld.center[d] + ax for d, ax in enumerate(fld.axes())], indexing="ij")
    extent = np.array([np.max(np.abs(m[fld.samples != 0]), initial=0.0) for m in mesh]) + 0.5 * fld.grid_step
    l1 = float(np.sum(np.abs(fld.samples)) * fld.cell_measure)
    crude = l1 * float(np.prod((2 * np.pi * extent) ** np.asarray(alpha)))
    if not cells:
        w = np.ones(fld.shape, dtype=complex)
        for d in range(n):
            w = w * (-2j * np.pi * mesh[d]) ** alpha[d]
        vals = fld.cell_measure * lattice_sum(fld, xi, w)
    else:
        vals = np.zeros(len(xi), dtype=complex)
        for beta in _sub_indices(alpha):
            coef = float(np.prod([comb(alpha[d], beta[d], exact=True) for d in range(n)]))
            w = np.ones(fld.shape, dtype=complex)
            for d in range(n):
                w = w * (-2j * np.pi * mesh[d]) ** beta[d]
            cellpart = np.ones(len(xi), dtype=complex)
            for d in range(n):
                cellpart = cellpart * _cell_moment_factor(alpha[d] - beta[d], fld.grid_step[d], xi[:, d])
            vals = vals + coef * lattice_sum(fld, xi, w) * cellpart
    err = fld.samples.size * _EPS * crude
    return SpectralSamples(freqs=xi, values=vals, deriv_order=alpha, quad_error_bound=err, crude_bound=crude)


def _sub_indices(alpha: tuple[int, ...]):
    return itertools.product(*[range(v + 1) for v in alpha])


def check_commutation(a: Atom, j: int, freqs, cells: bool = True) -> float:
    """max |b^j (F D_A^j a)((A*)^j xi) - a^(xi)| on the matched lattice."""
    if abs(j) > 10:
        raise ValueError("|j| must be <= 10")
    D = a.dilation
    fld = a.field
    xi = np.atleast_2d(np.asarray(freqs, dtype=float))
    Pinv = D.power(-j)
    dilated = LatticeField(
        center=Pinv @ fld.center,
        frame=Pinv @ fld.frame,
        grid_lo=fld.grid_lo,
        grid_step=fld.grid_step,
        samples=fld.samples,
        cell_measure=fld.cell_measure * D.det_abs ** (-j),
    )
    eta = xi @ D.power(j)  # rows of (A^T)^j xi
    lhs = D.det_abs**j * ft(dilated, eta, cells=cells).values
    rhs = ft(a, xi, cells=cells).values
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def derivative_bound(a: Atom, alpha, freqs, cells: bool = True) -> float:
    """sup over freqs of |d^alpha F(D_A^k a)(xi)| / (b^{-k/q} ||a||_q min(1, |xi|^{s-|alpha|+1}))."""
    alpha = check_derivative_order(a, alpha)
    # translation changes only a unimodular phase of a^, but the bound assumes x0 = 0
    a0 = translate_atom(a, -a.center)
    spec = ft_derivative(a0, alpha, freqs, cells=cells)
    q = a.triplet.q
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    scale = a.quasinorm.b ** (-a.k * inv_q) * a.q_norm
    r = np.linalg.norm(spec.freqs, axis=1)
    expo = a.triplet.s - sum(alpha) + 1
    denom = scale * np.minimum(1.0, r**expo)
    return float(np.max(np.abs(spec.values) / denom))


def log_radial_freqs(n: int, count: int = 1000, lo: float = 1e-3, hi: float = 1e3, directions: int = 8, seed: int = 0) -> np.ndarray:
    """``count`` log-spaced radii in [lo, hi], each along ``directions`` fixed random directions."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((directions, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    radii = np.geomspace(lo, hi, count)
    return (radii[:, None, None] * d[None, :, :]).reshape(-1, n)


def all_derivative_orders(n: int, s: int) -> list[tuple[int, ...]]:
    return multi_indices(n, s)

