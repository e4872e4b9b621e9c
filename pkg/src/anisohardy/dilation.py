"""Expansive dilation matrices and their spectral data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NotExpansive, PowerOutOfRange, SingularInput

EXPANSIVE_TOL = 1e-12
MAX_POWER = 64
# step_index may probe far beyond MAX_POWER for very small or large vectors
_INTERNAL_MAX_POWER = 1024


@dataclass(frozen=True, eq=False)
class DilationMatrix:
    entries: np.ndarray
    det_abs: float
    eig_moduli: tuple[float, ...]
    lambda_minus: float
    lambda_plus: float
    zeta_minus: float
    zeta_plus: float
    lower_margin: float = 0.99
    upper_margin: float = 1.01
    _powers: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def b(self) -> float:
        return self.det_abs

    def power(self, k: int) -> np.ndarray:
        """A^k as a dense matrix, built from cached products of A or A^{-1}."""
        k = int(k)
        if abs(k) > _INTERNAL_MAX_POWER:
            raise PowerOutOfRange(f"|k| = {abs(k)} exceeds {_INTERNAL_MAX_POWER}")
        cache = self._powers
        if k in cache:
            return cache[k]
        if not cache:
            cache[0] = np.eye(self.dim)
            cache[1] = self.entries
            cache[-1] = np.linalg.inv(self.entries)
            if k in cache:
                return cache[k]
        step = 1 if k > 0 else -1
        j = step
        while j + step in cache and abs(j) < abs(k):
            j += step
        while j != k:
            cache[j + step] = cache[step] @ cache[j]
            j += step
        return cache[k]

    def __eq__(self, other):
        if not isinstance(other, DilationMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries) and (
            self.lower_margin,
            self.upper_margin,
        ) == (other.lower_margin, other.upper_margin)

    def __hash__(self):
        return hash((self.entries.tobytes(), self.lower_margin, self.upper_margin))

    def to_record(self) -> dict:
        return {
            "n": self.dim,
            "matrix": [float(v) for v in self.entries.ravel()],
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
        }


def _schur_moduli(M: np.ndarray) -> list[float]:
    # real Schur form: 1x1 blocks carry real eigenvalues, 2x2 blocks complex pairs
    T, _ = scipy.linalg.schur(M, output="real")
    n = T.shape[0]
    moduli = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 0.0:
            block = T[i : i + 2, i : i + 2]
            mod = math.sqrt(abs(np.linalg.det(block)))
            moduli.extend([mod, mod])
            i += 2
        else:
            moduli.append(float(abs(T[i, i])))
            i += 1
    return sorted(moduli)


def validate_dilation(M, lower_margin: float = 0.99, upper_margin: float = 1.01) -> DilationMatrix:
    """Check that ``M`` is expansive and compute b, the eigenvalue moduli and eccentricities.

    ``lambda_minus = |l_1| ** lower_margin`` and ``lambda_plus = |l_n| ** upper_margin``.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SingularInput(f"dilation must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise SingularInput("dilation has non-finite entries")
    if not (0.0 < lower_margin < 1.0 < upper_margin):
        raise ValueError("margins must satisfy 0 < lower < 1 < upper")
    det = float(np.linalg.det(A))
    if det == 0.0:
        raise SingularInput("dilation is singular")
    moduli = _schur_moduli(A)
    if moduli[0] - 1.0 <= EXPANSIVE_TOL:
        raise NotExpansive(f"eigenvalue modulus {moduli[0]!r} is not > 1")
    b = abs(det)
    if not math.isclose(b, math.prod(moduli), rel_tol=1e-10):
        raise SingularInput("determinant disagrees with eigenvalue moduli")
    lam_minus = moduli[0] ** lower_margin
    lam_plus = moduli[-1] ** upper_margin
    A.setflags(write=False)
    return DilationMatrix(
        entries=A,
        det_abs=b,
        eig_moduli=tuple(moduli),
        lambda_minus=float(lam_minus),
        lambda_plus=float(lam_plus),
        zeta_minus=math.log(lam_minus) / math.log(b),
        zeta_plus=math.log(lam_plus) / math.log(b),
        lower_margin=lower_margin,
        upper_margin=upper_margin,
    )


def adjoint(D: DilationMatrix) -> DilationMatrix:
    # spectral data copied verbatim so the adjoint shares b and zeta exactly
    At = np.ascontiguousarray(D.entries.T)
    At.setflags(write=False)
    return DilationMatrix(
        entries=At,
        det_abs=D.det_abs,
        eig_moduli=D.eig_moduli,
        lambda_minus=D.lambda_minus,
        lambda_plus=D.lambda_plus,
        zeta_minus=D.zeta_minus,
        zeta_plus=D.zeta_plus,
        lower_margin=D.lower_margin,
        upper_margin=D.upper_margin,
    )


def power_apply(D: DilationMatrix, k: int, x) -> np.ndarray:
    """Apply A^k to a vector (or to each row of a stack of vectors)."""
    if abs(int(k)) > MAX_POWER:
        raise PowerOutOfRange(f"|k| = {abs(int(k))} exceeds {MAX_POWER}")
    x = np.asarray(x, dtype=float)
    P = D.power(k)
    return x @ P.T if x.ndim > 1 else P @ x
