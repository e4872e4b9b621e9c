"""Anisotropic dilations, H^p_A atoms and desk-scale checks of their Fourier transforms."""

from .atoms import AdmissibleTriplet, Atom, AtomicCombination, dilate_atom, make_atom
from .dilation import DilationMatrix, adjoint, validate_dilation
from .fourier import ft
from .quasinorm import QuasiNorm, build_quasinorm, dual_quasinorm, rho, step_index

__all__ = [
    "AdmissibleTriplet",
    "Atom",
    "AtomicCombination",
    "DilationMatrix",
    "QuasiNorm",
    "adjoint",
    "build_quasinorm",
    "dilate_atom",
    "dual_quasinorm",
    "ft",
    "make_atom",
    "rho",
    "step_index",
    "validate_dilation",
]
