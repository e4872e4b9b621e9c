"""Atom files: one JSON header line, then the samples in lattice row-major order.

The binary variant stores the samples as little-endian float64; the text
variant stores one ``repr`` float per line. Both round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .atoms import AdmissibleTriplet, Atom, LatticeField
from .dilation import validate_dilation
from .quasinorm import build_quasinorm

_MAGIC = "anisohardy-atom"


def header(a: Atom, fmt: str) -> dict:
    Q = a.quasinorm
    D = Q.dilation
    t = a.triplet
    return {
        "magic": _MAGIC,
        "format": fmt,
        "n": D.dim,
        "A": [float(v) for v in D.entries.ravel()],
        "k": a.k,
        "x0": [float(v) for v in a.center],
        "p": t.p,
        "q": t.q,
        "s": t.s,
        "grid_shape": list(a.field.shape),
        "base_cell_volume": a.base_cell_volume,
        "seed": a.seed,
        "r": Q.series_ratio,
        "J": Q.series_terms,
        "grid_lo": [float(v) for v in a.field.grid_lo],
        "grid_step": [float(v) for v in a.field.grid_step],
        "lower_margin": D.lower_margin,
        "upper_margin": D.upper_margin,
    }


def save_atom(a: Atom, path, fmt: str = "binary") -> Path:
    if fmt not in ("binary", "text"):
        raise ValueError(f"unknown atom format {fmt!r}")
    path = Path(path)
    head = (json.dumps(header(a, fmt), sort_keys=True) + "\n").encode()
    flat = np.ascontiguousarray(a.samples, dtype="<f8").ravel()
    with open(path, "wb") as fh:
        fh.write(head)
        if fmt == "binary":
            fh.write(flat.tobytes())
        else:
            fh.write("".join(f"{v!r}\n" for v in flat.tolist()).encode())
    return path


def load_atom(path) -> Atom:
    with open(path, "rb") as fh:
        head = json.loads(fh.readline())
        body = fh.read()
    if head.get("magic") != _MAGIC:
        raise ValueError(f"{path} is not an atom file")
    n = head["n"]
    D = validate_dilation(np.array(head["A"]).reshape(n, n), head["lower_margin"], head["upper_margin"])
    Q = build_quasinorm(D, r=head["r"], J=head["J"])
    shape = tuple(head["grid_shape"])
    if head["format"] == "binary":
        flat = np.frombuffer(body, dtype="<f8").astype(float)
    else:
        flat = np.array([float(line) for line in body.decode().split()])
    if flat.size != int(np.prod(shape)):
        raise ValueError("sample count does not match the grid shape")
    k = int(head["k"])
    fld = LatticeField(
        center=np.array(head["x0"], dtype=float),
        frame=D.power(k),
        grid_lo=np.array(head["grid_lo"]),
        grid_step=np.array(head["grid_step"]),
        samples=flat.reshape(shape),
        cell_measure=D.det_abs**k * head["base_cell_volume"],
    )
    t = AdmissibleTriplet(p=head["p"], q=head["q"], s=head["s"])
    return Atom(triplet=t, quasinorm=Q, k=k, field=fld, seed=head["seed"])
