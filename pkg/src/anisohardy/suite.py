"""Config-driven sweeps: build the structures once, run the selected checks, emit records."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from . import rearrange as rr
from .atom_io import save_atom
from .atoms import AdmissibleTriplet, Atom, AtomicCombination, dilate_atom, make_atom
from .dilation import DilationMatrix, validate_dilation
from .errors import ConfigParse
from .quasinorm import QuasiNorm, build_quasinorm, dual_quasinorm, rho
from .verify import (
    FrequencyAnnulus,
    calibrate_bump_constant,
    geometric_tail,
    hl_integral,
    make_annuli,
    make_annulus_test,
    multiplier_annulus_bound,
    origin_decay,
    origin_levels,
    pointwise_ratio,
    shift_annuli,
    spectrum,
    two_regime_check,
)

ALL_CHECKS = ("pointwise", "two_regime", "origin", "hl", "multiplier", "rearrange", "lorentz")
THREADS_ENV = "ANISOHARDY_THREADS"
UNIFORM_RATIO = 10.0


@dataclass
class RunConfig:
    matrix: list = field(default_factory=lambda: [[2.0, 1.0], [0.0, 3.0]])
    r: float | None = None
    J: int | None = None
    triplets: list = field(default_factory=lambda: [{"p": 0.5, "q": 2.0, "s": "auto"}])
    k_range: tuple = (-3, 3)
    seeds: tuple = (0, 49)  # inclusive
    grid_res: int = 64
    m_lo: int = -12
    m_hi: int = 12
    annulus_points: int = 256
    annulus_seed: int = 0
    checks: list = field(default_factory=lambda: list(ALL_CHECKS))
    eps: float = 0.1
    out: str = "runs/default"
    write_atoms: bool = False

    def __post_init__(self):
        self.matrix = parse_matrix(self.matrix)
        self.k_range = tuple(int(v) for v in self.k_range)
        self.seeds = parse_seeds(self.seeds)
        unknown = sorted(set(self.checks) - set(ALL_CHECKS))
        if unknown:
            raise ConfigParse(f"unknown checks: {', '.join(unknown)}")
        if self.k_range[0] > self.k_range[1] or self.m_lo > self.m_hi:
            raise ConfigParse("ranges must be ordered low..high")
        for t in self.triplets:
            if not {"p", "q", "s"} <= set(t):
                raise ConfigParse(f"triplet needs p, q and s: {t!r}")

    @classmethod
    def from_yaml(cls, path) -> "RunConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigParse(f"{path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigParse(f"{path}: top level must be a mapping")
        known = {f.name for f in fields(cls)}
        extra = sorted(set(raw) - known)
        if extra:
            raise ConfigParse(f"{path}: unknown keys {extra}")
        return cls(**raw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k_range"] = list(self.k_range)
        d["seeds"] = list(self.seeds)
        return d


def parse_matrix(spec) -> list[list[float]]:
    """Accept nested lists or the "a,b;c,d" row syntax."""
    try:
        if isinstance(spec, str):
            rows = [[float(v) for v in row.split(",")] for row in spec.strip().split(";")]
        else:
            rows = [[float(v) for v in row] for row in spec]
    except (TypeError, ValueError) as exc:
        raise ConfigParse(f"cannot parse matrix {spec!r}") from exc
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ConfigParse(f"matrix must be square, got row lengths {[len(r) for r in rows]}")
    return rows


def parse_seeds(spec) -> tuple[int, int]:
    try:
        if isinstance(spec, str):
            a, b = spec.split("..")
            lo, hi = int(a), int(b)
        else:
            lo, hi = (int(v) for v in spec)
    except (TypeError, ValueError) as exc:
        raise ConfigParse(f"seed range must look like a..b, got {spec!r}") from exc
    if lo > hi:
        raise ConfigParse("seed range must be ordered")
    return lo, hi


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigParse(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def record(check: str, triplet: AdmissibleTriplet | None, k, seed, constant, tolerance, passed, **extra) -> dict:
    rec = {
        "check": check,
        "triplet": triplet.label() if triplet is not None else None,
        "k": None if k is None else int(k),
        "seed": None if seed is None else int(seed),
        "constant": _num(constant),
        "tolerance": _num(tolerance),
        "pass": bool(passed),
    }
    rec.update({key: _num(v) if isinstance(v, float) else v for key, v in extra.items()})
    return rec


def _num(v):
    if v is None:
        return None
    v = float(v)
    # JSON has no inf/nan; keep the record parseable
    return v if math.isfinite(v) else repr(v)


def _sort_key(rec: dict):
    return (rec["check"], rec.get("triplet") or "", rec.get("case") or "", rec["seed"] if rec.get("seed") is not None else -1,
            rec["k"] if rec.get("k") is not None else -10**9)


def canonical(records: list[dict]) -> list[dict]:
    return sorted(records, key=_sort_key)


def summary(records: list[dict]) -> dict:
    failing = sorted({r["check"] for r in records if not r["pass"]})
    return {"summary": {"records": len(records), "passed": sum(r["pass"] for r in records),
                        "failed": sum(not r["pass"] for r in records), "failing_checks": failing}}


def write_report(records: list[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(r, sort_keys=True) for r in canonical(records)]
    lines.append(json.dumps(summary(records), sort_keys=True))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_report(path) -> list[dict]:
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if "summary" not in rec:
            out.append(rec)
    return out


def merge_reports(paths, out) -> Path:
    records = [r for p in paths for r in read_report(p)]
    return write_report(records, out)


class Sweep:
    """Atoms of one triplet plus their spectra on the shared annuli."""

    def __init__(self, cfg: RunConfig, triplet: AdmissibleTriplet, D: DilationMatrix, Q: QuasiNorm, Qstar: QuasiNorm):
        self.cfg, self.triplet, self.D, self.Q, self.Qstar = cfg, triplet, D, Q, Qstar

    @cached_property
    def seeds(self) -> list[int]:
        lo, hi = self.cfg.seeds
        return list(range(lo, hi + 1))

    def scale_of(self, seed: int) -> int:
        k_lo, k_hi = self.cfg.k_range
        return k_lo + (seed % (k_hi - k_lo + 1))

    @cached_property
    def atoms(self) -> list[Atom]:
        return [make_atom(self.Q, self.triplet, k=self.scale_of(s), grid_res=self.cfg.grid_res, seed=s) for s in self.seeds]

    @cached_property
    def annuli(self) -> list[FrequencyAnnulus]:
        return make_annuli(self.Qstar, self.cfg.m_lo, self.cfg.m_hi, self.cfg.annulus_points, self.cfg.annulus_seed)

    @cached_property
    def points(self) -> np.ndarray:
        return np.concatenate([A.points for A in self.annuli])

    @cached_property
    def spectra(self) -> list[np.ndarray]:
        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            return list(pool.map(lambda a: spectrum(a, self.points), self.atoms))


def _uniform(values: list[float]) -> tuple[float, list[bool]]:
    v = np.asarray(values, dtype=float)
    med = float(np.median(v))
    ok = np.isfinite(v) & (v <= UNIFORM_RATIO * med)
    return float(np.max(v) / med), [bool(x) for x in ok]


def check_pointwise(sw: Sweep) -> list[dict]:
    b = sw.D.b
    ratios = [pointwise_ratio(a, sw.annuli, b, values=v) for a, v in zip(sw.atoms, sw.spectra)]
    spread, ok = _uniform(ratios)
    out = [record("pointwise", sw.triplet, a.k, a.seed, r, UNIFORM_RATIO, good, spread=spread)
           for a, r, good in zip(sw.atoms, ratios, ok)]
    # invariance under the exact dilation on matched annuli
    for a, r in list(zip(sw.atoms, ratios))[:5]:
        for j in (-2, 3):
            rj = pointwise_ratio(dilate_atom(a, j), shift_annuli(sw.annuli, sw.Qstar, j), b)
            dev = abs(rj - r) / r
            out.append(record("pointwise.dilation", sw.triplet, a.k, a.seed, dev, 1e-6, dev <= 1e-6, case=f"j={j}"))
    return out


def check_two_regime(sw: Sweep) -> list[dict]:
    out = []
    for a, v in zip(sw.atoms, sw.spectra):
        near, far = two_regime_check(a, sw.annuli, values=v)
        out.append(record("two_regime", sw.triplet, a.k, a.seed, near, None,
                          math.isfinite(near) and math.isfinite(far), c_far=far))
    return out


def check_origin(sw: Sweep) -> list[dict]:
    b = sw.D.b
    lo, hi = origin_levels(b)
    ann = make_annuli(sw.Qstar, lo, hi, sw.cfg.annulus_points, sw.cfg.annulus_seed)
    out = []
    for a in sw.atoms:
        rep = origin_decay(a, ann, b, sw.D.zeta_minus)
        out.append(record("origin", sw.triplet, a.k, a.seed, rep.slope, rep.required, rep.passed,
                          exponent=rep.exponent, levels=list(rep.levels)))
    return out


def check_hl(sw: Sweep) -> list[dict]:
    b = sw.D.b
    res = [hl_integral(a, sw.annuli, b, values=v) for a, v in zip(sw.atoms, sw.spectra)]
    spread, ok = _uniform([h.total for h in res])
    out = []
    for a, h, good in zip(sw.atoms, res, ok):
        rate, geometric = geometric_tail(h.contributions, -a.k + 2)
        out.append(record("hl", sw.triplet, a.k, a.seed, h.total, UNIFORM_RATIO, good and geometric,
                          spread=spread, tail_rate=rate))
    # combinations of 5 atoms against the fitted per-atom constant
    C = max(h.total for h in res)
    rng = np.random.default_rng(sw.cfg.seeds[0])
    for c in range(10):
        idx = rng.choice(len(sw.atoms), size=min(5, len(sw.atoms)), replace=False)
        lam = rng.standard_normal(len(idx))
        vals = sum(l * sw.spectra[i] for l, i in zip(lam, idx))
        comb = AtomicCombination([sw.atoms[i] for i in idx], lam)
        total = hl_integral(comb, sw.annuli, b, values=vals).total
        bound = C * comb.lp_sum()
        out.append(record("hl.combination", sw.triplet, None, c, total / bound, 1.0, total <= bound))
    return out


def check_multiplier(sw: Sweep) -> list[dict]:
    b = sw.D.b
    bump = make_annulus_test(sw.Qstar)
    C = calibrate_bump_constant(bump, sw.annuli, sw.triplet.p)
    out = []
    for A in sw.annuli:
        k = A.level
        one = multiplier_annulus_bound(np.ones(len(A.points)), A, k, 1.0, bump, C)
        out.append(record("multiplier", sw.triplet, k, None, one.sup_product, one.bound, one.passed and one.sup_m == 1.0,
                          case="identity"))
        flip = np.where(A.points[:, 0] >= 0, 1.0, -1.0)
        sg = multiplier_annulus_bound(flip, A, k, 1.0, bump, C)
        out.append(record("multiplier", sw.triplet, k, None, sg.sup_product, sg.bound, sg.passed and sg.sup_m == 1.0,
                          case="sign"))
        # rho_*^{-1} = b^{-k} on the annulus: its suprema must track b^{-k}
        inv = multiplier_annulus_bound(1.0 / rho(sw.Qstar, A.points), A, k, 1.0, bump, C)
        growth = inv.sup_m / b ** (-k)
        out.append(record("multiplier", sw.triplet, k, None, growth, b, 1.0 / b <= growth <= b, case="rho_inverse",
                          flagged=not inv.passed))
    return out


def _atom_field(sw: Sweep, i: int, lam: float = 0.0) -> rr.MeasuredField:
    return rr.annulus_field(sw.spectra[i], sw.annuli, sw.D.b, lam)


def check_rearrange(sw: Sweep) -> list[dict]:
    out = []
    eps = sw.cfg.eps
    lam = 1.0 / sw.triplet.p - 1.0 + eps
    for i, a in enumerate(sw.atoms):
        F = _atom_field(sw, i, lam)
        dev = rr.power_identity_check(F, sw.triplet.p)
        out.append(record("rearrange.power", sw.triplet, a.k, a.seed, dev, 0.0, dev == 0.0))
        for k in (-2, 1, 3):
            s = rr.scaling_law_check(F, sw.Qstar, k, eps)
            out.append(record("rearrange.scaling", sw.triplet, a.k, a.seed, s, 1e-12, s <= 1e-12, case=f"k={k}"))
        G = _atom_field(sw, (i + 1) % len(sw.atoms), lam)
        H = _atom_field(sw, (i + 2) % len(sw.atoms), lam)
        worst = -math.inf
        for t in np.geomspace(F.measures.min(), F.total_measure, 12):
            lhs, rhs = rr.subadditivity_check([F, G, H], t)
            worst = max(worst, (lhs - rhs) / max(rhs, 1e-300))
        out.append(record("rearrange.subadditivity", sw.triplet, a.k, a.seed, worst, 1e-12, worst <= 1e-12))
        lhs, rhs = rr.hardy_littlewood_pairing(F, G)
        gap = (lhs - rhs) / max(rhs, 1e-300)
        out.append(record("rearrange.pairing", sw.triplet, a.k, a.seed, gap, 1e-10, gap <= 1e-10))
    prof = rr.rho_reciprocal_profile(sw.Qstar, sw.annuli)
    out.append(record("rearrange.reciprocal", sw.triplet, None, None, float(prof.products.max()), sw.D.b, prof.passed,
                      lower=float(prof.products.min())))
    return out


def check_lorentz(sw: Sweep) -> list[dict]:
    b = sw.D.b
    p, eps = sw.triplet.p, sw.cfg.eps
    out = []
    # unit atoms: same seeds, k = 0
    units = [make_atom(sw.Q, sw.triplet, k=0, grid_res=sw.cfg.grid_res, seed=s) for s in sw.seeds]
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        vals = list(pool.map(lambda a: spectrum(a, sw.points), units))
    res = [rr.lorentz_functional(v, sw.annuli, b, p, eps) for v in vals]
    spread, ok = _uniform([r.averaged for r in res])
    for a, r, good in zip(units, res, ok):
        out.append(record("lorentz", sw.triplet, a.k, a.seed, r.averaged, UNIFORM_RATIO, good and r.majorized,
                          spread=spread, weighted=r.weighted, lam=r.lam, eps=eps, majorized=r.majorized))
    for a, r in list(zip(units, res))[:5]:
        for j in (-2, 2):
            ann = shift_annuli(sw.annuli, sw.Qstar, j)
            aj = dilate_atom(a, j)
            v = spectrum(aj, np.concatenate([A.points for A in ann]))
            rj = rr.lorentz_functional(v, ann, b, p, eps)
            dev = abs(rj.averaged - r.averaged) / r.averaged
            out.append(record("lorentz.dilation", sw.triplet, aj.k, a.seed, dev, 1e-6, dev <= 1e-6 and rj.majorized,
                              majorized=rj.majorized))
    return out


CHECKS = {
    "pointwise": check_pointwise,
    "two_regime": check_two_regime,
    "origin": check_origin,
    "hl": check_hl,
    "multiplier": check_multiplier,
    "rearrange": check_rearrange,
    "lorentz": check_lorentz,
}


def _file_tag(t: AdmissibleTriplet) -> str:
    return "pqs_" + t.label().strip("()").replace(",", "_")


def build(cfg: RunConfig) -> tuple[DilationMatrix, QuasiNorm, QuasiNorm]:
    D = validate_dilation(cfg.matrix)
    Q = build_quasinorm(D, r=cfg.r, J=cfg.J)
    return D, Q, dual_quasinorm(Q)


def run_checks(cfg: RunConfig) -> list[dict]:
    if not cfg.checks:
        return []
    D, Q, Qstar = build(cfg)
    records = []
    for spec in cfg.triplets:
        t = AdmissibleTriplet.for_dilation(float(spec["p"]), float(spec["q"]), spec["s"], D)
        sw = Sweep(cfg, t, D, Q, Qstar)
        for name in ALL_CHECKS:
            if name in cfg.checks:
                records.extend(CHECKS[name](sw))
        if cfg.write_atoms:
            atom_dir = Path(cfg.out) / "atoms"
            atom_dir.mkdir(parents=True, exist_ok=True)
            for a in sw.atoms:
                save_atom(a, atom_dir / f"{_file_tag(t)}_seed{a.seed}.atom")
    return canonical(records)
