"""Command-line entry point.

    anisohardy run --config configs/default.yaml --out runs/a
    anisohardy norm 1 2 --matrix "2,1;0,3"
    anisohardy atom gen --seed 3 --k 1 --out atom.bin
    anisohardy atom check atom.bin
    anisohardy ft atom.bin --freqs "0.1,0.2;1,0"
    anisohardy verify origin --seeds 0..9
    anisohardy rearr --seeds 0..4
    anisohardy report merge a.jsonl b.jsonl --out merged.jsonl

Thread count for the per-atom spectra comes from ANISOHARDY_THREADS.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import suite
from .atom_io import load_atom, save_atom
from .atoms import AdmissibleTriplet, check_atom, make_atom, moment_residuals
from .errors import AnisoError, CheckFailed, ConfigParse
from .fourier import ft
from .quasinorm import rho, step_index


def _config(args) -> suite.RunConfig:
    cfg = suite.RunConfig.from_yaml(args.config) if getattr(args, "config", None) else suite.RunConfig()
    changes = {}
    if getattr(args, "matrix", None):
        changes["matrix"] = suite.parse_matrix(args.matrix)
    if getattr(args, "seeds", None):
        changes["seeds"] = suite.parse_seeds(args.seeds)
    if getattr(args, "checks", None) is not None:
        changes["checks"] = [c for c in args.checks.split(",") if c]
    if getattr(args, "out", None):
        changes["out"] = args.out
    return replace(cfg, **changes) if changes else cfg


def _parse_points(text: str) -> np.ndarray:
    try:
        return np.array([[float(v) for v in row.split(",")] for row in text.strip().split(";")])
    except ValueError as exc:
        raise ConfigParse(f"cannot parse points {text!r}") from exc


def _emit(records: list[dict], out_dir: str | None, name: str) -> Path | None:
    path = None
    if out_dir:
        path = suite.write_report(records, Path(out_dir) / name)
    for rec in suite.canonical(records):
        print(json.dumps(rec, sort_keys=True))
    print(json.dumps(suite.summary(records), sort_keys=True))
    return path


def _finish(records: list[dict]) -> int:
    failing = suite.summary(records)["summary"]["failing_checks"]
    if failing:
        raise CheckFailed(failing)
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    records = suite.run_checks(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), sort_keys=True, indent=1) + "\n")
    _emit(records, cfg.out, "report.jsonl")
    return _finish(records)


def cmd_verify(args) -> int:
    cfg = replace(_config(args), checks=[args.check])
    records = suite.run_checks(cfg)
    _emit(records, args.out, f"{args.check}.jsonl")
    return _finish(records)


def cmd_rearr(args) -> int:
    cfg = replace(_config(args), checks=["rearrange", "lorentz"])
    records = suite.run_checks(cfg)
    _emit(records, args.out, "rearrange.jsonl")
    return _finish(records)


def cmd_norm(args) -> int:
    cfg = _config(args)
    D, Q, Qstar = suite.build(cfg)
    x = np.array(args.x, dtype=float)
    if x.size != D.dim:
        raise ConfigParse(f"expected {D.dim} coordinates, got {x.size}")
    zero = not np.any(x)
    rec = {
        "x": x.tolist(),
        "rho": rho(Q, x),
        "rho_star": rho(Qstar, x),
        "step_index": None if zero else step_index(Q, x),
        "step_index_star": None if zero else step_index(Qstar, x),
        "b": D.b,
    }
    print(json.dumps(rec, sort_keys=True))
    return 0


def cmd_atom_gen(args) -> int:
    cfg = _config(args)
    D, Q, _ = suite.build(cfg)
    spec = cfg.triplets[0]
    t = AdmissibleTriplet.for_dilation(float(spec["p"]), float(spec["q"]), spec["s"], D)
    x0 = None if args.x0 is None else _parse_points(args.x0)[0]
    a = make_atom(Q, t, x0=x0, k=args.k, grid_res=cfg.grid_res, seed=args.seed)
    path = save_atom(a, args.file, fmt=args.format)
    print(json.dumps({"file": str(path), "triplet": t.label(), "k": a.k, "seed": a.seed}, sort_keys=True))
    return 0


def cmd_atom_check(args) -> int:
    a = load_atom(args.file)
    rep = check_atom(a)
    res = moment_residuals(a)
    rec = {
        "check": "atom",
        "triplet": a.triplet.label(),
        "k": a.k,
        "seed": a.seed,
        "constant": rep.max_moment_residual,
        "tolerance": 1e-8,
        "pass": rep.ok,
        "size_ratio": rep.size_ratio,
        "support_leak": rep.support_leak,
        "moments": len(res),
    }
    print(json.dumps(rec, sort_keys=True))
    return _finish([rec])


def cmd_ft(args) -> int:
    a = load_atom(args.file)
    xi = _parse_points(args.freqs)
    spec = ft(a, xi)
    for rec in spec.to_records():
        print(json.dumps(rec, sort_keys=True))
    return 0


def cmd_report_merge(args) -> int:
    path = suite.merge_reports(args.reports, args.out)
    print(str(path))
    return 0


def _common(p: argparse.ArgumentParser, out: bool = True) -> None:
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--matrix", help='dilation matrix as "a,b;c,d"')
    p.add_argument("--seeds", help="inclusive seed range a..b")
    if out:
        p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisohardy", description="Anisotropic Hardy space Fourier checks")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run the configured checks")
    _common(p)
    p.add_argument("--checks", help="comma-separated subset of " + ",".join(suite.ALL_CHECKS))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("norm", help="print rho, rho_* and step indices of a vector")
    _common(p, out=False)
    p.add_argument("x", nargs="+", type=float)
    p.set_defaults(func=cmd_norm)

    atom = sub.add_parser("atom", help="generate or check atom files")
    asub = atom.add_subparsers(dest="atom_cmd", required=True)
    p = asub.add_parser("gen")
    _common(p, out=False)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", help='centre as "x1,x2"')
    p.add_argument("--format", choices=("binary", "text"), default="binary")
    p.add_argument("--out", dest="file", required=True, help="atom file to write")
    p.set_defaults(func=cmd_atom_gen)
    p = asub.add_parser("check")
    p.add_argument("file")
    p.set_defaults(func=cmd_atom_check)

    p = sub.add_parser("ft", help="Fourier transform of an atom file")
    p.add_argument("file")
    p.add_argument("--freqs", required=True, help='frequencies as "a,b;c,d"')
    p.set_defaults(func=cmd_ft)

    p = sub.add_parser("verify", help="run a single check")
    p.add_argument("check", choices=suite.ALL_CHECKS)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rearr", help="rearrangement and Lorentz functional checks")
    _common(p)
    p.set_defaults(func=cmd_rearr)

    rep = sub.add_parser("report", help="report utilities")
    rsub = rep.add_subparsers(dest="report_cmd", required=True)
    p = rsub.add_parser("merge")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report_merge)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CheckFailed as exc:
        print(f"FAILED: {', '.join(exc.failing)}", file=sys.stderr)
        return 1
    except AnisoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
