"""Command-line front end.

Data goes to files (CSV, JSON, OBJ); stdout carries short human-readable
summaries only.  Exit codes: 0 success, 2 violated precondition,
3 metric degenerate everywhere, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import geometry, io
from .analysis import (
    DEFAULT_WINDOW,
    KappaError,
    ScanSpec,
    ScanSpecError,
    classify_indicatrix,
    kappa_integral,
    run_scan,
    sample_indicatrix,
)
from .analysis.scan import DEFAULT_FIXED, INVARIANTS, SWEEP_VARS, params_dict
from .jets import JetError, JetPoleError
from .model import (
    COUPLING_P,
    FROZEN,
    LIGHT_SPEED,
    MOLECULAR_MASS,
    PHYSICAL,
    ModelDomainError,
    ModelParams,
)
from .presets import PRESET_IDS, UnknownPresetError, get_preset, self_check

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4

POINT_KEYS = ("t", "r", "phi", "xidot", "rdot", "phidot")
PARAM_KEYS = ("m", "c", "p", "V", "mode", "frozen_A", "frozen_B", "frozen_C")


class Precondition(Exception):
    pass


class Degenerate(Exception):
    pass


# -- parameters --------------------------------------------------------------------

def read_param_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise Precondition(f"{path}:{n}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in PARAM_KEYS + POINT_KEYS + ("jet_order",):
                raise Precondition(f"{path}:{n}: unknown key {k!r}")
            out[k] = v if k == "mode" else float(v)
    return out


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--params-file", help="plain 'key = value' file; flags override it")
    g.add_argument("--m", type=float, help=f"molecular mass [kg] (default {MOLECULAR_MASS!r})")
    g.add_argument("--c", type=float, help=f"speed of light [m/s] (default {LIGHT_SPEED!r})")
    g.add_argument("--p", type=float, help=f"coupling constant [J/m^5] (default {COUPLING_P!r})")
    g.add_argument("--V", type=float, help="compression speed magnitude [m/s] (default 0.1)")
    g.add_argument("--frozen-A", type=float, help="freeze A to this constant (frozen mode)")
    g.add_argument("--frozen-B", type=float, help="freeze B to this constant (frozen mode)")
    g.add_argument("--frozen-C", type=float, help="freeze C to this constant (frozen mode)")
    g.add_argument("--jet-order", type=int, help="jet truncation order (overrides the environment)")


def _add_point_flags(p: argparse.ArgumentParser, skip=()) -> None:
    g = p.add_argument_group("point")
    for k in POINT_KEYS:
        if k not in skip:
            g.add_argument(f"--{k}", type=float, help=f"default {DEFAULT_FIXED[k]!r}")


def _file_values(args) -> dict:
    return read_param_file(args.params_file) if getattr(args, "params_file", None) else {}


def build_params(args) -> ModelParams:
    fv = _file_values(args)
    kw = {}
    for k in ("m", "c", "p", "V"):
        v = getattr(args, k, None)
        if v is None:
            v = fv.get(k)
        if v is not None:
            kw[k] = v
    frozen = {}
    for k in ("frozen_A", "frozen_B", "frozen_C"):
        v = getattr(args, k, None)
        if v is None:
            v = fv.get(k)
        if v is not None:
            frozen[k] = v
    mode = fv.get("mode", FROZEN if frozen else PHYSICAL)
    if frozen or mode == FROZEN:
        m = kw.get("m", MOLECULAR_MASS)
        c = kw.get("c", LIGHT_SPEED)
        frozen.setdefault("frozen_C", m * c * c)
        kw.update(frozen)
        kw["mode"] = FROZEN
    if args.jet_order is not None or "jet_order" in fv:
        os.environ[geometry.ORDER_ENV] = str(int(args.jet_order or fv["jet_order"]))
    try:
        return ModelParams(**kw)
    except ModelDomainError as exc:
        raise Precondition(str(exc)) from None


def point_values(args, skip=()) -> dict:
    fv = _file_values(args)
    out = {}
    for k in POINT_KEYS:
        if k in skip:
            continue
        v = getattr(args, k, None)
        if v is None:
            v = fv.get(k, DEFAULT_FIXED[k])
        out[k] = float(v)
    return out


def _write(path, text: str) -> None:
    try:
        io.write_atomic(path, text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


# -- commands ----------------------------------------------------------------------

def cmd_invariants(args) -> int:
    params = build_params(args)
    pt = point_values(args)
    x = (pt["t"], pt["r"], pt["phi"])
    y = (pt["xidot"], pt["rdot"], pt["phidot"])
    try:
        b = geometry.geometry_bundle(x, y, params)
    except JetPoleError as exc:
        if exc.name == "rdot":
            raise
        raise Degenerate(f"metric degenerate at this point ({exc.name} = 0)") from None
    report = {
        "kind": "invariants",
        "point": pt,
        "params": params_dict(params),
        "F2": b.F2,
        "signature": b.metric.signature if isinstance(b.metric.signature, str) else ",".join(b.metric.signature),
        "Delta1": b.metric.delta1,
        "Delta2": b.metric.delta2,
        "Delta3": b.metric.delta3,
        "g": b.metric.g,
        "g_inv": b.metric.g_inv,
        "cartan": b.cartan,
        "spray": b.spray,
        "connection": b.connection,
        "christoffel": b.christoffel,
        "hh_curv": b.hh_curv,
        "berwald": b.berwald,
        "RC": b.R_C,
        "BC": b.B_C,
        "pole_flags": b.pole_flags,
        "closed_form": b.closed_form,
        "max_rel_deviation": b.path_deviation,
        "printed_rel_deviation": b.printed_deviation,
    }
    sig = report["signature"]
    print(f"signature ({sig})" if sig != "degenerate" else "signature degenerate")
    print(f"F2 = {b.F2!r}")
    print(f"RC = {b.R_C!r}")
    print(f"BC = {b.B_C!r}")
    dev = max(b.path_deviation.values())
    print(f"closed-form vs jet max relative deviation = {dev:.3e}")
    if b.pole_flags:
        print("pole flags: " + ", ".join(b.pole_flags))
    if args.out:
        _write(args.out, io.dumps(report))
    return EXIT_OK


def _scan_spec(args) -> ScanSpec:
    params = build_params(args)
    fixed = point_values(args, skip=(args.var,) if args.var in POINT_KEYS else ())
    invariants = tuple(args.invariants.split(",")) if args.invariants else ("F2", "Delta1", "Delta2", "R_C", "B_C")
    return ScanSpec(
        args.var, args.lo, args.hi, args.steps, fixed=fixed, invariants=invariants,
        params=params, spacing=args.spacing,
    )


def _emit_scan(res, path, fmt) -> None:
    text = io.scan_to_json(res) if fmt == "json" else io.scan_to_csv(res)
    _write(path, text)


def _all_degenerate(res) -> bool:
    return all(r.pole for r in res.rows)


def cmd_scan(args) -> int:
    spec = _scan_spec(args)
    res = run_scan(spec)
    out = args.out or f"scan-{args.var}.{args.format}"
    _emit_scan(res, out, args.format)
    print(f"{len(res.rows)} rows over {spec.var} in [{spec.lo!r}, {spec.hi!r}] -> {out}")
    if res.poles:
        print(f"{len(res.poles)} rows flagged as poles")
    if _all_degenerate(res):
        print("every row is at a pole", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_classify(args) -> int:
    params = build_params(args)
    pt = point_values(args)
    x = (pt["t"], pt["r"], pt["phi"])
    window = tuple(args.window) if args.window else DEFAULT_WINDOW
    if not window[0] < window[1]:
        raise Precondition("window must satisfy lo < hi")
    cls = classify_indicatrix(x, params, window)
    print(cls.type)
    if args.out:
        _write(args.out, io.dumps({
            "kind": "classification",
            "type": cls.type,
            "singularities_u": cls.singularities,
            "evidence": cls.evidence,
            "params": params_dict(params),
            "point": {k: pt[k] for k in ("t", "r", "phi")},
        }))
    return EXIT_OK


def cmd_indicatrix(args) -> int:
    params = build_params(args)
    pt = point_values(args)
    x = (pt["t"], pt["r"], pt["phi"])
    s = sample_indicatrix(x, params, mode=args.mode, resolution=args.resolution)
    ext = "obj" if args.mode == "grid" else "csv"
    out = args.out or f"indicatrix-{args.mode}.{ext}"
    _write(out, io.indicatrix_to_obj(s) if args.mode == "grid" else io.indicatrix_to_csv(s))
    print(f"{len(s)} points ({args.mode} mode) -> {out}")
    if s.diagnostic:
        print(s.diagnostic)
    return EXIT_OK


def cmd_kappa(args) -> int:
    params = build_params(args)
    pt = point_values(args)
    fiber = (pt["xidot"], pt["rdot"], pt["phidot"])
    try:
        k = kappa_integral(params, pt["t"], fiber, (args.r_lo, args.r_hi), eps=args.eps)
    except KappaError as exc:
        raise Precondition(str(exc)) from None
    print(f"kappa ~ {k.value!r}")
    print("excluded poles: " + (", ".join(repr(p) for p in k.poles) if k.poles else "none"))
    if args.out:
        _write(args.out, io.dumps({
            "kind": "kappa",
            "value": k.value,
            "abserr": k.abserr,
            "poles": k.poles,
            "intervals": k.intervals,
            "metadata": k.metadata,
            "params": params_dict(params),
        }))
    return EXIT_OK


def cmd_figure(args) -> int:
    preset = get_preset(args.id)
    problems = self_check(preset)
    if problems:
        raise Precondition("preset disagrees with its source values: " + "; ".join(problems))
    outdir = args.outdir or preset.id
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {outdir}: {exc.strerror or exc}") from exc
    written = []
    for s in preset.series:
        name = s.label.replace("=", "").replace("/", "_")
        if s.spec is not None:
            res = run_scan(s.spec)
            res.metadata["preset"] = preset.id
            path = os.path.join(outdir, f"{preset.id}_{name}.{args.format}")
            _emit_scan(res, path, args.format)
        else:
            x = preset.base_point
            rows = []
            for label, params in s.batch:
                cls = classify_indicatrix(x, params)
                rows.append({
                    "label": label,
                    "B": params.frozen_B,
                    "type": cls.type,
                    "singularities_u": cls.singularities,
                    "evidence": cls.evidence,
                })
            path = os.path.join(outdir, f"{preset.id}_{name}.json")
            _write(path, io.dumps({
                "kind": "classification-batch",
                "preset": preset.id,
                "source": preset.source,
                "chosen": preset.chosen,
                "metadata": preset.metadata,
                "rows": rows,
            }))
        written.append(path)
    for p in written:
        print(p)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monofinsler", description="Finsler invariants of a compressed monolayer")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", help="every invariant at one phase-space point")
    _add_point_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", help="write the full report as JSON")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("scan", help="one-dimensional scan")
    p.add_argument("--var", required=True, choices=SWEEP_VARS)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--invariants", help=f"comma-separated subset of {','.join(INVARIANTS)}")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    _add_point_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("classify", help="indicatrix type from the Delta2 sign changes")
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"), help="u = xidot/rdot window")
    p.add_argument("--out")
    _add_point_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("indicatrix", help="sample F^2 = 1")
    p.add_argument("--mode", choices=("ray", "grid"), default="ray")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")
    _add_point_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_indicatrix)

    p = sub.add_parser("kappa", help="2 pi * integral of B_C r dr")
    p.add_argument("--r-lo", type=float, required=True)
    p.add_argument("--r-hi", type=float, required=True)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--out")
    _add_point_flags(p, skip=())
    _add_model_flags(p)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("figure", help="run a figure preset")
    p.add_argument("id", help=f"one of {', '.join(PRESET_IDS)}")
    p.add_argument("--outdir")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_figure)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownPresetError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PRECONDITION
    except JetPoleError as exc:
        if exc.name == "rdot":
            print(str(exc), file=sys.stderr)
            return EXIT_PRECONDITION
        print(f"degenerate metric: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except Degenerate as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DEGENERATE
    except (Precondition, ModelDomainError, ScanSpecError, JetError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
