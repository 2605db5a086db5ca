"""Command-line front end: ``netcap analyze | hard-instance | verify | gap | bounds | replay``.

Every command prints (and with ``--out`` writes) a JSON run report.  Exit
codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import bounds as bd
from .capacity import constant_ledger, ledger_for, network_covering_bound
from .hard_instance import (
    BumpInfeasible,
    build_family,
    choose_nstar,
    make_bump,
    verify_class_membership,
    verify_localization,
    verify_separation,
)
from .network import StructureError, load_architecture, uniform_output_bound
from .numerics import SizeError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
MAX_VERIFY_NODES = 2_000_000


class InputError(ValueError):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_json"):
        return _jsonable(obj.to_json())
    return obj


def canonical(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True)


def atomic_write(path, text: str):
    """Write UTF-8 text via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _digest(spec: dict, files=()) -> str:
    h = hashlib.sha256(canonical(spec).encode())
    for f in files:
        h.update(Path(f).read_bytes())
    return h.hexdigest()


# -- argument parsing ---------------------------------------------------------


def _float_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise InputError("epsilon list is empty")
    try:
        vals = [float(t) for t in items]
    except ValueError:
        raise InputError(f"cannot parse number list {text!r}") from None
    if any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise InputError("epsilon values must be positive and finite")
    return vals


def parse_n_range(text: str) -> list[int]:
    """``A:B`` doubles from A up to B; ``A:B:K`` gives K log-spaced integers;
    ``a,b,c`` lists values."""
    try:
        if ":" not in text:
            ns = [int(t) for t in text.split(",") if t.strip()]
        else:
            parts = [int(t) for t in text.split(":")]
            if len(parts) == 2:
                a, b = parts
                ns = []
                while a <= b and a >= 1:
                    ns.append(a)
                    a *= 2
            elif len(parts) == 3:
                a, b, k = parts
                if a < 1 or b < a or k < 1:
                    raise InputError(f"bad n range {text!r}")
                ns = sorted(set(np.unique(np.round(np.geomspace(a, b, k)).astype(int)).tolist()))
            else:
                raise InputError(f"bad n range {text!r}")
    except ValueError:
        raise InputError(f"cannot parse n range {text!r}") from None
    if not ns:
        raise InputError(f"n range {text!r} is empty")
    if min(ns) < 2:
        raise InputError("n range must start at n >= 2")
    return ns


def _ledger_arg(text: str | None, d: int):
    if text is None:
        return constant_ledger(1.0, 1.0, d)
    try:
        c, c1 = (float(t) for t in text.split(","))
    except ValueError:
        raise InputError(f"--ledger expects 'c,c1', got {text!r}") from None
    return constant_ledger(c, c1, d)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netcap", description="Capacity bounds and hard instances for structured deep nets.")
    p.add_argument("--version", action="version", version=f"netcap {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="directory for report.json and tables")
        sp.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("analyze", help="covering bounds of an architecture")
    a.add_argument("--arch", required=True)
    a.add_argument("--eps", required=True, help="comma-separated radii")
    common(a)

    h = sub.add_parser("hard-instance", help="build and verify the sign-code bump family")
    h.add_argument("--d", type=int, required=True)
    h.add_argument("--r", type=float, required=True)
    h.add_argument("--c0", type=float, required=True)
    g = h.add_mutually_exclusive_group(required=True)
    g.add_argument("--nstar", type=int)
    g.add_argument("--n", type=int, help="parameter count; N* is derived from it")
    h.add_argument("--c-tilde1", type=float, default=1.0)
    h.add_argument("--c-tilde2", type=float, default=1.0)
    h.add_argument("--beta", type=float, default=0.0)
    h.add_argument("--max-words", type=int, default=64, help="cap on code words for long codes")
    common(h)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", help="comma-separated suite names (default: all)")
    v.add_argument("--arch")
    common(v)

    gp = sub.add_parser("gap", help="tabulate approximation-rate curves")
    gp.add_argument("--r", type=float, required=True)
    gp.add_argument("--d", type=int, required=True)
    gp.add_argument("--L", type=int, required=True)
    gp.add_argument("--n-range", required=True)
    gp.add_argument("--ledger", help="activation constants 'c,c1' (default 1,1)")
    gp.add_argument("--R", type=float, default=1.0)
    gp.add_argument("--dmax", type=int, default=2)
    common(gp)

    b = sub.add_parser("bounds", help="lower-bound certificates")
    b.add_argument("--kind", choices=("relation", "deep-net"), required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--r", type=float, required=True)
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--L", type=int, default=1)
    b.add_argument("--R", type=float, default=1.0)
    b.add_argument("--dmax", type=int, default=2)
    b.add_argument("--ledger")
    b.add_argument("--c-tilde1", type=float, default=1.0)
    b.add_argument("--c-tilde2", type=float, default=1.0)
    b.add_argument("--beta", type=float, default=0.0)
    common(b)

    rp = sub.add_parser("replay", help="rerun a report's command and compare payloads")
    rp.add_argument("report")
    return p


# -- commands -----------------------------------------------------------------


def run_analyze(args) -> tuple[dict, bool, dict]:
    eps = _float_list(args.eps)
    arch = load_architecture(args.arch)
    payload = {
        "n": arch.n,
        "n_params": arch.n_params,
        "L": arch.depth,
        "widths": list(arch.widths),
        "R": arch.radius,
        "D_max": arch.d_max,
        "ledger": ledger_for(arch).to_json(),
        "uniform_output_bounds": [uniform_output_bound(arch, ell) for ell in range(1, arch.depth + 1)],
        "covering_bounds": [network_covering_bound(arch, e).to_json() for e in eps],
    }
    table = "epsilon,log2_tight,log2_relaxed,log2_staged\n" + "".join(
        f"{b['epsilon']!r},{b['log2_tight']!r},{b['log2_relaxed']!r},{b['log2_staged']!r}\n"
        for b in payload["covering_bounds"]
    )
    return payload, True, {"covering.csv": table}


def run_hard_instance(args) -> tuple[dict, bool, dict]:
    d, r, c0 = args.d, args.r, args.c0
    if d < 1 or r <= 0 or c0 <= 0:
        raise InputError("need d >= 1, r > 0, c0 > 0")
    if args.nstar is not None:
        if args.nstar < 1:
            raise InputError("--nstar must be >= 1")
        n_star = args.nstar
    else:
        n_star = choose_nstar(args.n, d, r, args.beta, args.c_tilde1, args.c_tilde2)
    bump = make_bump(d, r, c0)
    m = n_star**d
    fam = build_family(n_star, bump, seed=args.seed, max_words=args.max_words if m > 20 else None)
    payload = {"n_star": n_star, "cells": m, "code_size": len(fam.code), "code_complete": fam.code.complete,
               "code_min_l1": fam.code.min_l1, "manifest": fam.manifest()}
    grid = fam.quadrature_grid()
    if len(grid) * 2**d > MAX_VERIFY_NODES:
        payload["verification"] = {"skipped": f"{len(grid)} quadrature nodes exceed {MAX_VERIFY_NODES // 2**d}"}
        return payload, True, {}
    rng = np.random.default_rng(args.seed)
    loc = verify_localization(fam, rng.uniform(-1, 1, (2000, d)))
    sep = verify_separation(fam, grid=grid) if len(fam.code) > 1 else None
    worst, reps = verify_class_membership(fam, n_members=4, n_pairs=2000, seed=args.seed)
    passed = loc.passed and (sep is None or not sep.violation) and worst.passed
    payload["verification"] = {
        "localization": {"passed": loc.passed, "points": loc.n_points, "max_active": loc.max_active},
        "separation": sep.to_json() if sep else None,
        "membership": {"passed": worst.passed, "members": len(reps), "worst": worst.to_json()},
        "passed": passed,
    }
    return payload, passed, {}


def run_verify(args) -> tuple[dict, bool, dict]:
    from .suites import SUITES, run_suites

    names = [s.strip() for s in args.suite.split(",") if s.strip()] if args.suite else None
    if names is not None:
        unknown = [s for s in names if s not in SUITES]
        if unknown or not names:
            raise InputError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    arch = load_architecture(args.arch) if args.arch else None
    results = run_suites(names, arch, seed=args.seed)
    payload = {"suites": [r.to_json() for r in results], "passed": all(r.passed for r in results)}
    timings = {r.name: r.seconds for r in results}
    return payload, payload["passed"], {"_timings": timings}


def run_gap(args) -> tuple[dict, bool, dict]:
    ns = parse_n_range(args.n_range)
    if args.L < 1 or args.d < 1 or args.r <= 0:
        raise InputError("need L >= 1, d >= 1, r > 0")
    led = _ledger_arg(args.ledger, args.d)
    table = bd.gap_report(args.r, args.d, args.L, ns, led, args.R, args.dmax)
    rows = ["n,curve_id,value_or_normalized,constant_known\n"]
    rows += [f"{n},{cid},{float(v)!r},{str(k).lower()}\n" for n, cid, v, k in table.rows()]
    return _jsonable(table.to_json()), True, {"gap.csv": "".join(rows)}


def run_bounds(args) -> tuple[dict, bool, dict]:
    if args.kind == "relation":
        cert = bd.relation_lower_bound(bd.RelationInputs(args.c_tilde1, args.c_tilde2, args.beta, args.n, args.r, args.d))
    else:
        cert = bd.deep_net_lower_bound(args.n, args.L, args.R, args.dmax, args.r, args.d, _ledger_arg(args.ledger, args.d))
    return cert.to_json(), True, {}


COMMANDS = {"analyze": run_analyze, "hard-instance": run_hard_instance, "verify": run_verify,
            "gap": run_gap, "bounds": run_bounds}


def make_report(argv, args, payload, passed, wall) -> dict:
    spec = {k: v for k, v in vars(args).items() if k != "out"}
    files = [args.arch] if getattr(args, "arch", None) else []
    return {
        "tool": "netcap",
        "version": __version__,
        "command": list(argv),
        "spec": spec,
        "seed": args.seed,
        "input_digest": _digest(spec, files),
        "payload": payload,
        "passed": passed,
        "wall_clock_seconds": wall,
    }


def _replay(path) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            old = json.load(fh)
        argv = [a for a in old["command"]]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"netcap: cannot read report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    # drop --out so the replay leaves the original files alone
    if "--out" in argv:
        i = argv.index("--out")
        del argv[i:i + 2]
    args = build_parser().parse_args(argv)
    payload, _, _ = COMMANDS[args.command](args)
    same = canonical(payload) == canonical(old["payload"])
    print(json.dumps({"replayed": argv, "payload_identical": same}))
    return EXIT_OK if same else EXIT_FAIL


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "replay":
        return _replay(args.report)
    t0 = time.perf_counter()
    try:
        payload, passed, extra = COMMANDS[args.command](args)
    except StructureError as exc:
        problems = getattr(exc, "problems", [str(exc)])
        print("netcap: invalid architecture:\n" + "\n".join(f"  - {p}" for p in problems), file=sys.stderr)
        return EXIT_INPUT
    except BumpInfeasible as exc:
        print(f"netcap: {exc} (min_c0={exc.min_c0:.17g})", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, SizeError, ValueError, OSError) as exc:
        print(f"netcap: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = make_report(argv, args, payload, passed, time.perf_counter() - t0)
    timings = extra.pop("_timings", None)
    if timings:
        report["suite_seconds"] = timings
    text = canonical(report) + "\n"
    if args.out:
        out = Path(args.out)
        atomic_write(out / "report.json", text)
        for name, body in extra.items():
            atomic_write(out / name, body)
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
