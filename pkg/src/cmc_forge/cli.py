"""Command-line front end: profile, verify, sweep, mesh.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 empty classification.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from .curvature_verify import TOLERANCES, verify_instance
from .errors import CMCError, ContractError
from .immersion_families import CYLINDERS, DESCRIPTORS, cylinder, descriptor, instantiate, sample_u_domain
from .moduli_classify import (
    NONE,
    PERIODIC,
    UNBOUNDED,
    ClassificationRecord,
    build_instance,
    classify,
    classify_profile,
    closure_residual,
    fmt17,
    match_angle,
    record_from_dict,
)
from .profile_ode import (
    Family,
    ProfilePolynomial,
    constant_solution,
    critical_points,
    positive_roots,
    solve_arc,
    solve_periodic,
    solve_unbounded,
    thresholds,
    write_profile_csv,
)
from .pseudo_euclidean import base_curve, base_is_closed, inner

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_EMPTY = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# -- parsing helpers -----------------------------------------------------------

_AUTO = re.compile(r"^auto(?P<off>[+-].+)?$")


def resolve_c(text, h: float, n: int) -> float:
    """Numeric c, or ``auto[+-delta]`` offset from the threshold of q_1 at h.

    The threshold is c1 inside the periodic window, c0 at h = -1 and -c0
    for |h| > 1.
    """
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip()
    m = _AUTO.match(text)
    if not m:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"bad c value {text!r}") from None
    off = float(m.group("off")) if m.group("off") else 0.0
    try:
        th = thresholds(h, n)
    except ContractError as exc:
        raise ConfigError(f"c=auto has no threshold: {exc}") from None
    base = th.c1 if th.c1 is not None else th.c0_hminus1 if th.c0_hminus1 is not None else -th.c0_outer
    return base + off


def parse_range(text: str) -> tuple[str, str, int]:
    """``lo:hi:count`` with inclusive endpoints."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r} must be lo:hi:count")
    try:
        count = int(parts[2])
    except ValueError:
        raise ConfigError(f"range count {parts[2]!r} is not an integer") from None
    if count < 0:
        raise ConfigError("range count must be non-negative")
    return parts[0], parts[1], count


def expand_range(text: str, resolve=float) -> list[float]:
    lo, hi, count = parse_range(text)
    lo_v, hi_v = resolve(lo), resolve(hi)
    if count == 0:
        return []
    if count == 1:
        return [lo_v]
    return [float(x) for x in np.linspace(lo_v, hi_v, count)]


def parse_tolerances(items) -> dict:
    out = {}
    for item in items or []:
        if "=" in item:
            key, val = item.split("=", 1)
            if key not in TOLERANCES:
                raise ConfigError(f"unknown tolerance {key!r}; known: {sorted(TOLERANCES)}")
            out[key] = float(val)
        else:
            out.update(dict.fromkeys(TOLERANCES, float(item)))
    return out


def threads() -> int:
    try:
        return max(1, int(os.environ.get("CMC_FORGE_THREADS", "1")))
    except ValueError:
        return 1


# -- instance construction -----------------------------------------------------


def _arc_instance(family, n, k, h, c, arc):
    g0, lo, hi = arc
    prof = ProfilePolynomial(descriptor(family).ode_family, h, c, n)
    return instantiate(family, n, k, h, c, solve_arc(prof, g0, lo, hi))


def make_instance(family: str, n: int, k: int, h: Optional[float], c, r0=None, arc=None):
    """Instance from CLI parameters; returns (instance, record or None)."""
    if family in CYLINDERS:
        if r0 is None:
            raise ConfigError(f"{family} needs --r0")
        return cylinder(family, n, k, float(r0)), None
    if h is None or c is None:
        raise ConfigError(f"{family} needs -h and -c")
    c = resolve_c(c, h, n)
    if arc is not None:
        return _arc_instance(family, n, k, h, c, arc), None
    rec = classify(family, n, k, h, c, with_theta=False)
    if rec.solution_class not in (PERIODIC, UNBOUNDED):
        return None, rec
    return build_instance(rec), rec


# -- commands ------------------------------------------------------------------


def _write(path: Optional[str], text: str):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_profile(args) -> int:
    try:
        fam = Family(args.family)
    except ValueError:
        raise ConfigError(f"unknown profile family {args.family!r}") from None
    if args.h is None or args.c is None:
        raise ConfigError("profile needs -h and -c")
    c = resolve_c(args.c, args.h, args.n) if fam is Family.SPHERE_Q else resolve_c_plain(args.c)
    prof = ProfilePolynomial(fam, args.h, c, args.n)
    cls, detail, notes = classify_profile(prof)
    summary = {
        "family": fam.value, "n": args.n, "h": args.h, "c": c,
        "roots": [{"t": r.t, "double": r.double} for r in positive_roots(prof)],
        "critical_points": critical_points(prof),
        "class": cls, "period": None, "notes": notes,
    }
    sol = None
    if cls == PERIODIC:
        sol = solve_periodic(prof, *detail)
        summary.update(bracket=list(detail), period=sol.period, period_ode=sol.period_ode)
    elif cls == UNBOUNDED:
        sol = solve_unbounded(prof, detail)
        summary.update(root=detail, eps=sol.eps, linear_growth=sol.linear_growth)
    elif cls != NONE:
        sol = constant_solution(prof, detail)
        summary.update(root=detail)
    prefix = Path(args.out) if args.out else None
    if prefix is not None:
        prefix.parent.mkdir(parents=True, exist_ok=True)
        if sol is not None:
            write_profile_csv(sol, str(prefix) + ".csv")
        Path(str(prefix) + ".json").write_text(fmt17(summary) + "\n")
    else:
        print(fmt17(summary))
    return EXIT_EMPTY if cls == NONE else EXIT_OK


def resolve_c_plain(text) -> float:
    if str(text).startswith("auto"):
        raise ConfigError("c=auto is defined for the sphere-q profile only")
    return resolve_c(text, 0.0, 2)


def cmd_verify(args) -> int:
    arc = tuple(args.arc) if args.arc else None
    inst, rec = make_instance(args.family, args.n, args.k, args.h, args.c, args.r0, arc)
    if inst is None:
        print(f"no immersion: class {rec.solution_class} ({'; '.join(rec.notes)})", file=sys.stderr)
        return EXIT_EMPTY
    rep = verify_instance(inst, args.base_count, args.u_count, args.seed, parse_tolerances(args.tol))
    _write(args.out, fmt17(rep.to_dict()) + "\n")
    print(rep.summary(), file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _classify_point(point):
    family, n, k, h, c = point
    try:
        return classify(family, n, k, h, c).to_json()
    except ContractError:
        return None


def sweep_points(args) -> list:
    try:
        descriptor(args.family)
    except ContractError as exc:
        raise ConfigError(str(exc)) from None
    if args.h_range:
        hs = expand_range(args.h_range)
    elif args.h is not None:
        hs = [float(args.h)]
    else:
        raise ConfigError("sweep needs -h or --h-range")
    points = []
    for h in hs:
        if args.c_range:
            cs = expand_range(args.c_range, lambda s: resolve_c(s, h, args.n))
        elif args.c is not None:
            cs = [resolve_c(args.c, h, args.n)]
        else:
            raise ConfigError("sweep needs -c or --c-range")
        points.extend((args.family, args.n, args.k, h, c) for c in cs)
    return points


def cmd_sweep(args) -> int:
    if not args.out:
        raise ConfigError("sweep needs --out")
    try:
        points = sweep_points(args)
    except ConfigError:
        raise
    except (CMCError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    done = set()
    if out.exists():
        for line in out.read_text().splitlines():
            if line.strip():
                done.add(record_from_dict(json.loads(line)).key)

    def key(p):
        return ClassificationRecord(p[0], p[1], p[2], p[3], p[4], NONE).key

    todo = [p for p in points if key(p) not in done]
    workers = threads()
    with out.open("a") as fh:
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_classify_point, todo, chunksize=4)
                for line in results:
                    if line is not None:
                        fh.write(line + "\n")
        else:
            for p in todo:
                line = _classify_point(p)
                if line is not None:
                    fh.write(line + "\n")
    if args.csv:
        order = {key(p): i for i, p in enumerate(points)}
        recs = [record_from_dict(json.loads(s)) for s in out.read_text().splitlines() if s.strip()]
        recs.sort(key=lambda r: order.get(r.key, len(order)))
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ClassificationRecord.CSV_COLUMNS)
            for r in recs:
                w.writerow(r.csv_row())
    return EXIT_OK


def mesh_lines(inst, grid: tuple[int, int], project: tuple, u_span: tuple) -> list[str]:
    """OBJ text over a (base-angle, u) grid; residuals in header comments."""
    d = inst.descriptor
    n, k = inst.n, inst.k
    base = d.base(n, k)
    na, nu = grid
    closed_base = base_is_closed(base)
    alphas = np.linspace(0, 2 * math.pi, na, endpoint=False) if closed_base else np.linspace(-2, 2, na)
    ys = base_curve(base, alphas)
    us = np.linspace(u_span[0], u_span[1], nu)
    sig = d.signature(n, k)
    amb = d.ambient(n, k)
    dim = d.ambient_dim(n)
    verts, resid = [], []
    for y in ys:
        for u in us:
            p = inst.evaluate(y, float(u))
            verts.append(p)
            resid.append(abs(inner(p, p, sig) - amb.level) if amb is not None else 0.0)
    other = [s for s in range(1, dim + 1) if s not in project]
    lines = [
        f"# {inst.id}",
        f"# grid {na}x{nu} (base x u), u in [{u_span[0]:.17g}, {u_span[1]:.17g}]",
        f"# projected slots {list(project)}; remaining slots {other} in vertex comments",
        f"# max membership residual {max(resid):.17g}",
    ]
    lines += [f"# residual {i + 1} {r:.17g}" for i, r in enumerate(resid)]
    for p in verts:
        xyz = " ".join(f"{p[s - 1]:.17g}" for s in project)
        extra = " ".join(f"{p[s - 1]:.17g}" for s in other)
        lines.append(f"v {xyz}" + (f"  # {extra}" if extra else ""))
    rows_a = na if closed_base else na - 1
    for i in range(rows_a):
        i2 = (i + 1) % na
        for j in range(nu - 1):
            a, b = i * nu + j + 1, i2 * nu + j + 1
            lines.append(f"f {a} {b} {b + 1} {a + 1}")
    return lines


def cmd_mesh(args) -> int:
    if args.n != 2:
        raise ConfigError("mesh export is defined for n = 2 only")
    h = args.h
    c = args.c
    if args.match_m:
        if not args.c_bracket:
            raise ConfigError("--match-m needs --c-bracket lo hi")
        c = match_angle(2, h, 2 * math.pi / args.match_m, tuple(args.c_bracket), family=args.family, k=args.k)
    arc = tuple(args.arc) if args.arc else None
    inst, rec = make_instance(args.family, 2, args.k, h, c, args.r0, arc)
    if inst is None:
        print(f"no immersion: class {rec.solution_class}", file=sys.stderr)
        return EXIT_EMPTY
    dim = inst.descriptor.ambient_dim(2)
    project = tuple(args.project) if args.project else tuple(range(1, min(dim, 3) + 1))
    if len(project) != 3 or any(not 1 <= s <= dim for s in project):
        raise ConfigError(f"--project needs three slots in 1..{dim}")
    periods = args.match_m or args.periods
    sol = inst.solution
    if sol is not None and sol.kind == "periodic":
        span = (0.0, periods * sol.period)
    else:
        span = sample_u_domain(inst, 0)
    grid = tuple(args.grid)
    lines = mesh_lines(inst, grid, project, span)
    if args.match_m:
        res = closure_residual(inst, args.match_m)
        lines.insert(1, f"# closure residual {res['max']:.17g} after {args.match_m} periods, c={c:.17g}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


# -- argument parser -----------------------------------------------------------


def _grid(text: str):
    m = re.match(r"^(\d+)x(\d+)$", text)
    if not m:
        raise argparse.ArgumentTypeError("grid must look like 16x64")
    return int(m.group(1)), int(m.group(2))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    # -h is the mean curvature, so help lives on --help only
    p = _Parser(prog="cmc-forge", description=__doc__, add_help=False,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--help", action="help")
    p.add_argument("--config", help="JSON file whose keys match the long flag names")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, family_help):
        sp.add_argument("--help", action="help")
        sp.add_argument("--family", required=True, help=family_help)
        sp.add_argument("-n", type=int, required=True)
        sp.add_argument("-h", dest="h", type=float, default=None, help="mean curvature")
        sp.add_argument("-c", dest="c", default=None, help="number or auto[+-delta]")
        sp.add_argument("--out")

    ids = ", ".join(DESCRIPTORS)
    sp = sub.add_parser("profile", add_help=False, help="solve one profile ODE")
    common(sp, "sphere-q, sphere-p, hyp-q, hyp-p, euc-q, euc-p")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("verify", add_help=False, help="finite-difference CMC check")
    common(sp, ids)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--r0", type=float)
    sp.add_argument("--arc", type=float, nargs=3, metavar=("G0", "LO", "HI"))
    sp.add_argument("--base-count", type=int, default=8)
    sp.add_argument("--u-count", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", action="append", help="value for all, or name=value")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", add_help=False, help="classification catalog")
    common(sp, ids)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--h-range", help="lo:hi:count")
    sp.add_argument("--c-range", help="lo:hi:count; endpoints may be auto[+-delta]")
    sp.add_argument("--csv", help="summary CSV path")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("mesh", add_help=False, help="OBJ mesh of an n=2 surface")
    common(sp, ids)
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--r0", type=float)
    sp.add_argument("--arc", type=float, nargs=3, metavar=("G0", "LO", "HI"))
    sp.add_argument("--grid", type=_grid, default=(16, 64))
    sp.add_argument("--project", type=int, nargs=3)
    sp.add_argument("--periods", type=int, default=1)
    sp.add_argument("--match-m", type=int)
    sp.add_argument("--c-bracket", type=float, nargs=2)
    sp.set_defaults(func=cmd_mesh)
    return p


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    command = cfg.pop("command", None)
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**cfg)
            for a in sp._actions:
                if a.dest in cfg:
                    a.required = False
        if command is not None and not any(x in action.choices for x in rest):
            if command not in action.choices:
                raise ConfigError(f"unknown command {command!r} in config")
            argv = argv + [command]
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ContractError, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CMCError as exc:
        print(f"no result: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
