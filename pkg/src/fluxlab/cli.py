"""fluxlab command line: symbol analysis, flux limits, Morera tests, mollifiers and moduli."""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, catalog
from .errors import ArgumentError, ConvergenceError, FluxlabError
from .fields import Box
from .io import load_field, load_operator


def _floats(text, what="value"):
    try:
        return np.array([float(v) for v in str(text).split(",") if v.strip() != ""], dtype=float)
    except ValueError:
        raise ArgumentError(f"{what}: expected comma-separated decimals, got {text!r}") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _dump(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _csv(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _threads(args):
    if args.threads is not None:
        if args.threads < 1:
            raise ArgumentError("--threads must be >= 1")
        return args.threads
    env = os.environ.get("FLUXLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ArgumentError(f"FLUXLAB_THREADS must be an integer, got {env!r}") from None
    return 1


def _config(args):
    skip = {"func", "out", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _report(args, body, degrees=None, tolerances=None):
    return {
        "tool": "fluxlab",
        "version": __version__,
        "command": args.command,
        "config": _config(args),
        "seed": getattr(args, "seed", None),
        "threads": _threads(args),
        "degrees": degrees or {},
        "tolerances": tolerances or {},
        "result": body,
    }


# ---------------------------------------------------------------- subcommands


def cmd_analyze_symbol(args):
    from .symbols import classify

    op = load_operator(args.op)
    x = _floats(args.point, "--point") if args.point else None
    rep = classify(op, x, samples=args.samples, seed=args.seed)
    return _report(args, rep.to_dict(), tolerances=rep.tolerances), None


def cmd_flux_apply(args):
    from .flux import DEFAULT_BALL_DEGREE, truncated_apply

    op, fld = load_operator(args.op), load_field(args.field)
    x = _floats(args.point, "--point")
    eps = _floats(args.eps, "--eps")
    tv = truncated_apply(op, fld, x, eps, args.sphere_degree, DEFAULT_BALL_DEGREE)
    vals = np.atleast_2d(tv.total)
    bnd = np.atleast_2d(tv.boundary_term)
    inter = np.atleast_2d(tv.interior_term)
    rows = [
        (e, *v, float(np.linalg.norm(b)), float(np.linalg.norm(i))) for e, v, b, i in zip(eps, vals, bnd, inter)
    ]
    header = ["eps"] + [f"value_{k}" for k in range(op.dimF)] + ["boundary_norm", "interior_norm"]
    body = {"point": x, "eps": eps, "values": vals}
    degrees = {"sphere": args.sphere_degree, "ball": DEFAULT_BALL_DEGREE}
    return _report(args, body, degrees), _csv(header, rows)


def cmd_converge_study(args):
    from .flux import DEFAULT_BALL_DEGREE, JITTER, estimate_limit

    op, fld = load_operator(args.op), load_field(args.field)
    x = _floats(args.point, "--point")
    est = estimate_limit(
        op, fld, x, eps0=args.eps0, ratio=args.ratio, steps=args.steps, jitter_seed=args.seed,
        sphere_degree=args.sphere_degree,
    )
    body = {
        "point": x,
        "value": est.value,
        "observed_order": est.observed_order,
        "growth_order": est.growth_order,
        "status": est.status,
        "method": est.method,
        "reference": est.reference,
    }
    degrees = {"sphere": args.sphere_degree, "ball": DEFAULT_BALL_DEGREE}
    csv_text = _csv(["eps", "residual", "boundary_norm", "interior_norm"], est.table())
    return _report(args, body, degrees, {"jitter": JITTER}), csv_text


def _box_arg(text, fld):
    if not text:
        return fld.domain
    v = _floats(text, "--box")
    if len(v) != 2 * fld.n:
        raise ArgumentError(f"--box needs {2 * fld.n} numbers: lo..., hi...")
    return Box(tuple(v[: fld.n]), tuple(v[fld.n:]))


def cmd_morera_test(args):
    from .morera import morera_test
    from .quadrature import sample_disjoint_family

    op, fld = load_operator(args.op), load_field(args.field)
    box = _box_arg(args.box, fld)
    fam = sample_disjoint_family(box, args.families, (args.size_min, args.size_max), args.seed, degree=args.degree)
    v = morera_test(op, fld, [fam], p=args.p, tau_rel=args.tau_rel, refine_levels=args.refine_levels)
    rows = []
    for r in v.records:
        lo, hi = r.domain.bounding_box()
        nv = float(np.linalg.norm(r.value))
        rows.append((*lo, *hi, nv, nv / r.volume, nv / r.boundary_measure, r.error))
    header = [f"lo_{k}" for k in range(op.n)] + [f"hi_{k}" for k in range(op.n)] + [
        "flux_norm", "normalized_defect", "perimeter_defect", "quadrature_error"]
    return _report(args, v.to_dict(), {"box_faces": args.degree}, v.thresholds), _csv(header, rows)


def cmd_jump_trace(args):
    from .morera import jump_trace

    op, fld = load_operator(args.op), load_field(args.field)
    nu = _floats(args.normal, "--normal")
    jt = jump_trace(op, fld, (nu, args.offset), probe_size=args.probe_size, count=args.count, seed=args.seed)
    body = {"normal": nu, "offset": args.offset, "centroids": jt.centroids, "estimates": jt.estimates, "deltas": jt.deltas}
    rows = [(*c, *e) for c, e in zip(jt.centroids, jt.estimates)]
    header = [f"x_{k}" for k in range(op.n)] + [f"jump_{k}" for k in range(op.dimF)]
    return _report(args, body, {"box_faces": 8}), _csv(header, rows)


def cmd_removable_probe(args):
    from .morera import removable_singularity_probe

    op, fld = load_operator(args.op), load_field(args.field)
    if args.segment:
        parts = args.segment.split(";")
        if len(parts) != 2:
            raise ArgumentError("--segment takes 'a0,a1;b0,b1'")
        target = {"segment": tuple(_floats(p, "--segment") for p in parts)}
    else:
        target = {"point": _floats(args.point, "--point")}
    eps = args.eps0 * args.ratio ** np.arange(args.steps)
    pr = removable_singularity_probe(op, fld, target, eps, degree=args.degree, tau=args.tau)
    body = {"decay_slope": pr.decay_slope, "removable": pr.removable, "eps": pr.eps, "flux": pr.flux}
    return _report(args, body, {"boundary": args.degree}, {"tau": args.tau}), _csv(
        ["eps", "flux_norm"], zip(pr.eps, pr.flux)
    )


def cmd_mollify_check(args):
    from .mollifier import (
        DEFAULT_RADIAL_NODES, DEFAULT_VOLUME_DEGREE, FINE_RADIAL_NODES, commutator_decay, friedrichs_identity,
        iii0_defect,
    )

    op, fld = load_operator(args.op), load_field(args.field)
    rng = np.random.default_rng(args.seed)
    lo, hi = np.array(fld.domain.lo) + args.eps, np.array(fld.domain.hi) - args.eps
    if np.any(hi <= lo):
        raise ArgumentError("--eps leaves no interior points")
    pts = rng.uniform(lo, hi, size=(args.points, op.n))
    decay = commutator_decay(op, fld, args.eps, args.levels, pts)
    body = {"decay": decay.to_dict(), "iii0_defect": iii0_defect(op, args.eps, pts)}
    if fld.has_derivative:
        fc = friedrichs_identity(op, fld, args.eps, pts)
        body["friedrichs_identity"] = {"ok": fc.ok, "max_defect": float(fc.defect.max()), "max_tolerance": float(fc.tolerance.max())}
    rows = [(e, m, s[0], s[1]) for e, m, s in zip(decay.eps, decay.max_norm, decay.schur)]
    degrees = {"sphere": DEFAULT_VOLUME_DEGREE, "radial_nodes": DEFAULT_RADIAL_NODES, "fine_radial_nodes": FINE_RADIAL_NODES}
    return _report(args, body, degrees, {"decay_slack": decay.slack}), _csv(
        ["eps", "max_commutator_norm", "schur_row", "schur_col"], rows
    )


def cmd_moduli_estimate(args):
    from .moduli import GridSpec, SolverOptions, annulus_modulus, annulus_spheres, modulus

    if args.family != "annulus-spheres":
        raise ArgumentError(f"unknown family {args.family!r}; available: annulus-spheres")
    fam = annulus_spheres(args.n, args.a, args.b, args.radii)
    grid = GridSpec.cover(fam.bbox, args.grid)
    sol = modulus(fam, grid, args.p, SolverOptions(rel_gap=args.rel_gap, max_iter=args.max_iter))
    body = sol.to_dict() | {"closed_form": annulus_modulus(args.n, args.a, args.b, args.p), "family": fam.label}
    report = _report(args, body, tolerances={"rel_gap": args.rel_gap})
    if not sol.converged:
        return report, None, ConvergenceError(f"modulus solver stopped at {sol.iterations} iterations with gap {sol.gap:g}")
    return report, None


def cmd_catalog(args):
    if args.show:
        e = catalog.get(args.show)
        body = {"id": e.id, "kind": e.kind, "facts": e.facts, "sources": e.sources, "note": e.note}
        if e.kind == "operator":
            from .io import operator_to_dict

            body["operator"] = operator_to_dict(e.obj)
        else:
            body["field"] = {"n": e.obj.n, "dimE": e.obj.dimE, "name": e.obj.name}
        return _report(args, body), None
    rows = [(e.id, e.kind, e.obj.name) for e in catalog.entries()]
    return _report(args, {"entries": [{"id": a, "kind": b, "name": c} for a, b, c in rows]}), _csv(["id", "kind", "name"], rows)


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


def build_parser():
    p = _Parser(prog="fluxlab", description=__doc__)
    p.add_argument("--version", action="version", version=f"fluxlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, op=True, field=True):
        if op:
            sp.add_argument("--op", required=True, help="operator JSON file or catalog id")
        if field:
            sp.add_argument("--field", required=True, help="grid field file or catalog id")
        sp.add_argument("--out", help="directory for report.json and table.csv")
        sp.add_argument("--threads", type=int, help="worker cap (default FLUXLAB_THREADS or 1)")
        sp.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("analyze-symbol", help="ellipticity, wave cone, (co)cancellation")
    common(s, field=False)
    s.add_argument("--point", default="")
    s.add_argument("--samples", type=int, default=2000)
    s.set_defaults(func=cmd_analyze_symbol)

    s = sub.add_parser("flux-apply", help="truncated operator at given radii")
    common(s)
    s.add_argument("--point", required=True)
    s.add_argument("--eps", default="0.2,0.1,0.05")
    s.add_argument("--sphere-degree", type=int, default=16)
    s.set_defaults(func=cmd_flux_apply)

    s = sub.add_parser("converge-study", help="limit of the truncated operator")
    common(s)
    s.add_argument("--point", required=True)
    s.add_argument("--eps0", type=float, default=0.2)
    s.add_argument("--ratio", type=float, default=0.5)
    s.add_argument("--steps", type=int, default=8)
    s.add_argument("--sphere-degree", type=int, default=16)
    s.set_defaults(func=cmd_converge_study)

    s = sub.add_parser("morera-test", help="weak-solution test over random disjoint cubes")
    common(s)
    s.add_argument("--families", type=int, default=500, help="number of cubes")
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--size-min", type=float, default=0.02)
    s.add_argument("--size-max", type=float, default=0.06)
    s.add_argument("--box", default="", help="lo..., hi... (default: field domain)")
    s.add_argument("--degree", type=int, default=8)
    s.add_argument("--tau-rel", type=float, default=1e-8)
    s.add_argument("--refine-levels", type=int, default=2)
    s.set_defaults(func=cmd_morera_test)

    s = sub.add_parser("jump-trace", help="A(nu)(u+ - u-) across a coordinate plane")
    common(s)
    s.add_argument("--normal", required=True)
    s.add_argument("--offset", type=float, default=0.0)
    s.add_argument("--probe-size", type=float, default=0.2)
    s.add_argument("--count", type=int, default=8)
    s.set_defaults(func=cmd_jump_trace)

    s = sub.add_parser("removable-probe", help="flux over shrinking balls or segment boxes")
    common(s)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--point")
    g.add_argument("--segment", help="'a0,a1;b0,b1'")
    s.add_argument("--eps0", type=float, default=0.5)
    s.add_argument("--ratio", type=float, default=0.5)
    s.add_argument("--steps", type=int, default=8)
    s.add_argument("--degree", type=int, default=16)
    s.add_argument("--tau", type=float, default=1e-9)
    s.set_defaults(func=cmd_removable_probe)

    s = sub.add_parser("mollify-check", help="Friedrichs identity, kernel mass and commutator decay")
    common(s)
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--levels", type=int, default=6)
    s.add_argument("--points", type=int, default=20)
    s.set_defaults(func=cmd_mollify_check)

    s = sub.add_parser("moduli-estimate", help="p-modulus of a surface family")
    common(s, op=False, field=False)
    s.add_argument("--family", default="annulus-spheres")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--b", type=float, default=2.0)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--grid", type=int, default=200)
    s.add_argument("--radii", type=int, default=64)
    s.add_argument("--rel-gap", type=float, default=1e-4)
    s.add_argument("--max-iter", type=int, default=20000)
    s.set_defaults(func=cmd_moduli_estimate)

    s = sub.add_parser("catalog", help="list or show operators and fields")
    common(s, op=False, field=False)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--list", action="store_true")
    g.add_argument("--show")
    s.set_defaults(func=cmd_catalog)
    return p


def _error(exc):
    kind = getattr(exc, "kind", "error")
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True) + "\n")
    return getattr(exc, "exit_code", 1)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        _threads(args)
        out = args.func(args)
        report, table = out[0], out[1]
        deferred = out[2] if len(out) > 2 else None
        text = _dump(report)
        if args.out:
            d = Path(args.out)
            d.mkdir(parents=True, exist_ok=True)
            (d / "report.json").write_text(text)
            if table is not None:
                (d / "table.csv").write_text(table)
        sys.stdout.write(text)
        if deferred is not None:
            return _error(deferred)
        return 0
    except FluxlabError as exc:
        return _error(exc)


if __name__ == "__main__":
    sys.exit(main())
