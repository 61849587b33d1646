"""Command-line front end: classify, check, witness, sample, grid-export.

Reports are JSON on stdout (or ``--out``); a verdict of "fails" is a result,
not a process failure.  Exit codes: 0 success, 2 usage error, 3 witness not
applicable (the property holds, nothing to construct).  Reports contain no
wall-clock data (elapsed time goes to stderr) so identical invocations are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import archimedean as arch
from . import extreme_value as evc
from .errors import MkTp2Error, SearchFailed, ValidationError
from .grids import GridConfig, Rectangle
from .properties import PROPERTIES, Status, counterexample_search, rectangle_defect, run_check
from .registry import build, family_names
from .sampler import sample, write_csv

USAGE_ERROR = 2
WITNESS_NOT_APPLICABLE = 3


def _parse_params(text):
    """--param key=value[,key=value]; decimal-point floats only."""
    if not text:
        return {}
    out = {}
    for chunk in text.split(","):
        if "=" not in chunk:
            raise ValidationError(f"malformed --param entry {chunk!r}; expected key=value")
        key, _, raw = chunk.partition("=")
        try:
            out[key.strip()] = float(raw)
        except ValueError as exc:
            raise ValidationError(f"parameter {key!r} has non-numeric value {raw!r}") from exc
    return out


def _parse_rect(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError(f"--rect needs u1,u2,v1,v2, got {text!r}")
    u1, u2, v1, v2 = (float(p) for p in parts)
    return Rectangle(u1, u2, v1, v2)


def _grid_from_args(args):
    return GridConfig(
        n_u=args.grid,
        n_v=args.grid,
        margin=args.margin,
        tol_eq=args.tol_eq,
        tol_strict=args.tol_strict,
        spacing=args.spacing,
    )


def _report_skeleton(family, params, grid):
    return {
        "tool": "mktp2",
        "version": __version__,
        "family": family,
        "params": {k: float(v) for k, v in sorted(params.items())},
        "grid": grid.describe(),
        "results": [],
    }


def _entry_dict(prop, verdict, method):
    out = {"property": prop, "status": verdict.status.value, "method": method}
    out["certificate"] = verdict.certificate
    out["witness"] = verdict.witness.describe() if verdict.witness else None
    if verdict.note:
        out["note"] = verdict.note
    return out


def _method_of(verdict):
    name = str(verdict.certificate.get("method", "grid"))
    return "analytic" if name.startswith("analytic") else "grid"


def _worker_count():
    raw = os.environ.get("COPULA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _classify_results(entry, obj, copula, grid):
    if entry.kind == "archimedean":
        table = arch.property_verdicts(obj, grid)
    elif entry.kind == "evc":
        table = evc.property_verdicts(obj, grid)
    else:
        workers = _worker_count()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = {p: pool.submit(run_check, copula, p, grid) for p in PROPERTIES}
            table = {p: futures[p].result() for p in PROPERTIES}
        else:
            table = {p: run_check(copula, p, grid) for p in PROPERTIES}
    return [_entry_dict(p, table[p], _method_of(table[p])) for p in PROPERTIES]


def _emit(report, args):
    payload = json.dumps(report, indent=2, sort_keys=False) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def cmd_classify(args):
    entry, obj, copula = build(args.family, _parse_params(args.param))
    grid = _grid_from_args(args)
    report = _report_skeleton(copula.label, _parse_params(args.param), grid)
    report["results"] = _classify_results(entry, obj, copula, grid)
    _emit(report, args)
    return 0


def cmd_check(args):
    entry, obj, copula = build(args.family, _parse_params(args.param))
    grid = _grid_from_args(args)
    report = _report_skeleton(copula.label, _parse_params(args.param), grid)
    prop = args.property
    if args.rect:
        rect = _parse_rect(args.rect)
        defect, values = rectangle_defect(copula, prop, rect)
        if defect > grid.tol_strict:
            status = Status.FAILS
        elif defect > grid.tol_eq:
            status = Status.INCONCLUSIVE
        else:
            status = Status.HOLDS
        report["results"].append(
            {
                "property": prop,
                "status": status.value,
                "method": "rectangle",
                "certificate": {"method": "rectangle", "rect": list(rect.as_tuple())},
                "witness": {
                    "kind": "rectangle",
                    "points": list(rect.as_tuple()),
                    "values": [float(x) for x in values],
                    "defect": float(defect),
                },
            }
        )
    else:
        # single property through the same routing as classify: generator- and
        # Pickands-level equivalences beat a grid scan where they apply
        if entry.kind == "archimedean":
            verdict = arch.property_verdicts(obj, grid)[prop]
        elif entry.kind == "evc":
            verdict = evc.property_verdicts(obj, grid)[prop]
        else:
            verdict = run_check(copula, prop, grid)
        report["results"].append(_entry_dict(prop, verdict, _method_of(verdict)))
    _emit(report, args)
    return 0


def _construct_evc_witness(spec, grid):
    report = evc.classify_evc(spec, grid)
    if report.mktp2.status is Status.HOLDS:
        return None, report
    return report.mktp2.witness, report


def cmd_witness(args):
    entry, obj, copula = build(args.family, _parse_params(args.param))
    grid = _grid_from_args(args)
    prop = args.property
    report = _report_skeleton(copula.label, _parse_params(args.param), grid)

    analytic_note = None
    witness_verdict = None
    if prop == "mktp2" and entry.kind == "evc":
        witness, evc_report = _construct_evc_witness(obj, grid)
        if witness is None:
            analytic_note = f"MK-TP2 holds (branch {evc_report.branch}); nothing to construct"
        else:
            witness_verdict = evc_report.mktp2
    elif prop == "mktp2" and entry.kind == "archimedean":
        arch_report = arch.classify_archimedean(obj, grid)
        if arch_report.mktp2_si.status is Status.HOLDS:
            analytic_note = "MK-TP2 holds (log-convex -D-psi); nothing to construct"

    if analytic_note is not None:
        sys.stderr.write(analytic_note + "\n")
        return WITNESS_NOT_APPLICABLE

    if witness_verdict is None or witness_verdict.witness is None:
        witness_verdict = counterexample_search(copula, prop, grid)
        if witness_verdict.status is Status.HOLDS:
            sys.stderr.write(
                f"no witness found: {prop} holds at the search budget for {copula.label}\n"
            )
            return WITNESS_NOT_APPLICABLE

    report["results"].append(_entry_dict(prop, witness_verdict, _method_of(witness_verdict)))
    _emit(report, args)
    return 0


def cmd_sample(args):
    entry, obj, copula = build(args.family, _parse_params(args.param))
    batch = sample(copula, args.n, args.seed)
    if not args.out:
        raise ValidationError("sample requires --out PATH for the CSV")
    write_csv(batch, args.out)
    sys.stderr.write(f"wrote {batch.n} samples from {copula.label} to {args.out}\n")
    return 0


def cmd_grid_export(args):
    entry, obj, copula = build(args.family, _parse_params(args.param))
    grid = _grid_from_args(args)
    quantity = args.quantity
    if quantity == "density" and copula.density is None:
        raise ValidationError(f"{copula.label} exposes no density")
    if quantity == "FA" and entry.kind != "evc":
        raise ValidationError("quantity FA is defined only for extreme-value families")
    us = grid.u_axis()
    vs = grid.v_axis()
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    if quantity == "cdf":
        vals = np.asarray(copula.cdf(uu, vv), dtype=float)
    elif quantity == "kernel":
        vals = np.asarray(copula.kernel(uu, vv), dtype=float)
    elif quantity == "density":
        vals = np.asarray(copula.density(uu, vv), dtype=float)
    else:
        lu, lv = np.log(uu), np.log(vv)
        vals = np.asarray(evc.cap_function(obj, lu / (lu + lv)), dtype=float)
    if not args.out:
        raise ValidationError("grid-export requires --out PATH for the CSV")
    with open(args.out, "w", newline="\n") as fh:
        fh.write("u,v,value\n")
        for i, u in enumerate(us):
            for j, v in enumerate(vs):
                fh.write(f"{u:.17g},{v:.17g},{vals[i, j]:.17g}\n")
    sys.stderr.write(f"wrote {quantity} grid for {copula.label} to {args.out}\n")
    return 0


def _add_common(parser, with_grid=True):
    parser.add_argument("--family", required=True, help=f"one of: {', '.join(family_names())}")
    parser.add_argument("--param", default="", help="key=value[,key=value]")
    parser.add_argument("--out", default="", help="write output to this path")
    if with_grid:
        parser.add_argument("--grid", type=int, default=256, help="grid resolution per axis")
        parser.add_argument("--margin", type=float, default=0.005)
        parser.add_argument("--tol-strict", dest="tol_strict", type=float, default=1e-9)
        parser.add_argument("--tol-eq", dest="tol_eq", type=float, default=1e-12)
        parser.add_argument("--spacing", choices=("uniform", "logit"), default="uniform")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mktp2",
        description="Certify or refute positive-dependence properties of bivariate copulas",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="run the applicable classifier on all six properties")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("check", help="check a single property, optionally on one rectangle")
    _add_common(p)
    p.add_argument("--property", required=True, choices=PROPERTIES)
    p.add_argument("--rect", default="", help="u1,u2,v1,v2: evaluate exactly this rectangle")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("witness", help="construct a violating rectangle for a failing property")
    _add_common(p)
    p.add_argument("--property", default="mktp2", choices=PROPERTIES)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("sample", help="draw reproducible samples by kernel inversion")
    _add_common(p, with_grid=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("grid-export", help="export cdf/kernel/density/FA values on a grid")
    _add_common(p)
    p.add_argument("--quantity", required=True, choices=("cdf", "kernel", "density", "FA"))
    p.set_defaults(func=cmd_grid_export)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        code = args.func(args)
    except (ValidationError, SearchFailed) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR
    except MkTp2Error as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR
    sys.stderr.write(f"# elapsed {time.perf_counter() - started:.3f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
