"""Numeric certification and falsification of positive-dependence properties.

Every check scans a finite grid and returns a :class:`Verdict`.  A ``holds``
verdict is always "holds at this grid and tolerance" (the certificate records
both); only the analytic classifiers in :mod:`mktp2.archimedean` and
:mod:`mktp2.extreme_value` can certify a property unconditionally.  A
``fails`` verdict carries a witness whose defect, recomputed from the copula
alone, exceeds the strict tolerance; defects inside the band
``(tol_eq, tol_strict]`` are reported as inconclusive, never as failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError, ValidationError
from .grids import DEFAULT_GRID, Rectangle

__all__ = [
    "Status",
    "Witness",
    "Verdict",
    "PROPERTIES",
    "check_pqd",
    "check_ltd",
    "check_si",
    "check_tp2",
    "check_mktp2",
    "check_dtp2",
    "log_convexity_test",
    "log_concavity_test",
    "two_increasing_test",
    "counterexample_search",
    "run_check",
    "rectangle_defect",
]


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class Witness:
    """Location and evaluated values of the worst defect found by a scan.

    ``points`` is the coordinate tuple appropriate to the check: a single
    (u, v) for pointwise tests, (u1, u2, v) for per-line monotonicity tests,
    (u1, u2, v1, v2) for rectangle tests, (x0, x1, x2) for midpoint tests.
    ``defect`` is oriented so that positive means violation.
    """

    points: tuple
    values: tuple
    defect: float
    kind: str

    def rectangle(self):
        if self.kind == "rectangle":
            u1, u2, v1, v2 = self.points
            return Rectangle(u1, u2, v1, v2)
        if self.kind == "line":
            u1, u2, v = self.points
            return Rectangle(u1, u2, v, v)
        if self.kind == "point":
            u, v = self.points
            return Rectangle(u, u, v, v)
        raise ValidationError(f"witness of kind {self.kind!r} has no rectangle form")

    def describe(self):
        return {
            "kind": self.kind,
            "points": [float(p) for p in self.points],
            "values": [float(x) for x in self.values],
            "defect": float(self.defect),
        }


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Optional[Witness] = None
    certificate: dict = field(default_factory=dict)
    note: str = ""

    @property
    def holds(self):
        return self.status is Status.HOLDS

    def describe(self):
        out = {
            "status": self.status.value,
            "certificate": self.certificate,
            "witness": self.witness.describe() if self.witness else None,
        }
        if self.note:
            out["note"] = self.note
        return out


PROPERTIES = ("pqd", "ltd", "si", "tp2", "mktp2", "dtp2")


def _classify(defect, witness, grid, certificate, note=""):
    if defect > grid.tol_strict:
        return Verdict(Status.FAILS, witness, certificate, note)
    if defect > grid.tol_eq:
        return Verdict(
            Status.INCONCLUSIVE,
            witness,
            certificate,
            note or "defect inside the tolerance band (tol_eq, tol_strict]",
        )
    return Verdict(Status.HOLDS, None, certificate, note)


def _axes(grid, region):
    if region is None:
        return grid.u_axis(), grid.v_axis()
    return grid.u_axis(region.u1, region.u2), grid.v_axis(region.v1, region.v2)


def _grid_eval(fn, us, vs):
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    return np.asarray(fn(uu, vv), dtype=float)


def _certificate(method, grid, region=None, **extra):
    cert = {"method": method, "grid": grid.describe()}
    if region is not None:
        cert["region"] = list(region.as_tuple())
    cert.update(extra)
    return cert


# ---------------------------------------------------------------------------
# pointwise and per-line scans
# ---------------------------------------------------------------------------


def _scan_pqd(copula, us, vs):
    cdf = _grid_eval(copula.cdf, us, vs)
    defect = np.outer(us, vs) - cdf
    i, j = np.unravel_index(np.argmax(defect), defect.shape)
    w = Witness(
        points=(float(us[i]), float(vs[j])),
        values=(float(cdf[i, j]), float(us[i] * vs[j])),
        defect=float(defect[i, j]),
        kind="point",
    )
    return float(defect[i, j]), w


def check_pqd(copula, grid=DEFAULT_GRID, region=None):
    """C(u,v) >= uv on the interior grid."""
    us, vs = _axes(grid, region)
    defect, witness = _scan_pqd(copula, us, vs)
    return _classify(defect, witness, grid, _certificate("grid:pqd", grid, region))


def _scan_line_monotone(values, us, vs, decreasing=True):
    """Worst forward-difference violation of u-monotonicity per v-line."""
    diff = values[1:, :] - values[:-1, :]
    defect = diff if decreasing else -diff
    i, j = np.unravel_index(np.argmax(defect), defect.shape)
    w = Witness(
        points=(float(us[i]), float(us[i + 1]), float(vs[j])),
        values=(float(values[i, j]), float(values[i + 1, j])),
        defect=float(defect[i, j]),
        kind="line",
    )
    return float(defect[i, j]), w


def _scan_ltd(copula, us, vs):
    cdf = _grid_eval(copula.cdf, us, vs)
    ratio = cdf / us[:, None]
    return _scan_line_monotone(ratio, us, vs, decreasing=True)


def check_ltd(copula, grid=DEFAULT_GRID, region=None):
    """u -> C(u,v)/u non-increasing for every grid v."""
    us, vs = _axes(grid, region)
    defect, witness = _scan_ltd(copula, us, vs)
    return _classify(defect, witness, grid, _certificate("grid:ltd", grid, region))


def _scan_si(copula, us, vs):
    ker = _grid_eval(copula.kernel, us, vs)
    return _scan_line_monotone(ker, us, vs, decreasing=True)


def check_si(copula, grid=DEFAULT_GRID, region=None):
    """u -> K(u,[0,v]) non-increasing for every grid v."""
    us, vs = _axes(grid, region)
    defect, witness = _scan_si(copula, us, vs)
    return _classify(defect, witness, grid, _certificate("grid:si", grid, region))


# ---------------------------------------------------------------------------
# rectangle scans (TP2 family)
# ---------------------------------------------------------------------------


def _adjacent_cross_defect(values, us, vs, gate=None):
    """Worst adjacent-cell violation of f11*f22 - f12*f21 >= 0."""
    f11 = values[:-1, :-1]
    f22 = values[1:, 1:]
    f12 = values[:-1, 1:]
    f21 = values[1:, :-1]
    defect = f12 * f21 - f11 * f22
    if gate is not None:
        defect = np.where(gate, defect, -np.inf)
    i, j = np.unravel_index(np.argmax(defect), defect.shape)
    w = Witness(
        points=(float(us[i]), float(us[i + 1]), float(vs[j]), float(vs[j + 1])),
        values=(float(f11[i, j]), float(f12[i, j]), float(f21[i, j]), float(f22[i, j])),
        defect=float(defect[i, j]),
        kind="rectangle",
    )
    return float(defect[i, j]), w


def _dyadic_spans(n):
    spans = [1]
    while spans[-1] * 2 <= n // 2:
        spans.append(spans[-1] * 2)
    return spans


def _spanned_cross_defect(values, us, vs, spans_u, spans_v, gate_min):
    """Worst violation over rectangles with dyadic index spans.

    Rectangles whose lower-right value K(u2, v1) is at most ``gate_min`` are
    skipped: those lie in the kernel's zero region where the TP2 inequality
    holds trivially.
    """
    best = -np.inf
    best_w = None
    for su in spans_u:
        for sv in spans_v:
            f11 = values[:-su, :-sv]
            f22 = values[su:, sv:]
            f12 = values[:-su, sv:]
            f21 = values[su:, :-sv]
            defect = f12 * f21 - f11 * f22
            defect = np.where(f21 > gate_min, defect, -np.inf)
            i, j = np.unravel_index(np.argmax(defect), defect.shape)
            d = float(defect[i, j])
            if d > best:
                best = d
                best_w = Witness(
                    points=(float(us[i]), float(us[i + su]), float(vs[j]), float(vs[j + sv])),
                    values=(
                        float(f11[i, j]),
                        float(f12[i, j]),
                        float(f21[i, j]),
                        float(f22[i, j]),
                    ),
                    defect=d,
                    kind="rectangle",
                )
    return best, best_w


def check_tp2(copula, grid=DEFAULT_GRID, method="direct", region=None):
    """TP2 of the copula itself.

    ``direct`` scans adjacent-cell cross products of the CDF (adjacent
    quadruples generate grid TP2 for these smooth, a.e.-positive surfaces);
    ``kernel-ratio`` checks that v -> K(u,[0,v]) / C(u,v) is non-decreasing,
    and rejects copulas whose CDF vanishes on the interior grid.
    """
    us, vs = _axes(grid, region)
    if method == "direct":
        cdf = _grid_eval(copula.cdf, us, vs)
        defect, witness = _adjacent_cross_defect(cdf, us, vs)
        return _classify(defect, witness, grid, _certificate("grid:tp2:direct", grid, region))
    if method == "kernel-ratio":
        cdf = _grid_eval(copula.cdf, us, vs)
        if np.any(cdf <= 0.0):
            i, j = np.argwhere(cdf <= 0.0)[0]
            raise DomainError(
                f"kernel-ratio method needs C > 0 on the grid; C({us[i]:.6g},{vs[j]:.6g}) = {cdf[i, j]:.3g}"
            )
        ker = _grid_eval(copula.kernel, us, vs)
        ratio = ker / cdf
        diff = ratio[:, :-1] - ratio[:, 1:]
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        witness = Witness(
            points=(float(us[i]), float(vs[j]), float(vs[j + 1])),
            values=(float(ratio[i, j]), float(ratio[i, j + 1])),
            defect=float(diff[i, j]),
            kind="ratio-line",
        )
        return _classify(
            float(diff[i, j]), witness, grid, _certificate("grid:tp2:kernel-ratio", grid, region)
        )
    raise ValidationError(f"unknown tp2 method {method!r}")


def _scan_mktp2(copula, us, vs, grid):
    ker = _grid_eval(copula.kernel, us, vs)
    spans_u = _dyadic_spans(len(us))
    spans_v = _dyadic_spans(len(vs))
    return _spanned_cross_defect(ker, us, vs, spans_u, spans_v, grid.tol_eq)


def _refine_rectangle(copula, scan, witness, grid, n_local=64):
    """Re-scan a small window around a violating rectangle at finer resolution."""
    u1, u2, v1, v2 = witness.points
    du = max(u2 - u1, 1e-6)
    dv = max(v2 - v1, 1e-6)
    lo_u = max(u1 - du, 1e-9)
    hi_u = min(u2 + du, 1.0 - 1e-9)
    lo_v = max(v1 - dv, 1e-9)
    hi_v = min(v2 + dv, 1.0 - 1e-9)
    us = np.linspace(lo_u, hi_u, n_local)
    vs = np.linspace(lo_v, hi_v, n_local)
    return scan(copula, us, vs, grid)


def check_mktp2(copula, grid=DEFAULT_GRID, region=None):
    """TP2 of the Markov kernel over adjacent cells and dyadic index spans.

    Wide spans matter here: kernels may jump, and jump-driven violations are
    invisible to adjacent quadruples alone.  Rectangles with
    K(u2,[0,v1]) ~ 0 are skipped (zero-region reduction).
    """
    us, vs = _axes(grid, region)
    defect, witness = _scan_mktp2(copula, us, vs, grid)
    cert = _certificate("grid:mktp2", grid, region, spans="adjacent+dyadic")
    if defect > grid.tol_strict:
        refined_defect, refined_witness = _refine_rectangle(copula, _scan_mktp2, witness, grid)
        if refined_defect > defect:
            defect, witness = refined_defect, refined_witness
        return Verdict(Status.FAILS, witness, cert)
    return _classify(defect, witness, grid, cert)


def check_dtp2(copula, grid=DEFAULT_GRID, region=None):
    """TP2 of the density; not applicable when the family has no density."""
    if copula.density is None:
        return Verdict(
            Status.NOT_APPLICABLE,
            None,
            _certificate("grid:dtp2", grid, region),
            note=f"{copula.label} exposes no density (not absolutely continuous)",
        )
    us, vs = _axes(grid, region)
    dens = _grid_eval(copula.density, us, vs)
    defect, witness = _adjacent_cross_defect(dens, us, vs)
    return _classify(defect, witness, grid, _certificate("grid:dtp2", grid, region))


# ---------------------------------------------------------------------------
# reusable 1-D and 2-D shape testers
# ---------------------------------------------------------------------------


def _midpoint_scan(f, points, orient, tol_eq, tol_strict):
    xs = np.asarray(points, dtype=float)
    if xs.ndim != 1 or len(xs) < 3:
        raise ValidationError("need a sorted sample of at least 3 points")
    if np.any(np.diff(xs) <= 0.0):
        raise ValidationError("sample points must be strictly increasing")
    ys = np.asarray(f(xs), dtype=float)
    bad = ~(ys > 0.0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise DomainError(f"function must be positive on the sample; f({xs[k]:.6g}) = {ys[k]:.6g}")
    logs = np.log(ys)
    x0, x1, x2 = xs[:-2], xs[1:-1], xs[2:]
    l0, l1, l2 = logs[:-2], logs[1:-1], logs[2:]
    chord = l0 + (l2 - l0) * (x1 - x0) / (x2 - x0)
    defect = orient * (l1 - chord)
    k = int(np.argmax(defect))
    witness = Witness(
        points=(float(x0[k]), float(x1[k]), float(x2[k])),
        values=(float(ys[k]), float(ys[k + 1]), float(ys[k + 2])),
        defect=float(defect[k]),
        kind="triple",
    )
    d = float(defect[k])
    cert = {
        "method": "midpoint-chord",
        "n_points": int(len(xs)),
        "tol_eq": tol_eq,
        "tol_strict": tol_strict,
    }
    if d > tol_strict:
        return Verdict(Status.FAILS, witness, cert)
    if d > tol_eq:
        return Verdict(Status.INCONCLUSIVE, witness, cert, "defect inside the tolerance band")
    return Verdict(Status.HOLDS, None, cert)


def log_convexity_test(f, points, tol_eq=1e-12, tol_strict=1e-9):
    """Midpoint test of convexity of log f on consecutive triples of the sample."""
    return _midpoint_scan(f, points, +1.0, tol_eq, tol_strict)


def log_concavity_test(f, points, tol_eq=1e-12, tol_strict=1e-9):
    """Mirror of :func:`log_convexity_test` with the reversed inequality."""
    return _midpoint_scan(f, points, -1.0, tol_eq, tol_strict)


def two_increasing_test(g, u_axis, v_axis, grid=DEFAULT_GRID, mask=None):
    """Adjacent-quadruple check that g has non-negative rectangle increments.

    ``mask``, when given, marks grid nodes that belong to the test region;
    only quadruples with all four corners inside count.
    """
    us = np.asarray(u_axis, dtype=float)
    vs = np.asarray(v_axis, dtype=float)
    vals = _grid_eval(g, us, vs)
    if mask is not None:
        m = np.asarray(mask, dtype=bool)
        vals = np.where(m, vals, 0.0)  # excluded nodes may hold -inf/nan
    inc = vals[1:, 1:] + vals[:-1, :-1] - vals[:-1, 1:] - vals[1:, :-1]
    defect = -inc
    if mask is not None:
        ok = m[1:, 1:] & m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1]
        defect = np.where(ok, defect, -np.inf)
    i, j = np.unravel_index(np.argmax(defect), defect.shape)
    witness = Witness(
        points=(float(us[i]), float(us[i + 1]), float(vs[j]), float(vs[j + 1])),
        values=(
            float(vals[i, j]),
            float(vals[i, j + 1]),
            float(vals[i + 1, j]),
            float(vals[i + 1, j + 1]),
        ),
        defect=float(defect[i, j]),
        kind="rectangle",
    )
    return _classify(
        float(defect[i, j]), witness, grid, {"method": "two-increasing", "grid": grid.describe()}
    )


# ---------------------------------------------------------------------------
# coarse-to-fine falsification
# ---------------------------------------------------------------------------

_SCANNERS = {
    "pqd": lambda cop, us, vs, grid: _scan_pqd(cop, us, vs),
    "ltd": lambda cop, us, vs, grid: _scan_ltd(cop, us, vs),
    "si": lambda cop, us, vs, grid: _scan_si(cop, us, vs),
    "tp2": lambda cop, us, vs, grid: _adjacent_cross_defect(_grid_eval(cop.cdf, us, vs), us, vs),
    "mktp2": _scan_mktp2,
    "dtp2": lambda cop, us, vs, grid: _adjacent_cross_defect(_grid_eval(cop.density, us, vs), us, vs),
}


def _window_axes(witness, n, pad_factor=2.0, floor=1e-6):
    pts = witness.points
    if witness.kind == "point":
        u_lo = u_hi = pts[0]
        v_lo = v_hi = pts[1]
    elif witness.kind == "line":
        u_lo, u_hi = pts[0], pts[1]
        v_lo = v_hi = pts[2]
    else:
        u_lo, u_hi, v_lo, v_hi = pts
    du = max((u_hi - u_lo) * pad_factor, 0.02)
    dv = max((v_hi - v_lo) * pad_factor, 0.02)
    us = np.linspace(max(u_lo - du, floor), min(u_hi + du, 1.0 - floor), n)
    vs = np.linspace(max(v_lo - dv, floor), min(v_hi + dv, 1.0 - floor), n)
    return us, vs


def counterexample_search(copula, prop, grid=DEFAULT_GRID, stages=(64, 256, 1024)):
    """Coarse-to-fine deterministic search for a property violation.

    Scans the full domain at the first stage resolution, then repeatedly
    zooms on the worst defect seen so far.  Returns the most violating
    witness found, or a budget-qualified holds verdict.
    """
    if prop not in PROPERTIES:
        raise ValidationError(f"unknown property {prop!r}")
    if prop == "dtp2" and copula.density is None:
        return Verdict(
            Status.NOT_APPLICABLE,
            None,
            {"method": "search:dtp2"},
            note=f"{copula.label} exposes no density",
        )
    scan = _SCANNERS[prop]
    us, vs = grid.axis(stages[0]), grid.axis(stages[0])
    best_defect, best_witness = scan(copula, us, vs, grid)
    for n in stages[1:]:
        us, vs = _window_axes(best_witness, n)
        d, w = scan(copula, us, vs, grid)
        if d > best_defect:
            best_defect, best_witness = d, w
    cert = {
        "method": f"search:{prop}",
        "stages": list(stages),
        "grid": grid.describe(),
    }
    if best_defect > grid.tol_strict:
        return Verdict(Status.FAILS, best_witness, cert)
    if best_defect > grid.tol_eq:
        return Verdict(Status.INCONCLUSIVE, best_witness, cert, "defect inside the tolerance band")
    return Verdict(Status.HOLDS, None, cert, "no violation within the search budget")


# ---------------------------------------------------------------------------
# dispatch and witness re-evaluation
# ---------------------------------------------------------------------------

_CHECKS = {
    "pqd": check_pqd,
    "ltd": check_ltd,
    "si": check_si,
    "tp2": check_tp2,
    "mktp2": check_mktp2,
    "dtp2": check_dtp2,
}


def run_check(copula, prop, grid=DEFAULT_GRID, region=None):
    """Run a single named property check on a copula."""
    if prop not in _CHECKS:
        raise ValidationError(f"unknown property {prop!r}; expected one of {PROPERTIES}")
    return _CHECKS[prop](copula, grid, region=region)


def rectangle_defect(copula, prop, rect):
    """Re-evaluate a property defect on one rectangle, from the copula alone.

    Used to confirm witnesses independently of the scan that produced them.
    Pointwise (pqd) uses the rectangle's lower-left corner; per-line checks
    (ltd, si) use [u1, u2] at v = v1.  Returns ``(defect, values)`` with the
    convention that positive defect means violation.
    """
    u1, u2, v1, v2 = rect.as_tuple()
    if prop == "pqd":
        c = float(copula.cdf(u1, v1))
        return u1 * v1 - c, (c, u1 * v1)
    if prop == "ltd":
        r1 = float(copula.cdf(u1, v1)) / u1
        r2 = float(copula.cdf(u2, v1)) / u2
        return r2 - r1, (r1, r2)
    if prop == "si":
        k1 = float(copula.kernel(u1, v1))
        k2 = float(copula.kernel(u2, v1))
        return k2 - k1, (k1, k2)
    if prop in ("tp2", "mktp2", "dtp2"):
        if prop == "tp2":
            fn = copula.cdf
        elif prop == "mktp2":
            fn = copula.kernel
        else:
            if copula.density is None:
                raise DomainError(f"{copula.label} exposes no density")
            fn = copula.density
        f11 = float(fn(u1, v1))
        f12 = float(fn(u1, v2))
        f21 = float(fn(u2, v1))
        f22 = float(fn(u2, v2))
        return f12 * f21 - f11 * f22, (f11, f12, f21, f22)
    raise ValidationError(f"unknown property {prop!r}")
