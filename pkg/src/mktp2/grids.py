"""Shared geometric types: rectangles in the open unit square and scan grids."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Rectangle:
    """Axis-parallel rectangle [u1,u2] x [v1,v2] inside the open unit square.

    Degenerate rectangles (u1 == u2 or v1 == v2) are allowed so that point
    and line witnesses share the same carrier type.
    """

    u1: float
    u2: float
    v1: float
    v2: float

    def __post_init__(self):
        if not (0.0 < self.u1 <= self.u2 < 1.0):
            raise ValidationError(f"need 0 < u1 <= u2 < 1, got u1={self.u1}, u2={self.u2}")
        if not (0.0 < self.v1 <= self.v2 < 1.0):
            raise ValidationError(f"need 0 < v1 <= v2 < 1, got v1={self.v1}, v2={self.v2}")

    def as_tuple(self):
        return (self.u1, self.u2, self.v1, self.v2)


@dataclass(frozen=True)
class GridConfig:
    """Resolution, margins and tolerances governing every numeric scan.

    ``tol_eq`` separates exact ties from rounding noise; a defect above
    ``tol_eq`` but at most ``tol_strict`` is treated as inconclusive, and
    only defects above ``tol_strict`` count as genuine violations.
    ``spacing`` selects uniform or logit-spaced interior points; logit
    spacing concentrates points near the boundary where extreme-value
    kernels vary steeply.
    """

    n_u: int = 256
    n_v: int = 256
    margin: float = 0.005
    tol_eq: float = 1e-12
    tol_strict: float = 1e-9
    spacing: str = "uniform"

    def __post_init__(self):
        if self.n_u < 2 or self.n_v < 2:
            raise ValidationError(f"grid needs at least 2 points per axis, got {self.n_u}x{self.n_v}")
        if not (0.0 < self.margin < 0.5):
            raise ValidationError(f"margin must lie in (0, 0.5), got {self.margin}")
        if self.tol_eq < 0.0 or self.tol_strict < self.tol_eq:
            raise ValidationError(
                f"need tol_strict >= tol_eq >= 0, got tol_eq={self.tol_eq}, tol_strict={self.tol_strict}"
            )
        if self.spacing not in ("uniform", "logit"):
            raise ValidationError(f"unknown spacing {self.spacing!r}")

    def axis(self, n, lo=None, hi=None):
        """Interior points on [lo, hi] (defaults: [margin, 1-margin])."""
        lo = self.margin if lo is None else lo
        hi = 1.0 - self.margin if hi is None else hi
        if self.spacing == "logit":
            s = np.linspace(_logit(lo), _logit(hi), n)
            return 1.0 / (1.0 + np.exp(-s))
        return np.linspace(lo, hi, n)

    def u_axis(self, lo=None, hi=None):
        return self.axis(self.n_u, lo, hi)

    def v_axis(self, lo=None, hi=None):
        return self.axis(self.n_v, lo, hi)

    def with_resolution(self, n):
        return replace(self, n_u=n, n_v=n)

    def describe(self):
        """JSON-ready summary, embedded in verdict certificates."""
        return {
            "n_u": self.n_u,
            "n_v": self.n_v,
            "margin": self.margin,
            "tol_eq": self.tol_eq,
            "tol_strict": self.tol_strict,
            "spacing": self.spacing,
        }


def _logit(p):
    return float(np.log(p / (1.0 - p)))


DEFAULT_GRID = GridConfig()
