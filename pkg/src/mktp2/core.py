"""Baseline copulas and closed-form families with explicit Markov kernels.

A :class:`Copula` bundles the joint CDF ``C(u,v)``, a version of the Markov
kernel ``K(u, [0,v])`` (the conditional distribution of V given U = u), an
optional density for absolutely continuous families, and metadata used by
the scanners.  All callables are vectorized over numpy arrays and pure.

Kernel versions at null sets follow the right-continuous convention: at a
jump point in v (e.g. v = u for the comonotonicity copula), the kernel takes
the upper value, which keeps grid scans deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .normal import bivariate_normal_cdf, std_normal_cdf, std_normal_quantile

__all__ = [
    "Copula",
    "make_baseline",
    "make_frechet",
    "make_fgm",
    "make_gaussian",
]


@dataclass(frozen=True)
class Copula:
    """A bivariate copula exposed through its CDF and Markov kernel.

    ``kernel_u_jumps`` maps a fixed v to the u-locations where ``u -> K(u,[0,v])``
    jumps; scans that differentiate or integrate in u split there.  Families
    with smooth kernels leave it as None.
    """

    label: str
    cdf: Callable
    kernel: Callable
    density: Optional[Callable] = None
    kernel_u_jumps: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __repr__(self):
        return f"Copula({self.label})"


def _asarrays(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.broadcast_arrays(u, v)


def _maybe_scalar(x, want_scalar):
    return float(x) if want_scalar else x


def _wrap(fn):
    """Lift an array-in/array-out bivariate function to accept scalars."""

    def wrapped(u, v):
        want_scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        uu, vv = _asarrays(u, v)
        return _maybe_scalar(fn(uu, vv), want_scalar)

    return wrapped


# ---------------------------------------------------------------------------
# baselines Pi, M, W
# ---------------------------------------------------------------------------


def make_baseline(name):
    """The three baseline copulas: independence Pi, comonotone M, countermonotone W."""
    key = name.lower()
    if key == "pi":
        return Copula(
            label="Pi",
            cdf=_wrap(lambda u, v: u * v),
            kernel=_wrap(lambda u, v: v + 0.0 * u),
            density=_wrap(lambda u, v: np.ones_like(u)),
        )
    if key == "m":
        return Copula(
            label="M",
            cdf=_wrap(np.minimum),
            kernel=_wrap(lambda u, v: np.where(v >= u, 1.0, 0.0)),
            kernel_u_jumps=lambda v: (float(v),),
        )
    if key == "w":
        return Copula(
            label="W",
            cdf=_wrap(lambda u, v: np.maximum(u + v - 1.0, 0.0)),
            kernel=_wrap(lambda u, v: np.where(v >= 1.0 - u, 1.0, 0.0)),
            kernel_u_jumps=lambda v: (float(1.0 - v),),
        )
    raise ValidationError(f"unknown baseline {name!r}; expected one of Pi, M, W")


# ---------------------------------------------------------------------------
# Frechet mixtures  alpha*M + (1-alpha-beta)*Pi + beta*W
# ---------------------------------------------------------------------------


def make_frechet(alpha, beta, tol_eq=1e-12):
    """Frechet copula: convex mixture of M, Pi and W with weights alpha, beta."""
    alpha = float(alpha)
    beta = float(beta)
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ValidationError(f"frechet weights must lie in [0,1], got alpha={alpha}, beta={beta}")
    if alpha + beta > 1.0 + tol_eq:
        raise ValidationError(f"frechet needs alpha + beta <= 1, got {alpha + beta}")
    mid = 1.0 - alpha - beta

    def cdf(u, v):
        return alpha * np.minimum(u, v) + mid * u * v + beta * np.maximum(u + v - 1.0, 0.0)

    def kernel(u, v):
        return (
            alpha * np.where(v >= u, 1.0, 0.0)
            + mid * v
            + beta * np.where(v >= 1.0 - u, 1.0, 0.0)
        )

    def jumps(v):
        out = []
        if alpha > 0.0:
            out.append(float(v))
        if beta > 0.0:
            out.append(float(1.0 - v))
        return tuple(sorted(out))

    density = _wrap(lambda u, v: np.full_like(u, mid)) if alpha == 0.0 and beta == 0.0 else None
    return Copula(
        label=f"frechet(alpha={alpha:g}, beta={beta:g})",
        cdf=_wrap(cdf),
        kernel=_wrap(kernel),
        density=density,
        kernel_u_jumps=jumps if (alpha > 0.0 or beta > 0.0) else None,
        params={"alpha": alpha, "beta": beta},
    )


# ---------------------------------------------------------------------------
# Farlie-Gumbel-Morgenstern
# ---------------------------------------------------------------------------


def make_fgm(theta):
    """FGM copula C(u,v) = uv + theta uv(1-u)(1-v), theta in [-1, 1]."""
    theta = float(theta)
    if not (-1.0 <= theta <= 1.0):
        raise ValidationError(f"fgm needs |theta| <= 1, got {theta}")

    def cdf(u, v):
        return u * v * (1.0 + theta * (1.0 - u) * (1.0 - v))

    def kernel(u, v):
        return v + theta * v * (1.0 - v) * (1.0 - 2.0 * u)

    def density(u, v):
        return 1.0 + theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)

    return Copula(
        label=f"fgm(theta={theta:g})",
        cdf=_wrap(cdf),
        kernel=_wrap(kernel),
        density=_wrap(density),
        params={"theta": theta},
    )


# ---------------------------------------------------------------------------
# Gaussian
# ---------------------------------------------------------------------------


def make_gaussian(rho):
    """Gaussian copula with correlation rho, 0 < |rho| < 1 (use Pi for rho = 0)."""
    rho = float(rho)
    if not (-1.0 < rho < 1.0):
        raise ValidationError(f"gaussian needs rho in (-1, 1), got {rho}")
    if rho == 0.0:
        raise ValidationError("gaussian with rho = 0 is the independence copula; use Pi")
    s = np.sqrt(1.0 - rho * rho)

    def quantile_clipped(p):
        # interior evaluation only; boundary handled by masks below
        return std_normal_quantile(np.clip(p, 1e-300, 1.0 - 1e-16))

    def cdf(u, v):
        inside = (u > 0.0) & (u < 1.0) & (v > 0.0) & (v < 1.0)
        x = quantile_clipped(np.where(inside, u, 0.5))
        y = quantile_clipped(np.where(inside, v, 0.5))
        base = bivariate_normal_cdf(x, y, rho)
        return np.where(inside, base, np.minimum(u, v))

    def kernel(u, v):
        u_int = (u > 0.0) & (u < 1.0)
        v_int = (v > 0.0) & (v < 1.0)
        inside = u_int & v_int
        x = quantile_clipped(np.where(inside, u, 0.5))
        y = quantile_clipped(np.where(inside, v, 0.5))
        base = std_normal_cdf((y - rho * x) / s)
        out = np.where(inside, base, 0.0)
        out = np.where(u_int & ~v_int, v, out)     # K(u, 0) = 0, K(u, 1) = 1
        out = np.where(~u_int, 1.0, out)           # boundary convention in u
        return out

    def density(u, v):
        x = quantile_clipped(u)
        y = quantile_clipped(v)
        expo = (2.0 * rho * x * y - rho * rho * (x * x + y * y)) / (2.0 * s * s)
        return np.exp(expo) / s

    return Copula(
        label=f"gaussian(rho={rho:g})",
        cdf=_wrap(cdf),
        kernel=_wrap(kernel),
        density=_wrap(density),
        params={"rho": rho},
    )


# ---------------------------------------------------------------------------
# diagnostic oracles shared by the test suite and the CLI
# ---------------------------------------------------------------------------


def _simpson(fn, a, b, panels):
    xs, step = np.linspace(a, b, 2 * panels + 1, retstep=True)
    ys = fn(xs)
    return (step / 3.0) * (
        ys[0] + ys[-1] + 4.0 * np.sum(ys[1:-1:2]) + 2.0 * np.sum(ys[2:-2:2])
    )


def _graded_simpson(fn, a, b, panels, levels=30):
    """Composite Simpson on [a, b] with geometric grading toward both ends.

    Kernels can have unbounded u-derivatives at the domain boundary (e.g.
    the Gaussian family); grading restores full quadrature accuracy there
    without raising the panel budget.
    """
    fracs = np.concatenate(
        [0.5 ** np.arange(levels, 0, -1), 1.0 - 0.5 ** np.arange(1, levels + 1), [0.0, 1.0]]
    )
    breaks = a + (b - a) * np.unique(fracs)
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        seg_panels = max(4, int(round(panels * (hi - lo) / (b - a))))
        total += _simpson(fn, lo, hi, seg_panels)
    return total


def disintegration_gap(copula, v, panels=10_000):
    """|integral over u of K(u,[0,v]) - v|, by piecewise composite Simpson.

    The kernel is integrated between its jump locations in u (one smooth
    piece per segment, endpoints nudged inward), so step-function kernels
    integrate at full quadrature accuracy rather than O(panel width).
    """
    v = float(v)
    cuts = []
    if copula.kernel_u_jumps is not None:
        cuts = [float(x) for x in copula.kernel_u_jumps(v) if 0.0 < x < 1.0]
    edges = [0.0] + sorted(set(cuts)) + [1.0]
    total = 0.0
    nudge = 1e-12
    for a, b in zip(edges[:-1], edges[1:]):
        width = b - a
        if width <= 2 * nudge:
            continue
        seg_panels = max(16, int(round(panels * width)))
        total += _graded_simpson(
            lambda u: np.asarray(copula.kernel(u, v), dtype=float),
            a + nudge,
            b - nudge,
            seg_panels,
        )
    return abs(total - v)


def max_kernel_fd_mismatch(copula, n=101, margin=0.01, h=1e-6, exclusion=1e-3):
    """Worst |kernel - central u-difference of the CDF| on an interior grid.

    Points within ``exclusion`` of a kernel jump in u are skipped: there the
    CDF has a kink and the kernel value is a one-sided version.
    """
    us = np.linspace(margin, 1.0 - margin, n)
    vs = np.linspace(margin, 1.0 - margin, n)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    ker = np.asarray(copula.kernel(uu, vv), dtype=float)
    fd = (np.asarray(copula.cdf(uu + h, vv), dtype=float)
          - np.asarray(copula.cdf(uu - h, vv), dtype=float)) / (2.0 * h)
    gap = np.abs(ker - fd)
    if copula.kernel_u_jumps is not None:
        for j, v in enumerate(vs):
            for x in copula.kernel_u_jumps(v):
                gap[np.abs(us - x) <= exclusion, j] = 0.0
    return float(np.max(gap))
