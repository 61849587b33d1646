"""Family registry: the CLI-facing catalog of constructible copulas.

Each entry knows how to build its object from keyword parameters and which
classification machinery applies: closed-form families run the full grid
ladder, Archimedean generators classify through their co-generator, and
extreme-value families through their Pickands function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import archimedean as arch
from . import extreme_value as evc
from .core import make_baseline, make_fgm, make_frechet, make_gaussian
from .errors import ValidationError

__all__ = ["FamilyEntry", "REGISTRY", "build", "family_names"]


@dataclass(frozen=True)
class FamilyEntry:
    name: str
    kind: str  # "core" | "archimedean" | "evc"
    factory: Callable
    param_names: tuple


def _entry(name, kind, factory, params=()):
    return FamilyEntry(name=name, kind=kind, factory=factory, param_names=tuple(params))


REGISTRY = {
    e.name: e
    for e in [
        _entry("pi", "core", lambda: make_baseline("pi")),
        _entry("m", "core", lambda: make_baseline("m")),
        _entry("w", "core", lambda: make_baseline("w")),
        _entry("frechet", "core", make_frechet, ("alpha", "beta")),
        _entry("fgm", "core", make_fgm, ("theta",)),
        _entry("gaussian", "core", make_gaussian, ("rho",)),
        _entry("gumbel", "archimedean", lambda **p: arch.builtin_archimedean("gumbel", **p), ("alpha",)),
        _entry("arch-pi", "archimedean", lambda: arch.builtin_archimedean("pi")),
        _entry("arch-w", "archimedean", lambda: arch.builtin_archimedean("w")),
        _entry("spreeuw", "archimedean", lambda: arch.builtin_archimedean("spreeuw")),
        _entry("evc-gumbel", "evc", lambda **p: evc.builtin_pickands("gumbel", **p), ("alpha",)),
        _entry("mo", "evc", lambda **p: evc.builtin_pickands("marshall-olkin", **p), ("alpha", "beta")),
        _entry("tawn-sym", "evc", lambda **p: evc.builtin_pickands("tawn-symmetric", **p), ("theta",)),
        _entry(
            "tawn-mix",
            "evc",
            lambda **p: evc.builtin_pickands("tawn-asym-mixed", **p),
            ("theta", "kappa"),
        ),
        _entry("evc-log", "evc", lambda: evc.builtin_pickands("log-example")),
        _entry("evc-jump", "evc", lambda: evc.builtin_pickands("jump-example")),
    ]
}


def family_names():
    return sorted(REGISTRY)


def build(name, params=None):
    """Instantiate a family; returns (entry, spec-or-copula, copula)."""
    key = name.lower()
    if key not in REGISTRY:
        raise ValidationError(f"unknown family {name!r}; known: {', '.join(family_names())}")
    entry = REGISTRY[key]
    params = dict(params or {})
    unknown = set(params) - set(entry.param_names)
    if unknown:
        raise ValidationError(
            f"family {name!r} takes parameters {list(entry.param_names)}, got {sorted(unknown)}"
        )
    try:
        obj = entry.factory(**params)
    except TypeError as exc:
        raise ValidationError(
            f"family {name!r} needs parameters {list(entry.param_names)}: {exc}"
        ) from exc
    if entry.kind == "archimedean":
        return entry, obj, arch.arch_copula(obj)
    if entry.kind == "evc":
        return entry, obj, evc.evc_copula(obj)
    return entry, obj, obj
