import numpy as np
import pytest

from mktp2.grids import GridConfig
from mktp2.registry import build


@pytest.fixture(scope="session")
def default_grid():
    return GridConfig()


@pytest.fixture(scope="session")
def fast_grid():
    return GridConfig(n_u=64, n_v=64)


# every built-in family the registry can construct, with workable parameters
ALL_FAMILIES = [
    ("pi", None),
    ("m", None),
    ("w", None),
    ("frechet", {"alpha": 0.5, "beta": 0.25}),
    ("frechet", {"alpha": 0.5, "beta": 0.0}),
    ("fgm", {"theta": 0.7}),
    ("fgm", {"theta": -0.5}),
    ("gaussian", {"rho": 0.5}),
    ("gaussian", {"rho": -0.5}),
    ("gumbel", {"alpha": 1.5}),
    ("gumbel", {"alpha": 3.0}),
    ("arch-w", None),
    ("spreeuw", None),
    ("evc-gumbel", {"alpha": 2.0}),
    ("mo", {"alpha": 0.5, "beta": 0.5}),
    ("mo", {"alpha": 0.7, "beta": 1.0}),
    ("tawn-sym", {"theta": 0.2}),
    ("tawn-sym", {"theta": 1.0}),
    ("tawn-mix", {"theta": 1.25, "kappa": -0.25}),
    ("evc-log", None),
    ("evc-jump", None),
]


def family_copulas():
    for name, params in ALL_FAMILIES:
        _, _, copula = build(name, params)
        yield copula


@pytest.fixture(scope="session", params=ALL_FAMILIES, ids=lambda fp: f"{fp[0]}-{fp[1]}")
def any_copula(request):
    name, params = request.param
    _, _, copula = build(name, params)
    return copula


def random_rectangles(rng, n, lo=0.001, hi=0.999):
    u = np.sort(rng.uniform(lo, hi, size=(n, 2)), axis=1)
    v = np.sort(rng.uniform(lo, hi, size=(n, 2)), axis=1)
    return u[:, 0], u[:, 1], v[:, 0], v[:, 1]
