import numpy as np
import pytest

from mktp2.core import make_baseline
from mktp2.errors import ValidationError
from mktp2.grids import GridConfig
from mktp2.registry import build
from mktp2.sampler import empirical_cdf_distance, marginal_ks, sample, write_csv

GRID = GridConfig()


def test_comonotone_batch_lies_on_diagonal():
    batch = sample(make_baseline("m"), 1000, 7)
    assert float(np.max(np.abs(batch.points[:, 1] - batch.points[:, 0]))) <= 1e-9


def test_independence_batch_matches_model():
    batch = sample(make_baseline("pi"), 10_000, 7)
    assert empirical_cdf_distance(batch, make_baseline("pi"), GRID) <= 0.025
    d_u, d_v = marginal_ks(batch)
    bound = 1.63 / np.sqrt(batch.n)
    assert d_u <= bound and d_v <= bound


def test_wrong_model_distance_is_large():
    batch = sample(make_baseline("pi"), 10_000, 7)
    assert empirical_cdf_distance(batch, make_baseline("m"), GRID) >= 0.2


def test_reproducibility_bitwise():
    _, _, copula = build("evc-log")
    a = sample(copula, 2000, 42)
    b = sample(copula, 2000, 42)
    assert np.array_equal(a.points, b.points)
    c = sample(copula, 2000, 43)
    assert not np.array_equal(a.points, c.points)


def test_evc_log_batch_matches_model():
    _, _, copula = build("evc-log")
    batch = sample(copula, 10_000, 42)
    assert empirical_cdf_distance(batch, copula, GRID) <= 0.025
    d_u, d_v = marginal_ks(batch)
    bound = 1.63 / np.sqrt(batch.n)
    assert d_u <= bound and d_v <= bound


def test_marshall_olkin_atoms_hit_singular_curve():
    _, _, copula = build("mo", {"alpha": 0.5, "beta": 0.5})
    batch = sample(copula, 10_000, 3)
    u, v = batch.points[:, 0], batch.points[:, 1]
    on_curve = np.abs(u**0.5 - v**0.5) <= 1e-8
    assert float(on_curve.mean()) >= 0.05


def test_perfect_comonotone_batch_distance():
    from mktp2.sampler import SampleBatch

    n = 5000
    u = (np.arange(n) + 0.5) / n
    batch = SampleBatch(points=np.column_stack([u, u]), seed=0, n=n, label="perfect-m")
    slack = 1.0 / GRID.n_u
    assert empirical_cdf_distance(batch, make_baseline("m"), GRID) <= 1.0 / n + slack


def test_rejects_empty_batch_request():
    with pytest.raises(ValidationError):
        sample(make_baseline("pi"), 0, 1)


def test_csv_format(tmp_path):
    batch = sample(make_baseline("pi"), 5, 123)
    path = tmp_path / "batch.csv"
    write_csv(batch, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().split("\n")
    assert lines[0] == "u,v"
    assert len(lines) == 7  # header + 5 rows + trailing newline
    u0, v0 = (float(x) for x in lines[1].split(","))
    assert (u0, v0) == (batch.points[0, 0], batch.points[0, 1])
    # 17 significant digits survive a round trip
    assert f"{batch.points[0, 0]:.17g}" in lines[1]
