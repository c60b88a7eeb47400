"""Tests for dyadic Brownian paths, ensembles, bridge refinement and the worker pool."""

import csv
from pathlib import Path

import numpy as np
import pytest

from geostoch.errors import ConfigError, ContractViolation, UnsupportedError
from geostoch.manifolds import Euclidean, Hyperbolic2, Sphere2, Torus
from geostoch.parallel import THREADS_ENV, map_ordered, worker_count
from geostoch.paths import PathEnsemble, bridge_refine, dump_paths, sample_batch, sample_bm, subsample


def test_sample_bm_is_deterministic() -> None:
    m = Sphere2()
    a = sample_bm(m, [0.0, 0.0, 1.0], 1.0, 6, seed=3, path_index=17)
    b = sample_bm(m, [0.0, 0.0, 1.0], 1.0, 6, seed=3, path_index=17)
    np.testing.assert_array_equal(a.points, b.points)
    c = sample_bm(m, [0.0, 0.0, 1.0], 1.0, 6, seed=4, path_index=17)
    assert not np.array_equal(a.points, c.points)


def test_path_does_not_depend_on_batch() -> None:
    m = Euclidean(2)
    batch = sample_batch(m, [0.0, 0.0], 1.0, 5, seed=0, indices=[4, 9, 2])
    single = sample_bm(m, [0.0, 0.0], 1.0, 5, seed=0, path_index=9)
    np.testing.assert_array_equal(batch.path(1).points, single.points)
    assert batch.path(1).path_index == 9


def test_shapes_and_times() -> None:
    p = sample_bm(Hyperbolic2(), [0.0, 1.0], 0.5, 4, seed=0, path_index=0)
    assert p.points.shape == (17, 2)
    assert p.step == pytest.approx(0.5 / 16)
    np.testing.assert_allclose(p.times()[[0, -1]], [0.0, 0.5])
    np.testing.assert_array_equal(p.start, [0.0, 1.0])
    assert np.all(Hyperbolic2().is_valid(p.points))


def test_sphere_walk_stays_on_sphere() -> None:
    m = Sphere2(2.0)
    batch = sample_batch(m, [1.0, 0.0, 0.0], 1.0, 6, seed=1, indices=range(20))
    np.testing.assert_allclose(np.linalg.norm(batch.points, axis=-1), 1.0, atol=1e-12)


def test_torus_paths_are_wrapped() -> None:
    m = Torus(2)
    batch = sample_batch(m, [0.1, 6.0], 4.0, 6, seed=2, indices=range(50))
    assert np.all((batch.points >= 0.0) & (batch.points < 2.0 * np.pi))


def test_increment_variance_is_two_h() -> None:
    ens = PathEnsemble(Euclidean(1), np.zeros(1), t=1.0, k=3, n_paths=10_000, seed=5)
    ends = ens.collect(lambda b: b.end[:, 0])
    assert float(np.var(ends)) == pytest.approx(2.0, abs=0.2)
    assert abs(float(np.mean(ends))) < 0.15


def test_collect_is_independent_of_chunks_and_workers() -> None:
    m = Sphere2()
    x0 = np.array([0.0, 0.0, 1.0])
    a = PathEnsemble(m, x0, 1.0, 4, n_paths=37, seed=8, chunk_size=5).collect(lambda b: b.end, workers=4)
    b = PathEnsemble(m, x0, 1.0, 4, n_paths=37, seed=8, chunk_size=37).collect(lambda b: b.end, workers=1)
    np.testing.assert_array_equal(a, b)


def test_ensemble_chunks_cover_indices() -> None:
    ens = PathEnsemble(Euclidean(1), np.zeros(1), 1.0, 2, n_paths=11, chunk_size=4)
    assert [len(c) for c in ens.chunks()] == [4, 4, 3]


@pytest.mark.parametrize("kwargs", [{"n_paths": 0}, {"chunk_size": 0}])
def test_ensemble_rejects_sizes(kwargs: dict) -> None:
    with pytest.raises(ContractViolation):
        PathEnsemble(Euclidean(1), np.zeros(1), 1.0, 2, **kwargs)


def test_subsample_keeps_dyadic_points() -> None:
    p = sample_bm(Euclidean(2), [0.0, 0.0], 1.0, 6, seed=0, path_index=1)
    q = subsample(p, 3)
    assert q.k == 3
    np.testing.assert_array_equal(q.points, p.points[::8])
    with pytest.raises(ContractViolation):
        subsample(p, 7)


@pytest.mark.parametrize("m,x0", [(Euclidean(2), [0.5, -0.5]), (Torus(1), [6.0])])
def test_bridge_refine_preserves_coarse_points(m, x0) -> None:
    batch = sample_batch(m, x0, 1.0, 3, seed=0, indices=range(10))
    fine = bridge_refine(batch, 7, seed=0)
    assert fine.k == 7
    np.testing.assert_array_equal(subsample(fine, 3).points, batch.points)


def test_bridge_midpoint_variance() -> None:
    batch = sample_batch(Euclidean(1), [0.0], 1.0, 0, seed=0, indices=range(4000))
    mid = bridge_refine(batch, 1, seed=0).points[:, 1, 0]
    # Brownian motion with generator Δ: Var B(1/2) = 1.
    assert float(np.var(mid)) == pytest.approx(1.0, abs=0.1)


def test_bridge_refine_rejects_curved_and_coarser() -> None:
    p = sample_bm(Sphere2(), [0.0, 0.0, 1.0], 1.0, 3, seed=0, path_index=0)
    with pytest.raises(UnsupportedError):
        bridge_refine(p, 5, seed=0)
    q = sample_bm(Euclidean(1), [0.0], 1.0, 3, seed=0, path_index=0)
    with pytest.raises(ContractViolation):
        bridge_refine(q, 2, seed=0)


@pytest.mark.parametrize(
    "m,x0,t",
    [(Sphere2(), [0.0, 0.0, 2.0], 1.0), (Hyperbolic2(), [0.0, -1.0], 1.0), (Euclidean(1), [0.0], 0.0)],
)
def test_sample_rejects_bad_start_or_time(m, x0, t: float) -> None:
    with pytest.raises(ContractViolation):
        sample_bm(m, x0, t, 3, seed=0, path_index=0)


def test_dump_paths(tmp_path: Path) -> None:
    ens = PathEnsemble(Euclidean(2), np.zeros(2), 1.0, 2, n_paths=3, chunk_size=2)
    out = dump_paths(ens, tmp_path / "nested" / "paths.csv")
    with out.open(encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["path_index", "j", "time", "coord_0", "coord_1"]
    assert len(rows) == 1 + 3 * 5
    assert [r[0] for r in rows[1:6]] == ["0"] * 5
    assert rows[-1][:3] == ["2", "4", "1.0"]


def test_worker_count_from_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(THREADS_ENV, "3")
    assert worker_count() == 3
    monkeypatch.delenv(THREADS_ENV)
    assert worker_count() >= 1


@pytest.mark.parametrize("raw", ["0", "-2", "many"])
def test_worker_count_rejects(monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
    monkeypatch.setenv(THREADS_ENV, raw)
    with pytest.raises(ConfigError) as exc:
        worker_count()
    assert exc.value.field == THREADS_ENV


def test_map_ordered_keeps_input_order() -> None:
    assert map_ordered(lambda i: i * i, range(50), workers=8) == [i * i for i in range(50)]
    assert map_ordered(str, [], workers=4) == []
