"""
Brownian paths sampled at dyadic times jt/2^k.

The generator is Δ (heat operator ∂t − Δ), so each coordinate of an increment
over a step h has variance 2h, not h as in most stochastic libraries.
"""

import csv
import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import TypeVar

import numpy as np
from numpy.typing import ArrayLike

from geostoch.errors import ContractViolation, UnsupportedError
from geostoch.manifolds import Manifold, Torus
from geostoch.manifolds.base import FloatArray
from geostoch.parallel import map_ordered

logger = logging.getLogger(__name__)

R = TypeVar("R")

DEFAULT_K_MAX = 12
DEFAULT_N_PATHS = 10_000
DEFAULT_CHUNK_SIZE = 500

# Stream ids mixed into the RNG key next to (seed, path_index).
_STREAM_WALK = 0
_STREAM_BRIDGE = 1


def path_rng(seed: int, path_index: int, stream: int = _STREAM_WALK) -> np.random.Generator:
    """
    Counter-based generator keyed by (seed, path_index, stream).

    Philox draws are consumed step by step, so the j-th step of a path always
    reads the same counter block regardless of scheduling.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, path_index, stream])))


@dataclass(frozen=True)
class DyadicPath:
    """
    Points c(jt/2^k), j = 0..2^k, of one path or a batch of paths.

    points has shape (2^k + 1, coord_dim) for a single path and
    (m, 2^k + 1, coord_dim) for a batch; path_index is an int or an array of m ints.
    """

    manifold: Manifold
    t_total: float
    k: int
    points: FloatArray = field(repr=False)
    seed: int = 0
    path_index: int | np.ndarray = 0

    def __post_init__(self) -> None:
        if self.points.shape[-2] != 2**self.k + 1:
            raise ContractViolation(f"expected {2**self.k + 1} points at level {self.k}, got {self.points.shape[-2]}")

    @property
    def is_batch(self) -> bool:
        return self.points.ndim == 3

    @property
    def n_paths(self) -> int:
        return self.points.shape[0] if self.is_batch else 1

    @property
    def step(self) -> float:
        return self.t_total / 2**self.k

    @property
    def start(self) -> FloatArray:
        return self.points[..., 0, :]

    @property
    def end(self) -> FloatArray:
        return self.points[..., -1, :]

    def times(self) -> FloatArray:
        return np.arange(2**self.k + 1) * self.step

    def path(self, i: int) -> "DyadicPath":
        """The i-th path of a batch."""
        if not self.is_batch:
            raise ContractViolation("path(i) needs a batch")
        return DyadicPath(self.manifold, self.t_total, self.k, self.points[i], self.seed, int(self.path_index[i]))


def _increments(manifold: Manifold, t: float, k: int, seed: int, indices: np.ndarray) -> FloatArray:
    """Standard normals of shape (m, 2^k, dim), one Philox stream per path."""
    steps = 2**k
    return np.stack([path_rng(seed, int(i)).standard_normal((steps, manifold.dim)) for i in indices])


def _walk(manifold: Manifold, x0: FloatArray, t: float, k: int, z: FloatArray) -> FloatArray:
    """Turn standard normals into dyadic points; exact on flat manifolds, geodesic random walk otherwise."""
    m, steps, _ = z.shape
    h = t / steps
    scale = np.sqrt(2.0 * h)
    points = np.empty((m, steps + 1, manifold.coord_dim))
    points[:, 0, :] = x0
    if manifold.flat:
        points[:, 1:, :] = x0 + np.cumsum(scale * z, axis=1)
        if isinstance(manifold, Torus):
            points = manifold.wrap(points)
        return points
    x = np.broadcast_to(x0, (m, manifold.coord_dim)).copy()
    for j in range(steps):
        v = manifold.tangent_from_frame(x, scale * z[:, j, :])
        x = manifold.normalize(manifold.exp_map(x, v))
        points[:, j + 1, :] = x
    return points


def sample_batch(
    manifold: Manifold, x0: ArrayLike, t: float, k: int, seed: int, indices: ArrayLike
) -> DyadicPath:
    """Sample the paths with the given indices as one batch."""
    if t <= 0:
        raise ContractViolation(f"t must be > 0, got {t}")
    if k < 0:
        raise ContractViolation(f"k must be >= 0, got {k}")
    x0_arr = manifold.coords(x0)
    if not np.all(manifold.is_valid(x0_arr)):
        raise ContractViolation(f"x0 is not a valid point of {manifold.key}: {x0_arr}")
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    z = _increments(manifold, t, k, seed, idx)
    return DyadicPath(manifold, float(t), k, _walk(manifold, x0_arr, t, k, z), seed, idx)


def sample_bm(manifold: Manifold, x0: ArrayLike, t: float, k: int, seed: int, path_index: int) -> DyadicPath:
    """
    One Brownian path at level k, fully determined by (seed, path_index).

    ℝⁿ/𝕋ⁿ: exact Gaussian increments with per-coordinate variance 2t/2^k (wrapped
    on the torus). S²/ℍ²: geodesic random walk with tangent Gaussian steps of
    covariance 2h·Id in an orthonormal frame.
    """
    return sample_batch(manifold, x0, t, k, seed, [path_index]).path(0)


def subsample(path: DyadicPath, k_coarse: int) -> DyadicPath:
    """π_{k_coarse} of the same curve: keep every 2^{k − k_coarse}-th point."""
    if not 0 <= k_coarse <= path.k:
        raise ContractViolation(f"k_coarse must lie in [0, {path.k}], got {k_coarse}")
    stride = 2 ** (path.k - k_coarse)
    return DyadicPath(
        path.manifold, path.t_total, k_coarse, path.points[..., ::stride, :], path.seed, path.path_index
    )


def bridge_refine(path: DyadicPath, k_fine: int, seed: int) -> DyadicPath:
    """
    Insert Brownian-bridge midpoints down to level k_fine (flat manifolds only).

    Each midpoint has the segment midpoint as conditional mean and conditional
    variance per coordinate equal to the child spacing (half the parent spacing),
    so subsample(result, path.k) reproduces path exactly.
    """
    manifold = path.manifold
    if not manifold.flat:
        raise UnsupportedError(f"bridge refinement is exact only on flat manifolds, not {manifold.key}")
    if k_fine < path.k:
        raise ContractViolation(f"k_fine must be >= {path.k}, got {k_fine}")
    single = not path.is_batch
    points = path.points[None] if single else path.points
    indices = np.atleast_1d(np.asarray(path.path_index, dtype=np.int64))
    rngs = [path_rng(seed, int(i), _STREAM_BRIDGE) for i in indices]
    for level in range(path.k, k_fine):
        child = path.t_total / 2 ** (level + 1)
        a, b = points[:, :-1, :], points[:, 1:, :]
        if isinstance(manifold, Torus):
            mid = a + manifold.signed_offset(a, b) / 2.0
        else:
            mid = (a + b) / 2.0
        noise = np.stack([rng.standard_normal(mid.shape[1:]) for rng in rngs]) * np.sqrt(child)
        mid = mid + noise
        if isinstance(manifold, Torus):
            mid = manifold.wrap(mid)
        refined = np.empty((points.shape[0], 2 * points.shape[1] - 1, points.shape[2]))
        refined[:, 0::2, :] = points
        refined[:, 1::2, :] = mid
        points = refined
    out = points[0] if single else points
    return DyadicPath(manifold, path.t_total, k_fine, out, path.seed, path.path_index)


@dataclass(frozen=True)
class PathEnsemble:
    """
    N paths sharing (manifold, x0, t, k), generated lazily chunk by chunk.

    Path i is a pure function of (seed, i); the chunking only groups the work, and
    per-path results are always returned in index order.
    """

    manifold: Manifold
    x0: FloatArray
    t: float
    k: int
    n_paths: int = DEFAULT_N_PATHS
    seed: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ContractViolation(f"n_paths must be >= 1, got {self.n_paths}")
        if self.chunk_size < 1:
            raise ContractViolation(f"chunk_size must be >= 1, got {self.chunk_size}")

    def chunks(self) -> list[range]:
        return [range(s, min(s + self.chunk_size, self.n_paths)) for s in range(0, self.n_paths, self.chunk_size)]

    def batch(self, indices: range) -> DyadicPath:
        return sample_batch(self.manifold, self.x0, self.t, self.k, self.seed, np.arange(indices.start, indices.stop))

    def batches(self) -> Iterator[DyadicPath]:
        for chunk in self.chunks():
            yield self.batch(chunk)

    def map(self, fn: Callable[[DyadicPath], R], workers: int | None = None) -> list[R]:
        """fn applied to every chunk batch, results in chunk order."""
        logger.debug(
            "ensemble %s N=%d k=%d t=%g: %d chunks", self.manifold.key, self.n_paths, self.k, self.t, len(self.chunks())
        )
        return map_ordered(lambda chunk: fn(self.batch(chunk)), self.chunks(), workers)

    def collect(self, fn: Callable[[DyadicPath], np.ndarray], workers: int | None = None) -> np.ndarray:
        """Per-path values of fn concatenated in path-index order (along the first axis)."""
        return np.concatenate(self.map(fn, workers), axis=0)


def dump_paths(paths: DyadicPath | PathEnsemble, out_path: Path) -> Path:
    """Write paths as CSV rows (path_index, j, time, coord_0, ..., coord_{d-1})."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    batches = paths.batches() if isinstance(paths, PathEnsemble) else iter([paths])
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        first = True
        for batch in batches:
            pts = batch.points if batch.is_batch else batch.points[None]
            idx = np.atleast_1d(batch.path_index)
            if first:
                writer.writerow(["path_index", "j", "time"] + [f"coord_{c}" for c in range(pts.shape[-1])])
                first = False
            times = batch.times()
            for i, row_points in zip(idx, pts):
                for j, (time, p) in enumerate(zip(times, row_points)):
                    writer.writerow([int(i), j, repr(float(time))] + [repr(float(c)) for c in p])
    return out_path
