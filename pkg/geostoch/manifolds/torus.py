"""Flat torus 𝕋ⁿ = ℝⁿ / (periods·ℤⁿ) in angle coordinates."""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from geostoch.errors import ContractViolation
from geostoch.manifolds.base import CUT_LOCUS_TOL, FloatArray, Manifold

TWO_PI = 2.0 * np.pi


class Torus(Manifold):
    """Flat torus; coordinates live in [0, period_i)."""

    flat = True

    def __init__(self, n: int, periods: tuple[float, ...] | None = None) -> None:
        if n < 1:
            raise ContractViolation(f"torus dimension must be >= 1, got {n}")
        periods = tuple(periods) if periods is not None else (TWO_PI,) * n
        if len(periods) != n or any(p <= 0 for p in periods):
            raise ContractViolation(f"torus periods must be {n} positive numbers, got {periods}")
        self.dim = n
        self.coord_dim = n
        self.periods = np.asarray(periods, dtype=np.float64)
        if all(abs(p - TWO_PI) < 1e-15 for p in periods):
            self.key = f"torus:{n}"
        else:
            self.key = f"torus:{n}@" + ",".join(repr(float(p)) for p in periods)

    def wrap(self, x: ArrayLike) -> FloatArray:
        """Reduce coordinates into [0, period)."""
        out = np.mod(np.asarray(x, dtype=np.float64), self.periods)
        # np.mod of a tiny negative number can round up to the period itself
        return np.where(out >= self.periods, 0.0, out)

    def signed_offset(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        """Shortest coordinate offset from x to y, each component in [-period/2, period/2]."""
        d = self.coords(y) - self.coords(x)
        return d - self.periods * np.round(d / self.periods)

    def is_valid(self, x: ArrayLike) -> NDArray[np.bool_]:
        x_arr = self.coords(x)
        return np.all((x_arr >= 0.0) & (x_arr < self.periods), axis=-1)

    def normalize(self, x: ArrayLike) -> FloatArray:
        return self.wrap(self.coords(x))

    def orthonormal_frame(self, x: ArrayLike) -> FloatArray:
        x_arr = self.coords(x)
        return np.broadcast_to(np.eye(self.dim), x_arr.shape[:-1] + (self.dim, self.dim)).copy()

    def exp_map(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        return self.wrap(self.coords(x) + self.coords(v))

    def log_map_masked(self, x: ArrayLike, y: ArrayLike) -> tuple[FloatArray, NDArray[np.bool_]]:
        d = self.signed_offset(x, y)
        ok = np.all(np.abs(np.abs(d) - self.periods / 2.0) > CUT_LOCUS_TOL, axis=-1)
        return np.where(ok[..., None], d, 0.0), ok

    def dist(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        return np.linalg.norm(self.signed_offset(x, y), axis=-1)

    def geodesic(self, x: ArrayLike, v: ArrayLike, tau: ArrayLike) -> tuple[FloatArray, FloatArray]:
        x_arr, v_arr = self.coords(x), self.coords(v)
        tau_arr = np.asarray(tau, dtype=np.float64)[..., None]
        point = self.wrap(x_arr + tau_arr * v_arr)
        return point, np.broadcast_to(v_arr, point.shape).copy()

    def injectivity_radius(self, x: ArrayLike | None = None) -> float:
        return float(np.min(self.periods)) / 2.0

    def random_point(self, rng: np.random.Generator, size: int) -> FloatArray:
        return rng.uniform(0.0, 1.0, size=(size, self.dim)) * self.periods
