"""Euclidean space ℝⁿ: straight-line geodesics."""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from geostoch.errors import ContractViolation
from geostoch.manifolds.base import UNBOUNDED, FloatArray, Manifold


class Euclidean(Manifold):
    """ℝⁿ in Cartesian coordinates."""

    flat = True

    def __init__(self, n: int) -> None:
        if n < 1:
            raise ContractViolation(f"euclidean dimension must be >= 1, got {n}")
        self.dim = n
        self.coord_dim = n
        self.key = f"euclidean:{n}"

    def is_valid(self, x: ArrayLike) -> NDArray[np.bool_]:
        return np.all(np.isfinite(self.coords(x)), axis=-1)

    def orthonormal_frame(self, x: ArrayLike) -> FloatArray:
        x_arr = self.coords(x)
        return np.broadcast_to(np.eye(self.dim), x_arr.shape[:-1] + (self.dim, self.dim)).copy()

    def exp_map(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        return self.coords(x) + self.coords(v)

    def log_map_masked(self, x: ArrayLike, y: ArrayLike) -> tuple[FloatArray, NDArray[np.bool_]]:
        v = self.coords(y) - self.coords(x)
        return v, np.ones(v.shape[:-1], dtype=bool)

    def dist(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        return np.linalg.norm(self.coords(y) - self.coords(x), axis=-1)

    def geodesic(self, x: ArrayLike, v: ArrayLike, tau: ArrayLike) -> tuple[FloatArray, FloatArray]:
        x_arr, v_arr = self.coords(x), self.coords(v)
        tau_arr = np.asarray(tau, dtype=np.float64)[..., None]
        point = x_arr + tau_arr * v_arr
        return point, np.broadcast_to(v_arr, point.shape).copy()

    def injectivity_radius(self, x: ArrayLike | None = None) -> float:
        return UNBOUNDED

    def random_point(self, rng: np.random.Generator, size: int) -> FloatArray:
        return rng.uniform(-2.0, 2.0, size=(size, self.dim))
