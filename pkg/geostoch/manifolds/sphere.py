"""Round sphere S² of a given radius, embedded in ℝ³."""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from geostoch.errors import ContractViolation
from geostoch.manifolds.base import CUT_LOCUS_TOL, FloatArray, Manifold


class Sphere2(Manifold):
    """
    S² of radius r. Points are unit 3-vectors u (the embedded point is r·u);
    tangent vectors are ambient 3-vectors orthogonal to u, measured in the
    metric of the radius-r sphere.
    """

    dim = 2
    coord_dim = 3

    def __init__(self, radius: float = 1.0) -> None:
        if radius <= 0:
            raise ContractViolation(f"sphere radius must be > 0, got {radius}")
        self.radius = float(radius)
        self.key = f"sphere2:{self.radius!r}"

    def embed(self, x: ArrayLike) -> FloatArray:
        """Embedded point r·u in ℝ³."""
        return self.radius * self.coords(x)

    def is_valid(self, x: ArrayLike) -> NDArray[np.bool_]:
        return np.abs(np.linalg.norm(self.coords(x), axis=-1) - 1.0) < 1e-9

    def normalize(self, x: ArrayLike) -> FloatArray:
        x_arr = self.coords(x)
        return x_arr / np.linalg.norm(x_arr, axis=-1, keepdims=True)

    def raise_index(self, x: ArrayLike, covector: ArrayLike) -> FloatArray:
        """Tangential projection of an ambient covector."""
        u, c = self.coords(x), self.coords(covector)
        return c - np.sum(c * u, axis=-1, keepdims=True) * u

    def orthonormal_frame(self, x: ArrayLike) -> FloatArray:
        u = self.coords(x)
        # Reference axis: e_z unless u is close to the poles, then e_x.
        near_pole = np.abs(u[..., 2:3]) > 0.9
        ref = np.where(near_pole, np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]))
        e1 = ref - np.sum(ref * u, axis=-1, keepdims=True) * u
        e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
        e2 = np.cross(u, e1)
        return np.stack([e1, e2], axis=-2)

    def exp_map(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        point, _ = self.geodesic(x, v, 1.0)
        return point

    def _angle(self, u: FloatArray, w: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
        """Angle between unit vectors plus cos and the unnormalized direction w − (u·w)u."""
        c = np.clip(np.sum(u * w, axis=-1), -1.0, 1.0)
        e = w - c[..., None] * u
        s = np.linalg.norm(np.cross(u, w), axis=-1)
        return np.arctan2(s, c), c, e

    def log_map_masked(self, x: ArrayLike, y: ArrayLike) -> tuple[FloatArray, NDArray[np.bool_]]:
        u, w = self.coords(x), self.coords(y)
        omega, _, e = self._angle(u, w)
        ok = (np.pi - omega) > CUT_LOCUS_TOL
        e_norm = np.linalg.norm(e, axis=-1)
        small = e_norm < 1e-300
        scale = np.where(ok & ~small, self.radius * omega / np.where(small, 1.0, e_norm), 0.0)
        return scale[..., None] * e, ok

    def dist(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        omega, _, _ = self._angle(self.coords(x), self.coords(y))
        return self.radius * omega

    def geodesic(self, x: ArrayLike, v: ArrayLike, tau: ArrayLike) -> tuple[FloatArray, FloatArray]:
        u, v_arr = self.coords(x), self.coords(v)
        tau_arr = np.asarray(tau, dtype=np.float64)[..., None]
        speed = np.linalg.norm(v_arr, axis=-1, keepdims=True)
        direction = v_arr / np.where(speed > 0.0, speed, 1.0)
        theta = tau_arr * speed / self.radius
        point = np.cos(theta) * u + np.sin(theta) * direction
        point = point / np.linalg.norm(point, axis=-1, keepdims=True)
        velocity = (-np.sin(theta) * u + np.cos(theta) * direction) * speed
        return point, velocity

    def injectivity_radius(self, x: ArrayLike | None = None) -> float:
        return np.pi * self.radius

    def random_point(self, rng: np.random.Generator, size: int) -> FloatArray:
        g = rng.standard_normal((size, 3))
        return g / np.linalg.norm(g, axis=-1, keepdims=True)
