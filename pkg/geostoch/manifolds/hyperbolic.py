"""Hyperbolic plane ℍ² in upper half-plane coordinates, geodesics via the hyperboloid."""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from geostoch.manifolds.base import UNBOUNDED, FloatArray, Manifold


def _lorentz(a: FloatArray, b: FloatArray) -> FloatArray:
    return -a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


class Hyperbolic2(Manifold):
    """Upper half-plane {(x, y) : y > 0} with metric (dx² + dy²)/y²."""

    dim = 2
    coord_dim = 2
    key = "hyperbolic2"

    # -- hyperboloid model helpers ---------------------------------------

    @staticmethod
    def to_hyperboloid(p: FloatArray) -> FloatArray:
        x, y = p[..., 0], p[..., 1]
        r2 = x * x + y * y
        return np.stack([(r2 + 1.0) / (2.0 * y), x / y, (r2 - 1.0) / (2.0 * y)], axis=-1)

    @staticmethod
    def from_hyperboloid(q: FloatArray) -> FloatArray:
        d = q[..., 0] - q[..., 2]
        return np.stack([q[..., 1] / d, 1.0 / d], axis=-1)

    @staticmethod
    def push_tangent(p: FloatArray, v: FloatArray) -> FloatArray:
        """Differential of the half-plane → hyperboloid map applied to v."""
        x, y = p[..., 0], p[..., 1]
        a, b = v[..., 0], v[..., 1]
        y2 = y * y
        return np.stack(
            [
                (x / y) * a + (y2 - x * x - 1.0) / (2.0 * y2) * b,
                a / y - (x / y2) * b,
                (x / y) * a + (y2 - x * x + 1.0) / (2.0 * y2) * b,
            ],
            axis=-1,
        )

    @staticmethod
    def pull_tangent(q: FloatArray, w: FloatArray) -> FloatArray:
        """Inverse of push_tangent at the hyperboloid point q."""
        d = q[..., 0] - q[..., 2]
        dd = w[..., 0] - w[..., 2]
        return np.stack([w[..., 1] / d - q[..., 1] * dd / (d * d), -dd / (d * d)], axis=-1)

    # -- manifold interface ----------------------------------------------

    def is_valid(self, x: ArrayLike) -> NDArray[np.bool_]:
        x_arr = self.coords(x)
        return np.isfinite(x_arr[..., 0]) & (x_arr[..., 1] > 0.0)

    def inner(self, x: ArrayLike, u: ArrayLike, v: ArrayLike) -> FloatArray:
        y = self.coords(x)[..., 1]
        return np.sum(self.coords(u) * self.coords(v), axis=-1) / (y * y)

    def raise_index(self, x: ArrayLike, covector: ArrayLike) -> FloatArray:
        y = self.coords(x)[..., 1:2]
        return self.coords(covector) * y * y

    def orthonormal_frame(self, x: ArrayLike) -> FloatArray:
        y = self.coords(x)[..., 1]
        zero = np.zeros_like(y)
        return np.stack([np.stack([y, zero], axis=-1), np.stack([zero, y], axis=-1)], axis=-2)

    def exp_map(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        point, _ = self.geodesic(x, v, 1.0)
        return point

    def log_map_masked(self, x: ArrayLike, y: ArrayLike) -> tuple[FloatArray, NDArray[np.bool_]]:
        p, r = self.coords(x), self.coords(y)
        qp, qr = self.to_hyperboloid(p), self.to_hyperboloid(r)
        c = _lorentz(qp, qr)
        w = qr + c[..., None] * qp
        w_norm = np.sqrt(np.maximum(_lorentz(w, w), 0.0))
        d = self.dist(p, r)
        scale = np.where(w_norm > 0.0, d / np.where(w_norm > 0.0, w_norm, 1.0), 0.0)
        v = self.pull_tangent(qp, scale[..., None] * w)
        return v, np.ones(v.shape[:-1], dtype=bool)

    def dist(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        p, r = self.coords(x), self.coords(y)
        chord = np.linalg.norm(r - p, axis=-1)
        return 2.0 * np.arcsinh(chord / (2.0 * np.sqrt(p[..., 1] * r[..., 1])))

    def geodesic(self, x: ArrayLike, v: ArrayLike, tau: ArrayLike) -> tuple[FloatArray, FloatArray]:
        p, v_arr = self.coords(x), self.coords(v)
        tau_arr = np.asarray(tau, dtype=np.float64)[..., None]
        q = self.to_hyperboloid(p)
        w = self.push_tangent(p, v_arr)
        speed = np.sqrt(np.maximum(_lorentz(w, w), 0.0))[..., None]
        direction = w / np.where(speed > 0.0, speed, 1.0)
        s = tau_arr * speed
        q_tau = np.cosh(s) * q + np.sinh(s) * direction
        w_tau = (np.sinh(s) * q + np.cosh(s) * direction) * speed
        return self.from_hyperboloid(q_tau), self.pull_tangent(q_tau, w_tau)

    def injectivity_radius(self, x: ArrayLike | None = None) -> float:
        return UNBOUNDED

    def random_point(self, rng: np.random.Generator, size: int) -> FloatArray:
        return np.stack([rng.uniform(-1.0, 1.0, size), np.exp(rng.uniform(-1.0, 1.0, size))], axis=-1)
