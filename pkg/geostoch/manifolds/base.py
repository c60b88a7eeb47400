"""Base type for the model manifolds: closed-form exp/log/dist on coordinate arrays.

Points and tangent vectors are float arrays whose last axis holds the chart (or
ambient, for S²) coordinates; any leading axes are batch axes and broadcast.
"""

import math
from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import ArrayLike, NDArray

from geostoch.errors import ContractViolation, CutLocusError

FloatArray = NDArray[np.float64]

# Returned by injectivity_radius on manifolds without a cut locus.
UNBOUNDED = math.inf

# Angular tolerance of the cut-locus predicate (antipodes, torus half-periods).
CUT_LOCUS_TOL = 1e-12


class Manifold(ABC):
    """A model Riemannian manifold with exact geodesics."""

    #: Registry key, e.g. "sphere2:1.0".
    key: str
    #: Intrinsic dimension.
    dim: int
    #: Length of the coordinate axis (3 for the embedded sphere).
    coord_dim: int
    #: True when Brownian increments are exact Gaussians in the chart.
    flat: bool = False

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.key}>"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Manifold) and other.key == self.key

    def __hash__(self) -> int:
        return hash(self.key)

    # -- coordinates -----------------------------------------------------

    def coords(self, x: ArrayLike) -> FloatArray:
        """Return x as a float array, checking the coordinate axis length."""
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 0 or arr.shape[-1] != self.coord_dim:
            raise ContractViolation(
                f"{self.key}: expected coordinate axis of length {self.coord_dim}, got shape {arr.shape}"
            )
        return arr

    @abstractmethod
    def is_valid(self, x: ArrayLike) -> NDArray[np.bool_]:
        """True where x is a valid chart point."""

    def normalize(self, x: ArrayLike) -> FloatArray:
        """Project rounding drift back onto the chart (identity by default)."""
        return self.coords(x)

    # -- metric ----------------------------------------------------------

    def inner(self, x: ArrayLike, u: ArrayLike, v: ArrayLike) -> FloatArray:
        """Riemannian inner product g_x(u, v)."""
        return np.sum(self.coords(u) * self.coords(v), axis=-1)

    def norm(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        return np.sqrt(np.maximum(self.inner(x, v, v), 0.0))

    @abstractmethod
    def orthonormal_frame(self, x: ArrayLike) -> FloatArray:
        """Orthonormal tangent frame at x, shape (..., dim, coord_dim)."""

    def raise_index(self, x: ArrayLike, covector: ArrayLike) -> FloatArray:
        """Vector dual to a covector given by its components in the coordinate frame."""
        return self.coords(covector)

    # -- geodesics -------------------------------------------------------

    @abstractmethod
    def exp_map(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        """γ(1) for the geodesic with γ(0) = x and γ̇(0) = v."""

    @abstractmethod
    def log_map_masked(self, x: ArrayLike, y: ArrayLike) -> tuple[FloatArray, NDArray[np.bool_]]:
        """
        Initial velocity of the minimizing geodesic from x to y, with an admissibility mask.

        Where the mask is False (cut locus), the returned velocity is zero.
        """

    @abstractmethod
    def dist(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        """Riemannian distance."""

    @abstractmethod
    def geodesic(self, x: ArrayLike, v: ArrayLike, tau: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """Point and velocity at time τ of τ ↦ exp_x(τ v)."""

    @abstractmethod
    def injectivity_radius(self, x: ArrayLike | None = None) -> float:
        """Injectivity radius at x (constant on every model manifold here)."""

    def log_map(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        """exp_x^{-1}(y); raises CutLocusError when the minimizing geodesic is not unique."""
        v, ok = self.log_map_masked(x, y)
        if not np.all(ok):
            raise CutLocusError(f"{self.key}: no unique minimizing geodesic between the given points")
        return v

    def geodesic_point(self, x: ArrayLike, y: ArrayLike, tau: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """(γ_{x,y}(τ), γ̇_{x,y}(τ)) for the minimizing geodesic from x to y."""
        tau_arr = np.asarray(tau, dtype=np.float64)
        if np.any((tau_arr < 0.0) | (tau_arr > 1.0)):
            raise ContractViolation(f"tau must lie in [0, 1], got {tau}")
        return self.geodesic(x, self.log_map(x, y), tau_arr)

    # -- sampling --------------------------------------------------------

    @abstractmethod
    def random_point(self, rng: np.random.Generator, size: int) -> FloatArray:
        """Random chart points in a bounded region, shape (size, coord_dim)."""

    def tangent_from_frame(self, x: ArrayLike, z: ArrayLike) -> FloatArray:
        """Tangent vector Σ zᵢ eᵢ in the orthonormal frame at x; z has shape (..., dim)."""
        frame = self.orthonormal_frame(x)
        return np.sum(np.asarray(z, dtype=np.float64)[..., :, None] * frame, axis=-2)

    def random_tangent(self, rng: np.random.Generator, x: ArrayLike, scale: float = 1.0) -> FloatArray:
        """Gaussian tangent vectors at x with covariance scale²·Id in an orthonormal frame."""
        x_arr = self.coords(x)
        z = rng.standard_normal(x_arr.shape[:-1] + (self.dim,)) * scale
        return self.tangent_from_frame(x_arr, z)
