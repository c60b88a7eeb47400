"""Model Riemannian manifolds with closed-form geodesics."""

from geostoch.manifolds.base import CUT_LOCUS_TOL, UNBOUNDED, Manifold
from geostoch.manifolds.euclidean import Euclidean
from geostoch.manifolds.hyperbolic import Hyperbolic2
from geostoch.manifolds.registry import MANIFOLD_KINDS, get_manifold
from geostoch.manifolds.sphere import Sphere2
from geostoch.manifolds.torus import Torus

__all__ = [
    "CUT_LOCUS_TOL",
    "UNBOUNDED",
    "Euclidean",
    "Hyperbolic2",
    "MANIFOLD_KINDS",
    "Manifold",
    "Sphere2",
    "Torus",
    "get_manifold",
]
