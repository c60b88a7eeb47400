"""Smooth parametric test curves with analytic velocities, sampled as deterministic dyadic paths."""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from geostoch.errors import ContractViolation, RegistryError
from geostoch.fields import REGISTRY_KEY, registry_params
from geostoch.manifolds import Euclidean, Hyperbolic2, Manifold, Sphere2, Torus
from geostoch.manifolds.base import FloatArray
from geostoch.paths import DyadicPath

CurveFn = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class Curve:
    """
    s ↦ c(s) on a manifold, with ċ(s) in the manifold's tangent representation.

    point and velocity take an array of parameters of shape (m,) and return
    arrays of shape (m, coord_dim).
    """

    name: str
    manifold: Manifold
    point: CurveFn = field(repr=False)
    velocity: CurveFn = field(repr=False)
    #: Natural parameter length (one turn for closed curves).
    t_default: float = 1.0

    def sample(self, k: int, t: float | None = None) -> DyadicPath:
        """c(jt/2^k), j = 0..2^k, as a single deterministic path."""
        if k < 0:
            raise ContractViolation(f"k must be >= 0, got {k}")
        t = self.t_default if t is None else float(t)
        s = np.arange(2**k + 1) * (t / 2**k)
        return DyadicPath(self.manifold, t, k, self.manifold.normalize(self.point(s)))


def _stack(*cols: FloatArray) -> FloatArray:
    return np.stack(cols, axis=-1)


def _euclidean_curve(m: Euclidean, name: str, raw: str | None) -> Curve | None:
    pad = m.dim - 2

    def lift(*cols: FloatArray) -> FloatArray:
        return _stack(*cols, *([np.zeros_like(cols[0])] * pad))

    if name == "const":
        return Curve("const", m, lambda s: np.zeros(np.shape(s) + (m.dim,)),
                     lambda s: np.zeros(np.shape(s) + (m.dim,)))
    if name == "segment":
        # unit speed along the first axis
        e = np.eye(m.dim)[0]
        return Curve("segment", m, lambda s: np.asarray(s)[..., None] * e,
                     lambda s: np.broadcast_to(e, np.shape(s) + (m.dim,)).copy())
    if m.dim < 2:
        return None
    if name == "circle":
        (radius,) = registry_params(raw, (1.0,))
        return Curve(
            f"circle:{radius!r}",
            m,
            lambda s: lift(radius * np.cos(s), radius * np.sin(s)),
            lambda s: lift(-radius * np.sin(s), radius * np.cos(s)),
            t_default=2.0 * np.pi,
        )
    if name == "ellipse":
        a, b = registry_params(raw, (2.0, 1.0))
        return Curve(
            f"ellipse:{a!r},{b!r}",
            m,
            lambda s: lift(a * np.cos(s), b * np.sin(s)),
            lambda s: lift(-a * np.sin(s), b * np.cos(s)),
            t_default=2.0 * np.pi,
        )
    return None


def _torus_curve(m: Torus, name: str, raw: str | None) -> Curve | None:
    w = 2.0 * np.pi / m.periods
    if name == "loop":
        # one positive turn around the first factor
        def point(s: FloatArray) -> FloatArray:
            out = np.zeros(np.shape(s) + (m.dim,))
            out[..., 0] = s
            return m.wrap(out)

        def velocity(s: FloatArray) -> FloatArray:
            out = np.zeros(np.shape(s) + (m.dim,))
            out[..., 0] = 1.0
            return out

        return Curve("loop", m, point, velocity, t_default=float(m.periods[0]))
    if name == "wave" and m.dim >= 2:
        (amp,) = registry_params(raw, (1.0,))

        def point(s: FloatArray) -> FloatArray:
            out = np.zeros(np.shape(s) + (m.dim,))
            out[..., 0] = s
            out[..., 1] = amp * np.sin(w[0] * s)
            return m.wrap(out)

        def velocity(s: FloatArray) -> FloatArray:
            out = np.zeros(np.shape(s) + (m.dim,))
            out[..., 0] = 1.0
            out[..., 1] = amp * w[0] * np.cos(w[0] * s)
            return out

        return Curve(f"wave:{amp!r}", m, point, velocity, t_default=float(m.periods[0]))
    return None


def _sphere_curve(m: Sphere2, name: str, raw: str | None) -> Curve | None:
    r = m.radius
    if name == "latitude":
        (polar,) = registry_params(raw, (np.pi / 3.0,))
        sp, cp = np.sin(polar), np.cos(polar)
        return Curve(
            f"latitude:{polar!r}",
            m,
            lambda s: _stack(sp * np.cos(s), sp * np.sin(s), np.full(np.shape(s), cp)),
            lambda s: r * _stack(-sp * np.sin(s), sp * np.cos(s), np.zeros(np.shape(s))),
            t_default=2.0 * np.pi,
        )
    if name == "great_circle":
        # tilted great circle through (1, 0, 0)
        (tilt,) = registry_params(raw, (np.pi / 4.0,))
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, np.cos(tilt), np.sin(tilt)])
        return Curve(
            f"great_circle:{tilt!r}",
            m,
            lambda s: np.cos(s)[..., None] * e1 + np.sin(s)[..., None] * e2,
            lambda s: r * (-np.sin(s)[..., None] * e1 + np.cos(s)[..., None] * e2),
            t_default=2.0 * np.pi,
        )
    if name == "wobble":
        # latitude circle whose polar angle oscillates; not a geodesic anywhere
        base, amp = registry_params(raw, (np.pi / 2.0, 0.3))

        def point(s: FloatArray) -> FloatArray:
            th = base + amp * np.sin(2.0 * s)
            return _stack(np.sin(th) * np.cos(s), np.sin(th) * np.sin(s), np.cos(th))

        def velocity(s: FloatArray) -> FloatArray:
            th = base + amp * np.sin(2.0 * s)
            dth = 2.0 * amp * np.cos(2.0 * s)
            return r * _stack(
                np.cos(th) * np.cos(s) * dth - np.sin(th) * np.sin(s),
                np.cos(th) * np.sin(s) * dth + np.sin(th) * np.cos(s),
                -np.sin(th) * dth,
            )

        return Curve(f"wobble:{base!r},{amp!r}", m, point, velocity, t_default=2.0 * np.pi)
    return None


def _hyperbolic_curve(m: Hyperbolic2, name: str, raw: str | None) -> Curve | None:
    if name == "circle":
        # Euclidean circle in the half-plane (a hyperbolic circle with shifted centre)
        cy, radius = registry_params(raw, (2.0, 1.0))
        if radius >= cy:
            raise ContractViolation("circle must stay in the upper half-plane")
        return Curve(
            f"circle:{cy!r},{radius!r}",
            m,
            lambda s: _stack(radius * np.cos(s), cy + radius * np.sin(s)),
            lambda s: _stack(-radius * np.sin(s), radius * np.cos(s)),
            t_default=2.0 * np.pi,
        )
    return None


CURVE_NAMES: dict[type, tuple[str, ...]] = {
    Euclidean: ("const", "segment", "circle", "ellipse"),
    Torus: ("loop", "wave"),
    Sphere2: ("latitude", "great_circle", "wobble"),
    Hyperbolic2: ("circle",),
}

_CURVE_BUILDERS = {
    Euclidean: _euclidean_curve,
    Torus: _torus_curve,
    Sphere2: _sphere_curve,
    Hyperbolic2: _hyperbolic_curve,
}


def get_curve(manifold: Manifold, key: str) -> Curve:
    """Resolve a curve key on a manifold: "circle", "latitude:1.0", "wave:0.5", ..."""
    valid = CURVE_NAMES[type(manifold)]
    m = REGISTRY_KEY.match(key or "")
    if not m:
        raise RegistryError("curve", key, valid)
    try:
        curve = _CURVE_BUILDERS[type(manifold)](manifold, m.group(1), m.group(2))
    except (ValueError, ContractViolation) as e:
        raise RegistryError("curve", key, valid) from e
    if curve is None:
        raise RegistryError("curve", key, valid)
    return curve
