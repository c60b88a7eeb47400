"""Resolve manifold registry keys such as "euclidean:2", "torus:1", "sphere2:1.0", "hyperbolic2"."""

import re

from geostoch.errors import ContractViolation, RegistryError
from geostoch.manifolds.base import Manifold
from geostoch.manifolds.euclidean import Euclidean
from geostoch.manifolds.hyperbolic import Hyperbolic2
from geostoch.manifolds.sphere import Sphere2
from geostoch.manifolds.torus import Torus

# kind[:args], where torus args may carry periods: "torus:2@6.28,3.0"
MANIFOLD_KEY = re.compile(r"^\s*([a-z0-9]+)\s*(?::\s*([^\s]+))?\s*$")

MANIFOLD_KINDS = {
    "euclidean": "euclidean:<n>",
    "torus": "torus:<n>[@p1,...,pn]",
    "sphere2": "sphere2[:<radius>]",
    "hyperbolic2": "hyperbolic2",
}


def get_manifold(key: str) -> Manifold:
    """Build the manifold named by a registry key."""
    m = MANIFOLD_KEY.match(key or "")
    if not m or m.group(1) not in MANIFOLD_KINDS:
        raise RegistryError("manifold", key, MANIFOLD_KINDS.values())
    kind, args = m.group(1), m.group(2)
    try:
        if kind == "euclidean":
            return Euclidean(int(args or 1))
        if kind == "torus":
            if args and "@" in args:
                n, periods = args.split("@", 1)
                return Torus(int(n), tuple(float(p) for p in periods.split(",")))
            return Torus(int(args or 1))
        if kind == "sphere2":
            return Sphere2(float(args or 1.0))
        if args:
            raise ContractViolation("hyperbolic2 takes no arguments")
        return Hyperbolic2()
    except (ValueError, ContractViolation) as e:
        raise RegistryError("manifold", key, MANIFOLD_KINDS.values()) from e
