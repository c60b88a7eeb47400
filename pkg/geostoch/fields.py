"""1-forms and scalar fields on the model manifolds, their registries, and finite-difference operators."""

import re
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from geostoch.errors import ContractViolation, RegistryError
from geostoch.manifolds import Euclidean, Hyperbolic2, Manifold, Sphere2, Torus
from geostoch.manifolds.base import FloatArray

ArrayFn = Callable[[FloatArray], np.ndarray]

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class OneForm:
    """
    A real 1-form α on a manifold.

    covector(x) returns the components of α_x in the coordinate frame (ambient
    frame for S²), so α_x(v) = ⟨covector(x), v⟩ is linear in v by construction.
    codifferential(x) is the analytic d*α = −div α♯.
    """

    name: str
    manifold: Manifold
    covector: ArrayFn = field(repr=False)
    codifferential: ArrayFn = field(repr=False)

    def __call__(self, x: ArrayLike, v: ArrayLike) -> FloatArray:
        x_arr = self.manifold.coords(x)
        return np.sum(self.covector(x_arr) * self.manifold.coords(v), axis=-1)

    def combine(self, a: float, other: "OneForm", b: float) -> "OneForm":
        """The form a·self + b·other."""
        if other.manifold != self.manifold:
            raise ContractViolation("cannot combine forms on different manifolds")
        return OneForm(
            name=f"{a!r}*{self.name}+{b!r}*{other.name}",
            manifold=self.manifold,
            covector=lambda x: a * self.covector(x) + b * other.covector(x),
            codifferential=lambda x: a * self.codifferential(x) + b * other.codifferential(x),
        )


@dataclass(frozen=True)
class ScalarField:
    """A scalar field f with analytic differential (covector components) and Laplace-Beltrami Δf."""

    name: str
    manifold: Manifold
    value: ArrayFn = field(repr=False)
    differential: ArrayFn | None = field(default=None, repr=False)
    laplacian: ArrayFn | None = field(default=None, repr=False)
    #: inf f over the manifold, when known (used for potentials).
    lower_bound: float | None = None

    def __call__(self, x: ArrayLike) -> np.ndarray:
        return self.value(self.manifold.coords(x))

    def gradient(self, x: ArrayLike) -> FloatArray:
        """grad f = (df)♯."""
        if self.differential is None:
            raise ContractViolation(f"field {self.name} has no analytic differential")
        x_arr = self.manifold.coords(x)
        return self.manifold.raise_index(x_arr, self.differential(x_arr))

    def d(self) -> OneForm:
        """The exact form df; d*(df) = −Δf."""
        if self.differential is None or self.laplacian is None:
            raise ContractViolation(f"field {self.name} has no analytic derivatives")
        lap = self.laplacian
        return OneForm(
            name=f"d:{self.name}",
            manifold=self.manifold,
            covector=self.differential,
            codifferential=lambda x: -lap(x),
        )


# -- finite differences in the geodesic normal chart ---------------------


def codifferential_fd(alpha: OneForm, x: ArrayLike, h: float = DEFAULT_FD_STEP) -> FloatArray:
    """
    Central-difference d*α = −div α♯ at x.

    The stencil lives in geodesic normal coordinates centred at x, not in the
    manifold's own chart: there the volume weight √g is 1 + O(s²) and the
    geodesic velocity is the parallel frame vector, so

        div X(x) = Σᵢ d/ds α(γ̇ᵢ(s))|_{s=0},   γᵢ(s) = exp_x(s eᵢ),

    and no metric weight enters the difference quotient. The truncation error
    is O(h²).
    """
    if h <= 0:
        raise ContractViolation(f"step h must be > 0, got {h}")
    manifold = alpha.manifold
    x_arr = manifold.coords(x)
    frame = manifold.orthonormal_frame(x_arr)
    div = np.zeros(x_arr.shape[:-1])
    for i in range(manifold.dim):
        e = frame[..., i, :]
        p_plus, vel_plus = manifold.geodesic(x_arr, h * e, 1.0)
        p_minus, vel_minus = manifold.geodesic(x_arr, -h * e, 1.0)
        div += (alpha(p_plus, vel_plus / h) - alpha(p_minus, -vel_minus / h)) / (2.0 * h)
    return -div


def laplace_beltrami_fd(f: ScalarField, x: ArrayLike, h: float = DEFAULT_FD_STEP) -> FloatArray:
    """Central-difference Δf at x (sign convention Δ = −d*d, so Δ(x²) = 2 on ℝ¹)."""
    if h <= 0:
        raise ContractViolation(f"step h must be > 0, got {h}")
    manifold = f.manifold
    x_arr = manifold.coords(x)
    frame = manifold.orthonormal_frame(x_arr)
    center = f(x_arr)
    total = np.zeros(x_arr.shape[:-1], dtype=np.result_type(center, np.float64))
    for i in range(manifold.dim):
        e = frame[..., i, :]
        total += (f(manifold.exp_map(x_arr, h * e)) + f(manifold.exp_map(x_arr, -h * e)) - 2.0 * center) / (h * h)
    return total


# -- registries -----------------------------------------------------------

REGISTRY_KEY = re.compile(r"^\s*([a-z_0-9]+)\s*(?::\s*([^\s]*))?\s*$")


def registry_params(raw: str | None, defaults: tuple[float, ...]) -> tuple[float, ...]:
    """Comma-separated numeric key arguments, padded with defaults."""
    if not raw:
        return defaults
    values = tuple(float(p) for p in raw.split(","))
    return values + defaults[len(values):]


def _zeros(x: FloatArray) -> FloatArray:
    return np.zeros(x.shape[:-1])


def _covector(x: FloatArray, **components: np.ndarray) -> FloatArray:
    """Assemble covector components c0, c1, ... (missing ones are zero)."""
    out = np.zeros(x.shape)
    for name, comp in components.items():
        out[..., int(name[1:])] = comp
    return out


def _index(raw: str | None, manifold: Manifold) -> int:
    i = int(raw or 1) - 1
    if not 0 <= i < manifold.coord_dim:
        raise ContractViolation(f"coordinate index {i + 1} out of range for {manifold.key}")
    return i


def _euclidean_form(m: Euclidean, name: str, raw: str | None) -> OneForm | None:
    n = m.dim
    if name == "dx":
        i = _index(raw, m)
        return OneForm(f"dx:{i + 1}", m, lambda x: _covector(x, **{f"c{i}": 1.0}), _zeros)
    if name == "x_dx":
        return OneForm("x_dx", m, lambda x: _covector(x, c0=x[..., 0]), lambda x: -np.ones(x.shape[:-1]))
    if name == "radial":
        return OneForm("radial", m, lambda x: x.copy(), lambda x: -float(n) * np.ones(x.shape[:-1]))
    if name == "sin_dx":
        return OneForm("sin_dx", m, lambda x: _covector(x, c0=np.sin(x[..., 0])), lambda x: -np.cos(x[..., 0]))
    if n < 2:
        return None
    if name == "x_dy":
        return OneForm("x_dy", m, lambda x: _covector(x, c1=x[..., 0]), _zeros)
    if name == "rot":
        return OneForm("rot", m, lambda x: _covector(x, c0=-x[..., 1], c1=x[..., 0]), _zeros)
    if name == "smooth":
        # (sin x₂ + x₁) dx₁ + x₂ cos x₁ dx₂
        return OneForm(
            "smooth",
            m,
            lambda x: _covector(x, c0=np.sin(x[..., 1]) + x[..., 0], c1=x[..., 1] * np.cos(x[..., 0])),
            lambda x: -(1.0 + np.cos(x[..., 0])),
        )
    return None


def _torus_form(m: Torus, name: str, raw: str | None) -> OneForm | None:
    w = 2.0 * np.pi / m.periods
    if name == "a_dtheta":
        (a,) = registry_params(raw, (1.0,))
        return OneForm(f"a_dtheta:{a!r}", m, lambda x: _covector(x, c0=a * np.ones(x.shape[:-1])), _zeros)
    if name == "a_cos":
        a, b = registry_params(raw, (0.5, 0.3))
        return OneForm(
            f"a_cos:{a!r},{b!r}",
            m,
            lambda x: _covector(x, c0=a + b * np.cos(w[0] * x[..., 0])),
            lambda x: b * w[0] * np.sin(w[0] * x[..., 0]),
        )
    if name == "cos_dtheta":
        return OneForm(
            "cos_dtheta",
            m,
            lambda x: _covector(x, c0=np.cos(w[0] * x[..., 0])),
            lambda x: w[0] * np.sin(w[0] * x[..., 0]),
        )
    if name == "sin_dtheta2" and m.dim >= 2:
        return OneForm("sin_dtheta2", m, lambda x: _covector(x, c1=np.sin(w[0] * x[..., 0])), _zeros)
    return None


def _sphere_form(m: Sphere2, name: str, raw: str | None) -> OneForm | None:
    r = m.radius
    if name == "rot":
        def cov(x: FloatArray) -> FloatArray:
            p = r * x
            return _covector(x, c0=-p[..., 1], c1=p[..., 0])
        return OneForm("rot", m, cov, _zeros)
    if name == "dz":
        return OneForm(
            "dz", m, lambda x: _covector(x, c2=np.ones(x.shape[:-1])), lambda x: 2.0 * x[..., 2] / r
        )
    if name == "x_dz":
        return OneForm(
            "x_dz", m, lambda x: _covector(x, c2=r * x[..., 0]), lambda x: 3.0 * x[..., 0] * x[..., 2]
        )
    return None


def _hyperbolic_form(m: Hyperbolic2, name: str, raw: str | None) -> OneForm | None:
    if name == "dx":
        return OneForm("dx", m, lambda x: _covector(x, c0=1.0), _zeros)
    if name == "x_dx":
        return OneForm("x_dx", m, lambda x: _covector(x, c0=x[..., 0]), lambda x: -x[..., 1] ** 2)
    if name == "dy_over_y":
        return OneForm("dy_over_y", m, lambda x: _covector(x, c1=1.0 / x[..., 1]), lambda x: np.ones(x.shape[:-1]))
    if name == "x_dy":
        return OneForm("x_dy", m, lambda x: _covector(x, c1=x[..., 0]), _zeros)
    return None


FORM_NAMES: dict[type, tuple[str, ...]] = {
    Euclidean: ("zero", "dx", "x_dx", "radial", "sin_dx", "x_dy", "rot", "smooth"),
    Torus: ("zero", "a_dtheta", "a_cos", "cos_dtheta", "sin_dtheta2"),
    Sphere2: ("zero", "rot", "dz", "x_dz"),
    Hyperbolic2: ("zero", "dx", "x_dx", "dy_over_y", "x_dy"),
}

_FORM_BUILDERS = {
    Euclidean: _euclidean_form,
    Torus: _torus_form,
    Sphere2: _sphere_form,
    Hyperbolic2: _hyperbolic_form,
}


def get_form(manifold: Manifold, key: str) -> OneForm:
    """
    Resolve a form key on a manifold: "zero", "x_dy", "a_dtheta:0.3", or
    "d:<field key>" for the exact form of a registered scalar field.
    """
    valid = [*FORM_NAMES[type(manifold)], "d:<field>"]
    if key and key.strip().startswith("d:"):
        return get_field(manifold, key.strip()[2:]).d()
    m = REGISTRY_KEY.match(key or "")
    if not m:
        raise RegistryError("form", key, valid)
    name, raw = m.group(1), m.group(2)
    if name == "zero":
        return OneForm("zero", manifold, lambda x: np.zeros(x.shape), _zeros)
    try:
        form = _FORM_BUILDERS[type(manifold)](manifold, name, raw)
    except (ValueError, ContractViolation) as e:
        raise RegistryError("form", key, valid) from e
    if form is None:
        raise RegistryError("form", key, valid)
    return form


def _euclidean_field(m: Euclidean, name: str, raw: str | None) -> ScalarField | None:
    n = m.dim
    if name == "coord":
        i = _index(raw, m)
        return ScalarField(f"coord:{i + 1}", m, lambda x: x[..., i].copy(),
                           lambda x: _covector(x, **{f"c{i}": 1.0}), _zeros)
    if name == "square":
        return ScalarField("square", m, lambda x: x[..., 0] ** 2,
                           lambda x: _covector(x, c0=2.0 * x[..., 0]), lambda x: 2.0 * np.ones(x.shape[:-1]))
    if name == "norm2":
        return ScalarField("norm2", m, lambda x: np.sum(x * x, axis=-1), lambda x: 2.0 * x,
                           lambda x: 2.0 * n * np.ones(x.shape[:-1]), lower_bound=0.0)
    if name == "sin":
        return ScalarField("sin", m, lambda x: np.sin(x[..., 0]),
                           lambda x: _covector(x, c0=np.cos(x[..., 0])), lambda x: -np.sin(x[..., 0]),
                           lower_bound=-1.0)
    if name == "sin_cos" and n >= 2:
        return ScalarField(
            "sin_cos",
            m,
            lambda x: np.sin(x[..., 0]) * np.cos(x[..., 1]),
            lambda x: _covector(x, c0=np.cos(x[..., 0]) * np.cos(x[..., 1]),
                                c1=-np.sin(x[..., 0]) * np.sin(x[..., 1])),
            lambda x: -2.0 * np.sin(x[..., 0]) * np.cos(x[..., 1]),
            lower_bound=-1.0,
        )
    return None


def _torus_field(m: Torus, name: str, raw: str | None) -> ScalarField | None:
    w = 2.0 * np.pi / m.periods
    if name in ("cos", "sin"):
        i = _index(raw, m)
        wi = w[i]
        if name == "cos":
            return ScalarField(f"cos:{i + 1}", m, lambda x: np.cos(wi * x[..., i]),
                               lambda x: _covector(x, **{f"c{i}": -wi * np.sin(wi * x[..., i])}),
                               lambda x: -wi * wi * np.cos(wi * x[..., i]), lower_bound=-1.0)
        return ScalarField(f"sin:{i + 1}", m, lambda x: np.sin(wi * x[..., i]),
                           lambda x: _covector(x, **{f"c{i}": wi * np.cos(wi * x[..., i])}),
                           lambda x: -wi * wi * np.sin(wi * x[..., i]), lower_bound=-1.0)
    if name == "exp_i":
        (mode,) = registry_params(raw, (1.0,))
        k = mode * w[0]
        # complex test function e^{i m θ}; derivatives are complex, so only the value is exposed
        return ScalarField(f"exp_i:{mode!r}", m, lambda x: np.exp(1j * k * x[..., 0]))
    return None


def _sphere_field(m: Sphere2, name: str, raw: str | None) -> ScalarField | None:
    r = m.radius
    if name == "coord":
        i = _index(raw, m)
        return ScalarField(f"coord:{i + 1}", m, lambda x: r * x[..., i],
                           lambda x: _covector(x, **{f"c{i}": 1.0}),
                           lambda x: -2.0 * x[..., i] / r, lower_bound=-r)
    if name == "cos_polar":
        return ScalarField("cos_polar", m, lambda x: x[..., 2].copy(),
                           lambda x: _covector(x, c2=1.0 / r),
                           lambda x: -2.0 * x[..., 2] / (r * r), lower_bound=-1.0)
    if name == "xz":
        return ScalarField("xz", m, lambda x: r * r * x[..., 0] * x[..., 2],
                           lambda x: _covector(x, c0=r * x[..., 2], c2=r * x[..., 0]),
                           lambda x: -6.0 * x[..., 0] * x[..., 2], lower_bound=-r * r / 2.0)
    return None


def _hyperbolic_field(m: Hyperbolic2, name: str, raw: str | None) -> ScalarField | None:
    if name == "coord":
        i = _index(raw, m)
        return ScalarField(f"coord:{i + 1}", m, lambda x: x[..., i].copy(),
                           lambda x: _covector(x, **{f"c{i}": 1.0}), _zeros)
    if name == "log_y":
        return ScalarField("log_y", m, lambda x: np.log(x[..., 1]),
                           lambda x: _covector(x, c1=1.0 / x[..., 1]), lambda x: -np.ones(x.shape[:-1]))
    if name == "x2":
        return ScalarField("x2", m, lambda x: x[..., 0] ** 2,
                           lambda x: _covector(x, c0=2.0 * x[..., 0]), lambda x: 2.0 * x[..., 1] ** 2,
                           lower_bound=0.0)
    return None


FIELD_NAMES: dict[type, tuple[str, ...]] = {
    Euclidean: ("const", "coord", "square", "norm2", "sin", "sin_cos"),
    Torus: ("const", "cos", "sin", "exp_i"),
    Sphere2: ("const", "coord", "cos_polar", "xz"),
    Hyperbolic2: ("const", "coord", "log_y", "x2"),
}

_FIELD_BUILDERS = {
    Euclidean: _euclidean_field,
    Torus: _torus_field,
    Sphere2: _sphere_field,
    Hyperbolic2: _hyperbolic_field,
}


def get_field(manifold: Manifold, key: str) -> ScalarField:
    """Resolve a scalar-field key on a manifold: "const:2", "square", "cos:1", ..."""
    valid = FIELD_NAMES[type(manifold)]
    m = REGISTRY_KEY.match(key or "")
    if not m:
        raise RegistryError("field", key, valid)
    name, raw = m.group(1), m.group(2)
    try:
        if name == "const":
            (c,) = registry_params(raw, (0.0,))
            return ScalarField(f"const:{c!r}", manifold, lambda x: np.full(x.shape[:-1], c),
                               lambda x: np.zeros(x.shape), _zeros, lower_bound=c)
        fld = _FIELD_BUILDERS[type(manifold)](manifold, name, raw)
    except (ValueError, ContractViolation) as e:
        raise RegistryError("field", key, valid) from e
    if fld is None:
        raise RegistryError("field", key, valid)
    return fld
