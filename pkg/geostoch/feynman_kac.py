"""
Monte Carlo Feynman-Kac-Itô estimates of (e^{−tH}f)(x), H = (d + iα)*(d + iα) + V,
with a Fourier-basis oracle and a grid oracle on the circle.
"""

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from geostoch.errors import ContractViolation
from geostoch.fields import OneForm, ScalarField
from geostoch.integrals import LEBESGUE, phase_approximant, time_integral_along_path
from geostoch.manifolds import Manifold, Torus
from geostoch.manifolds.base import FloatArray
from geostoch.measures import IntervalMeasure
from geostoch.paths import DyadicPath, PathEnsemble
from geostoch.semigroup import Grid1D, build_magnetic_h, heat_kernel

logger = logging.getLogger(__name__)

TestFunction = Callable[[FloatArray], np.ndarray]

MIN_MODES = 16
DEFAULT_MODES = 32


@dataclass(frozen=True)
class FkiEstimate:
    """Monte Carlo value of (e^{−tH}f)(x) with componentwise standard errors."""

    value: complex
    stderr_re: float
    stderr_im: float
    n_paths: int
    k: int
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def stderr(self) -> float:
        """max of the real and imaginary standard errors."""
        return max(self.stderr_re, self.stderr_im)

    def deviation(self, reference: complex) -> float:
        return abs(self.value - reference)


def fki_integrand(
    alpha: OneForm,
    potential: ScalarField | None,
    f: TestFunction,
    path: DyadicPath,
    measure: IntervalMeasure = LEBESGUE,
) -> np.ndarray:
    """exp(i·S_{P,t,k}(α) − Σ (t/2^k) V(c_j))·f(c(t)) per path."""
    weight = np.asarray(phase_approximant(measure, alpha, path))
    if potential is not None:
        weight = weight * np.exp(-np.asarray(time_integral_along_path(potential, path)))
    return np.atleast_1d(weight * np.asarray(f(path.end)))


def fki_mc(
    manifold: Manifold,
    alpha: OneForm,
    potential: ScalarField | None,
    f: TestFunction,
    x: ArrayLike,
    t: float,
    n_paths: int,
    k: int,
    seed: int,
    chunk_size: int = 500,
    measure: IntervalMeasure = LEBESGUE,
    workers: int | None = None,
) -> FkiEstimate:
    """
    Mean over N Brownian paths from x of exp(i·A_{Leb,t,k}(α) − ∫₀ᵗ V(c(s))ds)·f(c(t)).

    Requires inf V > −∞; fields without a known lower bound are rejected.
    """
    if t <= 0:
        raise ContractViolation(f"t must be > 0, got {t}")
    if alpha.manifold != manifold:
        raise ContractViolation(f"form lives on {alpha.manifold.key}, not {manifold.key}")
    if potential is not None and potential.lower_bound is None:
        raise ContractViolation(f"potential {potential.name} has no known lower bound")
    ensemble = PathEnsemble(manifold, manifold.coords(x), float(t), k, n_paths, seed, chunk_size)
    values = ensemble.collect(lambda batch: fki_integrand(alpha, potential, f, batch, measure), workers)
    n = values.size
    se_re = float(np.std(values.real, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    se_im = float(np.std(values.imag, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    estimate = FkiEstimate(
        complex(np.mean(values)),
        se_re,
        se_im,
        n,
        k,
        {
            "alpha": alpha.name,
            "potential": potential.name if potential is not None else "none",
            "x": np.asarray(x, dtype=np.float64).tolist(),
            "t": float(t),
            "seed": seed,
        },
    )
    logger.debug("fki %s k=%d N=%d: %s ± %.2e", alpha.name, k, n, estimate.value, estimate.stderr)
    return estimate


def fki_bias(estimate: FkiEstimate, refined: FkiEstimate) -> float:
    """Empirical discretization bias |est_k − est_{k+2}| on the same seed."""
    return abs(estimate.value - refined.value)


# -- oracles ------------------------------------------------------------------


def fki_spectral_circle(
    a: float,
    v_coeffs: Mapping[int, complex],
    f_coeffs: Mapping[int, complex],
    x: float,
    t: float,
    n_modes: int = DEFAULT_MODES,
    period: float = 2.0 * np.pi,
) -> complex:
    """
    (e^{−tH}f)(x) on the circle for α = a dθ, in the Fourier basis e^{inωθ}, |n| ≤ n_modes.

    H_{nm} = (nω + a)² δ_{nm} + V̂_{n−m}; V̂_{−j} must equal conj(V̂_j).
    """
    if n_modes < MIN_MODES:
        raise ContractViolation(f"n_modes must be >= {MIN_MODES}, got {n_modes}")
    if t < 0:
        raise ContractViolation(f"t must be >= 0, got {t}")
    omega = 2.0 * np.pi / period
    modes = np.arange(-n_modes, n_modes + 1)
    size = modes.size
    H = np.diag(((modes * omega + a) ** 2).astype(np.complex128))
    for j, c in v_coeffs.items():
        if abs(j) >= size:
            continue
        H += c * np.eye(size, k=-j, dtype=np.complex128)
    if np.max(np.abs(H - H.conj().T)) > 1e-12:
        raise ContractViolation("potential coefficients do not describe a real potential")
    g = np.zeros(size, dtype=np.complex128)
    for n, c in f_coeffs.items():
        if abs(n) > n_modes:
            raise ContractViolation(f"test function mode {n} exceeds n_modes={n_modes}")
        g[n + n_modes] = c
    lam, Q = np.linalg.eigh(H)
    evolved = Q @ (np.exp(-t * lam) * (Q.conj().T @ g))
    return complex(np.sum(evolved * np.exp(1j * modes * omega * x)))


def fki_grid_circle(
    alpha: OneForm,
    potential: ScalarField | None,
    f: TestFunction,
    x: float,
    t: float,
    n: int,
) -> complex:
    """(e^{−tH}f)(x) from the grid magnetic Laplacian on n nodes; x must be a node."""
    manifold = alpha.manifold
    if not isinstance(manifold, Torus) or manifold.dim != 1:
        raise ContractViolation(f"grid oracle needs a circle, got {manifold.key}")
    grid = Grid1D("circle", float(manifold.periods[0]), n)
    j = x / grid.dx
    if abs(j - round(j)) > 1e-9:
        raise ContractViolation(f"x = {x} is not a node of {grid}")
    pts = grid.points()
    alpha_values = alpha.covector(pts)[..., 0]
    v_values = potential(pts) if potential is not None else None
    H = build_magnetic_h(grid, alpha_values, v_values)
    u = heat_kernel(H, t, grid, tag="fki").apply(np.asarray(f(pts), dtype=np.complex128))
    return complex(u[int(round(j)) % n])


def fki_grid_richardson(
    alpha: OneForm,
    potential: ScalarField | None,
    f: TestFunction,
    x: float,
    t: float,
    n: int = 256,
) -> complex:
    """Second-order Richardson extrapolation of fki_grid_circle from n and 2n nodes."""
    coarse = fki_grid_circle(alpha, potential, f, x, t, n)
    fine = fki_grid_circle(alpha, potential, f, x, t, 2 * n)
    return (4.0 * fine - coarse) / 3.0


def fourier_coefficients(fld: ScalarField) -> dict[int, complex] | None:
    """Fourier coefficients of the registered circle fields const, cos:1, sin:1 and exp_i:m, else None."""
    name = fld.name
    if name.startswith("const:"):
        return {0: complex(float(name.split(":", 1)[1]))}
    if name == "cos:1":
        return {1: 0.5, -1: 0.5}
    if name == "sin:1":
        return {1: -0.5j, -1: 0.5j}
    if name.startswith("exp_i:"):
        mode = float(name.split(":", 1)[1])
        if mode.is_integer():
            return {int(mode): 1.0}
    return None
