"""Borel probabilities on [0, 1] (atoms plus a Lebesgue part) and the geodesic P-average I_P(α)."""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray

from geostoch.errors import ContractViolation, RegistryError
from geostoch.fields import OneForm
from geostoch.manifolds.base import FloatArray

DEFAULT_QUADRATURE_ORDER = 16
MASS_TOL = 1e-12


class MomentSummary(NamedTuple):
    """First moment M₁(P) and skew ∫(2τ − 1) dP = 2M₁ − 1."""

    m1: float
    skew: float


@lru_cache(maxsize=32)
def _gauss_legendre01(order: int) -> tuple[FloatArray, FloatArray]:
    s, w = leggauss(order)
    return (s + 1.0) / 2.0, w / 2.0


@dataclass(frozen=True)
class IntervalMeasure:
    """
    P = Σ wᵢ δ_{τᵢ} + lebesgue_weight·Leb[0,1].

    The quadrature order of the Lebesgue part is part of the value, so results
    are reproducible bit-for-bit.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    lebesgue_weight: float = 0.0
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.quadrature_order < 2:
            raise ContractViolation(f"quadrature_order must be >= 2, got {self.quadrature_order}")
        if self.lebesgue_weight < 0:
            raise ContractViolation("lebesgue_weight must be >= 0")
        for tau, w in self.atoms:
            if not 0.0 <= tau <= 1.0:
                raise ContractViolation(f"atom location {tau} outside [0, 1]")
            if w <= 0:
                raise ContractViolation(f"atom weight must be > 0, got {w}")
        total = sum(w for _, w in self.atoms) + self.lebesgue_weight
        if abs(total - 1.0) > MASS_TOL:
            raise ContractViolation(f"total mass must be 1, got {total!r}")

    def __str__(self) -> str:
        return self.label or measure_key(self)

    def nodes(self) -> tuple[FloatArray, FloatArray]:
        """Evaluation points τ and weights: atoms first, then the Gauss-Legendre rule of the Lebesgue part."""
        taus = [tau for tau, _ in self.atoms]
        weights = [w for _, w in self.atoms]
        if self.lebesgue_weight > 0:
            s, w = _gauss_legendre01(self.quadrature_order)
            taus.extend(s.tolist())
            weights.extend((self.lebesgue_weight * w).tolist())
        return np.asarray(taus, dtype=np.float64), np.asarray(weights, dtype=np.float64)

    def with_order(self, order: int) -> "IntervalMeasure":
        return IntervalMeasure(self.atoms, self.lebesgue_weight, order, self.label)


def first_moment(P: IntervalMeasure) -> float:
    """M₁(P) = ∫ τ dP(τ)."""
    return sum(w * tau for tau, w in P.atoms) + 0.5 * P.lebesgue_weight


def skew(P: IntervalMeasure) -> float:
    """∫ (2τ − 1) dP(τ) = 2M₁(P) − 1."""
    return 2.0 * first_moment(P) - 1.0


def moments(P: IntervalMeasure) -> MomentSummary:
    return MomentSummary(m1=first_moment(P), skew=skew(P))


def classify_theta(P: IntervalMeasure) -> float:
    """θ in Int_P = Strat + θ∫d*α, i.e. θ = −skew(P) ∈ [−1, 1]."""
    return -skew(P)


def i_p_masked(
    P: IntervalMeasure, alpha: OneForm, x: ArrayLike, y: ArrayLike
) -> tuple[FloatArray, NDArray[np.bool_]]:
    """I_P(α)(x, y) together with the unique-geodesic mask (values are 0 where it fails)."""
    manifold = alpha.manifold
    v, ok = manifold.log_map_masked(x, y)
    x_arr = manifold.coords(x)
    taus, weights = P.nodes()
    total = np.zeros(np.broadcast_shapes(x_arr.shape, v.shape)[:-1])
    for tau, w in zip(taus, weights):
        point, velocity = manifold.geodesic(x_arr, v, tau)
        total += w * alpha(point, velocity)
    return np.where(ok, total, 0.0), ok


def i_p(P: IntervalMeasure, alpha: OneForm, x: ArrayLike, y: ArrayLike) -> FloatArray:
    """
    I_P(α)(x, y) = ∫ α_{γ(τ)}(γ̇(τ)) dP(τ) along the minimizing geodesic γ from x to y.

    Total: returns 0 when x and y are not joined by a unique minimizing geodesic.
    """
    values, _ = i_p_masked(P, alpha, x, y)
    return values


# -- text syntax ----------------------------------------------------------

DIRAC = re.compile(r"^dirac:\s*([0-9.eE+-]+)$")
LEBESGUE = re.compile(r"^(?:lebesgue|leb)(?::\s*(\d+))?$")
MIX_TERM = re.compile(r"^\s*([0-9.eE+-]+)\s*@\s*(leb|[0-9.eE+-]+)\s*$")

MEASURE_ALIASES = {
    "ito": "dirac:0.0",
    "strat": "lebesgue",
    "midpoint": "dirac:0.5",
    "endpoints": "mix:0.5@0+0.5@1",
}

MEASURE_SYNTAX = ("dirac:<tau>", "lebesgue[:<order>]", "mix:<w>@<tau|leb>+...", *MEASURE_ALIASES)


def parse_measure(text: str, quadrature_order: int = DEFAULT_QUADRATURE_ORDER) -> IntervalMeasure:
    """
    Parse the config syntax: "dirac:0.0", "lebesgue", "lebesgue:32",
    "mix:0.5@0+0.5@1", "mix:0.5@0.25+0.5@leb", or an alias ("ito", "strat", ...).
    """
    raw = (text or "").strip().lower()
    key = MEASURE_ALIASES.get(raw, raw)
    try:
        m = DIRAC.match(key)
        if m:
            return IntervalMeasure(atoms=((float(m.group(1)), 1.0),), quadrature_order=quadrature_order, label=raw)
        m = LEBESGUE.match(key)
        if m:
            order = int(m.group(1)) if m.group(1) else quadrature_order
            return IntervalMeasure(lebesgue_weight=1.0, quadrature_order=order, label=raw)
        if key.startswith("mix:"):
            atoms: list[tuple[float, float]] = []
            leb = 0.0
            for term in key[4:].split("+"):
                tm = MIX_TERM.match(term)
                if not tm:
                    raise ValueError(term)
                w = float(tm.group(1))
                if tm.group(2) == "leb":
                    leb += w
                else:
                    atoms.append((float(tm.group(2)), w))
            return IntervalMeasure(tuple(atoms), leb, quadrature_order, label=raw)
    except (ValueError, ContractViolation) as e:
        raise RegistryError("measure", text, MEASURE_SYNTAX) from e
    raise RegistryError("measure", text, MEASURE_SYNTAX)


def measure_key(P: IntervalMeasure) -> str:
    """Canonical text form of a measure (inverse of parse_measure up to aliases)."""
    if not P.atoms:
        return f"lebesgue:{P.quadrature_order}"
    if len(P.atoms) == 1 and P.lebesgue_weight == 0:
        return f"dirac:{P.atoms[0][0]!r}"
    terms = [f"{w!r}@{tau!r}" for tau, w in P.atoms]
    if P.lebesgue_weight > 0:
        terms.append(f"{P.lebesgue_weight!r}@leb")
    return "mix:" + "+".join(terms)
