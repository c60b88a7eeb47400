"""Tests for the Monte Carlo Feynman-Kac-Itô estimator and its oracles on the circle."""

import numpy as np
import pytest

from geostoch.errors import ContractViolation
from geostoch.feynman_kac import (
    FkiEstimate,
    fki_bias,
    fki_grid_circle,
    fki_grid_richardson,
    fki_mc,
    fki_spectral_circle,
    fourier_coefficients,
)
from geostoch.fields import get_field, get_form
from geostoch.manifolds import Euclidean, Torus

CIRCLE = Torus(1)


@pytest.mark.parametrize("a,t,x", [(0.0, 0.5, 0.0), (0.3, 0.5, 0.0), (-0.7, 1.0, 1.25)])
def test_spectral_free_mode(a: float, t: float, x: float) -> None:
    value = fki_spectral_circle(a, {}, {1: 1.0}, x, t)
    assert value == pytest.approx(np.exp(-((1.0 + a) ** 2) * t) * np.exp(1j * x), abs=1e-12)


def test_spectral_constant_potential_scales() -> None:
    base = fki_spectral_circle(0.3, {}, {1: 1.0, -2: 0.5j}, 0.4, 0.5)
    shifted = fki_spectral_circle(0.3, {0: 2.0}, {1: 1.0, -2: 0.5j}, 0.4, 0.5)
    assert shifted == pytest.approx(np.exp(-1.0) * base, abs=1e-12)


def test_spectral_rejects() -> None:
    with pytest.raises(ContractViolation):
        fki_spectral_circle(0.3, {}, {1: 1.0}, 0.0, 0.5, n_modes=8)
    with pytest.raises(ContractViolation):
        fki_spectral_circle(0.3, {1: 1.0}, {1: 1.0}, 0.0, 0.5)
    with pytest.raises(ContractViolation):
        fki_spectral_circle(0.3, {}, {40: 1.0}, 0.0, 0.5)


@pytest.mark.parametrize("potential", [None, "cos:1"])
def test_grid_richardson_matches_spectral(potential: str | None) -> None:
    alpha = get_form(CIRCLE, "a_dtheta:0.3")
    v = get_field(CIRCLE, potential) if potential else None
    f = get_field(CIRCLE, "exp_i:1")
    grid = fki_grid_richardson(alpha, v, f, 0.0, 0.5, n=128)
    spectral = fki_spectral_circle(0.3, fourier_coefficients(v) if v else {}, {1: 1.0}, 0.0, 0.5)
    assert abs(grid - spectral) < 1e-6


def test_grid_oracle_rejects() -> None:
    f = get_field(CIRCLE, "exp_i:1")
    with pytest.raises(ContractViolation):
        fki_grid_circle(get_form(CIRCLE, "a_dtheta:0.3"), None, f, 0.1, 0.5, 64)
    with pytest.raises(ContractViolation):
        fki_grid_circle(get_form(Euclidean(1), "x_dx"), None, f, 0.0, 0.5, 64)


def test_mc_matches_closed_form() -> None:
    alpha = get_form(CIRCLE, "a_dtheta:0.3")
    est = fki_mc(CIRCLE, alpha, None, get_field(CIRCLE, "exp_i:1"), [0.0], 0.5, 4000, 6, seed=0, chunk_size=1000)
    exact = np.exp(-(1.3**2) * 0.5)
    assert est.n_paths == 4000
    assert est.k == 6
    assert est.deviation(exact) < 5.0 * est.stderr + 1e-3
    assert est.params["potential"] == "none"


def test_mc_is_gauge_covariant() -> None:
    # α = dφ with φ = cos: the MC phase is e^{i(φ(c(t)) − φ(x))}
    alpha = get_form(CIRCLE, "d:cos:1")
    one = get_field(CIRCLE, "const:1")
    x = 2.0 * np.pi * 8 / 128
    est = fki_mc(CIRCLE, alpha, None, one, [x], 0.5, 4000, 5, seed=1)
    oracle = fki_grid_richardson(alpha, None, one, x, 0.5, n=128)
    assert est.deviation(oracle) < 5.0 * est.stderr + 1e-3


def test_mc_with_potential_matches_spectral() -> None:
    alpha = get_form(CIRCLE, "a_dtheta:0.3")
    v = get_field(CIRCLE, "cos:1")
    est = fki_mc(CIRCLE, alpha, v, get_field(CIRCLE, "exp_i:1"), [0.0], 0.5, 4000, 8, seed=2)
    spectral = fki_spectral_circle(0.3, fourier_coefficients(v), {1: 1.0}, 0.0, 0.5)
    # the left-point potential sum adds an O(2^{-k}) bias
    assert est.deviation(spectral) < 5.0 * est.stderr + 0.01


def test_mc_is_deterministic() -> None:
    alpha = get_form(CIRCLE, "a_cos:0.5,0.3")
    f = get_field(CIRCLE, "exp_i:1")
    a = fki_mc(CIRCLE, alpha, None, f, [0.0], 0.5, 300, 5, seed=9, chunk_size=50, workers=4)
    b = fki_mc(CIRCLE, alpha, None, f, [0.0], 0.5, 300, 5, seed=9, chunk_size=300, workers=1)
    assert a.value == b.value
    assert fki_bias(a, b) == 0.0


def test_mc_rejects() -> None:
    alpha = get_form(CIRCLE, "a_dtheta:0.3")
    f = get_field(CIRCLE, "exp_i:1")
    with pytest.raises(ContractViolation):
        fki_mc(CIRCLE, alpha, None, f, [0.0], 0.0, 10, 3, seed=0)
    with pytest.raises(ContractViolation):
        fki_mc(CIRCLE, alpha, get_field(CIRCLE, "exp_i:2"), f, [0.0], 0.5, 10, 3, seed=0)
    with pytest.raises(ContractViolation):
        fki_mc(Torus(2), alpha, None, f, [0.0, 0.0], 0.5, 10, 3, seed=0)


def test_estimate_stderr_and_bias() -> None:
    a = FkiEstimate(0.5 + 0.1j, 0.01, 0.02, 100, 4)
    b = FkiEstimate(0.5 + 0.1j + 0.03, 0.01, 0.01, 100, 6)
    assert a.stderr == 0.02
    assert fki_bias(a, b) == pytest.approx(0.03)
    assert a.deviation(0.5) == pytest.approx(0.1)


@pytest.mark.parametrize(
    "key,expected",
    [("const:2", {0: 2.0}), ("cos:1", {1: 0.5, -1: 0.5}), ("sin:1", {1: -0.5j, -1: 0.5j}), ("exp_i:3", {3: 1.0})],
)
def test_fourier_coefficients(key: str, expected: dict[int, complex]) -> None:
    assert fourier_coefficients(get_field(CIRCLE, key)) == expected


def test_fourier_coefficients_unknown() -> None:
    assert fourier_coefficients(get_field(CIRCLE, "exp_i:0.5")) is None
    assert fourier_coefficients(get_field(Torus(2), "cos:2")) is None
