"""Tests for interval measures, their text syntax, and the geodesic P-average."""

import numpy as np
import pytest

from geostoch.errors import ContractViolation, RegistryError
from geostoch.fields import get_form
from geostoch.manifolds import Euclidean, Sphere2, Torus
from geostoch.measures import (
    IntervalMeasure,
    classify_theta,
    first_moment,
    i_p,
    i_p_masked,
    measure_key,
    moments,
    parse_measure,
    skew,
)


@pytest.mark.parametrize(
    "text,m1",
    [
        ("ito", 0.0),
        ("midpoint", 0.5),
        ("strat", 0.5),
        ("lebesgue", 0.5),
        ("dirac:1", 1.0),
        ("dirac:0.25", 0.25),
        ("endpoints", 0.5),
        ("mix:0.5@0.25+0.5@leb", 0.375),
        ("mix:0.75@1+0.25@0", 0.75),
    ],
)
def test_first_moment(text: str, m1: float) -> None:
    P = parse_measure(text)
    assert first_moment(P) == pytest.approx(m1)
    assert skew(P) == pytest.approx(2.0 * m1 - 1.0)
    assert classify_theta(P) == pytest.approx(1.0 - 2.0 * m1)


def test_moments_summary() -> None:
    s = moments(parse_measure("ito"))
    assert s.m1 == 0.0
    assert s.skew == -1.0


def test_parse_is_case_insensitive() -> None:
    assert parse_measure(" Lebesgue:8 ") == IntervalMeasure(lebesgue_weight=1.0, quadrature_order=8)


def test_lebesgue_order_from_argument() -> None:
    assert parse_measure("lebesgue", quadrature_order=32).quadrature_order == 32
    assert parse_measure("lebesgue:4", quadrature_order=32).quadrature_order == 4


@pytest.mark.parametrize(
    "text",
    ["dirac:1.5", "dirac:-0.1", "mix:0.5@0+0.4@1", "mix:0.5@0", "mix:1@x", "gauss", "", "lebesgue:1"],
)
def test_parse_rejects(text: str) -> None:
    with pytest.raises(RegistryError) as exc:
        parse_measure(text)
    assert exc.value.kind == "measure"


def test_mass_must_be_one() -> None:
    with pytest.raises(ContractViolation):
        IntervalMeasure(atoms=((0.5, 0.9),))
    with pytest.raises(ContractViolation):
        IntervalMeasure(atoms=((0.5, -0.5), (0.0, 1.5)))


def test_nodes_put_atoms_first() -> None:
    P = IntervalMeasure(((0.25, 0.5),), 0.5, 4)
    taus, weights = P.nodes()
    assert taus[0] == 0.25
    assert len(taus) == 5
    assert weights.sum() == pytest.approx(1.0)
    assert np.all((taus >= 0.0) & (taus <= 1.0))


def test_gauss_legendre_integrates_polynomials() -> None:
    taus, weights = IntervalMeasure(lebesgue_weight=1.0, quadrature_order=4).nodes()
    for p in range(8):
        assert float(np.sum(weights * taus**p)) == pytest.approx(1.0 / (p + 1))


@pytest.mark.parametrize("text", ["dirac:0.0", "lebesgue:16", "mix:0.5@0.0+0.5@1.0", "mix:0.5@0.25+0.5@leb"])
def test_measure_key_parses_back(text: str) -> None:
    P = parse_measure(text)
    assert parse_measure(measure_key(P)) == P


@pytest.mark.parametrize("text,tau", [("ito", 0.0), ("midpoint", 0.5), ("dirac:1", 1.0), ("strat", 0.5)])
def test_i_p_on_straight_line(text: str, tau: float) -> None:
    alpha = get_form(Euclidean(2), "x_dy")
    x = np.array([1.0, 2.0])
    y = np.array([3.0, 5.0])
    expected = (x[0] + tau * (y[0] - x[0])) * (y[1] - x[1])
    assert float(i_p(parse_measure(text), alpha, x, y)) == pytest.approx(expected)


def test_i_p_of_exact_form_is_increment() -> None:
    m = Sphere2()
    alpha = get_form(m, "d:xz")
    rng = np.random.default_rng(7)
    x = m.random_point(rng, 100)
    y = m.exp_map(x, m.random_tangent(rng, x, 0.2))
    f = lambda p: p[..., 0] * p[..., 2]  # noqa: E731
    np.testing.assert_allclose(i_p(parse_measure("lebesgue:32"), alpha, x, y), f(y) - f(x), atol=1e-12)


def test_i_p_is_zero_on_cut_locus() -> None:
    alpha = get_form(Torus(1), "a_dtheta:1")
    values, ok = i_p_masked(parse_measure("midpoint"), alpha, [[0.0], [0.0]], [[np.pi], [1.0]])
    np.testing.assert_array_equal(ok, [False, True])
    np.testing.assert_allclose(values, [0.0, 1.0])


def test_i_p_is_linear_in_the_form() -> None:
    m = Sphere2()
    rng = np.random.default_rng(8)
    alpha, beta = get_form(m, "x_dz"), get_form(m, "rot")
    x = m.random_point(rng, 200)
    y = m.exp_map(x, m.random_tangent(rng, x, 0.5))
    for text in ("ito", "lebesgue", "mix:0.3@0.2+0.7@leb"):
        P = parse_measure(text)
        a, b = rng.normal(size=2)
        np.testing.assert_allclose(
            i_p(P, alpha.combine(a, beta, b), x, y), a * i_p(P, alpha, x, y) + b * i_p(P, beta, x, y), atol=1e-12
        )


def test_skew_lies_in_unit_interval() -> None:
    rng = np.random.default_rng(9)
    for _ in range(500):
        n_atoms = int(rng.integers(1, 4))
        weights = rng.dirichlet(np.ones(n_atoms + 1))
        taus = rng.uniform(0.0, 1.0, size=n_atoms)
        P = IntervalMeasure(tuple(zip(taus.tolist(), weights[:-1].tolist())), float(weights[-1]))
        assert -1.0 < skew(P) <= 1.0
    assert skew(parse_measure("dirac:0")) == -1.0
    assert skew(parse_measure("dirac:1")) == 1.0
    assert skew(parse_measure("mix:0.999999@0+0.000001@leb")) > -1.0
