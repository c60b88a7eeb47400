"""Tests for the dyadic approximants and the convergence diagnostics built on them."""

import numpy as np
import pytest

from geostoch.curves import get_curve
from geostoch.errors import ContractViolation
from geostoch.fields import get_field, get_form
from geostoch.integrals import (
    ConvergenceReport,
    approx_A,
    approx_A_masked,
    approx_S,
    chi_product,
    classical_rate,
    conversion_gap,
    convert,
    estimate_in_measure,
    fit_slope,
    gaussian_levy_oracle,
    ito_lemma_check,
    levy_distance_estimate,
    line_integral,
    phase_approximant,
    sample_integral,
    strat_exactness,
    t_continuity_diagnostic,
    t_continuity_samples,
    time_integral_along_path,
)
from geostoch.manifolds import Euclidean, Sphere2, Torus, get_manifold
from geostoch.measures import parse_measure
from geostoch.paths import DyadicPath, PathEnsemble, sample_batch, sample_bm

ITO = parse_measure("ito")
LEB = parse_measure("lebesgue")
MID = parse_measure("midpoint")


def test_approx_A_of_x_dx_on_a_two_point_path() -> None:
    path = sample_bm(Euclidean(1), [1.0], 1.0, 0, seed=0, path_index=0)
    a, b = float(path.start[0]), float(path.end[0])
    alpha = get_form(Euclidean(1), "x_dx")
    assert float(approx_A(ITO, alpha, path)) == pytest.approx(a * (b - a))
    assert float(approx_A(LEB, alpha, path)) == pytest.approx((b * b - a * a) / 2.0)


def test_midpoint_is_exact_for_quadratic_potential() -> None:
    m = Euclidean(2)
    batch = sample_batch(m, [0.3, -0.2], 1.0, 6, seed=1, indices=range(20))
    f = get_field(m, "norm2")
    np.testing.assert_allclose(approx_A(MID, f.d(), batch), f(batch.end) - f(batch.start), atol=1e-12)


def test_approx_S_matches_A_for_symmetric_measures() -> None:
    batch = sample_batch(Euclidean(1), [0.0], 1.0, 5, seed=2, indices=range(5))
    alpha = get_form(Euclidean(1), "sin_dx")
    np.testing.assert_array_equal(approx_S(LEB, alpha, batch), approx_A(LEB, alpha, batch))
    # skew(δ₀) = −1 and d*(x dx) = −1, so S adds t.
    beta = get_form(Euclidean(1), "x_dx")
    np.testing.assert_allclose(approx_S(ITO, beta, batch), np.asarray(approx_A(ITO, beta, batch)) + 1.0)


def test_single_path_returns_scalars() -> None:
    path = sample_bm(Euclidean(2), [0.0, 0.0], 1.0, 4, seed=0, path_index=3)
    alpha = get_form(Euclidean(2), "x_dy")
    assert isinstance(approx_A(ITO, alpha, path), float)
    assert abs(abs(phase_approximant(ITO, alpha, path)) - 1.0) < 1e-12
    sample = sample_integral(LEB, alpha, path)
    assert sample.k == 4
    assert sample.path_index == 3
    assert sample.form == "x_dy"


def test_form_and_path_must_share_manifold() -> None:
    path = sample_bm(Euclidean(2), [0.0, 0.0], 1.0, 2, seed=0, path_index=0)
    with pytest.raises(ContractViolation):
        approx_A(ITO, get_form(Euclidean(1), "x_dx"), path)


@pytest.mark.parametrize("measure", ["ito", "lebesgue", "dirac:0.3", "mix:0.5@0.25+0.5@leb"])
def test_approx_A_is_linear_in_the_form(measure: str) -> None:
    rng = np.random.default_rng(21)
    P = parse_measure(measure)
    for m, names in [(Euclidean(2), ("smooth", "rot")), (Sphere2(), ("x_dz", "rot"))]:
        alpha, beta = (get_form(m, name) for name in names)
        x0 = m.random_point(rng, 1)[0]
        batch = sample_batch(m, x0, 1.0, 6, seed=int(rng.integers(1000)), indices=range(20))
        a, b = rng.normal(size=2)
        combined = approx_A(P, alpha.combine(a, beta, b), batch)
        np.testing.assert_allclose(
            combined, a * np.asarray(approx_A(P, alpha, batch)) + b * np.asarray(approx_A(P, beta, batch)), atol=1e-10
        )


@pytest.mark.parametrize(
    "left,right",
    [
        ("midpoint", "endpoints"),
        ("lebesgue", "mix:0.5@0.25+0.5@0.75"),
        ("dirac:0.3", "mix:0.6@0+0.4@0.75"),
        ("dirac:0.75", "mix:0.5@1+0.5@leb"),
    ],
)
def test_equal_first_moment_gives_equal_A_for_affine_forms(left: str, right: str) -> None:
    # along a straight segment an affine form is affine in τ, so only ∫τ dP matters
    rng = np.random.default_rng(22)
    m = Euclidean(2)
    c = rng.normal(size=4)
    alpha = (
        get_form(m, "x_dy")
        .combine(c[0], get_form(m, "rot"), c[1])
        .combine(1.0, get_form(m, "radial"), c[2])
        .combine(1.0, get_form(m, "dx"), c[3])
    )
    batch = sample_batch(m, rng.normal(size=2), 1.0, 7, seed=int(rng.integers(1000)), indices=range(30))
    np.testing.assert_allclose(
        approx_A(parse_measure(left), alpha, batch), approx_A(parse_measure(right), alpha, batch), rtol=0, atol=1e-12
    )


def test_convert_adds_codifferential_integral() -> None:
    path = sample_bm(Euclidean(1), [0.0], 2.0, 3, seed=0, path_index=0)
    alpha = get_form(Euclidean(1), "x_dx")
    assert float(time_integral_along_path(alpha.codifferential, path)) == pytest.approx(-2.0)
    # 2(M₁(δ₀) − M₁(Leb))·(−t) = t
    assert float(convert(1.0, ITO, LEB, alpha, path)) == pytest.approx(3.0)
    assert convert(1.0, MID, LEB, alpha, path) == 1.0


def test_line_integral_of_x_dy_is_enclosed_area() -> None:
    alpha = get_form(Euclidean(2), "x_dy")
    assert line_integral(alpha, get_curve(Euclidean(2), "circle")) == pytest.approx(np.pi, abs=1e-12)
    assert line_integral(alpha, get_curve(Euclidean(2), "ellipse:2,1")) == pytest.approx(2.0 * np.pi, abs=1e-12)


def test_classical_rate_on_circle() -> None:
    report = classical_rate(LEB, get_form(Euclidean(2), "x_dy"), get_curve(Euclidean(2), "circle"), range(4, 11))
    assert report.median_at(10) < 1e-3
    assert report.slope is not None
    assert report.slope < -1.5
    assert report.cutlocus_fraction == 0.0
    assert [row["k"] for row in report.rows()] == list(range(4, 11))


def test_classical_rate_on_sphere_latitude() -> None:
    m = Sphere2()
    report = classical_rate(MID, get_form(m, "rot"), get_curve(m, "latitude"), range(5, 11))
    assert report.median_at(10) < 1e-3
    assert report.slope is not None and report.slope < -0.65


def test_fit_slope() -> None:
    ks = [4, 5, 6, 7]
    assert fit_slope(ks, [2.0 ** (-2 * k) for k in ks]) == pytest.approx(-2.0)
    assert fit_slope(ks, [1e-15, 1e-15, 1e-3, 1e-16]) is None


def test_report_levels_must_increase() -> None:
    with pytest.raises(ContractViolation):
        ConvergenceReport((3, 3), (0.0, 0.0), (0.0, 0.0), (0, 0), (8, 8), 0.1, 1)


def test_estimate_in_measure_shrinks_with_k() -> None:
    m = Euclidean(2)
    ens = PathEnsemble(m, np.zeros(2), 1.0, 10, n_paths=400, seed=0, chunk_size=100)
    report = estimate_in_measure(ITO, get_form(m, "x_dy"), ens, range(2, 10), epsilon=0.05)
    assert report.levels == tuple(range(2, 10))
    assert report.median_at(9) < report.median_at(2) / 4.0
    assert report.tail_at(9) < report.tail_at(2)
    assert report.n_paths == 400


def test_estimate_in_measure_rejects_levels_above_reference() -> None:
    m = Euclidean(1)
    ens = PathEnsemble(m, np.zeros(1), 1.0, 6, n_paths=10)
    with pytest.raises(ContractViolation):
        estimate_in_measure(ITO, get_form(m, "x_dx"), ens, [4, 6], 0.05, k_ref=5)
    with pytest.raises(ContractViolation):
        estimate_in_measure(ITO, get_form(m, "x_dx"), ens, [], 0.05)
    with pytest.raises(ContractViolation):
        estimate_in_measure(ITO, get_form(m, "x_dx"), ens, [3], 0.0)


def test_ito_strat_gap_vanishes() -> None:
    m = Euclidean(1)
    ens = PathEnsemble(m, np.zeros(1), 1.0, 10, n_paths=500, seed=3)
    report = conversion_gap(ITO, LEB, get_form(m, "x_dx"), ens, [4, 10], epsilon=0.05)
    # the gap is t − ½Σ(ΔB)², with standard deviation t·√(2/2^k)
    assert report.median_at(10) < report.median_at(4) / 3.0
    assert report.median_at(10) < 0.06


def test_equal_moment_measures_agree() -> None:
    m = Torus(2)
    ens = PathEnsemble(m, np.array([1.0, 2.0]), 1.0, 9, n_paths=300, seed=4)
    endpoints = parse_measure("endpoints")
    report = conversion_gap(MID, endpoints, get_form(m, "sin_dtheta2"), ens, [5, 9], epsilon=0.05)
    assert report.tail_at(9) <= report.tail_at(5)
    assert report.median_at(9) < 0.02


@pytest.mark.parametrize("key,field", [("euclidean:2", "sin_cos"), ("sphere2:1.0", "xz"), ("torus:2", "cos:2")])
def test_strat_exactness(key: str, field: str) -> None:
    m = get_manifold(key)
    x0 = m.random_point(np.random.default_rng(0), 1)[0]
    ens = PathEnsemble(m, x0, 1.0, 8, n_paths=40, seed=5, chunk_size=16)
    report = strat_exactness(get_field(m, field), ens, 8, quadrature_order=32)
    assert report.n_excluded == 0
    assert report.max_abs < 1e-9


def test_ito_lemma_residual_is_centered() -> None:
    m = Euclidean(1)
    ens = PathEnsemble(m, np.zeros(1), 1.0, 9, n_paths=2000, seed=6)
    report = ito_lemma_check(get_field(m, "square"), ens, [3, 6, 9])
    for k in (3, 6, 9):
        r = report.at(k)
        assert abs(r.mean) < 4.0 * r.stderr + 1e-12
    # residual is Σ(ΔB)² − 2t, whose spread shrinks like 2^{−k/2}
    assert report.at(9).median_abs < report.at(3).median_abs
    # E f(B_t) − f(0) = 2t
    assert report.drift_mean == pytest.approx(2.0, abs=5.0 * report.drift_stderr)
    assert report.dynkin_mean == pytest.approx(2.0)
    with pytest.raises(KeyError):
        report.at(4)


def test_chi_product() -> None:
    batch = sample_batch(Euclidean(1), [0.0], 1.0, 4, seed=0, indices=range(10))
    np.testing.assert_array_equal(chi_product(batch, 1e6), 1.0)
    far = sample_batch(Euclidean(1), [0.0], 100.0, 1, seed=0, indices=range(10))
    assert np.all(np.asarray(chi_product(far, 1e-3)) == 0.0)
    with pytest.raises(ContractViolation):
        chi_product(batch, 0.0)


def test_t_continuity_of_dx_is_the_increment() -> None:
    m = Euclidean(1)
    ens = PathEnsemble(m, np.zeros(1), 1.0, 6, n_paths=50, seed=7, chunk_size=20)
    samples = t_continuity_samples(ITO, get_form(m, "dx:1"), ens, 0.25, 0.75)
    points = np.concatenate([b.points for b in ens.batches()])
    expected = np.minimum(np.abs(points[:, 48, 0] - points[:, 16, 0]), 1.0)
    np.testing.assert_allclose(samples, expected, atol=1e-12)
    assert t_continuity_diagnostic(ITO, get_form(m, "dx:1"), ens, 0.5, 0.5) == 0.0


@pytest.mark.parametrize("t1,t2", [(0.3, 0.5), (0.75, 0.5), (0.5, 1.5)])
def test_t_continuity_rejects_bad_times(t1: float, t2: float) -> None:
    m = Euclidean(1)
    ens = PathEnsemble(m, np.zeros(1), 1.0, 4, n_paths=4)
    with pytest.raises(ContractViolation):
        t_continuity_samples(ITO, get_form(m, "dx:1"), ens, t1, t2)


def test_gaussian_levy_oracle_matches_sampling() -> None:
    rng = np.random.default_rng(0)
    x = rng.normal(scale=np.sqrt(0.5), size=400_000)
    assert gaussian_levy_oracle(0.5) == pytest.approx(float(np.mean(np.minimum(np.abs(x), 1.0))), abs=3e-3)
    assert gaussian_levy_oracle(0.0) == 0.0
    assert gaussian_levy_oracle(1e6) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ContractViolation):
        gaussian_levy_oracle(-1.0)


def test_levy_distance_estimate() -> None:
    assert levy_distance_estimate([0.0, 0.0, 0.0], [0.5, 2.0, -0.25]) == pytest.approx((0.5 + 1.0 + 0.25) / 3.0)
    with pytest.raises(ContractViolation):
        levy_distance_estimate([0.0], [0.0, 1.0])


def test_approx_A_masked_counts_cut_locus_pairs() -> None:
    m = Torus(1)
    forced = DyadicPath(m, 1.0, 1, np.array([[0.0], [np.pi], [0.5]]))
    value, n_cut = approx_A_masked(LEB, get_form(m, "a_dtheta:1"), forced)
    assert int(n_cut) == 1
    assert float(value) == pytest.approx(0.5 - np.pi)
