"""
Dyadic approximants A_{P,t,k} and S_{P,t,k} of stochastic integrals of 1-forms,
the classical line integral, and the diagnostics built on them.

Every function accepts a single DyadicPath or a batch; per-path results come back
as a float for a single path and as an array of shape (m,) for a batch.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray
from scipy.special import erfc

from geostoch.curves import Curve
from geostoch.errors import ContractViolation
from geostoch.fields import OneForm, ScalarField
from geostoch.manifolds.base import FloatArray
from geostoch.measures import IntervalMeasure, first_moment, i_p_masked, parse_measure, skew
from geostoch.paths import DyadicPath, PathEnsemble, subsample
from geostoch.semigroup import kappa

logger = logging.getLogger(__name__)

PointFn = Callable[[FloatArray], np.ndarray]

# Below this every error is roundoff and no slope is fitted.
SLOPE_FLOOR = 1e-13
DEFAULT_PANELS = 32
LEBESGUE = parse_measure("lebesgue")
ITO = parse_measure("ito")


def _out(values: np.ndarray, path: DyadicPath) -> float | np.ndarray:
    return values if path.is_batch else values.item()


class IntegralSample(NamedTuple):
    """One value of A_{P,t,k}(α) on one path."""

    value: float
    k: int
    measure: str
    form: str
    path_index: int


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-level discrepancy statistics of an approximant sequence."""

    levels: tuple[int, ...]
    median_abs: tuple[float, ...]
    tail_frac: tuple[float, ...]
    n_cutlocus: tuple[int, ...]
    n_pairs: tuple[int, ...]
    epsilon: float
    n_paths: int
    slope: float | None = None

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ContractViolation(f"levels must be strictly increasing, got {self.levels}")

    @property
    def cutlocus_fraction(self) -> float:
        pairs = sum(self.n_pairs)
        return sum(self.n_cutlocus) / pairs if pairs else 0.0

    def tail_at(self, k: int) -> float:
        return self.tail_frac[self.levels.index(k)]

    def median_at(self, k: int) -> float:
        return self.median_abs[self.levels.index(k)]

    def rows(self) -> list[dict]:
        return [
            {"k": k, "median_abs": m, "tail_frac": f, "n_cutlocus": c}
            for k, m, f, c in zip(self.levels, self.median_abs, self.tail_frac, self.n_cutlocus)
        ]


# -- approximants -------------------------------------------------------------


def segment_values(P: IntervalMeasure, alpha: OneForm, path: DyadicPath) -> tuple[FloatArray, NDArray[np.bool_]]:
    """I_P(α)(c_j, c_{j+1}) for every consecutive pair, with the unique-geodesic mask."""
    if alpha.manifold != path.manifold:
        raise ContractViolation(f"form lives on {alpha.manifold.key}, path on {path.manifold.key}")
    pts = path.points
    return i_p_masked(P, alpha, pts[..., :-1, :], pts[..., 1:, :])


def approx_A_masked(P: IntervalMeasure, alpha: OneForm, path: DyadicPath) -> tuple[np.ndarray, np.ndarray]:
    """A_{P,t,k}(α) per path together with the number of cut-locus pairs per path."""
    values, ok = segment_values(P, alpha, path)
    return np.sum(values, axis=-1), np.sum(~ok, axis=-1)


def approx_A(P: IntervalMeasure, alpha: OneForm, path: DyadicPath) -> float | np.ndarray:
    """A_{P,t,k}(α)(c) = Σ_j I_P(α)(c(jt/2^k), c((j+1)t/2^k))."""
    values, _ = approx_A_masked(P, alpha, path)
    return _out(values, path)


def time_integral_along_path(g: PointFn, path: DyadicPath) -> float | np.ndarray:
    """Left-endpoint Riemann sum (t/2^k)·Σ_{j<2^k} g(c(jt/2^k))."""
    values = np.asarray(g(path.points[..., :-1, :]))
    return _out(path.step * np.sum(values, axis=-1), path)


def approx_S(P: IntervalMeasure, alpha: OneForm, path: DyadicPath) -> float | np.ndarray:
    """S_{P,t,k}(α) = A_{P,t,k}(α) + (t/2^k)·skew(P)·Σ_j (d*α)(c(jt/2^k))."""
    a = np.asarray(approx_A(P, alpha, path))
    s = skew(P)
    if s == 0.0:
        return _out(a, path)
    correction = np.asarray(time_integral_along_path(alpha.codifferential, path))
    return _out(a + s * correction, path)


def phase_approximant(P: IntervalMeasure, alpha: OneForm, path: DyadicPath) -> complex | np.ndarray:
    """e^{i S_{P,t,k}(α)}, the unit-modulus approximant of the path phase."""
    phase = np.exp(1j * np.asarray(approx_S(P, alpha, path)))
    return phase if path.is_batch else complex(phase)


def sample_integral(P: IntervalMeasure, alpha: OneForm, path: DyadicPath) -> IntegralSample:
    if path.is_batch:
        raise ContractViolation("sample_integral takes a single path")
    return IntegralSample(float(approx_A(P, alpha, path)), path.k, str(P), alpha.name, int(path.path_index))


def convert(
    value_P: float | np.ndarray, P: IntervalMeasure, Q: IntervalMeasure, alpha: OneForm, path: DyadicPath
) -> float | np.ndarray:
    """
    Estimate Int_Q from Int_P on the same path:
    Int_Q = Int_P + 2(M₁(P) − M₁(Q))·∫₀ᵗ (d*α)(c(s)) ds.
    """
    coeff = 2.0 * (first_moment(P) - first_moment(Q))
    if coeff == 0.0:
        return value_P
    return value_P + coeff * np.asarray(time_integral_along_path(alpha.codifferential, path))


def chi_product(path: DyadicPath, r: float) -> float | np.ndarray:
    """Π_j χ(c_j, c_{j+1}) with χ(x, y) = κ(d(x, y)²/r²)."""
    if r <= 0:
        raise ContractViolation(f"cut-off radius must be > 0, got {r}")
    d = path.manifold.dist(path.points[..., :-1, :], path.points[..., 1:, :])
    return _out(np.prod(kappa(d * d / (r * r)), axis=-1), path)


# -- classical limit ----------------------------------------------------------


def line_integral(
    alpha: OneForm, curve: Curve, t: float | None = None, n_quad: int = 16, n_panels: int = DEFAULT_PANELS
) -> float:
    """∫_c α over [0, t] by composite Gauss-Legendre quadrature."""
    if alpha.manifold != curve.manifold:
        raise ContractViolation(f"form lives on {alpha.manifold.key}, curve on {curve.manifold.key}")
    t = curve.t_default if t is None else float(t)
    u, w = leggauss(n_quad)
    edges = np.linspace(0.0, t, n_panels + 1)
    half = (edges[1:] - edges[:-1]) / 2.0
    mid = (edges[1:] + edges[:-1]) / 2.0
    s = (mid[:, None] + half[:, None] * u[None, :]).reshape(-1)
    weights = (half[:, None] * w[None, :]).reshape(-1)
    return float(np.sum(weights * alpha(curve.manifold.normalize(curve.point(s)), curve.velocity(s))))


def fit_slope(levels: Sequence[int], errors: Sequence[float]) -> float | None:
    """Least-squares slope of log₂(error) against k, over levels with error above SLOPE_FLOOR."""
    pairs = [(k, e) for k, e in zip(levels, errors) if e > SLOPE_FLOOR]
    if len(pairs) < 2:
        return None
    ks, es = zip(*pairs)
    slope, _ = np.polyfit(np.asarray(ks, dtype=np.float64), np.log2(es), 1)
    return float(slope)


def classical_rate(
    P: IntervalMeasure,
    alpha: OneForm,
    curve: Curve,
    k_range: Sequence[int],
    t: float | None = None,
    epsilon: float = 0.05,
) -> ConvergenceReport:
    """|A_{P,t,k}(α) − ∫_c α| on dyadic samples of a smooth curve, with the fitted log₂ slope."""
    exact = line_integral(alpha, curve, t)
    levels = tuple(int(k) for k in k_range)
    errors, cuts, pairs = [], [], []
    for k in levels:
        path = curve.sample(k, t)
        value, n_cut = approx_A_masked(P, alpha, path)
        errors.append(abs(float(value) - exact))
        cuts.append(int(n_cut))
        pairs.append(2**k)
    slope = fit_slope(levels, errors)
    logger.debug("classical rate %s %s %s: slope=%s", curve.name, alpha.name, P, slope)
    return ConvergenceReport(
        levels,
        tuple(errors),
        tuple(1.0 if e > epsilon else 0.0 for e in errors),
        tuple(cuts),
        tuple(pairs),
        epsilon,
        1,
        slope,
    )


# -- convergence in measure ---------------------------------------------------

LevelFn = Callable[[DyadicPath, DyadicPath], tuple[np.ndarray, np.ndarray]]


def _check_levels(k_range: Sequence[int], k_top: int) -> tuple[int, ...]:
    levels = tuple(int(k) for k in k_range)
    if not levels:
        raise ContractViolation("k_range is empty")
    if any(k < 0 or k > k_top for k in levels):
        raise ContractViolation(f"levels must lie in [0, {k_top}], got {levels}")
    return levels


def _level_report(
    ensemble: PathEnsemble, levels: tuple[int, ...], epsilon: float, fn: LevelFn, workers: int | None = None
) -> ConvergenceReport:
    """Run fn(path at level k, finest path) on every chunk and summarize |Δ| per level."""
    if epsilon <= 0:
        raise ContractViolation(f"epsilon must be > 0, got {epsilon}")

    def per_chunk(batch: DyadicPath) -> list[tuple[np.ndarray, np.ndarray]]:
        return [fn(subsample(batch, k), batch) for k in levels]

    chunks = ensemble.map(per_chunk, workers)
    medians, tails, cuts, pairs = [], [], [], []
    for i, k in enumerate(levels):
        delta = np.abs(np.concatenate([c[i][0] for c in chunks]))
        n_cut = int(sum(int(np.sum(c[i][1])) for c in chunks))
        medians.append(float(np.median(delta)))
        tails.append(float(np.mean(delta > epsilon)))
        cuts.append(n_cut)
        pairs.append(ensemble.n_paths * 2**k)
    if sum(cuts):
        logger.info("%d of %d consecutive pairs hit the cut locus", sum(cuts), sum(pairs))
    return ConvergenceReport(levels, tuple(medians), tuple(tails), tuple(cuts), tuple(pairs), epsilon, ensemble.n_paths)


def estimate_in_measure(
    P: IntervalMeasure,
    alpha: OneForm,
    ensemble: PathEnsemble,
    k_range: Sequence[int],
    epsilon: float,
    k_ref: int | None = None,
    workers: int | None = None,
) -> ConvergenceReport:
    """Δ_k = A_{P,k} − A_{P,k_ref} on the same paths; tail fractions P(|Δ_k| > ε) and medians per k."""
    k_ref = ensemble.k if k_ref is None else k_ref
    if not 0 <= k_ref <= ensemble.k:
        raise ContractViolation(f"k_ref must lie in [0, {ensemble.k}], got {k_ref}")
    levels = _check_levels(k_range, k_ref)

    def fn(coarse: DyadicPath, fine: DyadicPath) -> tuple[np.ndarray, np.ndarray]:
        a_k, cut = approx_A_masked(P, alpha, coarse)
        a_ref, _ = approx_A_masked(P, alpha, subsample(fine, k_ref))
        return a_k - a_ref, cut

    return _level_report(ensemble, levels, epsilon, fn, workers)


def conversion_gap(
    P: IntervalMeasure,
    Q: IntervalMeasure,
    alpha: OneForm,
    ensemble: PathEnsemble,
    k_range: Sequence[int],
    epsilon: float,
    workers: int | None = None,
) -> ConvergenceReport:
    """
    Δ_k = convert(A_{P,k}, P, Q) − A_{Q,k} on the same paths.

    For P = δ₀, Q = Lebesgue this is the Itô-Stratonovich gap
    A_{δ₀} − A_{Leb} − ∫d*α; for equal first moments it is A_P − A_Q.
    """
    levels = _check_levels(k_range, ensemble.k)

    def fn(coarse: DyadicPath, fine: DyadicPath) -> tuple[np.ndarray, np.ndarray]:
        a_p, cut = approx_A_masked(P, alpha, coarse)
        a_q, _ = approx_A_masked(Q, alpha, coarse)
        return np.asarray(convert(a_p, P, Q, alpha, coarse)) - a_q, cut

    return _level_report(ensemble, levels, epsilon, fn, workers)


# -- exactness and Itô's lemma ------------------------------------------------


def _stderr(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0


@dataclass(frozen=True)
class ResidualReport:
    """Per-path residual statistics at one level (excluded paths are left out)."""

    k: int
    n_paths: int
    n_excluded: int
    mean: float
    stderr: float
    max_abs: float
    median_abs: float

    @classmethod
    def from_residuals(cls, k: int, residuals: np.ndarray, keep: np.ndarray) -> "ResidualReport":
        r = residuals[keep]
        n = r.size
        if n == 0:
            return cls(k, residuals.size, residuals.size, float("nan"), float("nan"), float("nan"), float("nan"))
        return cls(
            k, residuals.size, int(residuals.size - n), float(np.mean(r)), _stderr(r),
            float(np.max(np.abs(r))), float(np.median(np.abs(r))),
        )


def _admissible(path: DyadicPath) -> np.ndarray:
    """True for paths whose consecutive points all lie within the injectivity radius and off the cut locus."""
    manifold = path.manifold
    x, y = path.points[..., :-1, :], path.points[..., 1:, :]
    _, ok = manifold.log_map_masked(x, y)
    ok = ok & (manifold.dist(x, y) < manifold.injectivity_radius())
    return np.all(np.atleast_2d(ok), axis=-1)


def strat_exactness(
    f: ScalarField,
    ensemble: PathEnsemble,
    k: int,
    quadrature_order: int = 16,
    workers: int | None = None,
) -> ResidualReport:
    """Residual A_{Leb,t,k}(df) − [f(c(t)) − f(x₀)] per path."""
    _check_levels([k], ensemble.k)
    P = LEBESGUE.with_order(quadrature_order)
    df = f.d()

    def per_chunk(batch: DyadicPath) -> tuple[np.ndarray, np.ndarray]:
        path = subsample(batch, k)
        a = np.atleast_1d(approx_A(P, df, path))
        return a - (f(path.end) - f(path.start)), _admissible(path)

    chunks = ensemble.map(per_chunk, workers)
    residuals = np.concatenate([c[0] for c in chunks])
    keep = np.concatenate([c[1] for c in chunks])
    report = ResidualReport.from_residuals(k, residuals, keep)
    logger.debug("strat exactness %s k=%d: max |residual| %.3e", f.name, k, report.max_abs)
    return report


@dataclass(frozen=True)
class ItoLemmaReport:
    """Itô-lemma residuals per level plus the endpoint drift f(c(t)) − f(x₀)."""

    levels: tuple[ResidualReport, ...]
    drift_mean: float
    drift_stderr: float
    #: Mean and standard error of Σ (t/2^k)(Δf)(c_j) at the finest level.
    dynkin_mean: float = 0.0
    dynkin_stderr: float = 0.0

    def at(self, k: int) -> ResidualReport:
        for r in self.levels:
            if r.k == k:
                return r
        raise KeyError(k)


def ito_lemma_check(
    f: ScalarField, ensemble: PathEnsemble, k_range: Sequence[int], workers: int | None = None
) -> ItoLemmaReport:
    """Residual f(c(t)) − f(x₀) − A_{δ₀,t,k}(df) − Σ (t/2^k)(Δf)(c_j) per path and level."""
    if f.laplacian is None:
        raise ContractViolation(f"field {f.name} has no analytic Laplacian")
    levels = _check_levels(k_range, ensemble.k)
    df = f.d()

    def per_chunk(batch: DyadicPath) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray, np.ndarray]:
        drift = f(batch.end) - f(batch.start)
        residuals, keeps, corrections = [], [], {}
        for k in levels:
            path = subsample(batch, k)
            ito = np.atleast_1d(approx_A(ITO, df, path))
            corrections[k] = np.atleast_1d(time_integral_along_path(f.laplacian, path))
            residuals.append(drift - ito - corrections[k])
            keeps.append(_admissible(path))
        return residuals, keeps, drift, corrections[max(levels)]

    chunks = ensemble.map(per_chunk, workers)
    reports = tuple(
        ResidualReport.from_residuals(
            k,
            np.concatenate([c[0][i] for c in chunks]),
            np.concatenate([c[1][i] for c in chunks]),
        )
        for i, k in enumerate(levels)
    )
    drift = np.concatenate([np.atleast_1d(c[2]) for c in chunks])
    dynkin = np.concatenate([c[3] for c in chunks])
    return ItoLemmaReport(
        reports,
        float(np.mean(drift)),
        _stderr(drift),
        float(np.mean(dynkin)),
        _stderr(dynkin),
    )


# -- Lévy distance and continuity in t ----------------------------------------


def levy_phi(r: ArrayLike) -> FloatArray:
    """φ(r) = min(r, 1)."""
    return np.minimum(np.asarray(r, dtype=np.float64), 1.0)


def levy_distance_estimate(samples_a: ArrayLike, samples_b: ArrayLike) -> float:
    """E[φ(|a − b|)] over paired samples."""
    a = np.asarray(samples_a, dtype=np.float64).reshape(-1)
    b = np.asarray(samples_b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ContractViolation(f"paired samples differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise ContractViolation("no samples")
    return float(np.mean(levy_phi(np.abs(a - b))))


def _dyadic_index(time: float, path_t: float, k: int) -> int:
    j = time / path_t * 2**k
    if not 0.0 <= time <= path_t or abs(j - round(j)) > 1e-9:
        raise ContractViolation(f"time {time} is not a dyadic fraction j·t/2^{k} of t = {path_t}")
    return int(round(j))


def t_continuity_samples(
    P: IntervalMeasure,
    alpha: OneForm,
    ensemble: PathEnsemble,
    t1: float,
    t2: float,
    workers: int | None = None,
) -> np.ndarray:
    """Per-path φ(|A restricted to [0, t₁] − A restricted to [0, t₂]|) at the ensemble's level."""
    if t2 < t1:
        raise ContractViolation(f"need t1 <= t2, got {t1} > {t2}")
    j1 = _dyadic_index(t1, ensemble.t, ensemble.k)
    j2 = _dyadic_index(t2, ensemble.t, ensemble.k)

    def per_chunk(batch: DyadicPath) -> np.ndarray:
        values, _ = segment_values(P, alpha, batch)
        partial = np.concatenate([np.zeros(values.shape[:-1] + (1,)), np.cumsum(values, axis=-1)], axis=-1)
        return levy_phi(np.abs(partial[..., j2] - partial[..., j1]))

    return np.concatenate(ensemble.map(per_chunk, workers))


def t_continuity_diagnostic(
    P: IntervalMeasure,
    alpha: OneForm,
    ensemble: PathEnsemble,
    t1: float,
    t2: float,
    workers: int | None = None,
) -> float:
    """Lévy distance between the approximants restricted to [0, t₁] and [0, t₂] on the same paths."""
    return float(np.mean(t_continuity_samples(P, alpha, ensemble, t1, t2, workers)))


def gaussian_levy_oracle(variance: float) -> float:
    """E[min(|X|, 1)] for X ~ N(0, variance): erfc(1/a) + (a/√π)(1 − e^{−1/a²}), a = √(2·variance)."""
    if variance < 0:
        raise ContractViolation(f"variance must be >= 0, got {variance}")
    if variance == 0:
        return 0.0
    a = np.sqrt(2.0 * variance)
    return float(erfc(1.0 / a) + a / np.sqrt(np.pi) * (1.0 - np.exp(-1.0 / (a * a))))
