"""
The experiment catalog: ten named, configuration-driven numerical checks, one per
acceptance criterion, plus run_experiment which executes one and writes its artifacts.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any

import numpy as np
from scipy.special import erfc

from geostoch import __version__
from geostoch.config import ExperimentConfig, build_config, read_config
from geostoch.curves import Curve, get_curve
from geostoch.errors import ConfigError, ContractViolation, RegistryError
from geostoch.feynman_kac import (
    fki_bias,
    fki_grid_richardson,
    fki_mc,
    fki_spectral_circle,
    fourier_coefficients,
)
from geostoch.fields import OneForm, ScalarField, get_field, get_form
from geostoch.integrals import (
    approx_A,
    chi_product,
    classical_rate,
    conversion_gap,
    estimate_in_measure,
    gaussian_levy_oracle,
    ito_lemma_check,
    line_integral,
    strat_exactness,
    t_continuity_samples,
)
from geostoch.manifolds import Euclidean, Hyperbolic2, Manifold, Sphere2, Torus, get_manifold
from geostoch.manifolds.base import FloatArray
from geostoch.measures import IntervalMeasure, classify_theta, first_moment, parse_measure
from geostoch.paths import PathEnsemble
from geostoch.reporter import MANIFEST_HTML, MANIFEST_JSON, RESULTS_CSV, report_csv, report_html, report_json
from geostoch.results import Criterion, ExperimentResult, RunManifest
from geostoch.semigroup import (
    CHERNOFF_FLOOR,
    DIAMAGNETIC_TOL,
    Grid1D,
    build_magnetic_h,
    chernoff_power_test,
    diamagnetic_check,
    form_node_values,
    gauge_defect,
    heat_kernel,
    heat_kernel_expm,
    parse_grid,
    terminal_spread,
)
from geostoch.utils import content_hash, resolve_path

logger = logging.getLogger(__name__)

Runner = Callable[[ExperimentConfig, int | None], ExperimentResult]

# acceptance tolerances
CLASSICAL_SLOPE_FLAT = -0.75
CLASSICAL_SLOPE_CURVED = -0.65
CLASSICAL_ERROR = 1e-3
CUTLOCUS_FRACTION = 1e-3
GAP_TAIL = 0.02
ZERO_CODIFF_EPSILON = 0.02
MOMENT_TAIL = 0.01
STRAT_TOL_FLAT = 1e-7
STRAT_TOL_CURVED = 1e-6
EXPM_TOL = 1e-8
GAUGE_TOL = 1e-9
FKI_MAX_DEVIATION = 0.02
# t-continuity halves t2 - t1 this many times
HALVINGS = 3


@dataclass(frozen=True)
class Experiment:
    """A catalog entry: name, the statement it checks, the keys it reads and its defaults."""

    name: str
    theorem: str
    summary: str
    required: tuple[str, ...]
    runner: Runner = field(repr=False)
    defaults: dict[str, str] = field(default_factory=dict)


CATALOG: dict[str, Experiment] = {}


def experiment(
    name: str, theorem: str, summary: str, required: tuple[str, ...], defaults: dict[str, str]
) -> Callable[[Runner], Runner]:
    """Register a runner in CATALOG."""

    def register(fn: Runner) -> Runner:
        CATALOG[name] = Experiment(name, theorem, summary, required, fn, defaults)
        return fn

    return register


def list_experiments() -> list[Experiment]:
    """Catalog entries in registration order."""
    return list(CATALOG.values())


def get_experiment(name: str) -> Experiment:
    try:
        return CATALOG[(name or "").strip()]
    except KeyError:
        raise RegistryError("experiment", name, CATALOG) from None


def configure(path: Path | None, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Read a config file plus overrides and apply the experiment's own defaults underneath."""
    raw = read_config(path, overrides)
    if not raw.get("experiment", "").strip():
        raise ConfigError("experiment", f"is required; valid: {', '.join(CATALOG)}")
    exp = get_experiment(raw["experiment"])
    return build_config(raw, exp.defaults)


# -- resolution ---------------------------------------------------------------


def _as(config_key: str, fn: Callable[..., Any], *args: Any) -> Any:
    """Call a registry resolver, re-raising RegistryError under the config key's name."""
    try:
        return fn(*args)
    except RegistryError as e:
        raise RegistryError(config_key, e.key, e.valid) from e


def _manifold(cfg: ExperimentConfig) -> Manifold:
    return _as("manifold", get_manifold, cfg.manifold)


def _form(cfg: ExperimentConfig, m: Manifold, key: str = "form") -> OneForm:
    return _as(key, get_form, m, getattr(cfg, key))


def _measure(text: str, cfg: ExperimentConfig, key: str = "measure") -> IntervalMeasure:
    return _as(key, parse_measure, text, cfg.quad_order)


def _measures(text: str, cfg: ExperimentConfig, key: str) -> list[IntervalMeasure]:
    return [_measure(part.strip(), cfg, key) for part in text.split(",") if part.strip()]


def _potential(text: str, m: Manifold, key: str = "potential") -> ScalarField | None:
    if not text or text.strip().lower() == "none":
        return None
    return _as(key, get_field, m, text.strip())


def default_point(m: Manifold) -> FloatArray:
    """Base point used when x0 is not set: the origin, the north pole of S², i on ℍ²."""
    if isinstance(m, Sphere2):
        return np.array([0.0, 0.0, 1.0])
    if isinstance(m, Hyperbolic2):
        return np.array([0.0, 1.0])
    return np.zeros(m.coord_dim)


def _start(cfg: ExperimentConfig, m: Manifold) -> FloatArray:
    if cfg.x0 is None:
        return default_point(m)
    try:
        x = m.coords(cfg.x0)
    except ContractViolation as e:
        raise ConfigError("x0", str(e)) from None
    if not bool(m.is_valid(x)):
        raise ConfigError("x0", f"{list(cfg.x0)} is not a point of {m.key}")
    return m.normalize(x)


def _ensemble(cfg: ExperimentConfig, m: Manifold, k: int) -> PathEnsemble:
    return PathEnsemble(m, _start(cfg, m), cfg.t, k, cfg.n_paths, cfg.seed, cfg.chunk_size)


def _stderr(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0


def _tail_slack(p: float, q: float, n: int) -> float:
    """Three standard errors of a difference of two tail fractions over n paths."""
    return 3.0 * float(np.sqrt((p * (1.0 - p) + q * (1.0 - q)) / n))


def _within(value: float, bound: float) -> bool:
    return bool(np.isfinite(value) and value <= bound)


# -- stochastic integrals -----------------------------------------------------


@experiment(
    "classical-rate",
    theorem="Classical limit: A_{P,t,k}(α) along a smooth curve tends to the line integral ∫_c α",
    summary="error of the dyadic approximant on a smooth closed curve, with its fitted log2 rate",
    required=("manifold", "form", "curve", "measure", "k_min", "k_max"),
    defaults={"manifold": "euclidean:2", "form": "x_dy", "curve": "circle", "measure": "lebesgue"},
)
def _classical_rate(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    alpha = _form(cfg, m)
    curve: Curve = _as("curve", get_curve, m, cfg.curve)
    P = _measure(cfg.measure, cfg)
    report = classical_rate(P, alpha, curve, cfg.levels, epsilon=cfg.epsilon)
    exact = line_integral(alpha, curve)
    rows = [
        {"k": k, "value": float(approx_A(P, alpha, curve.sample(k))), "exact": exact, "abs_error": err}
        for k, err in zip(report.levels, report.median_abs)
    ]
    bound = CLASSICAL_SLOPE_FLAT if m.flat else CLASSICAL_SLOPE_CURVED
    final = report.median_at(cfg.k_max)
    criteria = [
        Criterion(
            "log2 slope of |A - exact|",
            report.slope is None or report.slope <= bound,
            report.slope,
            f"<= {bound} (or all errors at roundoff)",
        ),
        Criterion(f"abs error at k={cfg.k_max}", _within(final, CLASSICAL_ERROR), final, f"<= {CLASSICAL_ERROR}"),
    ]
    return ExperimentResult(
        ("k", "value", "exact", "abs_error"),
        rows,
        criteria,
        {"slope": report.slope, "exact": exact, "curve": curve.name, "t": curve.t_default},
    )


@experiment(
    "in-measure",
    theorem="Existence: A_{P,t,k}(α) converges in Wiener measure as k → ∞",
    summary="tail fractions P(|A_k - A_ref| > ε) against a finer reference level on the same paths",
    required=("manifold", "form", "measure", "k_min", "k_max", "n_paths", "epsilon"),
    defaults={"manifold": "euclidean:2", "form": "x_dy", "measure": "lebesgue", "k_min": "4", "k_max": "12"},
)
def _in_measure(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    alpha = _form(cfg, m)
    P = _measure(cfg.measure, cfg)
    levels = list(range(cfg.k_min, cfg.k_max))
    if not levels:
        raise ConfigError("k_min", f"must be < k_max ({cfg.k_max}) for in-measure")
    ensemble = _ensemble(cfg, m, cfg.k_max)
    report = estimate_in_measure(P, alpha, ensemble, levels, cfg.epsilon, k_ref=cfg.k_max, workers=workers)

    tails = report.tail_frac
    monotone = all(b <= a + _tail_slack(a, b, cfg.n_paths) for a, b in zip(tails, tails[1:]))
    decays = tails[-1] < tails[0] or (tails[0] == 0.0 and tails[-1] == 0.0)
    criteria = [
        Criterion("tail fractions nonincreasing (3 SE)", monotone, max(tails), "each level <= previous + 3 SE"),
        Criterion("tail decays over levels", decays, tails[-1], f"< tail at k={levels[0]} ({tails[0]:.4g})"),
        Criterion(
            "cut-locus pair fraction", report.cutlocus_fraction < CUTLOCUS_FRACTION,
            report.cutlocus_fraction, f"< {CUTLOCUS_FRACTION}",
        ),
    ]
    metrics: dict[str, Any] = {"k_ref": cfg.k_max, "cutlocus_fraction": report.cutlocus_fraction}
    radius = m.injectivity_radius()
    if np.isfinite(radius):
        r = 0.9 * radius
        chi = ensemble.collect(lambda batch: np.atleast_1d(chi_product(batch, r)), workers)
        metrics["chi_one_fraction"] = float(np.mean(chi == 1.0))
    return ExperimentResult(("k", "median_abs", "tail_frac", "n_cutlocus"), report.rows(), criteria, metrics)


def gap_tail_prediction(c: float, t: float, k: int, epsilon: float) -> float:
    """
    Normal approximation of P(|Δ_k| > ε) for α = x dx on ℝ¹, where
    Δ_k = c·(Σ(Δx_j)² − 2t) has standard deviation |c|·t·√(8/2^k).
    """
    sd = abs(c) * t * np.sqrt(8.0 / 2**k)
    if sd == 0.0:
        return 0.0
    return float(erfc(epsilon / (sd * np.sqrt(2.0))))


@experiment(
    "ito-strat-gap",
    theorem="Identification: Int_{δ0} = Itô, Int_Leb = Stratonovich, Itô = Strat − ∫d*α",
    summary="tail of convert(A_P, P→Q) − A_Q on the same paths, and the same gap for a co-closed form",
    required=("manifold", "form", "form_b", "measure", "measure_b", "k_max", "n_paths", "epsilon"),
    defaults={
        "manifold": "euclidean:1",
        "form": "x_dx",
        "form_b": "dx:1",
        "measure": "ito",
        "measure_b": "lebesgue",
        "k_min": "6",
        "k_max": "14",
    },
)
def _ito_strat_gap(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    alpha = _form(cfg, m)
    P = _measure(cfg.measure, cfg)
    Q = _measure(cfg.measure_b, cfg, "measure_b")
    ensemble = _ensemble(cfg, m, cfg.k_max)
    report = conversion_gap(P, Q, alpha, ensemble, cfg.levels, cfg.epsilon, workers)
    rows = [{"form": alpha.name, **row} for row in report.rows()]
    tail = report.tail_at(cfg.k_max)
    criteria = [Criterion(f"gap tail at k={cfg.k_max}", tail < GAP_TAIL, tail, f"< {GAP_TAIL} (ε={cfg.epsilon})")]
    metrics: dict[str, Any] = {"theta_P": classify_theta(P), "theta_Q": classify_theta(Q)}
    for k in (12, cfg.k_max):
        if k in report.levels:
            metrics[f"tail_k{k}"] = report.tail_at(k)
            metrics[f"median_k{k}"] = report.median_at(k)
    if isinstance(m, Euclidean) and m.dim == 1 and alpha.name == "x_dx":
        c = first_moment(P) - first_moment(Q)
        for k in sorted({min(12, cfg.k_max), cfg.k_max}):
            metrics[f"predicted_tail_k{k}"] = gap_tail_prediction(c, cfg.t, k, cfg.epsilon)

    if cfg.form_b:
        beta = _form(cfg, m, "form_b")
        closed = conversion_gap(P, Q, beta, ensemble, [cfg.k_max], ZERO_CODIFF_EPSILON, workers)
        rows.extend({"form": beta.name, **row} for row in closed.rows())
        tail_b = closed.tail_at(cfg.k_max)
        criteria.append(
            Criterion(f"gap tail for {beta.name}", tail_b < GAP_TAIL, tail_b, f"< {GAP_TAIL} (ε={ZERO_CODIFF_EPSILON})")
        )
    return ExperimentResult(("form", "k", "median_abs", "tail_frac", "n_cutlocus"), rows, criteria, metrics)


@experiment(
    "moment-equivalence",
    theorem="Classification: Int_P depends on P only through its first moment ∫τ dP",
    summary="pairwise tail fractions of converted approximants for a list of interval measures",
    required=("manifold", "form", "measure", "measure_b", "k_max", "n_paths", "epsilon"),
    defaults={
        "manifold": "euclidean:2",
        "form": "x_dy",
        "measure": "midpoint",
        "measure_b": "endpoints,lebesgue",
        "k_min": "8",
        "k_max": "12",
    },
)
def _moment_equivalence(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    alpha = _form(cfg, m)
    measures = [_measure(cfg.measure, cfg), *_measures(cfg.measure_b, cfg, "measure_b")]
    if len(measures) < 2:
        raise ConfigError("measure_b", "needs at least one measure to compare against")
    ensemble = _ensemble(cfg, m, cfg.k_max)
    rows: list[dict[str, Any]] = []
    criteria: list[Criterion] = []
    for P, Q in combinations(measures, 2):
        report = conversion_gap(P, Q, alpha, ensemble, cfg.levels, cfg.epsilon, workers)
        rows.extend({"P": str(P), "Q": str(Q), **row} for row in report.rows())
        tail = report.tail_at(cfg.k_max)
        criteria.append(Criterion(f"tail {P} vs {Q}", tail < MOMENT_TAIL, tail, f"< {MOMENT_TAIL}"))
    metrics = {f"first_moment[{P}]": first_moment(P) for P in measures}
    return ExperimentResult(("P", "Q", "k", "median_abs", "tail_frac", "n_cutlocus"), rows, criteria, metrics)


_RESIDUAL_COLUMNS = ("k", "n_paths", "n_excluded", "mean", "stderr", "max_abs", "median_abs")


@experiment(
    "strat-exactness",
    theorem="Stratonovich chain rule: A_{Leb,t,k}(df) telescopes to f(c(t)) − f(c(0))",
    summary="max per-path residual of the Lebesgue approximant of an exact form",
    required=("manifold", "field", "k", "n_paths", "quad_order"),
    defaults={"manifold": "euclidean:2", "field": "sin_cos", "k": "10", "k_max": "10", "n_paths": "1000", "quad_order": "32"},
)
def _strat_exactness(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    f: ScalarField = _as("field", get_field, m, cfg.field)
    if f.differential is None:
        raise ConfigError("field", f"{f.name} has no analytic differential")
    report = strat_exactness(f, _ensemble(cfg, m, cfg.k), cfg.k, cfg.quad_order, workers)
    tol = STRAT_TOL_FLAT if m.flat else STRAT_TOL_CURVED
    criteria = [
        Criterion("max |residual|", _within(report.max_abs, tol), report.max_abs, f"<= {tol}"),
        Criterion("paths evaluated", report.n_excluded < report.n_paths, report.n_paths - report.n_excluded, ">= 1"),
    ]
    row = {name: getattr(report, name) for name in _RESIDUAL_COLUMNS}
    metrics = {"max_residual": report.max_abs, "mean_residual": report.mean, "n_excluded": report.n_excluded}
    return ExperimentResult(_RESIDUAL_COLUMNS, [row], criteria, metrics)


@experiment(
    "ito-lemma",
    theorem="Itô's lemma: f(c(t)) − f(x0) = Itô(df) + ∫Δf(c(s))ds",
    summary="per-path Itô-lemma residual across levels and the drift of f against its Dynkin term",
    required=("manifold", "field", "k_min", "k_max", "n_paths"),
    defaults={"manifold": "euclidean:1", "field": "square", "k_min": "6", "k_max": "12"},
)
def _ito_lemma(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    f: ScalarField = _as("field", get_field, m, cfg.field)
    if f.laplacian is None or f.differential is None:
        raise ConfigError("field", f"{f.name} needs an analytic differential and Laplacian")
    report = ito_lemma_check(f, _ensemble(cfg, m, cfg.k_max), cfg.levels, workers)
    top, low = report.at(cfg.k_max), report.at(cfg.k_min)
    drift_gap = abs(report.drift_mean - report.dynkin_mean)
    drift_bound = 3.0 * float(np.hypot(report.drift_stderr, report.dynkin_stderr)) + 1e-12
    decays = cfg.k_min == cfg.k_max or top.median_abs < low.median_abs or top.median_abs <= 1e-12
    criteria = [
        Criterion(
            f"|mean residual| at k={cfg.k_max}", _within(abs(top.mean), 3.0 * top.stderr + 1e-12),
            top.mean, f"<= 3 SE ({3.0 * top.stderr:.3g})",
        ),
        Criterion("median |residual| decays", decays, top.median_abs, f"< median at k={cfg.k_min} ({low.median_abs:.3g})"),
        Criterion("drift matches Dynkin term", _within(drift_gap, drift_bound), drift_gap, f"<= 3 SE ({drift_bound:.3g})"),
    ]
    rows = [{name: getattr(r, name) for name in _RESIDUAL_COLUMNS} for r in report.levels]
    metrics = {
        "drift_mean": report.drift_mean,
        "drift_stderr": report.drift_stderr,
        "dynkin_mean": report.dynkin_mean,
        "dynkin_stderr": report.dynkin_stderr,
    }
    return ExperimentResult(_RESIDUAL_COLUMNS, rows, criteria, metrics)


@experiment(
    "t-continuity",
    theorem="Continuity in t: the integral restricted to [0, t] is continuous in Lévy distance",
    summary="Lévy distance between restrictions to [0, t1] and [0, t2] as t2 − t1 is halved",
    required=("manifold", "form", "measure", "t", "t1", "t2", "k", "n_paths"),
    defaults={"manifold": "euclidean:1", "form": "dx:1", "measure": "lebesgue", "t1": "0.5", "t2": "1.0", "k_max": "10"},
)
def _t_continuity(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    alpha = _form(cfg, m)
    P = _measure(cfg.measure, cfg)
    t1 = cfg.t / 2.0 if cfg.t1 is None else cfg.t1
    t2 = cfg.t if cfg.t2 is None else cfg.t2
    if t2 <= t1:
        raise ConfigError("t2", f"must exceed t1 = {t1}, got {t2}")
    ensemble = _ensemble(cfg, m, cfg.k)
    gaussian = isinstance(m, Euclidean) and alpha.name.startswith("dx:")

    rows: list[dict[str, Any]] = []
    for i in range(HALVINGS + 1):
        upper = t1 + (t2 - t1) / 2**i
        try:
            samples = t_continuity_samples(P, alpha, ensemble, t1, upper, workers)
        except ContractViolation as e:
            raise ConfigError("t2", str(e)) from None
        oracle = gaussian_levy_oracle(2.0 * (upper - t1)) if gaussian else None
        rows.append(
            {"t1": t1, "t2": upper, "levy_distance": float(np.mean(samples)), "stderr": _stderr(samples), "oracle": oracle}
        )

    monotone = all(
        b["levy_distance"] <= a["levy_distance"] + 3.0 * float(np.hypot(a["stderr"], b["stderr"]))
        for a, b in zip(rows, rows[1:])
    )
    criteria = [
        Criterion("distance nonincreasing as t2 → t1 (3 SE)", monotone, rows[-1]["levy_distance"], "each <= previous + 3 SE"),
        Criterion(
            "distance shrinks", rows[-1]["levy_distance"] < rows[0]["levy_distance"],
            rows[-1]["levy_distance"], f"< {rows[0]['levy_distance']:.4g}",
        ),
    ]
    if gaussian:
        worst = max(abs(r["levy_distance"] - r["oracle"]) - 3.0 * r["stderr"] for r in rows)
        criteria.append(Criterion("Gaussian oracle agreement", worst <= 1e-12, worst, "|d - oracle| <= 3 SE at every spacing"))
    return ExperimentResult(("t1", "t2", "levy_distance", "stderr", "oracle"), rows, criteria, {"k": cfg.k})


# -- semigroups ---------------------------------------------------------------


def _grid(cfg: ExperimentConfig, text: str | None = None) -> Grid1D:
    return _as("grid", parse_grid, text or cfg.grid, cfg.grid_n)


@experiment(
    "chernoff",
    theorem="Chernoff product: (R_{α,t/2^k})^{2^k} converges to the free heat semigroup e^{tΔ}",
    summary="sup-norm error of Chernoff powers applied to 1, for two forms and two measures on a grid",
    required=("grid", "grid_n", "form", "form_b", "measure", "measure_b", "t", "k_min", "k_max"),
    defaults={
        "grid": "circle",
        "form": "a_dtheta:0.5",
        "form_b": "zero",
        "measure": "ito",
        "measure_b": "lebesgue",
        "t": "0.5",
        "k": "3",
        "k_min": "3",
        "k_max": "8",
    },
)
def _chernoff(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    grid = _grid(cfg)
    gm = grid.manifold
    forms = [_form(cfg, gm)] + ([_form(cfg, gm, "form_b")] if cfg.form_b else [])
    measures = [_measure(cfg.measure, cfg), *_measures(cfg.measure_b, cfg, "measure_b")]
    reports = [chernoff_power_test(grid, alpha, P, cfg.t, cfg.levels) for alpha in forms for P in measures]

    rows: list[dict[str, Any]] = []
    criteria: list[Criterion] = []
    for rep in reports:
        rows.extend({**row, "contraction": c} for row, c in zip(rep.rows(), rep.contraction))
        tag = f"{rep.alpha_tag}, {rep.measure_tag}"
        criteria.append(Criterion(f"error decreasing ({tag})", rep.decreasing, rep.terminal_error, f"strict above {CHERNOFF_FLOOR}"))
        criteria.append(Criterion(f"contraction ({tag})", rep.contractive, max(rep.contraction), "sup-norm <= 1 + 1e-10"))
    spread = terminal_spread(reports)
    worst = max(rep.terminal_error for rep in reports)
    criteria.append(
        Criterion("terminal spread", spread <= 2.0 * worst + CHERNOFF_FLOOR, spread, f"<= 2 x max terminal error ({worst:.3g})")
    )
    return ExperimentResult(
        ("alpha_tag", "P_tag", "k", "sup_error", "contraction"),
        rows,
        criteria,
        {"grid": str(grid), "terminal_spread": spread, "max_terminal_error": worst},
    )


# (grid, form, potential, t)
DIAMAGNETIC_CASES: tuple[tuple[str, str, str, float], ...] = (
    ("circle", "zero", "", 0.3),
    ("circle", "a_dtheta:0.7", "", 0.3),
    ("circle", "a_cos:0.5,0.3", "cos:1", 0.5),
    ("circle", "cos_dtheta", "const:1", 1.0),
    ("interval:1", "sin_dx", "", 0.05),
    ("interval:1", "x_dx", "square", 0.1),
)


@experiment(
    "diamagnetic",
    theorem="Diamagnetic inequality: |h_α(t, x, y)| <= h(t, x, y) for the magnetic heat kernel",
    summary="entrywise kernel comparison on six registered grid cases, with mass and gauge checks",
    required=("grid_n",),
    defaults={"grid_n": "128"},
)
def _diamagnetic(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    rows: list[dict[str, Any]] = []
    criteria: list[Criterion] = []
    mass_ok, expm_dev, gauge_dev = True, 0.0, 0.0
    for i, (grid_key, form_key, pot_key, t) in enumerate(DIAMAGNETIC_CASES, start=1):
        grid = _grid(cfg, grid_key)
        gm = grid.manifold
        alpha = _as("form", get_form, gm, form_key)
        potential = _potential(pot_key, gm)
        v = np.asarray(potential(grid.points()), dtype=np.float64) if potential is not None else None
        alpha_values = form_node_values(alpha, grid)
        H_alpha = build_magnetic_h(grid, alpha_values, v)
        h_alpha = heat_kernel(H_alpha, t, grid, tag=f"magnetic({alpha.name})")
        h_free = heat_kernel(build_magnetic_h(grid, np.zeros(grid.n), v), t, grid)
        violation = diamagnetic_check(h_alpha, h_free)
        mass = h_free.row_sums()

        if potential is None and grid.kind == "circle":
            mass_ok &= bool(np.max(np.abs(mass - 1.0)) <= DIAMAGNETIC_TOL)
        elif potential is None or (potential.lower_bound is not None and potential.lower_bound >= 0.0):
            mass_ok &= bool(np.max(mass) <= 1.0 + DIAMAGNETIC_TOL)
        cross = heat_kernel_expm(H_alpha, t, grid).operator() - h_alpha.operator()
        expm_dev = max(expm_dev, float(np.max(np.abs(cross))))
        gauge_dev = max(gauge_dev, gauge_defect(grid, alpha_values, np.sin(2.0 * np.pi * grid.nodes / grid.extent), v))

        label = f"{grid} {alpha.name} V={potential.name if potential else 'none'} t={t:g}"
        criteria.append(Criterion(f"case {i}: {label}", violation <= DIAMAGNETIC_TOL, violation, f"<= {DIAMAGNETIC_TOL}"))
        rows.append(
            {
                "case": i,
                "grid": str(grid),
                "form": alpha.name,
                "potential": potential.name if potential else "none",
                "t": t,
                "violation": violation,
                "min_mass": float(np.min(mass)),
                "max_mass": float(np.max(mass)),
            }
        )
    criteria.append(Criterion("free kernel mass", mass_ok, None, "= 1 on the circle, <= 1 on the interval"))
    criteria.append(Criterion("eigh vs expm kernel", expm_dev <= EXPM_TOL, expm_dev, f"<= {EXPM_TOL}"))
    criteria.append(Criterion("gauge covariance of H", gauge_dev <= GAUGE_TOL, gauge_dev, f"<= {GAUGE_TOL}"))
    return ExperimentResult(
        ("case", "grid", "form", "potential", "t", "violation", "min_mass", "max_mass"),
        rows,
        criteria,
        {"expm_deviation": expm_dev, "gauge_defect": gauge_dev},
    )


# -- Feynman-Kac-Itô ----------------------------------------------------------


def _constant_circle_form(alpha: OneForm) -> float | None:
    """a for α = a dθ (zero included), else None."""
    if alpha.name == "zero":
        return 0.0
    if alpha.name.startswith("a_dtheta:"):
        return float(alpha.name.split(":", 1)[1])
    return None


def fki_oracle(
    alpha: OneForm, potential: ScalarField | None, f: ScalarField, x: float, t: float, grid_n: int
) -> tuple[complex, str]:
    """Fourier-basis value when α is constant and V, f have known coefficients; grid Richardson otherwise."""
    m = alpha.manifold
    a = _constant_circle_form(alpha)
    v_coeffs = {} if potential is None else fourier_coefficients(potential)
    f_coeffs = fourier_coefficients(f)
    if a is not None and v_coeffs is not None and f_coeffs is not None:
        return fki_spectral_circle(a, v_coeffs, f_coeffs, x, t, period=float(m.periods[0])), "spectral"
    return fki_grid_richardson(alpha, potential, f, x, t, grid_n), "grid"


@experiment(
    "fki",
    theorem="Feynman-Kac-Itô: e^{−tH}f(x) = E[exp(i·Strat(α) − ∫V)·f(c(t))]",
    summary="Monte Carlo path integral on the circle against a spectral or grid oracle, one case per potential",
    required=("manifold", "form", "potential", "test_function", "t", "k", "n_paths"),
    defaults={
        "manifold": "torus:1",
        "form": "a_dtheta:0.3",
        "potential": "none,cos:1",
        "test_function": "exp_i:1",
        "t": "0.5",
        "k": "10",
        "k_max": "12",
        "n_paths": "20000",
        "grid_n": "256",
    },
)
def _fki(cfg: ExperimentConfig, workers: int | None) -> ExperimentResult:
    m = _manifold(cfg)
    if not isinstance(m, Torus) or m.dim != 1:
        raise ConfigError("manifold", f"fki compares against a circle oracle; use torus:1, got {cfg.manifold}")
    alpha = _form(cfg, m)
    f: ScalarField = _as("test_function", get_field, m, cfg.test_function)
    P = _measure(cfg.measure, cfg)
    x0 = _start(cfg, m)
    x = float(x0[0])
    k_fine = min(cfg.k + 2, cfg.k_max)
    potentials = [p.strip() for p in cfg.potential.split(",")] if cfg.potential.strip() else ["none"]

    rows: list[dict[str, Any]] = []
    criteria: list[Criterion] = []
    metrics: dict[str, Any] = {"k": cfg.k, "k_bias": k_fine}
    for key in potentials:
        potential = _potential(key, m)
        args = (m, alpha, potential, f, x0, cfg.t, cfg.n_paths)
        estimate = fki_mc(*args, cfg.k, cfg.seed, cfg.chunk_size, P, workers)
        bias = 0.0
        if k_fine > cfg.k:
            bias = fki_bias(estimate, fki_mc(*args, k_fine, cfg.seed, cfg.chunk_size, P, workers))
        oracle, kind = fki_oracle(alpha, potential, f, x, cfg.t, cfg.grid_n)
        deviation = estimate.deviation(oracle)
        bound = 3.0 * estimate.stderr + bias
        passed = deviation <= bound and deviation <= FKI_MAX_DEVIATION
        case = f"V={potential.name if potential else 'none'}"
        criteria.append(Criterion(f"{case} vs {kind} oracle", passed, deviation, f"<= min(3 SE + bias = {bound:.3g}, {FKI_MAX_DEVIATION})"))
        rows.append(
            {
                "case": case,
                "re_mc": estimate.value.real,
                "im_mc": estimate.value.imag,
                "stderr": estimate.stderr,
                "re_oracle": oracle.real,
                "im_oracle": oracle.imag,
                "bias": bias,
                "deviation": deviation,
                "pass": passed,
            }
        )
        metrics[f"oracle[{case}]"] = kind
    return ExperimentResult(
        ("case", "re_mc", "im_mc", "stderr", "re_oracle", "im_oracle", "bias", "deviation", "pass"),
        rows,
        criteria,
        metrics,
    )


# -- running ------------------------------------------------------------------


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> RunManifest:
    """
    Dispatch to the named experiment and write its artifacts under output_dir:
    results.csv and manifest.json, plus manifest.html with report = html.
    report = none writes nothing.
    """
    exp = get_experiment(config.experiment)
    logger.info("running %s (seed=%d)", exp.name, config.seed)
    start = time.perf_counter()
    result = exp.runner(config, workers)
    elapsed = time.perf_counter() - start
    logger.info("%s finished in %.2fs: %s", exp.name, elapsed, "PASS" if result.passed else "FAIL")

    out_dir = resolve_path(config.output_dir)
    artifacts: dict[str, str] = {}
    if config.report != "none":
        artifacts = {"results": str(out_dir / RESULTS_CSV), "manifest": str(out_dir / MANIFEST_JSON)}
        if config.report == "html":
            artifacts["html"] = str(out_dir / MANIFEST_HTML)
    cfg_dict = config.to_dict()
    manifest = RunManifest(
        experiment=exp.name,
        theorem=exp.theorem,
        config=cfg_dict,
        criteria=result.criteria,
        metrics=result.metrics,
        timings={"run_s": elapsed},
        artifacts=artifacts,
        content_hash=content_hash(cfg_dict),
        version=__version__,
    )
    if artifacts:
        report_csv(result, Path(artifacts["results"]))
        manifest.timings["total_s"] = time.perf_counter() - start
        report_json(manifest, Path(artifacts["manifest"]))
        if "html" in artifacts:
            report_html(manifest, result, Path(artifacts["html"]))
    else:
        manifest.timings["total_s"] = time.perf_counter() - start
    return manifest
