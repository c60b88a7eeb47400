"""
Grid-level magnetic Laplacians on a circle or an interval, their heat kernels,
the diamagnetic inequality, and Chernoff products of the one-step operator R_{α,t}.

Kernels are stored with the 1/Δx normalization of an integral kernel, so the
operator acting on node values is entries·Δx.
"""

import logging
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from geostoch.errors import ContractViolation, RegistryError
from geostoch.fields import OneForm
from geostoch.manifolds import Euclidean, Manifold, Torus
from geostoch.manifolds.base import FloatArray
from geostoch.measures import IntervalMeasure, i_p, skew

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
GridKind = Literal["circle", "interval"]

MIN_NODES = 8
HERMITIAN_TOL = 1e-12
CONTRACTION_TOL = 1e-10
DIAMAGNETIC_TOL = 1e-10
# Chernoff errors below this level are roundoff, not approximation error.
CHERNOFF_FLOOR = 1e-12
# r(x) as a fraction of the local injectivity bound.
CUTOFF_FACTOR = 0.9


@dataclass(frozen=True)
class Grid1D:
    """
    Uniform grid on a circle of the given period (n nodes x_j = jΔx, Δx = period/n)
    or on an interval (0, length) with Dirichlet ends (interior nodes x_j = jΔx,
    j = 1..n, Δx = length/(n + 1)).
    """

    kind: GridKind
    extent: float
    n: int

    def __post_init__(self) -> None:
        if self.kind not in ("circle", "interval"):
            raise ContractViolation(f"grid kind must be 'circle' or 'interval', got {self.kind!r}")
        if self.n < MIN_NODES:
            raise ContractViolation(f"grid needs n >= {MIN_NODES}, got {self.n}")
        if self.extent <= 0:
            raise ContractViolation(f"grid extent must be > 0, got {self.extent}")

    @property
    def dx(self) -> float:
        return self.extent / self.n if self.kind == "circle" else self.extent / (self.n + 1)

    @property
    def nodes(self) -> FloatArray:
        j = np.arange(self.n) if self.kind == "circle" else np.arange(1, self.n + 1)
        return j * self.dx

    @property
    def manifold(self) -> Manifold:
        """The 1-D manifold carrying the grid (forms and fields are evaluated on it)."""
        return Torus(1, (self.extent,)) if self.kind == "circle" else Euclidean(1)

    @property
    def cutoff_radius(self) -> float:
        """r = 0.9 × injectivity bound (half the period; the whole length on a segment)."""
        bound = self.extent / 2.0 if self.kind == "circle" else self.extent
        return CUTOFF_FACTOR * bound

    def distances(self) -> FloatArray:
        """Node-to-node geodesic distances (shorter arc on the circle)."""
        x = self.nodes
        d = np.abs(x[:, None] - x[None, :])
        if self.kind == "circle":
            d = np.minimum(d, self.extent - d)
        return d

    def points(self) -> FloatArray:
        """Nodes as manifold points, shape (n, 1)."""
        return self.nodes[:, None]

    def __str__(self) -> str:
        return f"{self.kind}({self.extent:g}, n={self.n})"


@dataclass(frozen=True)
class KernelMatrix:
    """A discretized kernel k(x_i, x_j) on a grid, tagged with the operator that produced it."""

    entries: ComplexArray = field(repr=False)
    t: float
    grid: Grid1D
    tag: str = "free"

    def __post_init__(self) -> None:
        if self.entries.shape != (self.grid.n, self.grid.n):
            raise ContractViolation(f"kernel shape {self.entries.shape} does not match {self.grid}")

    def operator(self) -> ComplexArray:
        """Matrix acting on node values: (Kf)_i = Σ_j k_ij f_j Δx."""
        return self.entries * self.grid.dx

    def apply(self, f: ArrayLike) -> ComplexArray:
        return self.operator() @ np.asarray(f)

    def row_mass(self) -> FloatArray:
        """Σ_j |k_ij| Δx per row."""
        return np.sum(np.abs(self.entries), axis=1) * self.grid.dx

    def row_sums(self) -> FloatArray:
        """Σ_j k_ij Δx per row (real part)."""
        return np.real(np.sum(self.entries, axis=1)) * self.grid.dx

    def contraction_norm(self) -> float:
        """Sup-norm operator norm: max row sum of |entries|·Δx."""
        return float(np.max(self.row_mass()))

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the (Hermitian part of the) operator."""
        op = self.operator()
        return float(np.min(np.linalg.eigvalsh((op + op.conj().T) / 2.0)))


# -- Hamiltonian --------------------------------------------------------------


def _node_values(values: ArrayLike | None, grid: Grid1D, name: str) -> FloatArray:
    if values is None:
        return np.zeros(grid.n)
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (grid.n,):
        raise ContractViolation(f"{name} needs {grid.n} node values, got shape {arr.shape}")
    return arr


def link_phases(grid: Grid1D, alpha_values: ArrayLike) -> FloatArray:
    """θ_j = Δx·(α_j + α_{j+1})/2 on the links between neighbouring nodes."""
    a = _node_values(alpha_values, grid, "alpha_values")
    if grid.kind == "circle":
        return grid.dx * (a + np.roll(a, -1)) / 2.0
    return grid.dx * (a[:-1] + a[1:]) / 2.0


def covariant_difference(grid: Grid1D, theta: ArrayLike) -> ComplexArray:
    """
    D with (Df)_{j+½} = (e^{iθ_j} f_{j+1} − f_j)/Δx.

    Circle: n links, periodic. Interval: n + 1 links including the two boundary
    links to the Dirichlet nodes, where only one side is present.
    """
    n, dx = grid.n, grid.dx
    theta = np.asarray(theta, dtype=np.float64)
    if grid.kind == "circle":
        if theta.shape != (n,):
            raise ContractViolation(f"circle needs {n} link phases, got shape {theta.shape}")
        D = np.zeros((n, n), dtype=np.complex128)
        j = np.arange(n)
        D[j, j] = -1.0
        D[j, (j + 1) % n] += np.exp(1j * theta)
        return D / dx
    if theta.shape != (n - 1,):
        raise ContractViolation(f"interval needs {n - 1} interior link phases, got shape {theta.shape}")
    D = np.zeros((n + 1, n), dtype=np.complex128)
    D[0, 0] = 1.0
    j = np.arange(n - 1)
    D[j + 1, j] = -1.0
    D[j + 1, j + 1] = np.exp(1j * theta)
    D[n, n - 1] = -1.0
    return D / dx


def hamiltonian_from_links(grid: Grid1D, theta: ArrayLike, v_values: ArrayLike | None = None) -> ComplexArray:
    """H = D†D + diag(V) for the given link phases."""
    D = covariant_difference(grid, theta)
    H = D.conj().T @ D + np.diag(_node_values(v_values, grid, "v_values")).astype(np.complex128)
    return (H + H.conj().T) / 2.0


def build_magnetic_h(grid: Grid1D, alpha_values: ArrayLike, v_values: ArrayLike | None = None) -> ComplexArray:
    """
    Discrete (d + iα)*(d + iα) + V with Peierls link phases.

    Exactly gauge-covariant: shifting the link phases by φ_{j+1} − φ_j gives
    diag(e^{−iφ}) H diag(e^{iφ}).
    """
    return hamiltonian_from_links(grid, link_phases(grid, alpha_values), v_values)


def gauge_defect(grid: Grid1D, alpha_values: ArrayLike, phi_values: ArrayLike, v_values: ArrayLike | None = None) -> float:
    """max |H_{θ + δφ} − U† H_θ U| with U = diag(e^{iφ}) (zero up to roundoff)."""
    phi = _node_values(phi_values, grid, "phi_values")
    theta = link_phases(grid, alpha_values)
    dphi = (np.roll(phi, -1) - phi) if grid.kind == "circle" else (phi[1:] - phi[:-1])
    H = hamiltonian_from_links(grid, theta, v_values)
    H_shift = hamiltonian_from_links(grid, theta + dphi, v_values)
    u = np.exp(1j * phi)
    return float(np.max(np.abs(H_shift - u.conj()[:, None] * H * u[None, :])))


def is_hermitian(H: ComplexArray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(H - H.conj().T)) <= tol)


def form_node_values(alpha: OneForm, grid: Grid1D) -> FloatArray:
    """Coordinate component α(∂x) at every node."""
    if alpha.manifold != grid.manifold:
        raise ContractViolation(f"form lives on {alpha.manifold.key}, grid on {grid.manifold.key}")
    return np.asarray(alpha.covector(grid.points())[..., 0], dtype=np.float64)


# -- kernels ------------------------------------------------------------------


def heat_kernel(H: ComplexArray, t: float, grid: Grid1D, tag: str = "free") -> KernelMatrix:
    """e^{−tH}/Δx via the Hermitian eigendecomposition."""
    if t < 0:
        raise ContractViolation(f"t must be >= 0, got {t}")
    if not is_hermitian(H):
        raise ContractViolation("H is not Hermitian")
    lam, Q = np.linalg.eigh(H)
    E = (Q * np.exp(-t * lam)[None, :]) @ Q.conj().T
    return KernelMatrix(E / grid.dx, float(t), grid, tag)


def heat_kernel_expm(H: ComplexArray, t: float, grid: Grid1D, tag: str = "free") -> KernelMatrix:
    """Same kernel by scaling and squaring (scipy.linalg.expm), used as a cross-check."""
    if t < 0:
        raise ContractViolation(f"t must be >= 0, got {t}")
    return KernelMatrix(scipy.linalg.expm(-t * H) / grid.dx, float(t), grid, tag)


def diamagnetic_check(h_alpha: KernelMatrix, h_free: KernelMatrix) -> float:
    """max_ij (|h_α(t, x_i, x_j)| − h(t, x_i, x_j)); the inequality holds when ≤ 1e−10."""
    if h_alpha.entries.shape != h_free.entries.shape or h_alpha.grid != h_free.grid:
        raise ContractViolation("diamagnetic check needs kernels on the same grid")
    if abs(h_alpha.t - h_free.t) > 0:
        raise ContractViolation(f"kernels at different times: {h_alpha.t} vs {h_free.t}")
    return float(np.max(np.abs(h_alpha.entries) - np.real(h_free.entries)))


# -- Chernoff -----------------------------------------------------------------


def kappa(s: ArrayLike) -> FloatArray:
    """
    C² cut-off profile: 1 on [0, ⅓], 0 on [½, ∞), quintic smoothstep between.

    κ = 1 − (10u³ − 15u⁴ + 6u⁵) with u = (s − ⅓)/(⅙); first and second
    derivatives vanish at both ends.
    """
    s_arr = np.asarray(s, dtype=np.float64)
    u = np.clip((s_arr - 1.0 / 3.0) * 6.0, 0.0, 1.0)
    return 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


def cutoff_matrix(grid: Grid1D) -> FloatArray:
    """χ(x_i, x_j) = κ(d(x_i, x_j)²/r²)."""
    return kappa(grid.distances() ** 2 / grid.cutoff_radius**2)


def phase_matrix(grid: Grid1D, alpha: OneForm, P: IntervalMeasure, t_step: float) -> ComplexArray:
    """exp(−i I_P(α)(x_i, x_j) − i t (d*α)(x_i) ∫(2τ − 1)dP)."""
    pts = grid.points()
    ip = i_p(P, alpha, pts[:, None, :], pts[None, :, :])
    drift = t_step * alpha.codifferential(pts) * skew(P)
    return np.exp(-1j * (ip + drift[:, None]))


def chernoff_step(
    grid: Grid1D,
    alpha: OneForm,
    P: IntervalMeasure,
    t_step: float,
    v_values: ArrayLike | None = None,
) -> KernelMatrix:
    """The kernel of R_{α,t}: h_α(t)·χ·exp(−i I_P(α) − i t d*α(x) skew(P))."""
    if t_step <= 0:
        raise ContractViolation(f"t_step must be > 0, got {t_step}")
    H = build_magnetic_h(grid, form_node_values(alpha, grid), v_values)
    h_alpha = heat_kernel(H, t_step, grid, tag=f"magnetic({alpha.name})")
    entries = h_alpha.entries * cutoff_matrix(grid) * phase_matrix(grid, alpha, P, t_step)
    return KernelMatrix(entries, float(t_step), grid, tag=f"chernoff({alpha.name},{P})")


@dataclass(frozen=True)
class ChernoffReport:
    """Sup-norm errors of (R_{α,t/2^k})^{2^k}·1 against e^{−tL}·1 for each k."""

    grid: Grid1D
    alpha_tag: str
    measure_tag: str
    t: float
    levels: tuple[int, ...]
    errors: tuple[float, ...]
    contraction: tuple[float, ...]
    terminal: ComplexArray = field(repr=False)

    @property
    def decreasing(self) -> bool:
        """Strictly decreasing above CHERNOFF_FLOOR; once at the floor, stays there."""
        for prev, cur in zip(self.errors, self.errors[1:]):
            if prev <= CHERNOFF_FLOOR:
                if cur > CHERNOFF_FLOOR:
                    return False
            elif not cur < prev:
                return False
        return True

    @property
    def contractive(self) -> bool:
        return all(c <= 1.0 + CONTRACTION_TOL for c in self.contraction)

    @property
    def terminal_error(self) -> float:
        return self.errors[-1]

    def rows(self) -> list[dict]:
        return [
            {"k": k, "sup_error": e, "alpha_tag": self.alpha_tag, "P_tag": self.measure_tag}
            for k, e in zip(self.levels, self.errors)
        ]


def _comparison_slice(grid: Grid1D) -> slice:
    # the Dirichlet kernel damps the constant near the ends; skip the boundary-adjacent nodes
    return slice(None) if grid.kind == "circle" else slice(1, grid.n - 1)


def free_semigroup_on_one(grid: Grid1D, t: float) -> ComplexArray:
    """e^{−tL}·1 for the free operator L = −Δ (Dirichlet on the interval)."""
    H0 = build_magnetic_h(grid, np.zeros(grid.n))
    return heat_kernel(H0, t, grid).apply(np.ones(grid.n))


def chernoff_power_test(
    grid: Grid1D,
    alpha: OneForm,
    P: IntervalMeasure,
    t: float,
    k_list: tuple[int, ...] | list[int],
) -> ChernoffReport:
    """For each k, ‖(R_{α,t/2^k})^{2^k}·1 − e^{−tL}·1‖∞ on the grid (boundary-adjacent nodes excluded on the interval)."""
    if t <= 0:
        raise ContractViolation(f"t must be > 0, got {t}")
    levels = tuple(int(k) for k in k_list)
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 0:
        raise ContractViolation(f"k_list must be strictly increasing non-negative levels, got {k_list}")
    reference = free_semigroup_on_one(grid, t)
    window = _comparison_slice(grid)
    ones = np.ones(grid.n, dtype=np.complex128)
    errors: list[float] = []
    contraction: list[float] = []
    terminal = ones
    for k in levels:
        step = chernoff_step(grid, alpha, P, t / 2**k)
        contraction.append(step.contraction_norm())
        R = step.operator()
        for _ in range(k):
            R = R @ R
        terminal = R @ ones
        errors.append(float(np.max(np.abs(terminal[window] - reference[window]))))
        logger.debug("chernoff %s %s %s k=%d err=%.3e", grid, alpha.name, P, k, errors[-1])
    return ChernoffReport(grid, alpha.name, str(P), float(t), levels, tuple(errors), tuple(contraction), terminal)


def terminal_spread(reports: list[ChernoffReport]) -> float:
    """Largest pairwise sup-norm distance between terminal vectors (same comparison window)."""
    if not reports:
        return 0.0
    window = _comparison_slice(reports[0].grid)
    spread = 0.0
    for a, b in combinations(reports, 2):
        spread = max(spread, float(np.max(np.abs(a.terminal[window] - b.terminal[window]))))
    return spread


GRID_KEY = re.compile(r"^\s*(circle|interval)\s*(?::\s*([0-9.eE+-]+|2pi))?\s*$")
GRID_SYNTAX = ("circle[:<period>|2pi]", "interval[:<length>]")


def parse_grid(text: str, n: int) -> Grid1D:
    """"circle" (period 2π), "circle:3.0", "interval" (length 1), "interval:2.5"."""
    m = GRID_KEY.match(text or "")
    if not m:
        raise RegistryError("grid", text, GRID_SYNTAX)
    kind, raw = m.group(1), m.group(2)
    if raw is None:
        extent = 2.0 * np.pi if kind == "circle" else 1.0
    else:
        extent = 2.0 * np.pi if raw == "2pi" else float(raw)
    try:
        return Grid1D(kind, extent, n)
    except ContractViolation as e:
        raise RegistryError("grid", text, GRID_SYNTAX) from e
