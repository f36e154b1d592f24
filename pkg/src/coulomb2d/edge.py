"""Edge rescaling z = R + u/sqrt(n) and the thermal-vs-determinantal discrepancy at the boundary.

Curvatures Delta log(profile) are always taken on the unrescaled radial
function, Delta_z = (f'' + f'/r)/4, and converted with Delta_u = Delta_z / n.
Keeping the f'/r term retains the O(1/sqrt n) curvature of the circle exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .determinantal import ginibre_one_point, one_point_function
from .errors import ConvergenceError, DomainError, PreconditionError
from .potential import RadialPotential, droplet_radius, laplacian, laplacian_of_log_laplacian
from .radial import RadialDensity
from .thermal import GridConfig, SolveReport, SolverConfig, solve_thermal

DETERMINANTAL = "determinantal"
THERMAL = "thermal"


def default_u_grid() -> np.ndarray:
    return np.linspace(-4.0, 4.0, 81)


def determinantal_log_profile(potential: RadialPotential, n: int):
    """r -> log(R_n(r)/n); closed form for c r^2, orthogonal-polynomial sum otherwise."""
    if potential.name == "quadratic":
        c = float(potential.params.get("c", 1.0))
        # Q = c r^2 is Ginibre rescaled: R_n(r) = c R_n^Gin(sqrt(c) r)
        return lambda r: np.log(c * np.asarray(ginibre_one_point(n, np.sqrt(c) * np.asarray(r, float))) / n)
    R = one_point_function(potential, n)
    return lambda r: np.asarray(R.log_value(r)) - np.log(n)


def thermal_log_profile(density: RadialDensity):
    """Cubic spline of log(delta) over the solver grid."""
    spline = CubicSpline(density.r, density.log_values)
    r_max = density.r[-1]

    def logf(r):
        r = np.asarray(r, dtype=float)
        if np.any(r > r_max) or np.any(r < 0):
            raise DomainError("radius outside the thermal grid")
        return spline(r)

    return logf


def radial_laplace_log_fd(logf, r0: float, h: float, richardson: bool = True) -> float:
    """(g'' + g'/r)/4 at r0 for g = logf, central differences with step h (and h/2 with Richardson)."""
    if r0 - h <= 0:
        raise DomainError("stencil crosses the origin")

    def lap(step):
        gp, g0, gm = (float(logf(r0 + step)), float(logf(r0)), float(logf(r0 - step)))
        if not np.all(np.isfinite([gp, g0, gm])):
            raise DomainError("profile must be positive on the stencil")
        return ((gp - 2.0 * g0 + gm) / step**2 + (gp - gm) / (2.0 * step) / r0) / 4.0

    if not richardson:
        return float(lap(h))
    return float((4.0 * lap(h / 2.0) - lap(h)) / 3.0)


@dataclass
class EdgeProfile:
    n: int
    source: str
    radius: float
    u_grid: np.ndarray
    values: np.ndarray
    value_at_0: float
    laplace_log_at_0: float
    theta: float | None = None
    report: SolveReport | None = field(default=None, repr=False)


def _thermal(potential, n, theta, density, grid_config, solver):
    if density is not None:
        return density, None
    density, report = solve_thermal(potential, n, theta, grid_config or GridConfig(), solver or SolverConfig())
    if not report.converged:
        raise ConvergenceError(f"thermal solve n={n} theta={theta} did not converge")
    return density, report


def _log_profile(source, potential, n, theta, density, grid_config, solver):
    if source == DETERMINANTAL:
        return determinantal_log_profile(potential, n), None, None
    if source == THERMAL:
        density, report = _thermal(potential, n, theta, density, grid_config, solver)
        return thermal_log_profile(density), density, report
    raise DomainError(f"unknown profile source {source!r}")


def laplace_log_at_edge(source: str, potential: RadialPotential, n: int, *, theta: float = 2.0,
                        density: RadialDensity | None = None, h: float | None = None,
                        grid_config=None, solver=None) -> float:
    """Delta_u log(profile) at u = 0, i.e. (1/n) Delta_z log F at r = R."""
    logf, _, _ = _log_profile(source, potential, n, theta, density, grid_config, solver)
    R = droplet_radius(potential).radius
    h = h if h is not None else 0.05 / np.sqrt(n)
    return radial_laplace_log_fd(logf, R, h) / n


def laplace_log_rescaled(logf, n: int, R: float, u: float = 0.0, h_u: float | None = None) -> float:
    """Same quantity computed in the u-plane: radius there is R sqrt(n) + u."""
    h_u = h_u if h_u is not None else 0.05
    rho = R * np.sqrt(n) + u

    def g(x):
        return float(logf(R + (x - R * np.sqrt(n)) / np.sqrt(n)))

    return radial_laplace_log_fd(g, rho, h_u)


def rescale_profile(source: str, potential: RadialPotential, n: int, u_grid=None, *, theta: float = 2.0,
                    density: RadialDensity | None = None, grid_config=None, solver=None) -> EdgeProfile:
    """Sample g_n(u) = R_n(R + u/sqrt n)/n or delta~(u) = delta(R + u/sqrt n)."""
    u = default_u_grid() if u_grid is None else np.asarray(u_grid, dtype=float)
    R = droplet_radius(potential).radius
    if np.any(u < -R * np.sqrt(n)):
        raise DomainError("u grid reaches past the origin")
    logf, density, report = _log_profile(source, potential, n, theta, density, grid_config, solver)
    r = R + u / np.sqrt(n)
    values = np.exp(np.asarray(logf(r), dtype=float))
    h = 0.05 / np.sqrt(n)
    return EdgeProfile(
        n=int(n),
        source=source,
        radius=R,
        u_grid=u,
        values=values,
        value_at_0=float(np.exp(logf(R))),
        laplace_log_at_0=radial_laplace_log_fd(logf, R, h) / n,
        theta=theta if source == THERMAL else None,
        report=report,
    )


def edge_identity_gap(value_at_0: float, laplace_log_at_0: float, theta: float) -> float:
    """Delta_u log p(0) - theta (p(0) - 1): zero for a thermal profile of Q = r^2."""
    return laplace_log_at_0 - theta * (value_at_0 - 1.0)


def pointwise_rescaled_residual(density: RadialDensity, potential: RadialPotential, n: int, theta: float, u):
    """-delta + Delta Q + Delta log(delta)/(n theta) at r = R + u/sqrt n (FD on the spline of log delta)."""
    logf = thermal_log_profile(density)
    R = droplet_radius(potential).radius
    h = 0.05 / np.sqrt(n)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    for i, ui in enumerate(u):
        r = R + ui / np.sqrt(n)
        lap_log = radial_laplace_log_fd(logf, r, h)
        out[i] = -float(np.exp(logf(r))) + float(laplacian(potential, r)) + lap_log / (n * theta)
    return out


def rescaled_variational_residual(density: RadialDensity, potential: RadialPotential, n: int, theta: float,
                                  u_window=(-2.0, 2.0), points: int = 81) -> float:
    """sup over the u-window of |-delta~ + 1 + (1/theta) Delta_u log delta~| (requires Delta Q = 1)."""
    R = droplet_radius(potential).radius
    u = np.linspace(u_window[0], u_window[1], points)
    r = R + u / np.sqrt(n)
    lap = np.asarray(potential.lap_derivs(r)[0], dtype=float)
    if not np.allclose(lap, 1.0, rtol=0, atol=1e-14):
        raise PreconditionError("rescaled identity assumes Delta Q = 1 (Ginibre potential)")
    return float(np.max(np.abs(pointwise_rescaled_residual(density, potential, n, theta, u))))


def discrepancy_norm(potential: RadialPotential, n: int, theta: float, density: RadialDensity | None = None,
                     grid_config=None, solver=None) -> tuple[float, float]:
    """sup_r |R_n(r)/n - delta_theta(r)| over the thermal grid and where it is attained."""
    density, _ = _thermal(potential, n, theta, density, grid_config, solver)
    r = density.r
    g = np.exp(determinantal_log_profile(potential, n)(r))
    gap = np.abs(g - density.values)
    k = int(np.argmax(gap))
    return float(gap[k]), float(r[k])


@dataclass
class SweepRow:
    theta: float
    thermal_center: float
    bulk_slope: float
    determinantal_slope: float
    target_slope: float
    bulk_mismatch: float
    edge_sup: float
    edge_argmax: float
    bulk_ok: bool
    edge_ok: bool


@dataclass
class SweepTable:
    potential: str
    n: int
    bulk_tol: float
    edge_tol: float
    rows: list[SweepRow]

    @property
    def any_simultaneous_agreement(self) -> bool:
        return any(row.bulk_ok and row.edge_ok for row in self.rows)


def theta_sweep(potential: RadialPotential, n: int, theta_grid, bulk_tol: float = 0.1, edge_tol: float = 0.02,
                grid_config=None, solver=None) -> SweepTable:
    """For each theta: bulk n^-1 slope at r = 0 against (1/2) Delta log Delta Q(0), and the edge sup gap.

    Bulk agreement is relative (bulk_tol) when the target slope is nonzero
    and absolute otherwise.  Edge agreement means sup gap <= edge_tol.
    """
    lap0 = float(laplacian(potential, 0.0))
    target = 0.5 * float(laplacian_of_log_laplacian(potential, 0.0))
    det_slope = n * (float(np.exp(determinantal_log_profile(potential, n)(0.0))) - lap0)
    rows = []
    for theta in theta_grid:
        density, _ = _thermal(potential, n, float(theta), None, grid_config, solver)
        center = float(density.values[0])
        slope = n * (center - lap0)
        mismatch = abs(slope - target) / abs(target) if target != 0 else abs(slope - target)
        sup, where = discrepancy_norm(potential, n, float(theta), density)
        rows.append(SweepRow(float(theta), center, slope, det_slope, target, mismatch, sup, where,
                             mismatch <= bulk_tol, sup <= edge_tol))
    return SweepTable(potential.name, int(n), bulk_tol, edge_tol, rows)
