"""Thermal equilibrium measure: minimizer of I_Q + E/(n theta) over radial probability densities.

The Euler-Lagrange condition is a Boltzmann fixed point,

    2 U(r) + Q(r) + log(d(r)) / (n theta) = lambda,

with U the logarithmic potential of d.  The solver runs a few damped
fixed-point (mirror-descent) steps from the classical density, which are
guaranteed to decrease the free energy, then finishes with Newton in
log-space on the discretized EL system.  Pure fixed-point iteration is
correct but needs O(n theta) sweeps to converge, which is impractical at
n theta ~ 10^4.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import optimize

from .conventions import Convention, ConventionFrame
from .errors import DomainError, PreconditionError
from .potential import (
    RadialPotential,
    droplet_radius,
    require_positive_laplacian,
)
from .radial import RadialDensity, RadialGrid

log = logging.getLogger(__name__)

LOG_FLOOR = -700.0


@dataclass(frozen=True)
class GridConfig:
    m: int = 4096
    rmax_headroom: float = 1.5


@dataclass(frozen=True)
class SolverConfig:
    alpha0: float = 1.0
    tol: float = 1e-8
    max_iter: int = 60
    fixed_point_iter: int = 3


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    lambda_: float
    converged: bool
    n: int
    theta: float
    fixed_point_iterations: int = 0
    newton_iterations: int = 0
    mass_error: float = 0.0
    history: list = field(default_factory=list)


@dataclass(frozen=True)
class _Objective:
    """a * iint log 1/|z-w| + int W + c * E; F is (1, Q, 1/(n theta)), Ftilde is (1/2, Q/2, 1/(2 n theta))."""

    a: float
    field: np.ndarray
    c: float

    def gradient_part(self, u):
        return 2.0 * self.a * u + self.field

    def value(self, weights, d, logd, u):
        live = d > 0
        w = weights[live] * d[live]
        return float(np.sum(w * (self.a * u[live] + self.field[live] + self.c * logd[live])))


def _objective(potential, grid, n, theta, convention):
    q = np.asarray(potential.q(grid.r), dtype=float)
    if convention is Convention.Q_BETA_STAR:
        return _Objective(1.0, q, 1.0 / (n * theta))
    # V = Q/2 with Ftilde = I/2 + E/theta_S and theta_S = n * beta = 2 n theta
    return _Objective(0.5, q / 2, 1.0 / (2.0 * n * theta))


def thermal_grid(potential: RadialPotential, n: int, theta: float, config: GridConfig = GridConfig()) -> RadialGrid:
    """Uniform grid with the droplet edge R on a node and a tail cut where the
    exterior Boltzmann factor exp(-n theta (Q - 2 log r)) has fallen by exp(-50 * headroom)."""
    R = droplet_radius(potential).radius

    def exterior(r):
        return float(potential.q(r)) - 2.0 * np.log(r)

    target = exterior(R) + 50.0 * config.rmax_headroom / (n * theta)
    hi = 2.0 * R
    while exterior(hi) < target:
        hi *= 2.0
        if hi > 1e6 * R:
            raise DomainError("could not place the outer grid radius")
    r_max = optimize.brentq(lambda r: exterior(r) - target, R, hi)
    return RadialGrid.through(R, r_max, config.m)


def _boltzmann(obj: _Objective, grid: RadialGrid, d: np.ndarray):
    """Normalized exp(-(2aU + W)/c) in log form, plus the multiplier lambda."""
    u = grid.potential(d)
    expo = -obj.gradient_part(u) / obj.c
    shift = expo.max()
    z = grid.mass_weights @ np.exp(expo - shift)
    logd = expo - shift - np.log(z)
    lam = obj.c * (shift + np.log(z))
    return logd, lam


def _el_defect(obj, grid, logd, lam, rel_floor=1e-12):
    d = np.exp(logd)
    u = grid.potential(d)
    g = obj.c * logd + obj.gradient_part(u) - lam
    support = d > rel_floor * d.max()
    return g, float(np.max(np.abs(g[support])))


def _initial_density(potential, grid: RadialGrid, R: float) -> np.ndarray:
    lap = np.asarray(potential.lap_derivs(grid.r)[0], dtype=float)
    d0 = np.where(grid.r <= R, np.maximum(lap, 0.0), 0.0)
    d0 = d0 + 1e-6 * d0.max()
    return d0 / (grid.mass_weights @ d0)


def _fixed_point_steps(obj, grid, d, steps, alpha0, history):
    """Damped Boltzmann steps d <- (1-a) d + a T(d); a halves whenever the functional would rise."""
    weights = grid.mass_weights
    with np.errstate(divide="ignore"):
        logd = np.log(d)
    cur = obj.value(weights, d, logd, grid.potential(d))
    alpha = alpha0
    for _ in range(steps):
        logt, _ = _boltzmann(obj, grid, d)
        t = np.exp(logt)
        a = alpha
        while True:
            cand = (1.0 - a) * d + a * t
            with np.errstate(divide="ignore"):
                logc = np.log(cand)
            val = obj.value(weights, cand, logc, grid.potential(cand))
            if val <= cur + 1e-14 * abs(cur):
                break
            a *= 0.5
            if a < 1e-12:
                return d, history
        d, cur = cand, val
        history.append((val, a))
    return d, history


def _newton(obj, grid, logd, tol, max_iter):
    """Newton on (c v + 2a K e^v + W - lambda = 0, W.e^v = 1) with backtracking on the sup residual."""
    weights = grid.mass_weights
    m = grid.size
    kmat = grid.potential_matrix()
    d = np.exp(logd)
    lam = float(weights @ (d * (obj.c * logd + obj.gradient_part(grid.potential(d)))))

    def residual(v, lam_):
        dd = np.exp(v)
        g = obj.c * v + obj.gradient_part(grid.potential(dd)) - lam_
        return g, float(weights @ dd - 1.0)

    v = logd.copy()
    g, mres = residual(v, lam)
    merit = max(np.abs(g).max(), abs(mres))
    it = 0
    for it in range(1, max_iter + 1):
        dd = np.exp(v)
        jac = np.empty((m + 1, m + 1))
        np.multiply(kmat, 2.0 * obj.a * dd[None, :], out=jac[:m, :m])
        jac[np.arange(m), np.arange(m)] += obj.c
        jac[:m, m] = -1.0
        jac[m, :m] = weights * dd
        jac[m, m] = 0.0
        step = sla.solve(jac, -np.concatenate([g, [mres]]), overwrite_a=True, check_finite=False)
        t = 1.0
        while True:
            v_new = np.maximum(v + t * step[:m], LOG_FLOOR * 10)
            lam_new = lam + t * step[m]
            g_new, m_new = residual(v_new, lam_new)
            merit_new = max(np.abs(g_new).max(), abs(m_new))
            if merit_new < merit or t < 1e-6:
                break
            t *= 0.5
        improved = merit_new < 0.5 * merit
        if merit_new < merit:
            v, lam, g, mres, merit = v_new, lam_new, g_new, m_new, merit_new
        log.debug("newton %d: merit %.3e step %.3g", it, merit, t)
        if merit < tol * 1e-4 or (not improved and merit < tol):
            break
        if not improved and t < 1e-6:
            break
    return v, lam, it


def solve_thermal(
    potential: RadialPotential,
    n: int,
    theta: float,
    grid_config: GridConfig = GridConfig(),
    solver: SolverConfig = SolverConfig(),
    *,
    frame: ConventionFrame | None = None,
    convention: Convention = Convention.Q_BETA_STAR,
) -> tuple[RadialDensity, SolveReport]:
    """Minimize I_Q + E/(n theta) on a radial grid.

    With ``convention=V_BETA`` the same minimizer is reached through
    Ftilde = I_Q/2 + E/(n beta) in the V = Q/2 bookkeeping.  When ``frame``
    is given, theta must be its beta* (F, Ftilde) or theta1 (F1).
    """
    if int(n) != n or n < 1:
        raise PreconditionError("n must be a positive integer")
    if not theta > 0:
        raise PreconditionError("theta must be positive")
    if frame is not None:
        allowed = {frame.beta_star} | ({frame.theta1} if frame.theta1 is not None else set())
        if frame.n != n or theta not in allowed:
            raise PreconditionError(
                f"theta={theta} with n={n} is inconsistent with frame (n={frame.n}, "
                f"beta*={frame.beta_star}, theta1={frame.theta1})"
            )
    droplet = droplet_radius(potential)
    require_positive_laplacian(potential, droplet, strict=False)
    R = droplet.radius
    grid = thermal_grid(potential, n, theta, grid_config)
    obj = _objective(potential, grid, n, theta, convention)

    d = _initial_density(potential, grid, R)
    history: list = []
    d, history = _fixed_point_steps(obj, grid, d, solver.fixed_point_iter, solver.alpha0, history)
    fp = len(history)
    with np.errstate(divide="ignore"):
        logd = np.log(d)
    # Newton needs finite logs; the Boltzmann map supplies a strictly positive start
    if not np.all(np.isfinite(logd)):
        logd, _ = _boltzmann(obj, grid, d)
    v, lam, newton_it = _newton(obj, grid, logd, solver.tol, max(solver.max_iter - fp, 1))

    density = RadialDensity(grid, v)
    _, defect = _el_defect(obj, grid, v, lam)
    # report in F units whatever the bookkeeping
    scale = 1.0 / obj.a
    report = SolveReport(
        iterations=fp + newton_it,
        final_residual=defect * scale,
        lambda_=lam * scale,
        converged=bool(defect * scale < solver.tol),
        n=int(n),
        theta=float(theta),
        fixed_point_iterations=fp,
        newton_iterations=newton_it,
        mass_error=abs(density.mass() - 1.0),
        history=[h[0] for h in history],
    )
    if not report.converged:
        log.warning("thermal solve n=%d theta=%g did not converge: defect %.3e", n, theta, defect)
    return density, report


def el_defect(density: RadialDensity, potential: RadialPotential, n: int, theta: float, lam: float) -> np.ndarray:
    """Pointwise 2U + Q + log(d)/(n theta) - lambda on the grid."""
    obj = _objective(potential, density.grid, n, theta, Convention.Q_BETA_STAR)
    g, _ = _el_defect(obj, density.grid, density.log_values, lam)
    return g


def radial_laplacian_nodes(r: np.ndarray, f: np.ndarray, idx, step: int = 1) -> np.ndarray:
    """(f'' + f'/r)/4 at nodes ``idx`` of a uniform grid by central differences of width ``step`` nodes."""
    idx = np.atleast_1d(np.asarray(idx))
    h = (r[1] - r[0]) * step
    if np.any(idx - step < 0) or np.any(idx + step >= r.size):
        raise DomainError("stencil leaves the grid")
    if np.any(r[idx] <= 0):
        raise DomainError("radial Laplacian stencil needs r > 0")
    fp, f0, fm = f[idx + step], f[idx], f[idx - step]
    d2 = (fp - 2.0 * f0 + fm) / h**2
    d1 = (fp - fm) / (2.0 * h)
    return (d2 + d1 / r[idx]) / 4.0


def variational_pde_residual(density: RadialDensity, potential: RadialPotential, n: int, theta: float,
                             window: tuple[float, float] | None = None):
    """-d + Delta Q + Delta log(d)/(n theta) at interior nodes (r > 0) inside ``window``.

    Returns (radii, residual).  Delta log d uses nearest-neighbour central differences.
    """
    r = density.r
    lo, hi = window if window is not None else (r[1], r[-2])
    idx = np.nonzero((r >= lo) & (r <= hi) & (r > 0))[0]
    idx = idx[(idx >= 1) & (idx <= r.size - 2)]
    if idx.size == 0:
        raise DomainError("evaluation window holds no interior nodes")
    d = density.values
    if np.any(d[np.unique(np.concatenate([idx - 1, idx, idx + 1]))] <= 0):
        raise DomainError("density must be positive on the stencil")
    lap_log = radial_laplacian_nodes(r, density.log_values, idx)
    lapq = np.asarray(potential.lap_derivs(r[idx])[0], dtype=float)
    return r[idx], -d[idx] + lapq + lap_log / (n * theta)


@dataclass
class DescentTrace:
    values: list
    alphas: list
    unstable: bool


def functional_descent_trace(
    potential: RadialPotential,
    n: int,
    theta: float,
    iterations: int = 40,
    grid_config: GridConfig = GridConfig(),
    alpha0: float = 1.0,
    initial: RadialDensity | None = None,
    transient: int = 5,
    tol: float = 1e-10,
) -> DescentTrace:
    """F_theta after each damped fixed-point step, flagging increases beyond ``tol`` after the transient."""
    if initial is not None:
        grid = initial.grid
        d = initial.values
    else:
        grid = thermal_grid(potential, n, theta, grid_config)
        d = _initial_density(potential, grid, droplet_radius(potential).radius)
    obj = _objective(potential, grid, n, theta, Convention.Q_BETA_STAR)
    weights = grid.mass_weights
    values, alphas = [], []
    alpha = alpha0
    for _ in range(iterations):
        logt, _ = _boltzmann(obj, grid, d)
        t = np.exp(logt)
        with np.errstate(divide="ignore"):
            cur = obj.value(weights, d, np.log(d), grid.potential(d))
        a = alpha
        while True:
            cand = (1.0 - a) * d + a * t
            with np.errstate(divide="ignore"):
                val = obj.value(weights, cand, np.log(cand), grid.potential(cand))
            if val <= cur + 1e-14 * abs(cur) or a < 1e-12:
                break
            a *= 0.5
        d = cand
        values.append(val)
        alphas.append(a)
    diffs = np.diff(values[transient:]) if len(values) > transient else np.array([])
    return DescentTrace(values, alphas, bool(np.any(diffs > tol)))
