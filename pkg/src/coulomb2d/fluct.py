"""Expected fluctuations rho_1/2(f) for radial test functions, and the competing bulk coefficients.

For a disk droplet of radius R, L = log Delta Q and the bounded exterior
extension L^S (constant L(R) outside), the three terms reduce to

    bulk          = 2 int_0^R f(r) (1/2) Delta L(r) r dr
    boundary_gap  = (1/8pi) f(R) d_n(L^S - L) 2pi R = (R/4) f(R) (-L'(R))
    boundary_flux = (1/8pi) f'(R) 2pi R           = (R/4) f'(R)

and rho_1/2(f) = (2/beta* - 1) (bulk + boundary_gap + boundary_flux).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .determinantal import one_point_function
from .errors import ConvergenceError, DomainError, PreconditionError
from .potential import (
    Droplet,
    RadialPotential,
    droplet_radius,
    laplacian,
    laplacian_of_log_laplacian,
    normal_derivative_gap,
    require_positive_laplacian,
)
from .thermal import GridConfig, SolverConfig, solve_thermal

_GL_T, _GL_W = np.polynomial.legendre.leggauss(96)

# Delta Q + n^-1 * coeff * Delta log Delta Q, Q convention, beta* = 1
ONE_POINT_Q_COEFF = 0.5
# the thermal-measure claim as printed in V convention: Delta V + n^-1 (1/2) Delta log Delta V
CLAIMED_V_COEFF = 0.5


def to_v_convention(q_coeff: float) -> float:
    """Map the n^-1 coefficient of Delta Q + n^-1 a Delta log Delta Q to the V = Q/2 form.

    Dividing 2 Delta V + n^-1 a Delta log Delta V by 2 gives Delta V + n^-1 (a/2) Delta log Delta V;
    log Delta Q and log Delta V differ by a constant, which Delta kills.
    """
    return q_coeff / 2.0


def to_q_convention(v_coeff: float) -> float:
    return 2.0 * v_coeff


@dataclass(frozen=True, eq=False)
class RadialTestFunction:
    name: str
    f: Callable
    df: Callable | None

    def __call__(self, r):
        return self.f(r)


def polynomial_test_function(coeffs: Sequence[float], name: str | None = None) -> RadialTestFunction:
    """f(r) = sum_i coeffs[i] r^i."""
    p = Polynomial(np.asarray(coeffs, dtype=float))
    dp = p.deriv()
    return RadialTestFunction(
        name or f"poly{list(coeffs)}",
        lambda r: p(np.asarray(r, dtype=float)),
        lambda r: dp(np.asarray(r, dtype=float)),
    )


def power(p: int) -> RadialTestFunction:
    c = np.zeros(int(p) + 1)
    c[int(p)] = 1.0
    return polynomial_test_function(c, f"r^{int(p)}")


def constant(c: float = 1.0) -> RadialTestFunction:
    return polynomial_test_function([c], f"const{c}")


TEST_FUNCTIONS = {
    "constant": constant,
    "power": power,
    "polynomial": polynomial_test_function,
}


def make_test_function(name: str, **params) -> RadialTestFunction:
    try:
        factory = TEST_FUNCTIONS[name]
    except KeyError:
        raise DomainError(f"unknown test function {name!r}; known: {sorted(TEST_FUNCTIONS)}") from None
    return factory(**params)


@dataclass(frozen=True)
class FluctuationTerms:
    prefactor: float
    bulk: float
    boundary_gap: float
    boundary_flux: float

    @property
    def total(self) -> float:
        return self.prefactor * (self.bulk + self.boundary_gap + self.boundary_flux)


def fluctuation_correction(f: RadialTestFunction, potential: RadialPotential, beta_star: float,
                           droplet: Droplet | None = None) -> FluctuationTerms:
    """rho_1/2(f) split into its prefactor and three additive terms."""
    if not beta_star > 0:
        raise DomainError("beta* must be positive")
    if f.df is None:
        raise PreconditionError("f'(R) is needed for the boundary flux term")
    droplet = droplet or droplet_radius(potential)
    require_positive_laplacian(potential, droplet)
    R = droplet.radius
    s = 0.5 * R * (_GL_T + 1.0)
    w = 0.5 * R * _GL_W
    bulk = float(np.sum(w * 2.0 * np.asarray(f(s), float) * 0.5 * laplacian_of_log_laplacian(potential, s) * s))
    f_R = float(f(R))
    df_R = float(f.df(R))
    if not (np.isfinite(f_R) and np.isfinite(df_R)):
        raise PreconditionError("f and f' must be finite at the droplet edge")
    gap = R / 4.0 * f_R * normal_derivative_gap(potential, droplet)
    flux = R / 4.0 * df_R
    return FluctuationTerms(2.0 / beta_star - 1.0, bulk, gap, flux)


@dataclass(frozen=True)
class ExpansionReport:
    """n^-1 coefficients of the bulk density at radius r, all in Q convention unless marked v_."""

    r: float
    rho0: float
    lap_log_lap: float
    one_point_coeff: float  # (1/2) Delta L: expansion of R_n/n at beta* = 1
    claimed_coeff: float  # the V-convention thermal claim, translated with V = Q/2
    fluctuation_coeff: float  # (1/beta* - 1/2) Delta L, read off rho_1/2
    thermal_claim_coeff: float  # (1/beta*) Delta L: thermal bulk asymptotics
    v_one_point: float
    v_claimed: float


def bulk_coefficients(potential: RadialPotential, beta_star: float, r: float) -> ExpansionReport:
    lap = laplacian(potential, r)
    if not lap > 0:
        raise DomainError("Delta Q must be positive at r")
    R = droplet_radius(potential).radius
    ll = float(laplacian_of_log_laplacian(potential, r))
    return ExpansionReport(
        r=float(r),
        rho0=float(lap) if r <= R else 0.0,
        lap_log_lap=ll,
        one_point_coeff=ONE_POINT_Q_COEFF * ll,
        claimed_coeff=to_q_convention(CLAIMED_V_COEFF) * ll,
        fluctuation_coeff=(1.0 / beta_star - 0.5) * ll,
        thermal_claim_coeff=ll / beta_star,
        v_one_point=to_v_convention(ONE_POINT_Q_COEFF),
        v_claimed=CLAIMED_V_COEFF,
    )


@dataclass
class ExpansionRow:
    n: int
    thermal_center: float
    converged: bool
    determinantal_center: float | None
    pred_one_point: float
    pred_fluctuation: float
    pred_thermal_claim: float
    pred_solver: float


@dataclass
class ExpansionTable:
    potential: str
    theta: float
    beta_star: float
    lap_log_lap0: float
    rows: list[ExpansionRow] = field(default_factory=list)
    thermal_slope: float = float("nan")
    determinantal_slope: float | None = None


def fit_inverse_n_slope(ns, deviations) -> float:
    """Least-squares a in deviation ~ a/n + b/n^2."""
    ns = np.asarray(ns, dtype=float)
    y = np.asarray(deviations, dtype=float)
    if ns.size < 2:
        return float(ns[0] * y[0]) if ns.size else float("nan")
    X = np.vstack([1.0 / ns, 1.0 / ns**2]).T
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[0])


def expansion_compare(potential: RadialPotential, n_list, theta: float | None = None, beta_star: float = 1.0,
                      grid_config=None, solver=None) -> ExpansionTable:
    """Bulk density at r = 0: thermal solves, exact R_n(0)/n (beta* = 1) and the predicted n^-1 corrections.

    ``theta`` defaults to beta*, i.e. the entropy weight 1/(n beta*) that
    results from theta = n beta in the V convention.
    """
    theta = beta_star if theta is None else theta
    grid_config = grid_config or GridConfig()
    solver = solver or SolverConfig()
    coeffs = bulk_coefficients(potential, beta_star, 0.0)
    base = coeffs.rho0
    ll = coeffs.lap_log_lap
    table = ExpansionTable(potential.name, float(theta), float(beta_star), ll)
    for n in n_list:
        density, report = solve_thermal(potential, int(n), theta, grid_config, solver)
        det = None
        if beta_star == 1.0:
            det = float(one_point_function(potential, int(n))(0.0)) / n
        table.rows.append(ExpansionRow(
            n=int(n),
            thermal_center=float(density.values[0]),
            converged=report.converged,
            determinantal_center=det,
            pred_one_point=base + coeffs.one_point_coeff / n,
            pred_fluctuation=base + coeffs.fluctuation_coeff / n,
            pred_thermal_claim=base + coeffs.thermal_claim_coeff / n,
            pred_solver=base + ll / (theta * n),
        ))
    ok = [row for row in table.rows if row.converged]
    if not ok:
        raise ConvergenceError("no thermal solve converged")
    table.thermal_slope = fit_inverse_n_slope([r.n for r in ok], [r.thermal_center - base for r in ok])
    if beta_star == 1.0:
        table.determinantal_slope = fit_inverse_n_slope(
            [r.n for r in table.rows], [r.determinantal_center - base for r in table.rows])
    return table
