"""Radial external potentials Q, their Laplacian, the droplet and log(Delta Q).

Laplacian convention throughout: Delta = d dbar = (1/4)(d_xx + d_yy), so for a
radial function Delta f(r) = (f'' + f'/r) / 4.  With this normalization
Q = |z|^2 has Delta Q = 1 and the droplet radius R solves R Q'(R) = 2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize
from scipy.special import gammaln

from .errors import AdmissibilityError, DomainError, PreconditionError
from .radial import RadialDensity, RadialGrid

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Q(r) with derivatives and the derivatives of Delta Q.

    ``lap_derivs(r)`` returns (Delta Q, (Delta Q)', (Delta Q)'') at r.
    ``log_norms(n, k)``, when present, gives log h_k in closed form for the
    weight exp(-n Q).
    """

    name: str
    q: Fn
    dq: Fn
    ddq: Fn
    lap_derivs: Callable[[np.ndarray], tuple]
    params: Mapping[str, float] = field(default_factory=dict)
    growth_check: bool = True
    exact: bool = True
    log_norms: Callable[[int, np.ndarray], np.ndarray] | None = None


def polynomial_potential(coeffs: Mapping[int, float], name: str, params=None, log_norms=None) -> RadialPotential:
    """Q(r) = sum_p c_p r^p for integer powers p >= 2."""
    if not coeffs or any(int(p) != p or p < 2 for p in coeffs):
        raise DomainError("polynomial potentials need integer powers >= 2")
    deg = max(coeffs)
    c = np.zeros(deg + 1)
    for p, v in coeffs.items():
        c[int(p)] = v
    poly = Polynomial(c)
    # Delta r^p = p^2 r^(p-2) / 4
    lc = np.zeros(deg - 1)
    for p in range(2, deg + 1):
        lc[p - 2] = c[p] * p * p / 4.0
    lap = Polynomial(lc)
    dlap, ddlap = lap.deriv(1), lap.deriv(2)
    d1, d2 = poly.deriv(1), poly.deriv(2)
    growth = c[deg] > 0
    return RadialPotential(
        name=name,
        q=lambda r: poly(np.asarray(r, dtype=float)),
        dq=lambda r: d1(np.asarray(r, dtype=float)),
        ddq=lambda r: d2(np.asarray(r, dtype=float)),
        lap_derivs=lambda r: (lap(np.asarray(r, float)), dlap(np.asarray(r, float)), ddlap(np.asarray(r, float))),
        params=dict(params or {}),
        growth_check=bool(growth),
        log_norms=log_norms,
    )


def quadratic(c: float = 1.0) -> RadialPotential:
    """Q = c r^2; c = 1 is the Ginibre potential."""
    if c <= 0:
        raise AdmissibilityError("quadratic potential needs c > 0")

    def log_norms(n, k):
        k = np.asarray(k, dtype=float)
        return gammaln(k + 1) - (k + 1) * np.log(n * c)

    return polynomial_potential({2: c}, "quadratic", {"c": c}, log_norms=log_norms)


def quartic(c: float = 1.0) -> RadialPotential:
    if c <= 0:
        raise AdmissibilityError("quartic potential needs c > 0")
    return polynomial_potential({4: c}, "quartic", {"c": c})


def quadratic_quartic(a: float = 0.5) -> RadialPotential:
    """Q = r^2 + a r^4, so Delta Q = 1 + 4 a r^2."""
    if a < 0:
        raise AdmissibilityError("quadratic_quartic needs a >= 0")
    return polynomial_potential({2: 1.0, 4: a}, "quadratic_quartic", {"a": a})


def from_function(q: Fn, name: str = "custom", step: float = 1e-4) -> RadialPotential:
    """Wrap a user-supplied Q using central differences for every derivative.

    Accuracy is limited to roughly step^2 in Q'' and step^2 / step^2 in the
    fourth derivatives entering Delta log Delta Q; fine for droplets and
    densities, marginal for fluctuation terms.
    """
    warnings.warn(
        f"potential {name!r} uses finite-difference derivatives (step={step}); "
        "Delta log Delta Q is only accurate to a few digits",
        stacklevel=2,
    )
    h = step

    def dq(r):
        r = np.asarray(r, dtype=float)
        return (q(r + h) - q(r - h)) / (2 * h)

    def ddq(r):
        r = np.asarray(r, dtype=float)
        return (q(r + h) - 2 * q(r) + q(r - h)) / h**2

    def lap(r):
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, (ddq(r) + dq(r) / safe) / 4.0, ddq(np.zeros_like(r)) / 2.0)

    hl = 10 * h

    def lap_derivs(r):
        r = np.asarray(r, dtype=float)
        # even extension keeps the stencil valid at r = 0
        lo = lap(np.abs(r - hl))
        mid = lap(r)
        hi = lap(r + hl)
        return mid, (hi - lo) / (2 * hl), (hi - 2 * mid + lo) / hl**2

    big = np.array([1e2, 1e3])
    tail = q(big) - 2 * np.log(big)
    growth = bool(np.all(np.isfinite(tail)) and tail[1] > tail[0] > 0)
    return RadialPotential(name, q, dq, ddq, lap_derivs, {}, growth_check=growth, exact=False)


POTENTIALS: dict[str, Callable[..., RadialPotential]] = {
    "ginibre": lambda: quadratic(1.0),
    "quadratic": quadratic,
    "quartic": quartic,
    "quadratic_quartic": quadratic_quartic,
}


def make_potential(name: str, **params) -> RadialPotential:
    try:
        factory = POTENTIALS[name]
    except KeyError:
        raise DomainError(f"unknown potential {name!r}; known: {sorted(POTENTIALS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for potential {name!r}: {exc}") from None


def laplacian(potential: RadialPotential, r):
    """Delta Q(r) = (Q'' + Q'/r)/4, with the limit Q''(0)/2 at the origin."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    lap = np.asarray(potential.lap_derivs(r)[0], dtype=float)
    return lap if r.ndim else float(lap)


@dataclass(frozen=True)
class Droplet:
    """Support S = {|z| <= radius} of the equilibrium measure."""

    radius: float
    mass: float


def droplet_radius(potential: RadialPotential, bracket_max: float = 1e6) -> Droplet:
    """Solve R Q'(R) = 2 and cross-check that Delta Q has dA-mass 1 on the disk."""
    if not potential.growth_check:
        raise AdmissibilityError(f"potential {potential.name!r} is not confining")

    def f(r):
        return float(r * potential.dq(r) - 2.0)

    lo, hi = 1e-12, 1.0
    while f(hi) <= 0:
        hi *= 2.0
        if hi > bracket_max:
            raise DomainError("r Q'(r) never reaches 2; no disk droplet")
    if f(lo) >= 0:
        raise DomainError("r Q'(r) - 2 has no sign change on the bracket")
    R = optimize.brentq(f, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(R)) >= 1e-12:
        raise DomainError(f"droplet equation not solved: residual {f(R):.3e}")
    slope = float(potential.dq(R) + R * potential.ddq(R))
    if slope <= 0:
        raise AdmissibilityError("r Q'(r) is not increasing at the droplet edge")
    mass, _ = integrate.quad(
        lambda s: 2.0 * float(potential.lap_derivs(np.asarray(s))[0]) * s,
        0.0, R, epsabs=0.0, epsrel=1e-13, limit=200,
    )
    if abs(mass - 1.0) > 1e-8:
        raise AdmissibilityError(f"equilibrium mass {mass!r} differs from 1")
    return Droplet(radius=float(R), mass=float(mass))


def equilibrium_density(potential: RadialPotential, droplet: Droplet | None = None, m: int = 16385) -> RadialDensity:
    """rho_0 = Delta Q on the droplet, sampled on a uniform grid over [0, R].

    Outside the grid the density evaluates to zero.
    """
    droplet = droplet or droplet_radius(potential)
    grid = RadialGrid.uniform(droplet.radius, m)
    lap = potential.lap_derivs(grid.r)[0]
    if np.any(lap < 0):
        raise AdmissibilityError("Delta Q is negative inside the droplet")
    return RadialDensity.from_values(grid, lap)


def log_laplacian(potential: RadialPotential, r):
    """L(r) = log Delta Q(r)."""
    r = np.asarray(r, dtype=float)
    lap = potential.lap_derivs(r)[0]
    if np.any(lap <= 0):
        raise DomainError("log Delta Q needs Delta Q > 0")
    return np.log(lap)


def log_laplacian_derivs(potential: RadialPotential, r):
    """(L, L', L'') for L = log Delta Q."""
    r = np.asarray(r, dtype=float)
    lap, dlap, ddlap = potential.lap_derivs(r)
    if np.any(lap <= 0):
        raise DomainError("log Delta Q needs Delta Q > 0")
    d1 = dlap / lap
    return np.log(lap), d1, ddlap / lap - d1**2


def laplacian_of_log_laplacian(potential: RadialPotential, r):
    """Delta L(r) = (L'' + L'/r)/4, using L''(0)/2 at the origin (L is even)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    _, d1, d2 = log_laplacian_derivs(potential, r)
    safe = np.where(r > 0, r, 1.0)
    out = np.where(r > 0, (d2 + d1 / safe) / 4.0, d2 / 2.0)
    return out if out.ndim else float(out)


def poisson_modification(potential: RadialPotential, droplet: Droplet, r):
    """L^S: equal to L on S and to the bounded harmonic extension (the constant L(R)) outside."""
    r = np.asarray(r, dtype=float)
    R = droplet.radius
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    inside = log_laplacian(potential, np.minimum(r, R))
    out = np.where(r <= R, inside, log_laplacian(potential, R))
    return out if out.ndim else float(out)


def normal_derivative_gap(potential: RadialPotential, droplet: Droplet) -> float:
    """d_n (L^S - L) at the boundary, exterior normal: equals -L'(R)."""
    _, d1, _ = log_laplacian_derivs(potential, droplet.radius)
    return 0.0 - float(d1)


def require_positive_laplacian(potential: RadialPotential, droplet: Droplet, samples: int = 257,
                               strict: bool = True) -> None:
    """Delta Q > 0 on [0, R]; with ``strict=False`` isolated zeros (r^4 at the origin) pass."""
    r = np.linspace(0.0, droplet.radius, samples)
    lap = np.asarray(potential.lap_derivs(r)[0])
    bad = np.any(lap <= 0) if strict else (np.any(lap < 0) or np.count_nonzero(lap == 0) > 1)
    if bad:
        raise PreconditionError("Delta Q must be positive on the droplet")
