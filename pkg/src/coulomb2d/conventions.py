"""Two bookkeeping conventions for the 2D Coulomb gas and the functionals on radial densities.

``V_BETA``: H_n = 1/2 sum_{j != k} log 1/|z_j - z_k| + n sum V(z_j), Gibbs weight
exp(-beta H_n).  ``Q_BETA_STAR``: V = Q/2, beta* = beta/2, Gibbs weight
exp(-beta* (sum_{j != k} log 1/|z_j - z_k| + n sum Q(z_j))).  Sums over j != k
run over ordered pairs, so each unordered pair is counted twice.

The free energies live on radial densities w.r.t. dA = d^2z/pi:

    F      = I_Q + E / (n beta*)
    Ftilde = I_Q / 2 + E / theta,  theta = n beta   (== F / 2)
    F1     = I_Q + E / (n theta1), 1/theta1 = 1/beta* - 1/2
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .potential import RadialPotential
from .radial import RadialDensity


class Convention(enum.Enum):
    V_BETA = "V_beta"
    Q_BETA_STAR = "Q_beta_star"


class Form(enum.Enum):
    F = "F"
    FTILDE = "Ftilde"
    F1 = "F1"


@dataclass(frozen=True)
class ConventionFrame:
    n: int
    beta: float
    beta_star: float
    theta: float
    theta1: float | None

    @classmethod
    def from_beta(cls, n: int, beta: float) -> "ConventionFrame":
        if int(n) != n or n < 1:
            raise DomainError("n must be a positive integer")
        if not beta > 0:
            raise DomainError("beta must be positive")
        beta_star = beta / 2
        inv = 1.0 / beta_star - 0.5
        theta1 = 1.0 / inv if beta_star < 2 else None
        return cls(int(n), float(beta), beta_star, n * beta, theta1)

    @classmethod
    def from_beta_star(cls, n: int, beta_star: float) -> "ConventionFrame":
        return cls.from_beta(n, 2.0 * beta_star)

    @property
    def theta1_defined(self) -> bool:
        return self.theta1 is not None

    def entropy_parameter(self, form: Form = Form.F) -> float:
        """The theta to hand the thermal solver (coefficient 1/(n*theta) on E).

        F and Ftilde share a minimizer, both giving theta = beta*; F1 gives theta1.
        """
        if form is Form.F1:
            if self.theta1 is None:
                raise DomainError("theta1 is undefined for beta* >= 2")
            return self.theta1
        return self.beta_star


@dataclass(frozen=True)
class Configuration:
    points: tuple[complex, ...]

    def __init__(self, points: Sequence[complex]):
        pts = tuple(complex(p) for p in points)
        if len(pts) == 0:
            raise DomainError("configuration is empty")
        if len(set(pts)) != len(pts):
            raise DomainError("configuration points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)


def _ordered_pair_log_sum(z: np.ndarray) -> float:
    diff = np.abs(z[:, None] - z[None, :])
    off = ~np.eye(z.size, dtype=bool)
    if np.any(diff[off] == 0):
        raise DomainError("coincident points")
    return float(-np.log(diff[off]).sum())


def _potential_values(config: Configuration, potential: RadialPotential) -> np.ndarray:
    q = np.asarray(potential.q(np.abs(config.as_array())), dtype=float)
    if not np.all(np.isfinite(q)):
        raise DomainError("potential is not finite at every point")
    return q


def hamiltonian(config: Configuration, potential: RadialPotential, frame: ConventionFrame,
                convention: Convention = Convention.V_BETA) -> float:
    """H_n with V = Q/2 (V_BETA), or sum_{j!=k} log 1/|dz| + n sum Q (Q_BETA_STAR)."""
    if len(config) != frame.n:
        raise PreconditionError(f"configuration has {len(config)} points, frame has n={frame.n}")
    pair = _ordered_pair_log_sum(config.as_array())
    q = _potential_values(config, potential)
    if convention is Convention.V_BETA:
        v = q / 2
        return 0.5 * pair + frame.n * float(v.sum())
    return pair + frame.n * float(q.sum())


def gibbs_exponent(config: Configuration, potential: RadialPotential, frame: ConventionFrame,
                   convention: Convention = Convention.V_BETA) -> float:
    """Negated Gibbs exponent: beta H_n, or beta* times the Q-convention energy."""
    h = hamiltonian(config, potential, frame, convention)
    if convention is Convention.V_BETA:
        return frame.beta * h
    return frame.beta_star * h


def _require_unit_mass(density: RadialDensity, tol: float) -> None:
    m = density.mass()
    if not abs(m - 1.0) <= tol:
        raise PreconditionError(f"density has mass {m!r}, expected 1")


def energy(density: RadialDensity, potential: RadialPotential, mass_tol: float = 1e-6) -> float:
    """Weighted logarithmic energy I_Q(mu) = iint log 1/|z-w| dmu dmu + int Q dmu."""
    _require_unit_mass(density, mass_tol)
    d = density.values
    q = np.asarray(potential.q(density.r), dtype=float)
    w = density.weights * d
    live = w > 0
    if not np.all(np.isfinite(q[live])):
        raise DomainError("potential integral diverges on the support")
    u = density.potential_on_grid()
    return float(np.sum(w[live] * (u[live] + q[live])))


def entropy(density: RadialDensity, mass_tol: float = 1e-6) -> float:
    """E(mu) = int d log d dA, with 0 log 0 = 0."""
    if np.any(density.log_values != density.log_values):
        raise PreconditionError("density contains NaN")
    _require_unit_mass(density, mass_tol)
    d = density.values
    live = d > 0
    return float(np.sum(density.weights[live] * d[live] * density.log_values[live]))


def free_energy(density: RadialDensity, potential: RadialPotential, frame: ConventionFrame,
                form: Form = Form.F, mass_tol: float = 1e-6) -> float:
    i_q = energy(density, potential, mass_tol)
    e = entropy(density, mass_tol)
    if form is Form.F:
        return i_q + e / (frame.n * frame.beta_star)
    if form is Form.FTILDE:
        return i_q / 2 + e / frame.theta
    if frame.theta1 is None:
        raise DomainError("F1 needs beta* < 2")
    return i_q + e / (frame.n * frame.theta1)

