"""Exact one-point intensity of the determinantal (beta* = 1) Coulomb gas.

With weight exp(-n Q) and the monomials z^k orthogonal for radial Q,

    R_n(r) = exp(-n Q(r)) * sum_{k<n} r^(2k) / h_k,
    h_k    = int |z|^(2k) exp(-n Q) dA = 2 int_0^inf s^(2k+1) exp(-n Q(s)) ds.

R_n is a density w.r.t. dA = d^2z/pi, so int R_n dA = n and R_n ~ n Delta Q
in the bulk.  Reading it per Lebesgue area would rescale everything by pi.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from .errors import DomainError
from .potential import RadialPotential, droplet_radius
from .special import regularized_gamma_upper


def _log_norm_quad(potential: RadialPotential, n: int, k: int) -> float:
    """log h_k by quadrature around the mode of s^(2k+1) exp(-n Q(s))."""
    a = 2 * k + 1

    def phi(s):
        return n * float(potential.q(s)) - a * np.log(s)

    def dphi(s):
        return n * float(potential.dq(s)) - a / s

    lo, hi = 1e-300, 1.0
    while dphi(hi) <= 0:
        hi *= 2.0
        if hi > 1e8:
            raise DomainError(f"weight exp(-n Q) is not confining (k={k})")
    s_star = optimize.brentq(dphi, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=1000)
    curv = n * float(potential.ddq(s_star)) + a / s_star**2
    if not curv > 0:
        raise DomainError("weight is not log-concave at its mode")
    sigma = 1.0 / np.sqrt(curv)
    p_star = phi(s_star)
    left = max(0.0, s_star - 60 * sigma)
    right = s_star + 60 * sigma

    def g(s):
        if s <= 0:
            return 0.0
        return 2.0 * np.exp(-(phi(s) - p_star))

    val, _ = integrate.quad(g, left, right, points=[s_star], epsabs=0.0, epsrel=1e-13, limit=400)
    if not (val > 0 and np.isfinite(val)):
        raise DomainError(f"norm integral failed for k={k}")
    return float(np.log(val) - p_star)


def orthonormal_norms(potential: RadialPotential, n: int, method: str = "auto") -> np.ndarray:
    """log h_k for k = 0..n-1 (log-stored; h_k itself underflows for large k).

    ``method``: "auto" uses a closed form when the potential has one,
    "quad" always integrates numerically.
    """
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    if not potential.growth_check:
        raise DomainError(f"potential {potential.name!r} is not confining")
    k = np.arange(n)
    if method == "auto" and potential.log_norms is not None:
        return np.asarray(potential.log_norms(n, k), dtype=float)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    return np.array([_log_norm_quad(potential, n, int(j)) for j in k])


@dataclass(frozen=True, eq=False)
class OnePointFunction:
    n: int
    potential: RadialPotential
    log_norms: np.ndarray

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("radius must be nonnegative")
        rr = np.atleast_1d(r)
        k = np.arange(self.n)
        with np.errstate(divide="ignore", invalid="ignore"):
            logr = np.log(rr)
            # 0^0 = 1 for the k = 0 term
            terms = np.where(k[None, :] == 0, 0.0, 2.0 * k[None, :] * logr[:, None]) - self.log_norms[None, :]
        out = logsumexp(terms, axis=1) - self.n * np.asarray(self.potential.q(rr), dtype=float)
        return out.reshape(r.shape) if r.ndim else float(out[0])

    def __call__(self, r):
        return np.exp(self.log_value(r))


def one_point_function(potential: RadialPotential, n: int, method: str = "auto") -> OnePointFunction:
    return OnePointFunction(int(n), potential, orthonormal_norms(potential, n, method))


def one_point(potential: RadialPotential, n: int, r, method: str = "auto"):
    """R_n(r) for a radial potential at beta* = 1."""
    return one_point_function(potential, n, method)(r)


def ginibre_one_point(n: int, r):
    """R_n(r) = n Q(n, n r^2) for Q = |z|^2 (regularized upper incomplete gamma)."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    out = n * regularized_gamma_upper(float(n), n * r * r)
    return out if np.ndim(out) else float(out)


def ginibre_edge_value(n: int) -> float:
    """g_n(0) = R_n(1)/n = Gamma(n, n)/Gamma(n)."""
    return float(regularized_gamma_upper(float(n), float(n)))


def ginibre_moment(n: int, m: int) -> float:
    """E sum_j |z_j|^(2m) for Ginibre: sum_{k<n} (k+m)! / (k! n^m)."""
    k = np.arange(n, dtype=float)
    terms = np.ones(n)
    for j in range(1, m + 1):
        terms *= (k + j) / n
    return float(terms.sum())


def radial_moment(R: OnePointFunction, f, r_max: float | None = None) -> float:
    """int f(|z|) R_n dA by adaptive quadrature (f vectorized or scalar callable)."""
    R_drop = droplet_radius(R.potential).radius
    width = 1.0 / np.sqrt(R.n)
    r_max = r_max or R_drop + 60 * width + 1.0
    pts = sorted({max(R_drop - 10 * width, 0.0), R_drop, R_drop + 10 * width})

    def g(s):
        return 2.0 * float(f(s)) * float(R(s)) * s

    val, _ = integrate.quad(g, 0.0, r_max, points=pts, epsabs=0.0, epsrel=1e-12, limit=500)
    return float(val)
