"""Regularized upper incomplete gamma function Q(a, x) = Gamma(a, x) / Gamma(a).

Series for x < a + 1, modified Lentz continued fraction otherwise.  The
continued-fraction branch keeps full relative accuracy in the far tail,
which the Ginibre one-point function needs beyond the droplet edge.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

_EPS = np.finfo(float).eps
_TINY = 1e-300


def _log_ratio_term(rho):
    """log(rho) - (rho - 1) without cancellation near rho = 1."""
    rho = np.asarray(rho, dtype=float)
    eta = rho - 1.0  # exact for rho in [1/2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = eta / (2.0 + eta)
        t2 = t * t
        # log1p(eta) - eta = 2 (atanh t - t) - eta^2 / (2 + eta)
        series = np.zeros_like(t)
        power = t * t2
        for j in range(3, 60, 2):
            series = series + power / j
            power = power * t2
        small = 2.0 * series - eta * eta / (2.0 + eta)
        direct = np.log(rho) - eta
    return np.where(np.abs(eta) < 0.5, small, direct)


def _stirling_remainder(a):
    """lgamma(a) - ((a - 1/2) log a - a + log(2 pi)/2)."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore"):
        direct = gammaln(a) - ((a - 0.5) * np.log(a) - a + 0.5 * np.log(2 * np.pi))
    inv = 1.0 / np.maximum(a, 1.0)
    i2 = inv * inv
    asym = inv * (1 / 12 - i2 * (1 / 360 - i2 * (1 / 1260 - i2 * (1 / 1680 - i2 / 1188))))
    return np.where(a >= 15.0, asym, direct)


def _log_prefactor(a, x):
    """log(x^a e^-x / Gamma(a)); x = 0 gives -inf.

    Written as a (log1p(eta) - eta) + log(a / 2 pi)/2 - stirling remainder with
    x = a (1 + eta), which avoids cancelling terms of size a log a for large a.
    """
    with np.errstate(divide="ignore"):
        return a * _log_ratio_term(x / a) + 0.5 * np.log(a / (2 * np.pi)) - _stirling_remainder(a)


def _series_p(a, x, max_iter):
    """Lower regularized P(a, x) by the power series."""
    ap = a.copy()
    term = 1.0 / a
    total = term.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        ap = ap + 1.0
        term = np.where(active, term * x / ap, 0.0)
        total = total + term
        active &= np.abs(term) > np.abs(total) * _EPS
    else:
        raise DomainError("incomplete gamma series did not converge")
    return np.exp(_log_prefactor(a, x)) * total


def _continued_fraction_log_q(a, x, max_iter):
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        if not active.any():
            break
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _EPS
    else:
        raise DomainError("incomplete gamma continued fraction did not converge")
    return _log_prefactor(a, x) + np.log(h)


def regularized_gamma_upper(a, x, max_iter: int = 100_000):
    """Q(a, x) for a > 0, x >= 0; vectorized over broadcastable inputs."""
    a_in, x_in = np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    a_b, x_b = np.broadcast_arrays(a_in, x_in)
    if np.any(~(a_b > 0)) or np.any(~(x_b >= 0)) or not np.all(np.isfinite(a_b)):
        raise DomainError("regularized_gamma_upper needs a > 0 and x >= 0")
    a_f, x_f = a_b.ravel(), x_b.ravel()
    out = np.empty_like(a_f)
    ser = x_f < a_f + 1.0
    if ser.any():
        out[ser] = 1.0 - _series_p(a_f[ser], x_f[ser], max_iter)
    cf = ~ser
    if cf.any():
        big = np.isinf(x_f) & cf
        out[big] = 0.0
        fin = cf & ~big
        if fin.any():
            out[fin] = np.exp(_continued_fraction_log_q(a_f[fin], x_f[fin], max_iter))
    out = np.clip(out, 0.0, 1.0)
    return out.reshape(a_b.shape) if a_b.ndim else float(out[0])
