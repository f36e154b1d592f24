"""Radial grids, grid densities and the logarithmic kernel.

Densities are taken with respect to dA = d^2z / pi, so the dA-mass of a
radial density d(r) is 2 * int d(r) r dr.  Between nodes a density is the
piecewise-linear interpolant of its nodal values, and every integral
against ``s`` or ``s log s`` is done exactly for that interpolant (product
integration).  This keeps the s log s singularity at the origin from
polluting the potential; plain trapezoid leaves an O(h^2) point charge at
r = 0 that the thermal solver amplifies by n*theta.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, PreconditionError

_GL_T, _GL_W = np.polynomial.legendre.leggauss(12)


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def _hat_moments(a, b, x0, x1):
    """Integrals over [a, b] of s*phi and s*log(s)*phi for the two hats on [x0, x1].

    Returns (p_left, p_right, q_left, q_right) where phi_left = (x1 - s)/d,
    phi_right = (s - x0)/d and d = x1 - x0.  [a, b] must lie inside [x0, x1].
    """
    a, b, x0, x1 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, x0, x1)))
    d = x1 - x0
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    s = mid[..., None] + half[..., None] * _GL_T
    wq = half[..., None] * _GL_W
    phl = (x1[..., None] - s) / d[..., None]
    phr = (s - x0[..., None]) / d[..., None]
    logs = np.log(np.where(s > 0, s, 1.0))
    p_l = np.sum(wq * s * phl, axis=-1)
    p_r = np.sum(wq * s * phr, axis=-1)
    q_l = np.sum(wq * s * logs * phl, axis=-1)
    q_r = np.sum(wq * s * logs * phr, axis=-1)

    # s log s is not analytic at 0: closed forms on pieces starting there
    at0 = a == 0.0
    if np.any(at0):
        bb = b[at0]
        dd = d[at0]
        xx0 = x0[at0]
        xx1 = x1[at0]
        m1 = bb**2 / 2
        m2 = bb**3 / 3
        logb = np.log(np.where(bb > 0, bb, 1.0))
        l1 = np.where(bb > 0, bb**2 / 2 * logb - bb**2 / 4, 0.0)
        l2 = np.where(bb > 0, bb**3 / 3 * logb - bb**3 / 9, 0.0)
        p_l[at0] = (xx1 * m1 - m2) / dd
        p_r[at0] = (m2 - xx0 * m1) / dd
        q_l[at0] = (xx1 * l1 - l2) / dd
        q_r[at0] = (l2 - xx0 * l1) / dd
    return p_l, p_r, q_l, q_r


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Increasing radii starting at 0."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size < 3:
            raise DomainError("radial grid needs at least 3 nodes")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise DomainError("radial grid must start at 0 and increase strictly")
        object.__setattr__(self, "r", r)

    @classmethod
    def uniform(cls, r_max: float, m: int) -> "RadialGrid":
        return cls(np.linspace(0.0, r_max, m))

    @classmethod
    def through(cls, radius: float, r_max: float, m: int) -> "RadialGrid":
        """Uniform grid of ``m`` nodes reaching at least ``r_max`` with ``radius`` on a node."""
        inside = int(np.floor(radius * (m - 1) / r_max))
        if inside < 2:
            raise DomainError("too few nodes inside the droplet")
        return cls(radius * np.arange(m) / inside)

    @property
    def size(self) -> int:
        return self.r.size

    def index_of(self, radius: float) -> int:
        i = int(np.argmin(np.abs(self.r - radius)))
        if not np.isclose(self.r[i], radius, rtol=0, atol=1e-14 * max(1.0, radius)):
            raise DomainError(f"radius {radius} is not a grid node")
        return i

    @cached_property
    def _moments(self):
        r = self.r
        return _hat_moments(r[:-1], r[1:], r[:-1], r[1:])

    @cached_property
    def mass_weights(self) -> np.ndarray:
        """W with sum(W * d) = 2 int d(s) s ds for the interpolant of d."""
        p_l, p_r, _, _ = self._moments
        w = np.zeros(self.size)
        w[:-1] += p_l
        w[1:] += p_r
        return 2.0 * w

    def potential_matrix(self) -> np.ndarray:
        """Dense K with (K @ d)_i = U(r_i) = -2 int log max(r_i, s) d(s) s ds."""
        p_l, p_r, q_l, q_r = self._moments
        m = self.size
        i = np.arange(m)[:, None]
        j = np.arange(m)[None, :]
        pl = np.append(p_l, 0.0)[None, :]
        pr = np.insert(p_r, 0, 0.0)[None, :]
        ql = np.append(q_l, 0.0)[None, :]
        qr = np.insert(q_r, 0, 0.0)[None, :]
        inner = np.where(j < i, pl, 0.0) + np.where(j <= i, pr, 0.0)
        outer = np.where(j >= i, ql, 0.0) + np.where(j > i, qr, 0.0)
        logr = np.log(np.where(self.r > 0, self.r, 1.0))[:, None]
        return -2.0 * (logr * inner + outer)

    def potential(self, values: np.ndarray) -> np.ndarray:
        """U at the nodes in O(M); same numbers as ``potential_matrix() @ values``."""
        p_l, p_r, q_l, q_r = self._moments
        inner = p_l * values[:-1] + p_r * values[1:]
        outer = q_l * values[:-1] + q_r * values[1:]
        cum_inner = np.concatenate(([0.0], np.cumsum(inner)))
        tail = np.concatenate((np.cumsum(outer[::-1])[::-1], [0.0]))
        logr = np.log(np.where(self.r > 0, self.r, 1.0))
        return -2.0 * (logr * cum_inner + tail)


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Grid-sampled density w.r.t. dA, stored as log values (``-inf`` for zeros)."""

    grid: RadialGrid
    log_values: np.ndarray

    @classmethod
    def from_values(cls, grid: RadialGrid, values) -> "RadialDensity":
        values = np.asarray(values, dtype=float)
        if values.shape != grid.r.shape:
            raise DomainError("values must match the grid")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise PreconditionError("density values must be finite and nonnegative")
        with np.errstate(divide="ignore"):
            return cls(grid, np.log(values))

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def weights(self) -> np.ndarray:
        return self.grid.mass_weights

    def mass(self) -> float:
        return float(self.weights @ self.values)

    def normalized(self) -> "RadialDensity":
        return RadialDensity(self.grid, self.log_values - np.log(self.mass()))

    def __call__(self, r):
        """Linear interpolation of the nodal values; zero beyond the grid."""
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.r, self.values, right=0.0)

    def potential_on_grid(self) -> np.ndarray:
        return self.grid.potential(self.values)


def log_potential(density: RadialDensity, r):
    """Logarithmic potential U(r) = int log(1/|z - w|) d mu(w) of a radial density.

    Radially this is -2 int log(max(r, s)) d(s) s ds; ``r`` may be off-grid.
    """
    r_in = np.asarray(r, dtype=float)
    if np.any(r_in < 0):
        raise DomainError("radius must be nonnegative")
    rr = np.atleast_1d(r_in).astype(float)
    grid = density.grid
    nodes = grid.r
    d = density.values
    p_l, p_r, q_l, q_r = grid._moments
    inner = p_l * d[:-1] + p_r * d[1:]
    outer = q_l * d[:-1] + q_r * d[1:]
    cum_inner = np.concatenate(([0.0], np.cumsum(inner)))
    tail = np.concatenate((np.cumsum(outer[::-1])[::-1], [0.0]))

    out = np.empty_like(rr)
    beyond = rr >= nodes[-1]
    with np.errstate(divide="ignore"):
        logr = np.log(np.where(rr > 0, rr, 1.0))
    out[beyond] = -2.0 * logr[beyond] * cum_inner[-1]
    ins = ~beyond
    if np.any(ins):
        x = rr[ins]
        k = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, nodes.size - 2)
        x0, x1 = nodes[k], nodes[k + 1]
        pl_a, pr_a, _, _ = _hat_moments(x0, x, x0, x1)
        _, _, ql_b, qr_b = _hat_moments(x, x1, x0, x1)
        part_in = pl_a * d[k] + pr_a * d[k + 1]
        part_out = ql_b * d[k] + qr_b * d[k + 1]
        m_in = cum_inner[k] + part_in
        out[ins] = -2.0 * (np.where(x > 0, logr[ins] * m_in, 0.0) + part_out + tail[k + 1])
    return out.reshape(r_in.shape) if r_in.ndim else float(out[0])
