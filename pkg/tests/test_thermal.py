import numpy as np
import pytest

from coulomb2d.conventions import Convention, ConventionFrame, energy, entropy
from coulomb2d.errors import PreconditionError
from coulomb2d.fluct import fit_inverse_n_slope
from coulomb2d.potential import (droplet_radius, laplacian, laplacian_of_log_laplacian, make_potential)
from coulomb2d.radial import RadialDensity, RadialGrid
from coulomb2d.thermal import (GridConfig, SolverConfig, el_defect, functional_descent_trace, solve_thermal,
                               variational_pde_residual)

GINIBRE = make_potential("ginibre")
QQ = make_potential("quadratic_quartic", a=0.5)


def free(d, pot, n, theta):
    return energy(d, pot) + entropy(d) / (n * theta)


@pytest.fixture(scope="module")
def solved(thermal):
    return thermal("ginibre", 256, 2.0)


class TestGinibreSolve:
    def test_report(self, solved):
        d, rep = solved
        assert rep.converged and rep.final_residual < 1e-8
        assert abs(d.mass() - 1) < 1e-8
        assert np.all(d.values > 0)
        assert isinstance(rep.lambda_, float)

    def test_centre_value(self, solved):
        d, _ = solved
        assert 0.99 <= d.values[0] <= 1.01

    def test_el_identity(self, solved):
        d, rep = solved
        g = el_defect(d, GINIBRE, 256, 2.0, rep.lambda_)
        live = d.values > 1e-12 * d.values.max()
        assert np.max(np.abs(g[live])) < 1e-8

    def test_pde_residual_at_half(self, solved):
        d, _ = solved
        r, res = variational_pde_residual(d, GINIBRE, 256, 2.0, window=(0.499, 0.501))
        assert np.max(np.abs(res)) < 1e-4

    def test_el_implies_pde_on_bulk_window(self, solved):
        d, _ = solved
        _, res = variational_pde_residual(d, GINIBRE, 256, 2.0, window=(0.0, 0.8))
        assert np.max(np.abs(res)) < 10 * 1e-8 * 256 * 2

    def test_beats_smoothed_classical_density(self, solved):
        d, _ = solved
        rho0 = np.where(d.r <= 1.0, 1.0, 0.0) + 1e-6
        start = RadialDensity.from_values(d.grid, rho0).normalized()
        assert free(d, GINIBRE, 256, 2.0) <= free(start, GINIBRE, 256, 2.0)


def test_pde_residual_vanishes_for_flat_density():
    grid = RadialGrid.uniform(1.0, 401)
    d = RadialDensity.from_values(grid, np.ones(401))
    _, res = variational_pde_residual(d, GINIBRE, 100, 2.0, window=(0.0, 0.99))
    assert np.all(res == 0.0)


def test_manufactured_solution_residual_is_second_order():
    R = droplet_radius(QQ).radius
    grid = RadialGrid.uniform(R, 4001)
    sups = []
    for nt in (256.0, 512.0, 1024.0):
        vals = laplacian(QQ, grid.r) + laplacian_of_log_laplacian(QQ, grid.r) / nt
        d = RadialDensity.from_values(grid, vals)
        _, res = variational_pde_residual(d, QQ, int(nt), 1.0, window=(0.05 * R, 0.9 * R))
        sups.append(np.max(np.abs(res)))
    # measured constant is about 11.7, independent of the grid
    assert sups[0] < 20 / 256.0**2
    assert sups[1] / sups[0] == pytest.approx(0.25, rel=0.05)
    assert sups[2] / sups[1] == pytest.approx(0.25, rel=0.05)


def test_quadratic_quartic_slope(thermal):
    ns = [128, 256, 512]
    dev = [thermal("quadratic_quartic", n, 2.0, a=0.5)[0].values[0] - 1.0 for n in ns]
    slope = fit_inverse_n_slope(ns, dev)
    # (1 / theta) Delta log Delta Q(0) = 2 / 2
    assert slope == pytest.approx(1.0, rel=0.1)


def test_descent_trace_monotone():
    tr = functional_descent_trace(GINIBRE, 64, 2.0, iterations=30, grid_config=GridConfig(m=1024))
    assert not tr.unstable
    assert np.all(np.diff(tr.values[5:]) <= 1e-10)


def test_warm_start_trace_is_constant():
    d, _ = solve_thermal(GINIBRE, 64, 2.0, GridConfig(m=1024), SolverConfig(tol=1e-12))
    tr = functional_descent_trace(GINIBRE, 64, 2.0, iterations=10, initial=d)
    assert max(tr.values) - min(tr.values) < 1e-12


def test_large_theta_approaches_classical_density(thermal):
    dists = []
    for theta in (1.0, 2.0, 4.0, 8.0):
        d, _ = thermal("quadratic_quartic", 64, theta, 2048, a=0.5)
        rho0 = np.where(d.r <= droplet_radius(QQ).radius, laplacian(QQ, d.r), 0.0)
        dists.append(float(d.grid.mass_weights @ np.abs(d.values - rho0)))
    assert all(b < a for a, b in zip(dists, dists[1:]))


def test_entropy_grows_as_minimizers_concentrate(thermal):
    # optimality at t = 1/(n theta) and s gives (t - s)(E_t - E_s) <= 0,
    # so int d log d is non-decreasing in theta
    ents = [entropy(thermal("ginibre", 64, t, 2048)[0]) for t in (0.5, 1.0, 2.0, 4.0, 8.0)]
    assert all(b >= a - 1e-10 for a, b in zip(ents, ents[1:]))


def test_convention_invariance():
    cfg = GridConfig(m=1024)
    a, _ = solve_thermal(QQ, 64, 1.0, cfg, convention=Convention.Q_BETA_STAR)
    b, _ = solve_thermal(QQ, 64, 1.0, cfg, convention=Convention.V_BETA)
    assert np.max(np.abs(a.values - b.values)) < 1e-10


@pytest.mark.parametrize("pot", ["ginibre", "quartic"])
@pytest.mark.parametrize("n", [4, 16, 64])
def test_mass_and_positivity(thermal, pot, n):
    d, rep = thermal(pot, n, 1.0, 2048)
    assert rep.converged
    assert abs(d.mass() - 1) < 1e-8
    assert np.all(d.values > 0)


def test_frame_consistency():
    frame = ConventionFrame.from_beta_star(16, 1.0)
    solve_thermal(GINIBRE, 16, 2.0, GridConfig(m=256), frame=frame)
    with pytest.raises(PreconditionError):
        solve_thermal(GINIBRE, 16, 3.0, GridConfig(m=256), frame=frame)
    with pytest.raises(PreconditionError):
        solve_thermal(GINIBRE, 0, 2.0)


def test_non_convergence_is_reported():
    _, rep = solve_thermal(GINIBRE, 256, 2.0, GridConfig(m=512), SolverConfig(max_iter=1, fixed_point_iter=0))
    assert not rep.converged
    assert rep.final_residual >= 1e-8
