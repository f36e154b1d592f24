import numpy as np
import pytest
from scipy.special import erfc

from coulomb2d.determinantal import ginibre_edge_value
from coulomb2d.edge import (DETERMINANTAL, THERMAL, default_u_grid, determinantal_log_profile,
                            discrepancy_norm, edge_identity_gap, laplace_log_at_edge, laplace_log_rescaled,
                            radial_laplace_log_fd, rescale_profile, rescaled_variational_residual, theta_sweep)
from coulomb2d.errors import DomainError, PreconditionError
from coulomb2d.potential import make_potential

GINIBRE = make_potential("ginibre")
QQ = make_potential("quadratic_quartic", a=0.5)

# Delta log g_n(0) at 50 digits (scripts/oracle_values.py)
LAPLACE_LOG_G = {64: -0.67938972769, 256: -0.65789599795, 1024: -0.647230157707, 4096: -0.641917961578}


def test_default_grid():
    u = default_u_grid()
    assert u.size == 81 and u[0] == -4 and u[-1] == 4


def test_profile_at_zero_matches_determinantal_module():
    prof = rescale_profile(DETERMINANTAL, GINIBRE, 100, [0.0])
    assert prof.value_at_0 == pytest.approx(ginibre_edge_value(100), rel=1e-13)


def test_deep_bulk_is_one():
    prof = rescale_profile(DETERMINANTAL, GINIBRE, 1024, [-5.0])
    assert prof.values[0] == pytest.approx(1.0, abs=1e-6)


def test_ginibre_profile_non_increasing():
    prof = rescale_profile(DETERMINANTAL, GINIBRE, 1024)
    assert np.all(prof.values >= 0) and np.all(np.diff(prof.values) <= 0)


def test_erfc_limit_profile():
    u = np.array([-1.0, 0.0, 1.0])
    prof = rescale_profile(DETERMINANTAL, GINIBRE, 4096, u)
    assert np.all(np.abs(prof.values - 0.5 * erfc(np.sqrt(2) * u)) < 0.01)


def test_u_grid_past_origin_rejected():
    with pytest.raises(DomainError):
        rescale_profile(DETERMINANTAL, GINIBRE, 16, [-4.5])


@pytest.mark.parametrize("n", sorted(LAPLACE_LOG_G))
def test_laplace_log_against_high_precision_oracle(n):
    assert laplace_log_at_edge(DETERMINANTAL, GINIBRE, n) == pytest.approx(LAPLACE_LOG_G[n], abs=1e-7)


def test_chain_rule_paths_agree():
    n = 256
    logf = determinantal_log_profile(GINIBRE, n)
    z_path = laplace_log_at_edge(DETERMINANTAL, GINIBRE, n)
    u_path = laplace_log_rescaled(logf, n, 1.0)
    assert abs(z_path - u_path) < 1e-6


def test_fd_step_halving():
    n = 4096
    h = 0.05 / np.sqrt(n)
    a = laplace_log_at_edge(DETERMINANTAL, GINIBRE, n, h=h)
    b = laplace_log_at_edge(DETERMINANTAL, GINIBRE, n, h=h / 2)
    assert abs(a - b) < 0.01 * abs(a)


def test_manufactured_gaussian_profile():
    n = 512
    logf = lambda r: -((np.sqrt(n) * (np.asarray(r) - 1.0)) ** 2)
    assert radial_laplace_log_fd(logf, 1.0, 0.05 / np.sqrt(n)) / n == pytest.approx(-0.5, abs=1e-6)


def test_fd_rejects_bad_stencils():
    with pytest.raises(DomainError):
        radial_laplace_log_fd(np.log, 0.01, 0.02)
    with pytest.raises(DomainError), np.errstate(divide="ignore"):
        radial_laplace_log_fd(lambda r: np.log(np.maximum(r - 1.0, 0.0)), 1.0, 0.01)


def test_edge_values_approach_half_from_below():
    g = np.array([ginibre_edge_value(n) for n in (16, 64, 256, 1024)])
    assert np.all(g < 0.5)
    assert np.all(np.diff(g) > 0)
    assert np.all(np.diff(np.abs(g - 0.5)) < 0)


def test_determinantal_pair_violates_identity():
    n = 4096
    v = abs(edge_identity_gap(ginibre_edge_value(n), laplace_log_at_edge(DETERMINANTAL, GINIBRE, n), 2.0))
    assert v == pytest.approx(1 - 2 / np.pi, rel=0.02)


@pytest.fixture(scope="module")
def solve1024(thermal):
    return thermal("ginibre", 1024, 2.0)


class TestThermalEdge:
    def test_rescaled_residual_small(self, solve1024):
        d, _ = solve1024
        assert rescaled_variational_residual(d, GINIBRE, 1024, 2.0) < 1e-3

    def test_identity_pair_consistent(self, solve1024):
        d, _ = solve1024
        prof = rescale_profile(THERMAL, GINIBRE, 1024, density=d)
        assert abs(edge_identity_gap(prof.value_at_0, prof.laplace_log_at_0, 2.0)) < 1e-3
        assert prof.value_at_0 == pytest.approx(0.5456, abs=1e-3)

    def test_rescaled_residual_needs_flat_laplacian(self, solve1024):
        d, _ = solve1024
        with pytest.raises(PreconditionError):
            rescaled_variational_residual(d, QQ, 1024, 2.0)

    def test_discrepancy_localized_at_edge(self, solve1024):
        d, _ = solve1024
        sup, where = discrepancy_norm(GINIBRE, 1024, 2.0, d)
        assert abs(where - 1.0) <= 3 / np.sqrt(1024)
        assert sup >= 0.05

    def test_bulk_window_agreement(self, solve1024):
        d, _ = solve1024
        inner = d.r <= 0.5
        g = np.exp(determinantal_log_profile(GINIBRE, 1024)(d.r[inner]))
        assert np.max(np.abs(g - d.values[inner])) <= 5 / 1024


def test_edge_gap_persists_for_every_theta(thermal):
    for theta in (1.0, 2.0, 4.0):
        d, _ = thermal("ginibre", 1024, theta)
        assert discrepancy_norm(GINIBRE, 1024, theta, d)[0] > 0.05


def test_large_theta_tends_to_step_deviation(thermal):
    n = 256
    sups = [discrepancy_norm(GINIBRE, n, t, thermal("ginibre", n, t)[0])[0] for t in (16.0, 64.0, 256.0)]
    d = thermal("ginibre", n, 256.0)[0]
    step_dev = np.max(np.abs(np.exp(determinantal_log_profile(GINIBRE, n)(d.r)) - (d.r <= 1.0)))
    assert sups[0] < sups[1] < sups[2] < step_dev


def test_theta_sweep_has_no_simultaneous_fit():
    table = theta_sweep(QQ, 1024, [1.0, 2.0, 4.0])
    mism = [row.bulk_mismatch for row in table.rows]
    assert int(np.argmin(mism)) == 1
    assert not table.any_simultaneous_agreement
    assert all(row.edge_sup > 0.05 for row in table.rows)
