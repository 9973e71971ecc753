import numpy as np
import pytest

from wmlsim.metrics import trace_distance
from wmlsim.wml import transfer_coeffs
from wmlsim.worstcase import (
    closed_form_error,
    closed_form_yz,
    exact_trace_error,
    rankone_coeffs,
    rankone_jump,
    rankone_sample_count,
    rankone_trajectory,
    recurrence_yz,
    simulate_rankone,
    trace_distance_lb,
    zn_asymptotic,
)

GRID = [(d, delta) for d in (2, 3, 4, 8, 64) for delta in (1e-3, 0.01, 0.1, 0.3)]


def test_small_delta_expansions():
    co = rankone_coeffs(2, 0.01)
    assert abs(co.lam - (1 - 0.25e-4)) <= 1e-6
    for delta in (0.02, 0.01, 0.005):
        assert abs(rankone_coeffs(3, delta).kappa - delta**2 / 4) <= 2 * delta**3


def test_taylor_of_a():
    for d in (2, 4, 8):
        for delta in (0.04, 0.02, 0.01):
            a = rankone_coeffs(d, delta).a
            assert abs(a + delta - d / 4 * delta**2) <= d * d / 20 * delta**3


def test_consistent_with_transfer_coeffs():
    co, tc = rankone_coeffs(2, 0.1), transfer_coeffs(2, 0.1)
    assert co.s == pytest.approx(tc.a + tc.b, abs=1e-12)
    assert co.c == pytest.approx(tc.c, abs=1e-12)


def test_coeff_errors():
    with pytest.raises(ValueError):
        rankone_coeffs(1, 0.1)
    with pytest.raises(ValueError):
        rankone_coeffs(2, 0.0)


@pytest.mark.parametrize("d, delta", GRID)
def test_closed_form_matches_recurrence(d, delta):
    co = rankone_coeffs(d, delta)
    for n in (0, 1, 7, 50):
        y, z = closed_form_yz(co, n)
        yr, zr = recurrence_yz(co, n)
        assert abs(y - yr) <= 1e-12 and abs(z - zr) <= 1e-12
        assert abs(y + d * z - 1) <= 1e-12
        if n >= 1:
            assert z > 0


@pytest.mark.parametrize("d, delta", GRID)
def test_eigenstructure(d, delta):
    co = rankone_coeffs(d, delta)
    m = co.update_matrix
    np.testing.assert_allclose(m @ [1, -1], [1, -1], atol=1e-12)
    v = np.array([co.s, co.kappa])
    np.testing.assert_allclose(m @ v, co.lam * v, atol=1e-12)
    assert co.lam < 1 and co.c > 0 and co.kappa > 0


def test_closed_form_small_n_and_limit():
    co = rankone_coeffs(3, 0.2)
    assert closed_form_yz(co, 0) == (1.0, 0.0)
    y1, z1 = closed_form_yz(co, 1)
    assert y1 == pytest.approx(1 + co.s) and z1 == pytest.approx(co.c / 3)
    x = co.lambda_minus_one
    y, z = closed_form_yz(co, 20000)
    assert y == pytest.approx(co.kappa / x, rel=1e-9)
    assert z == pytest.approx(-co.kappa / x, rel=1e-9)
    assert y + 3 * z == pytest.approx(1)


def test_asymptotics():
    assert zn_asymptotic(1.0, 100) == pytest.approx(0.0025)
    gaps = []
    for n in (50, 100, 200, 400):
        _, z = closed_form_yz(rankone_coeffs(4, 1.0 / n), n)
        gaps.append(abs(n * z - 0.25))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert trace_distance_lb(2, 0.3) == pytest.approx(0.15)


def test_exact_error_dominates_lower_bound():
    for d in (2, 5, 32):
        y, z = closed_form_yz(rankone_coeffs(d, 0.01), 100)
        assert exact_trace_error(d, y, z) >= trace_distance_lb(d, z)
    assert closed_form_error(3, 0.0, 10) == 0.0


def test_simulation_flagship():
    sim = simulate_rankone(2, 1.0, 64, "analytic")
    assert sim.coeff_deviation <= 1e-10 and sim.off_space_residual <= 1e-10


def test_simulation_brute_force_and_d4():
    assert simulate_rankone(2, 1.0, 16, "brute_force").coeff_deviation <= 1e-10
    assert simulate_rankone(4, 1.0, 16).coeff_deviation <= 1e-10
    with pytest.raises(ValueError):
        simulate_rankone(4, 1.0, 16, "brute_force")
    with pytest.raises(ValueError):
        simulate_rankone(5, 1.0, 16)


def test_simulation_trace_distance_lower_bound():
    d, t, n = 3, 1.0, 128
    sim = simulate_rankone(d, t, n)
    dist = trace_distance(sim.rho, rankone_jump(d).matrix)
    assert dist >= trace_distance_lb(d, sim.z_closed) - 1e-10


def test_error_times_n_converges():
    sim = simulate_rankone(2, 1.0, 1024)
    err = trace_distance(sim.rho, rankone_jump(2).matrix)
    assert 1024 * trace_distance_lb(2, sim.z) == pytest.approx(1 / 8, rel=0.1)
    assert err >= trace_distance_lb(2, sim.z)


@pytest.mark.parametrize("d", [2, 4, 8])
def test_sample_count_above_worst_case_lower_bound(d):
    eps = 1e-3
    assert eps <= 0.1 * (d - 1) / 16
    n = rankone_sample_count(d, 1.0, eps)
    assert n >= d / 32 / eps
    assert closed_form_error(d, 1.0, n) <= eps < closed_form_error(d, 1.0, n - 1)


def test_rankone_operator_norm():
    assert rankone_jump(5).op_norm_sq == pytest.approx(1.0)


def test_trajectory():
    traj = rankone_trajectory(3, 1.0, 40)
    assert traj.points[0] == (0, 1.0, 0.0)
    n, y, z = traj.points[-1]
    yc, zc = closed_form_yz(rankone_coeffs(3, 1.0 / 40), 40)
    assert n == 40 and abs(y - yc) <= 1e-12 and abs(z - zc) <= 1e-12
    assert all(abs(y + 3 * z - 1) <= 1e-12 for _, y, z in traj.points)
