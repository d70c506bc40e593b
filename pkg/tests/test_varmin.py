import itertools
import math

import numpy as np
import pytest

from qpburgers.acceptance import exhaustive_minimum
from qpburgers.energy import energy_G_ell
from qpburgers.grid import GridFunction, PhiPath
from qpburgers.profiles import (FiniteInterval, InfeasibleError, boundary_from_alpha, sample,
                                stationary_profile, symmetric_profile)
from qpburgers.varmin import (linear_ramp, minimize_phi_collocation, minimize_phi_dp,
                              phi_lattice, reduced_F)


def _bumped(base, rng, scale=0.05, modes=4):
    t = (base.x - base.a) / (base.b - base.a)
    bump = sum(c * np.sin(np.pi * (k + 1) * t) for k, c in enumerate(rng.normal(size=modes) * scale))
    return base.with_values(np.clip(base.values + bump, 0.01, 0.99))


# -- dynamic programming ------------------------------------------------------------


def test_dp_matches_itertools_brute_force(b05, rng):
    ell, n, m = 2.5, 6, 7
    u = _bumped(sample(symmetric_profile(b05, ell), -ell, ell, n).u, rng)
    levels = phi_lattice(b05, m)
    cap = int(u.h // (levels[1] - levels[0]))
    best = math.inf
    for js in itertools.product(range(cap + 1), repeat=n):
        if sum(js) != m - 1:
            continue
        path = levels[np.concatenate([[0], np.cumsum(js)])]
        best = min(best, energy_G_ell(u, PhiPath(u.with_values(path)), ell, b05).value)
    dp = minimize_phi_dp(u, ell, b05, m=m, min_levels=2)
    assert dp.value == pytest.approx(best, abs=1e-12)


def test_dp_matches_exhaustive(b05, rng):
    ell, n, m = 2.5, 16, 12
    u = _bumped(sample(symmetric_profile(b05, ell), -ell, ell, n).u, rng)
    dp = minimize_phi_dp(u, ell, b05, m=m, min_levels=2)
    value, path = exhaustive_minimum(u, b05, m)
    assert dp.value == pytest.approx(value, abs=1e-12)
    np.testing.assert_array_equal(path, dp.phi_star.grid.values)


def test_dp_monotone_under_nested_refinement(b05):
    ell = 4.0
    u = sample(symmetric_profile(b05, ell), -ell, ell, 40).u
    vals = [minimize_phi_dp(u, ell, b05, m=m).value for m in (51, 101, 201, 401)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_dp_path_endpoints_and_admissible(b05):
    ell = 4.0
    u = sample(symmetric_profile(b05, ell), -ell, ell, 200).u
    res = minimize_phi_dp(u, ell, b05, m=200)
    path = res.phi_star
    assert path.endpoint_left == b05.phi_minus and path.endpoint_right == b05.phi_plus
    assert path.is_admissible()
    assert res.method == "DP" and res.tie_break == "lexicographic-smallest"


def test_dp_rejects_few_levels(b05):
    u = sample(symmetric_profile(b05, 3.0), -3.0, 3.0, 60).u
    with pytest.raises(ValueError):
        minimize_phi_dp(u, 3.0, b05, m=10)


def test_dp_lattice_too_coarse(b05):
    # cells narrower than one level spacing cannot move at all
    ell = 3.0
    u = sample(symmetric_profile(b05, ell), -ell, ell, 600).u
    with pytest.raises(InfeasibleError):
        minimize_phi_dp(u, ell, b05, m=50)


# -- feasibility ----------------------------------------------------------------------


def test_max_slope_ramp():
    b = boundary_from_alpha(0.3)
    ell = (b.phi_plus - b.phi_minus) / 2
    u = GridFunction(-ell, ell, np.linspace(b.u_minus, b.u_plus, 41))
    res = minimize_phi_collocation(u, ell, b)
    np.testing.assert_allclose(res.phi_star.cell_slopes(), 1.0, atol=1e-12)
    assert math.isfinite(res.value)


def test_infeasible_interval():
    b = boundary_from_alpha(0.3)
    ell = 0.95 * (b.phi_plus - b.phi_minus) / 2
    u = GridFunction(-ell, ell, np.linspace(b.u_minus, b.u_plus, 41))
    with pytest.raises(InfeasibleError):
        minimize_phi_collocation(u, ell, b)
    with pytest.raises(InfeasibleError):
        minimize_phi_dp(u, ell, b, m=50)


def test_wrong_domain_rejected(b05):
    u = GridFunction(-2.0, 3.0, np.full(51, 0.5))
    with pytest.raises(ValueError):
        minimize_phi_collocation(u, 3.0, b05)


# -- collocation ------------------------------------------------------------------------


def test_collocation_kkt_and_accuracy(b05):
    ell = 6.0
    s = sample(symmetric_profile(b05, ell), -ell, ell, 600)
    res = minimize_phi_collocation(s.u, ell, b05)
    assert res.converged and res.kkt_residual < 1e-10
    assert np.max(np.abs(res.phi_star.grid.values - s.phi.values)) <= 1e-6


def test_collocation_second_order(b05):
    ell = 5.0
    prof = symmetric_profile(b05, ell)
    errs = []
    for n in (100, 200, 400):
        s = sample(prof, -ell, ell, n)
        res = minimize_phi_collocation(s.u, ell, b05)
        errs.append(np.max(np.abs(res.phi_star.grid.values - s.phi.values)))
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(1.8 <= r <= 2.2 for r in rates)


def test_collocation_restart_at_fixed_point(b05):
    ell = 5.0
    s = sample(symmetric_profile(b05, ell), -ell, ell, 300)
    first = minimize_phi_collocation(s.u, ell, b05)
    again = minimize_phi_collocation(s.u, ell, b05, init=first.phi_star)
    assert again.iterations == 0
    assert again.value == pytest.approx(first.value, abs=1e-14)


def test_collocation_below_dp_on_step(b05):
    ell, n = 4.0, 200
    x = np.linspace(-ell, ell, n + 1)
    u = GridFunction(-ell, ell, np.where(x < 0.7, 0.3, 0.8))
    u = u.with_values(np.concatenate([[b05.u_minus], u.values[1:-1], [b05.u_plus]]))
    col = minimize_phi_collocation(u, ell, b05)
    dp = minimize_phi_dp(u, ell, b05, m=400)
    assert col.converged
    assert col.value <= dp.value + 1e-12


def test_collocation_init_checks(b05):
    ell = 3.0
    s = sample(symmetric_profile(b05, ell), -ell, ell, 60)
    other = sample(symmetric_profile(b05, ell), -ell, ell, 30)
    with pytest.raises(ValueError):
        minimize_phi_collocation(s.u, ell, b05, init=other.phi_path())


def test_linear_ramp(b05):
    u = GridFunction(-3.0, 3.0, np.full(61, 0.5))
    r = linear_ramp(u, b05)
    assert r.endpoint_left == b05.phi_minus and r.endpoint_right == b05.phi_plus
    np.testing.assert_allclose(np.diff(r.grid.values), np.diff(r.grid.values)[0], atol=1e-14)


def test_asymmetric_plus_variant(asym):
    ell, n = 8.0, 400
    prof = stationary_profile(asym, FiniteInterval(0.0, ell))
    s = sample(prof, 0.0, ell, n)
    res = minimize_phi_collocation(s.u, ell, asym)
    assert res.converged
    assert np.max(np.abs(res.phi_star.grid.values - s.phi.values)) <= 1e-5
    dp = minimize_phi_dp(s.u, ell, asym, m=400)
    assert dp.value >= res.value - 1e-12


# -- reduced functional ----------------------------------------------------------------------


def test_reduced_F_minimal_at_stationary(b05, rng):
    ell, n = 5.0, 200
    ubar = sample(symmetric_profile(b05, ell), -ell, ell, n).u
    f0 = reduced_F(ubar, ell, b05)
    for _ in range(50):
        u = _bumped(ubar, rng, scale=float(rng.uniform(0.005, 0.1)), modes=6)
        assert reduced_F(u, ell, b05) > f0


def test_reduced_F_reflection(b05, rng):
    ell, n = 4.0, 160
    ubar = sample(symmetric_profile(b05, ell), -ell, ell, n).u
    for _ in range(10):
        u = _bumped(ubar, rng)
        mirrored = u.with_values(1.0 - u.values[::-1])
        assert reduced_F(u, ell, b05) == pytest.approx(reduced_F(mirrored, ell, b05), abs=1e-10)


def test_reduced_F_dp_route_agrees(b05):
    ell = 4.0
    u = sample(symmetric_profile(b05, ell), -ell, ell, 200).u
    assert reduced_F(u, ell, b05, use_dp=True) == pytest.approx(reduced_F(u, ell, b05), abs=1e-12)
