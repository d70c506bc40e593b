import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpburgers import asymptotics
from qpburgers.asymptotics import (COLUMNS, SweepSpec, cosh_law_slope, current_asymptotic,
                                   dev_gamma_cost, equicoercivity_probe, excess_asymptotic,
                                   excess_limit, gluing_check, minimizer_convergence,
                                   profile_distance, run_sweep, summary, write_rows)
from qpburgers.profiles import (WholeLine, make_boundary, stationary_profile,
                                symmetric_profile)


# -- current -------------------------------------------------------------------------------


def test_current_gap_depends_on_alpha_ell_only():
    ratios = [current_asymptotic(a, 12.0 / a).relative_gap for a in (0.3, 0.5, 0.7)]
    assert max(ratios) - min(ratios) <= 1e-10


def test_scaled_current_increases_to_limit():
    vals = [current_asymptotic(0.5, ell).scaled_value for ell in (4, 8, 16, 32)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(0.25, rel=1e-5)


def test_current_rejects_nonpositive():
    from qpburgers.profiles import InfeasibleError
    with pytest.raises(InfeasibleError):
        current_asymptotic(0.5, 0.3)


# -- excess energy -----------------------------------------------------------------------------


def test_excess_limit_value():
    assert excess_limit(0.9) == pytest.approx(37.8947, abs=1e-4)
    assert excess_limit(0.5) == pytest.approx(16.0 / 3.0, abs=1e-15)


def test_excess_gap_shrinks():
    g8 = excess_asymptotic(0.5, 8.0).relative_gap
    g16 = excess_asymptotic(0.5, 16.0).relative_gap
    g24 = excess_asymptotic(0.5, 24.0).relative_gap
    assert g16 <= g8 / 10
    assert g24 <= 1e-3


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_excess_gap_at_fixed_alpha_ell(alpha):
    assert excess_asymptotic(alpha, 12.0 / alpha).relative_gap <= 1e-3


# -- Gamma-development cost ----------------------------------------------------------------


def test_dev_cost_z0_collapses():
    a = dev_gamma_cost(0.5, 12.0, 0.0)
    b = excess_asymptotic(0.5, 12.0)
    assert a == b


@settings(max_examples=30)
@given(st.floats(0.05, 5.0))
def test_dev_cost_even_in_z(z):
    assert dev_gamma_cost(0.5, 20.0, z).raw_value == dev_gamma_cost(0.5, 20.0, -z).raw_value


def test_dev_cost_example():
    assert dev_gamma_cost(0.5, 28.0, 2.0).relative_gap <= 2e-2


def test_dev_cost_gap_decreasing():
    gaps = [dev_gamma_cost(0.5, ell, 2.0).relative_gap for ell in (8, 16, 28)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_dev_cost_rejects_large_shift():
    with pytest.raises(ValueError):
        dev_gamma_cost(0.5, 4.0, 4.0)


def test_cosh_law_slope():
    assert cosh_law_slope(0.5, 28.0, [-4, -2, 2, 4]) == pytest.approx(0.5, rel=2e-2)
    with pytest.raises(ValueError):
        cosh_law_slope(0.5, 28.0, [0.0])


def test_gluing_identity():
    glued, halves = gluing_check(0.5, 12.0, 1.0)
    assert glued == pytest.approx(halves, abs=1e-8)


# -- convergence of minimizers ---------------------------------------------------------------


def test_profile_distance_self_zero(b05):
    p = stationary_profile(b05, WholeLine())
    assert profile_distance(p, p) == (0.0, 0.0)


def test_profile_distance_shift(b05):
    p = stationary_profile(b05, WholeLine())
    l2, _ = profile_distance(p.translate(1.0), p, shift=1.0)
    assert l2 <= 1e-12


def test_minimizer_convergence_symmetric(b05):
    rows = minimizer_convergence(b05, (4.0, 8.0, 16.0, 20.0))
    l2 = [r.l2_u for r in rows]
    assert all(a > b for a, b in zip(l2, l2[1:]))
    assert l2[-1] <= 1e-3


def test_minimizer_convergence_half_line():
    b = make_boundary(0.3, 0.8)
    rows = minimizer_convergence(b, (4.0, 8.0, 16.0, 20.0))
    l2 = [r.l2_u for r in rows]
    assert all(a > b for a, b in zip(l2, l2[1:]))
    assert l2[-1] <= 1e-3
    assert all(r.pinned_value == 0.3 for r in rows)


def test_equicoercivity_probe():
    rows = equicoercivity_probe(0.5, (8.0, 16.0, 32.0))
    near = [r.recentered_l2 for r in rows]
    far = [r.unshifted_l2 for r in rows]
    assert all(a > b for a, b in zip(near, near[1:]))
    assert all(a < b for a, b in zip(far, far[1:]))
    assert rows[-1].scaled_excess > 100 * rows[0].scaled_excess
    assert all(a.raw_excess > b.raw_excess for a, b in zip(rows, rows[1:]))


# -- sweeps ---------------------------------------------------------------------------------


def test_sweep_order_and_columns():
    spec = SweepSpec((0.5, 0.3), (16.0, 8.0), (0.0, 1.0), kind="gamma")
    rows = run_sweep(spec)
    got = [(r.alpha, r.ell, r.z) for r in rows]
    want = [(a, e, z) for a in (0.5, 0.3) for e in (16.0, 8.0) for z in (0.0, 1.0)]
    assert got == want
    assert len(rows[0].as_csv()) == len(COLUMNS)


def test_sweep_kinds():
    cur = run_sweep(SweepSpec((0.5,), (8.0,), (1.0,), kind="current"))
    assert len(cur) == 1 and cur[0].z == 0.0 and cur[0].limit_value == 0.25
    beta = run_sweep(SweepSpec((0.5,), (8.0, 16.0), kind="beta", beta=0.4))
    assert all(math.isnan(r.limit_value) and math.isnan(r.relative_gap) for r in beta)
    with pytest.raises(ValueError):
        run_sweep(SweepSpec((0.5,), (8.0,), kind="beta"))


@pytest.mark.parametrize("kwargs", [dict(alpha_list=(1.2,), ell_list=(8,)),
                                    dict(alpha_list=(0.5,), ell_list=(0,)),
                                    dict(alpha_list=(0.5,), ell_list=(2,), z_list=(3,)),
                                    dict(alpha_list=(0.5,), ell_list=(2,), kind="bogus")])
def test_sweep_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_sweep_thread_cap_independent(monkeypatch):
    spec = SweepSpec((0.3, 0.5, 0.7), (8.0, 12.0), (0.0, 2.0))
    monkeypatch.setenv("QPB_THREADS", "1")
    serial = run_sweep(spec)
    monkeypatch.setenv("QPB_THREADS", "4")
    assert asymptotics._thread_cap() == 4
    assert run_sweep(spec) == serial


def test_sweep_csv_appends(tmp_path):
    path = tmp_path / "rows.csv"
    spec = SweepSpec((0.5,), (8.0, 16.0), output_path=str(path))
    rows = run_sweep(spec)
    run_sweep(spec)
    with path.open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    table = list(csv.reader(lines))
    assert tuple(table[0]) == COLUMNS
    assert len(table) == 1 + 2 * len(rows)
    assert float(table[1][3]) == rows[0].raw_value


def test_write_rows_header_once(tmp_path):
    path = tmp_path / "out.csv"
    row = excess_asymptotic(0.5, 8.0)
    write_rows([row], path, ["qpburgers test"])
    write_rows([row], path, ["qpburgers test"])
    text = path.read_text().splitlines()
    assert text.count("# qpburgers test") == 1
    assert sum(1 for ln in text if ln.startswith("alpha")) == 1


def test_summary():
    spec = SweepSpec((0.5,), (8.0, 16.0))
    rows = run_sweep(spec)
    s = summary(rows, spec)
    assert s["max_gap"] == max(r.relative_gap for r in rows)
    assert len(s["rows"]) == 2


def test_symmetric_profile_excess_matches_energy(b05):
    # the closed-form excess equals G_ell(minimizer) minus the whole-line minimum
    from qpburgers.energy import minimizer_energy, minimum_energy_whole_line
    ell = 6.0
    raw = excess_asymptotic(0.5, ell).raw_value
    assert raw == pytest.approx(minimizer_energy(b05, ell) - minimum_energy_whole_line(b05),
                                abs=1e-10)
    assert symmetric_profile(b05, ell).current < b05.whole_line_current
    assert np.isfinite(raw)
