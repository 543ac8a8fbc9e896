import numpy as np
import pytest

from larche.geometry import Circle
from larche.grid import Grid2D
from larche.studies import convergence_run, equilibrate, fitted, gibbs_thomson_study, sweep_grid


def test_sweep_grid_path():
    assert [sweep_grid(e).nx for e in (0.08, 0.04, 0.02)] == [101, 289, 801]
    g = sweep_grid(0.05, L=1.0, ratio=3.0, exponent=0.0)
    assert 0.05 / g.h >= 3.0


def test_fitted_tolerates_bad_values():
    assert np.isnan(fitted([0.08, 0.04, 0.02], [1.0, 0.0, 1.0])[0])
    assert np.isnan(fitted([0.08, 0.04, 0.02], [1.0, np.nan, 1.0])[0])
    assert fitted([0.08, 0.04, 0.02], [0.08, 0.04, 0.02])[0] == pytest.approx(1.0)


def test_gibbs_thomson_coarse(profiles):
    g = Grid2D.square(97)
    res = gibbs_thomson_study(0.03, g, Circle((0.5, 0.5), 0.2), profiles, delta=0.12, rel_tol=1e-5)
    assert res.spread <= 1e-5 * abs(res.state.mu.mean()) * 1.01
    assert res.radius == pytest.approx(0.2, abs=0.01)
    assert res.relative < 0.3


def test_convergence_run_short(profiles):
    g = Grid2D.square(97)
    r = convergence_run(0.03, g, Circle((0.5, 0.5), 0.2), profiles, 1e-3, delta=0.12)
    assert r.steps == int(np.ceil(1e-3 / 0.03**3 - 1e-9))
    assert r.err_mu >= 0 and r.err_c >= 0
    assert r.history[0][0] == pytest.approx(0.03**3)
