import numpy as np
import pytest

from larche.geometry import Circle
from larche.grid import Grid2D
from larche.potential import DoubleWell
from larche.spectral import (SpectralError, SpectralProblem, descent_minimum, hminus1_identity_defect,
                             min_rayleigh, quotient, uniformity_report)


def radial_phi(grid, eps, R=0.25):
    X, Y = grid.mesh
    return np.tanh(np.sqrt(2) * Circle((grid.Lx / 2, grid.Ly / 2), R)(X, Y) / eps)


def test_constant_phase_closed_form():
    # phi = 1: quotient over mode k is Lambda_k (eps Lambda_k + f'(1)/eps - gamma1 eps)
    g = Grid2D.square(16)
    eps = 0.1
    lam, w = min_rayleigh(SpectralProblem(g, np.ones(g.shape), eps, 1.0))
    L = -g.laplacian_symbol.ravel()[1:]
    expect = np.min(L * (eps * L + 8 / eps - eps))
    assert lam == pytest.approx(expect, rel=1e-10)
    assert abs(g.mean(w)) < 1e-12


def test_dense_lobpcg_descent_agree():
    g = Grid2D.square(24)
    eps = 0.08
    p = SpectralProblem(g, radial_phi(g, eps), eps, 1.0)
    lam_d, w = min_rayleigh(p)
    lam_l, _ = min_rayleigh(p, method="lobpcg")
    assert lam_l == pytest.approx(lam_d, rel=1e-6, abs=1e-8)
    assert quotient(p, w) == pytest.approx(lam_d, rel=1e-9)
    assert descent_minimum(p, starts=5, iters=300) == pytest.approx(lam_d, rel=1e-5)


def test_minimizer_is_minimal_against_random(rng):
    g = Grid2D.square(20)
    eps = 0.1
    p = SpectralProblem(g, radial_phi(g, eps), eps, 2.0)
    lam, _ = min_rayleigh(p)
    for _ in range(20):
        v = rng.standard_normal(g.shape)
        assert quotient(p, v) >= lam - 1e-9 * abs(lam)


def test_hminus1_identity(rng):
    g = Grid2D(17, 23, 1.0, 1.4)
    assert hminus1_identity_defect(g, rng.standard_normal(g.shape)) < 1e-12


def test_errors():
    g = Grid2D.square(16)
    with pytest.raises(SpectralError):
        SpectralProblem(g, np.ones((3, 3)), 0.1)
    with pytest.raises(SpectralError):
        SpectralProblem(g, np.ones(g.shape), -0.1)
    big = Grid2D.square(100)
    with pytest.raises(SpectralError):
        min_rayleigh(SpectralProblem(big, np.ones(big.shape), 0.1))
    with pytest.raises(ValueError):
        min_rayleigh(SpectralProblem(g, np.ones(g.shape), 0.1), method="qr")


def test_uniformity_rules():
    g = Grid2D.square(16)
    rep = uniformity_report([0.2, 0.1, 0.05], lambda e: np.ones(g.shape), g)
    assert rep.passed and rep.detail == "all C = 0" and rep.ratio == 1.0
    with pytest.raises(ValueError):
        uniformity_report([0.2, 0.1], lambda e: np.ones(g.shape), g)
    # phi = 0 sits on the spinodal top: f'(0) = -4 gives C ~ 1/eps
    flat0 = uniformity_report([0.2, 0.1, 0.05], lambda e: np.zeros(g.shape), g, DoubleWell.quartic())
    assert all(c > 0 for c in flat0.C)
    assert not flat0.passed
