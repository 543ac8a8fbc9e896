"""Lowest H^-1 Rayleigh quotient of the linearized Cahn-Hilliard form.

For mean-zero w on the grid we minimize::

    [ <(-eps lap + f'(phi)/eps) w, w> - gamma1 eps <w, w> ] / <w, (-lap)^{-1} w>

with the Neumann 5-point Laplacian and the trapezoid inner product.  In the
cosine basis (orthonormal for that inner product) ``-lap = Lambda`` is
diagonal, and substituting ``w = Lambda^{1/2} b`` turns the quotient into a
standard symmetric eigenproblem for
``Lambda^{1/2} (eps Lambda + Q^T W diag(f'/eps) Q - gamma1 eps) Lambda^{1/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import warnings

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import LinearOperator, lobpcg

from .grid import Grid2D
from .potential import DoubleWell


class SpectralError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    grid: Grid2D
    phi: np.ndarray
    epsilon: float
    gamma1: float = 1.0

    DENSE_MAX = 96

    def __post_init__(self):
        if self.phi.shape != self.grid.shape:
            raise SpectralError("phi does not match the grid")
        if self.gamma1 < 0 or self.epsilon <= 0:
            raise SpectralError("need gamma1 >= 0 and epsilon > 0")


def _trap(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[[0, -1]] *= 0.5
    return w


def _basis_1d(n: int, h: float) -> np.ndarray:
    """Columns: cosine eigenvectors of the mirror Laplacian, orthonormal for trapezoid weights."""
    j = np.arange(n)
    V = np.cos(np.pi * np.outer(j, j) / (n - 1))
    w = _trap(n, h)
    norms = np.sqrt(np.einsum("i,ik->k", w, V**2))
    return V / norms


def cosine_basis(grid: Grid2D):
    """Returns (B, lam) with B[:, k] the k-th 2D basis function (flattened) and lam >= 0
    its eigenvalue of -laplacian; the constant mode is first."""
    Qx = _basis_1d(grid.nx, grid.hx)
    Qy = _basis_1d(grid.ny, grid.hy)
    B = np.einsum("ia,jb->ijab", Qx, Qy).reshape(grid.nx * grid.ny, grid.nx * grid.ny)
    lam = (-grid.laplacian_symbol).ravel()
    return B, lam


def reduced_matrix(p: SpectralProblem, potential: DoubleWell) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    B, lam = cosine_basis(p.grid)
    B, lam = B[:, 1:], lam[1:]
    wf = (p.grid.weights * potential.df(p.phi)).ravel() / p.epsilon
    A = B.T @ (wf[:, None] * B)
    A[np.diag_indices_from(A)] += p.epsilon * lam - p.gamma1 * p.epsilon
    s = np.sqrt(lam)
    return s[:, None] * A * s[None, :], B, s


def min_rayleigh(p: SpectralProblem, potential: DoubleWell | None = None,
                 method: str = "dense", **kw) -> tuple[float, np.ndarray]:
    """Smallest value of the quotient and a minimizing mean-zero w (unit H^-1 norm).

    ``method="dense"`` (grids up to 96 x 96) solves the full eigenproblem;
    ``method="lobpcg"`` works matrix-free and handles finer grids.
    """
    P = potential or DoubleWell.quartic()
    if method == "lobpcg":
        return _min_rayleigh_lobpcg(p, P, **kw)
    if method != "dense":
        raise ValueError(f"unknown method {method!r}")
    if p.grid.nx > p.DENSE_MAX or p.grid.ny > p.DENSE_MAX:
        raise SpectralError("dense eigensolve limited to 96 x 96 nodes; use method='lobpcg'")
    M, B, s = reduced_matrix(p, P)
    try:
        vals, vecs = eigh(M, subset_by_index=[0, 0])
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver failed: {exc}") from exc
    coeffs = s * vecs[:, 0]
    w = (B @ coeffs).reshape(p.grid.shape)
    return float(vals[0]), w


def _min_rayleigh_lobpcg(p: SpectralProblem, P: DoubleWell, block: int = 6, tol: float = 1e-7,
                         maxiter: int = 500, seed: int = 0) -> tuple[float, np.ndarray]:
    g = p.grid
    Qx, Qy = _basis_1d(g.nx, g.hx), _basis_1d(g.ny, g.hy)
    wx, wy = _trap(g.nx, g.hx), _trap(g.ny, g.hy)
    lam = -g.laplacian_symbol
    s = np.sqrt(lam)
    keep = np.ones(g.shape, bool)
    keep[0, 0] = False
    s_k = s[keep]
    fp = P.df(p.phi) / p.epsilon - p.gamma1 * p.epsilon
    n = int(keep.sum())

    def to_field(b):
        A = np.zeros(g.shape)
        A[keep] = s_k * b
        return Qx @ A @ Qy.T

    def to_coeff(v):
        A = Qx.T @ (wx[:, None] * v * wy[None, :]) @ Qy
        return s_k * A[keep]

    def matvec(X):
        X = X.reshape(n, -1)
        out = np.empty_like(X)
        for j in range(X.shape[1]):
            w = to_field(X[:, j])
            out[:, j] = to_coeff(-p.epsilon * g.laplacian(w) + fp * w)
        return out

    shift = lam[keep] * (p.epsilon * lam[keep] + abs(P.df(1.0)) / p.epsilon) + 1.0
    A = LinearOperator((n, n), matvec=matvec, matmat=matvec, dtype=float)
    T = LinearOperator((n, n), matvec=lambda x: x.reshape(n, -1) / shift[:, None],
                       matmat=lambda x: x / shift[:, None], dtype=float)
    X0 = np.random.default_rng(seed).standard_normal((n, block))
    with warnings.catch_warnings():
        # lobpcg warns when its own residual tolerance is missed; the result is still the best iterate
        warnings.simplefilter("ignore", UserWarning)
        vals, vecs = lobpcg(A, X0, M=T, largest=False, tol=tol, maxiter=maxiter)
    i = int(np.argmin(vals))
    return float(vals[i]), to_field(vecs[:, i])


def quotient(p: SpectralProblem, w: np.ndarray, potential: DoubleWell | None = None) -> float:
    """Direct evaluation of the quotient for a mean-zero w."""
    P = potential or DoubleWell.quartic()
    g = p.grid
    w = w - g.mean(w)
    num = (p.epsilon * g.dirichlet_form(w) + g.inner(P.df(p.phi) / p.epsilon, w * w)
           - p.gamma1 * p.epsilon * g.inner(w, w))
    psi = g.solve_poisson(w)
    return num / g.inner(w, psi)


def hminus1_identity_defect(grid: Grid2D, w: np.ndarray) -> float:
    """| <w, (-lap)^{-1} w> - |grad Psi|^2 | / |grad Psi|^2 for mean-zero w."""
    w = w - grid.mean(w)
    psi = grid.solve_poisson(w)
    a = grid.inner(w, psi)
    b = grid.dirichlet_form(psi)
    return abs(a - b) / b


def descent_minimum(p: SpectralProblem, potential: DoubleWell | None = None, starts: int = 50,
                    iters: int = 400, seed: int = 0) -> float:
    """Minimum of the quotient by locally optimal projected gradient descent from random starts.

    Each iteration minimizes over the span of the iterate, its projected
    gradient and the previous search direction (a three-term Rayleigh-Ritz).
    """
    P = potential or DoubleWell.quartic()
    M, _, _ = reduced_matrix(p, P)
    d = np.sqrt(np.abs(np.diag(M))) + 1e-30
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(starts):
        x = rng.standard_normal(M.shape[0])
        x /= np.linalg.norm(x)
        prev = None
        for _ in range(iters):
            Mx = M @ x
            rq = x @ Mx
            g = Mx - rq * x
            if np.linalg.norm(g) < 1e-13 * max(1.0, abs(rq)):
                break
            g = g / d**2
            g -= (g @ x) * x
            basis = [x, g] if prev is None else [x, g, prev]
            Qb, _ = np.linalg.qr(np.stack(basis, axis=1))
            vals, vecs = np.linalg.eigh(Qb.T @ M @ Qb)
            x_new = Qb @ vecs[:, 0]
            x_new /= np.linalg.norm(x_new)
            prev = x_new - (x_new @ x) * x
            nrm = np.linalg.norm(prev)
            prev = None if nrm < 1e-14 else prev / nrm
            x = x_new
        best = min(best, float(x @ M @ x))
    return best


@dataclass
class UniformityReport:
    epsilons: list
    lambda_min: list
    C: list
    gamma1: float
    passed: bool
    ratio: float
    detail: str

    def rows(self):
        return list(zip(self.epsilons, self.lambda_min, self.C))


def uniformity_report(epsilons, phi_builder, grid, potential: DoubleWell | None = None,
                      gamma1: float = 1.0, max_ratio: float = 2.0, method: str = "dense") -> UniformityReport:
    """C(eps) = max(0, -lambda_min) for each eps; passes iff all finite and max/min <= max_ratio.

    ``phi_builder(eps)`` returns the field phi on the grid.  ``grid`` is either a
    single Grid2D or a callable ``eps -> Grid2D`` (fixed eps/h sweeps).  When
    every C is zero the lower bound holds with C = 0 for all eps, which counts
    as uniform.
    """
    eps = [float(e) for e in epsilons]
    if len(eps) < 3:
        raise ValueError("uniformity needs at least three epsilons")
    lams, Cs = [], []
    for e in eps:
        g = grid(e) if callable(grid) else grid
        phi = phi_builder(e) if not callable(grid) else phi_builder(e, g)
        lam, _ = min_rayleigh(SpectralProblem(g, phi, e, gamma1), potential, method)
        lams.append(lam)
        Cs.append(max(0.0, -lam))
    Ca = np.array(Cs)
    finite = bool(np.all(np.isfinite(Ca)))
    if np.all(Ca == 0):
        ratio, detail = 1.0, "all C = 0"
    elif np.any(Ca == 0):
        ratio, detail = float("inf"), "C vanishes for some eps only"
    else:
        ratio, detail = float(Ca.max() / Ca.min()), ""
    return UniformityReport(eps, lams, Cs, gamma1, finite and ratio <= max_ratio, ratio, detail)
