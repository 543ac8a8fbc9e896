"""Linear elasticity with a concentration-dependent stress-free strain (d = 2).

Tensors are stored in Voigt form acting on ``(E11, E22, 2 E12)`` and returning
``(S11, S22, S12)``.  Since the tensor only sees ``sym(A)``, ``C grad(u)`` and
``C E(u)`` coincide; everything here works with ``sym(grad u)``.

The static problem ``div C(E(u) - E* c) = 0`` with ``u = 0`` on the boundary is
discretized with bilinear elements on the nodal grid (2x2 Gauss quadrature),
which makes the discrete elastic energy, its minimizer, and its derivative
with respect to the nodal concentrations mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .grid import Grid2D


class ElasticityError(RuntimeError):
    pass


def _sym(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def to_voigt(E) -> np.ndarray:
    """(..., 2, 2) strain -> (..., 3) with engineering shear 2 E12."""
    E = _sym(E)
    return np.stack([E[..., 0, 0], E[..., 1, 1], 2.0 * E[..., 0, 1]], axis=-1)


def stress_from_voigt(s) -> np.ndarray:
    s = np.asarray(s)
    out = np.empty(s.shape[:-1] + (2, 2))
    out[..., 0, 0] = s[..., 0]
    out[..., 1, 1] = s[..., 1]
    out[..., 0, 1] = out[..., 1, 0] = s[..., 2]
    return out


@dataclass(frozen=True)
class ElasticityTensor:
    voigt: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        V = np.asarray(self.voigt, dtype=float)
        if V.shape != (3, 3):
            raise ValueError("Voigt matrix must be 3x3")
        if not np.allclose(V, V.T, atol=1e-14 * max(1.0, np.abs(V).max())):
            raise ValueError("Voigt matrix must be symmetric (major symmetry)")
        V = 0.5 * (V + V.T)
        object.__setattr__(self, "voigt", tuple(tuple(float(v) for v in row) for row in V))
        if self.c2 <= 0:
            raise ValueError("elasticity tensor is not positive definite on symmetric matrices")

    @classmethod
    def isotropic(cls, lam: float, mu: float) -> "ElasticityTensor":
        if mu <= 0 or lam + mu <= 0:
            raise ValueError("need mu > 0 and lambda + mu > 0")
        return cls(((lam + 2 * mu, lam, 0.0), (lam, lam + 2 * mu, 0.0), (0.0, 0.0, mu)))

    @property
    def V(self) -> np.ndarray:
        return np.asarray(self.voigt)

    @property
    def mandel(self) -> np.ndarray:
        """Matrix of A:CA in the orthonormal coordinates (E11, E22, sqrt2 E12)."""
        D = np.diag([1.0, 1.0, np.sqrt(2.0)])
        return D @ self.V @ D

    @property
    def c2(self) -> float:
        """Largest c2 with ``A:CA >= 2 c2 |sym A|^2``."""
        return 0.5 * float(np.linalg.eigvalsh(self.mandel)[0])

    def tensor4(self) -> np.ndarray:
        """Full C_{ijkl} with minor and major symmetries."""
        idx = {(0, 0): 0, (1, 1): 1, (0, 1): 2, (1, 0): 2}
        C = np.empty((2, 2, 2, 2))
        for (i, j), a in idx.items():
            for (k, l), b in idx.items():
                C[i, j, k, l] = self.V[a, b]
        return C

    def apply(self, A) -> np.ndarray:
        """C sym(A) for one matrix or a stack of shape (..., 2, 2)."""
        return stress_from_voigt(to_voigt(A) @ self.V.T)

    def rank_one_margin(self, samples: int = 2000, seed: int = 0) -> float:
        """min over sampled unit a, b of ``(a⊗b):C(a⊗b) - c2 |a⊗b|^2``."""
        rng = np.random.default_rng(seed)
        t = rng.uniform(0, 2 * np.pi, (samples, 2))
        a = np.stack([np.cos(t[:, 0]), np.sin(t[:, 0])], axis=1)
        b = np.stack([np.cos(t[:, 1]), np.sin(t[:, 1])], axis=1)
        ab = a[:, :, None] * b[:, None, :]
        q = np.einsum("nij,nij->n", ab, self.apply(ab))
        return float(np.min(q - self.c2 * np.einsum("nij,nij->n", ab, ab)))


@dataclass(frozen=True)
class Eigenstrain:
    matrix: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.shape != (2, 2) or abs(M[0, 1] - M[1, 0]) > 1e-14:
            raise ValueError("eigenstrain must be a symmetric 2x2 matrix")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in M))

    @classmethod
    def isotropic(cls, estar: float) -> "Eigenstrain":
        return cls(((estar, 0.0), (0.0, estar)))

    @property
    def M(self) -> np.ndarray:
        return np.asarray(self.matrix)


def energy_and_stress(C: ElasticityTensor, Estar: Eigenstrain, c, Eu):
    """W, S = W_{,E} and W_{,c} for ``W = 1/2 (E - E* c):C(E - E* c)``.

    ``c`` may be an array broadcasting against the leading axes of ``Eu``.
    """
    c = np.asarray(c, dtype=float)
    el = _sym(Eu) - c[..., None, None] * Estar.M
    S = C.apply(el)
    W = 0.5 * np.einsum("...ij,...ij->...", el, S)
    dWdc = -np.einsum("ij,...ij->...", Estar.M, S)
    return W, S, dWdc


def eshelby_like(C: ElasticityTensor, gradU, c, Estar: Eigenstrain) -> np.ndarray:
    """``W Id - (grad u)^T S`` for stacks of gradients."""
    W, S, _ = energy_and_stress(C, Estar, c, gradU)
    gradU = np.asarray(gradU, dtype=float)
    return W[..., None, None] * np.eye(2) - np.swapaxes(gradU, -1, -2) @ S


def elastic_jump(C, Estar, gradU_plus, gradU_minus, c_plus, c_minus, nu) -> np.ndarray:
    """``1/2 nu^T [W Id - (grad u)^T S] nu`` with the jump taken as plus minus minus."""
    nu = np.asarray(nu, dtype=float)
    if np.any(np.abs(np.linalg.norm(nu, axis=-1) - 1.0) > 1e-12):
        raise ValueError("nu must be a unit vector")
    jump = eshelby_like(C, gradU_plus, c_plus, Estar) - eshelby_like(C, gradU_minus, c_minus, Estar)
    return 0.5 * np.einsum("...i,...ij,...j->...", nu, jump, nu)


def averaged_gradient_jump(C, Estar, gradU_plus, gradU_minus) -> np.ndarray:
    """``-1/2 (grad u+ + grad u-) : C E*``, equal to :func:`elastic_jump` when
    ``[u] = 0`` and ``[S nu] = 0`` with phases ``c± = ±1``."""
    CE = C.apply(Estar.M)
    G = np.asarray(gradU_plus) + np.asarray(gradU_minus)
    return -0.5 * np.einsum("...ij,ij->...", G, CE)


# -- radial closed form --------------------------------------------------------


@dataclass(frozen=True)
class RadialElasticFields:
    """Disk inclusion with isotropic tensor and E* = e* Id.

    ``u_r = A r`` for ``r < R`` and ``u_r = B r + D / r`` for ``R < r < Rout``,
    with ``u_r(Rout) = 0``.  ``c_far`` is the concentration outside ``Rout`` for
    which ``u = 0`` there is also an equilibrium (traction matches at Rout), so
    the same field solves any clamped domain containing the disk.
    """

    R: float
    Rout: float
    lam: float
    mu: float
    estar: float
    c_in: float
    c_out: float
    A: float
    B: float
    D: float
    jump: float
    c_far: float
    center: tuple[float, float] = (0.5, 0.5)

    @property
    def tensor(self) -> ElasticityTensor:
        return ElasticityTensor.isotropic(self.lam, self.mu)

    @property
    def eigenstrain(self) -> Eigenstrain:
        return Eigenstrain.isotropic(self.estar)

    def _phi(self, r):
        """u = phi(r) (x - center); returns phi and dphi/dr."""
        r = np.asarray(r, dtype=float)
        inside = r < self.R
        rr = np.where(inside, 1.0, r)
        phi = np.where(inside, self.A, self.B + self.D / rr**2)
        dphi = np.where(inside, 0.0, -2.0 * self.D / rr**3)
        far = r > self.Rout
        return np.where(far, 0.0, phi), np.where(far, 0.0, dphi)

    def displacement(self, x, y) -> np.ndarray:
        X = np.asarray(x) - self.center[0]
        Y = np.asarray(y) - self.center[1]
        phi, _ = self._phi(np.hypot(X, Y))
        return np.stack([phi * X, phi * Y])

    def grad_u(self, x, y, side: str | None = None) -> np.ndarray:
        """grad u at points; ``side`` in {"in", "out"} evaluates that branch's formula."""
        X = np.asarray(x, dtype=float) - self.center[0]
        Y = np.asarray(y, dtype=float) - self.center[1]
        r = np.hypot(X, Y)
        if side == "in":
            phi, dphi = np.full_like(r, self.A), np.zeros_like(r)
        elif side == "out":
            # the outer branch is singular at the centre; the value there is never used
            rr = np.where(r > 0, r, 1.0)
            phi, dphi = self.B + self.D / rr**2, -2.0 * self.D / rr**3
        else:
            phi, dphi = self._phi(r)
        rs = np.maximum(r, 1e-300)
        xv = np.stack([X, Y], axis=-1)
        G = phi[..., None, None] * np.eye(2) + (dphi / rs)[..., None, None] * xv[..., :, None] * xv[..., None, :]
        return G

    def concentration(self, x, y) -> np.ndarray:
        r = np.hypot(np.asarray(x) - self.center[0], np.asarray(y) - self.center[1])
        return np.where(r < self.R, self.c_in, np.where(r <= self.Rout, self.c_out, self.c_far))

    def radial_stress(self, r, side: str) -> float:
        """S_rr at radius r on the given branch."""
        k = 2.0 * (self.lam + self.mu)
        if side == "in":
            return k * self.A - k * self.estar * self.c_in
        return k * self.B - 2.0 * self.mu * self.D / r**2 - k * self.estar * self.c_out


def radial_solution(R: float, Rout: float, lam: float, muL: float, estar: float,
                    c_in: float = -1.0, c_out: float = 1.0, center=(0.5, 0.5)) -> RadialElasticFields:
    if not (0 < R < Rout):
        raise ValueError("need 0 < R < Rout")
    if muL <= 0 or lam + muL <= 0:
        raise ValueError("need mu > 0 and lambda + mu > 0")
    k = 2.0 * (lam + muL)
    # unknowns (A, B, D): u continuity at R, S_rr continuity at R, u(Rout) = 0
    M = np.array([
        [R, -R, -1.0 / R],
        [k, -k, 2.0 * muL / R**2],
        [0.0, Rout, 1.0 / Rout],
    ])
    rhs = np.array([0.0, k * estar * (c_in - c_out), 0.0])
    if abs(np.linalg.det(M)) < 1e-14 * np.abs(M).max() ** 3:
        raise ElasticityError("degenerate radial system")
    A, B, D = np.linalg.solve(M, rhs)
    if estar != 0.0:
        s_rr_out = k * B - 2.0 * muL * D / Rout**2 - k * estar * c_out
        c_far = -s_rr_out / (k * estar)
    else:
        c_far = c_out
    fields = RadialElasticFields(R, Rout, lam, muL, estar, c_in, c_out, A, B, D, 0.0, c_far, tuple(center))
    # evaluate on the +x axis; the value is rotation invariant
    x0, y0 = center[0] + R, center[1]
    nu = np.array([1.0, 0.0])
    Gp = fields.grad_u(x0, y0, side="out")
    Gm = fields.grad_u(x0, y0, side="in")
    C = ElasticityTensor.isotropic(lam, muL)
    jump = float(elastic_jump(C, Eigenstrain.isotropic(estar), Gp, Gm, c_out, c_in, nu))
    return RadialElasticFields(R, Rout, lam, muL, estar, c_in, c_out, A, B, D, jump, c_far, tuple(center))


def radial_diffuse_displacement(c_of_r, R_max: float, lam: float, mu: float, estar: float,
                                Rout: float, n: int = 20001):
    """Exact plane radial displacement for a radially symmetric eigenstrain ``e* c(r) Id``.

    ``u_r(r) = K/r ∫_0^r c(s) s ds + B r`` with ``K = 2(lam + mu) e*/(lam + 2 mu)``
    and B fixed by ``u_r(Rout) = 0``.  Returns a callable ``phi(r) = u_r / r``
    (and its derivative) built from a fine cumulative quadrature.
    """
    from scipy.integrate import cumulative_trapezoid
    from scipy.interpolate import CubicSpline

    K = 2.0 * (lam + mu) * estar / (lam + 2.0 * mu)
    r = np.linspace(0.0, max(R_max, Rout), n)
    I = cumulative_trapezoid(c_of_r(r) * r, r, initial=0.0)
    spl_I = CubicSpline(r, I)
    B = -K * float(spl_I(Rout)) / Rout**2

    def phi(rq):
        rq = np.asarray(rq, dtype=float)
        small = rq < 1e-8
        rs = np.where(small, 1.0, rq)
        val = K * spl_I(rs) / rs**2 + B
        return np.where(small, 0.5 * K * c_of_r(0.0) + B, val)

    def dphi(rq):
        rq = np.asarray(rq, dtype=float)
        rs = np.maximum(rq, 1e-8)
        return K * (c_of_r(rs) * rs / rs**2 - 2.0 * spl_I(rs) / rs**3)

    return phi, dphi


# -- discrete solver -----------------------------------------------------------

_G = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))
_GAUSS = [(xi, eta) for eta in _G for xi in _G]
# local node order: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
_OFFSETS = ((0, 0), (1, 0), (1, 1), (0, 1))


def _shape(xi, eta):
    N = np.array([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta])
    dxi = np.array([-(1 - eta), 1 - eta, eta, -eta])
    deta = np.array([-(1 - xi), -xi, xi, 1 - xi])
    return N, dxi, deta


def _B(dNdx, dNdy) -> np.ndarray:
    B = np.zeros((3, 8))
    B[0, 0::2] = dNdx
    B[1, 1::2] = dNdy
    B[2, 0::2] = dNdy
    B[2, 1::2] = dNdx
    return B


class ElasticSolver:
    """Bilinear-element discretization of the clamped elasticity problem.

    The discrete energy is ``E2(c, u) = 1/2 u.K u - u.G c + 1/2 c.H c`` with
    u the nodal displacements (boundary nodes fixed at zero) and c the nodal
    concentrations.  ``solve`` minimizes it over u by preconditioned conjugate
    gradients; a cached sparse factorization of K is the preconditioner.
    """

    def __init__(self, grid: Grid2D, C: ElasticityTensor, Estar: Eigenstrain):
        self.grid, self.C, self.Estar = grid, C, Estar
        nx, ny = grid.shape
        hx, hy = grid.hx, grid.hy
        V = C.V
        ev = to_voigt(Estar.M)
        w = 0.25 * hx * hy
        Ke = np.zeros((8, 8))
        Ge = np.zeros((8, 4))
        He = np.zeros((4, 4))
        Me = np.zeros((4, 4))
        self._gp_B, self._gp_N = [], []
        for xi, eta in _GAUSS:
            N, dxi, deta = _shape(xi, eta)
            B = _B(dxi / hx, deta / hy)
            Ke += w * B.T @ V @ B
            Ge += w * np.outer(B.T @ (V @ ev), N)
            He += w * float(ev @ V @ ev) * np.outer(N, N)
            Me += w * np.outer(N, N)
            self._gp_B.append(B)
            self._gp_N.append(N)
        self._w = w

        ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
        nodes = np.stack([(ii + a) * ny + (jj + b) for a, b in _OFFSETS], axis=-1).reshape(-1, 4)
        self._elem_nodes = nodes
        nn = nx * ny
        dofs = np.empty((nodes.shape[0], 8), dtype=np.int64)
        dofs[:, 0::2] = nodes
        dofs[:, 1::2] = nodes + nn
        self._elem_dofs = dofs

        def assemble(rows, cols, block, shape):
            r = np.repeat(rows[:, :, None], cols.shape[1], axis=2).ravel()
            c = np.repeat(cols[:, None, :], rows.shape[1], axis=1).ravel()
            v = np.broadcast_to(block, (rows.shape[0],) + block.shape).ravel()
            return sp.csr_matrix((v, (r, c)), shape=shape)

        K = assemble(dofs, dofs, Ke, (2 * nn, 2 * nn))
        self.G = assemble(dofs, nodes, Ge, (2 * nn, nn))
        self.H = assemble(nodes, nodes, He, (nn, nn))
        M1 = assemble(nodes, nodes, Me, (nn, nn))
        self.M = sp.block_diag([M1, M1]).tocsr()

        interior = np.zeros((nx, ny), dtype=bool)
        interior[1:-1, 1:-1] = True
        free_nodes = np.flatnonzero(interior.ravel())
        self.free = np.concatenate([free_nodes, free_nodes + nn])
        self.K = K
        self.Kff = K[self.free][:, self.free].tocsc()
        self._lu = None
        self.node_weights = grid.weights.ravel()

    def _factor(self):
        if self._lu is None:
            self._lu = splu(self.Kff, permc_spec="MMD_AT_PLUS_A")
        return self._lu

    def load(self, c_field, body_force: np.ndarray | None = None, subsamples: int = 12) -> np.ndarray:
        """Right-hand side ``G c - M b``.

        ``c_field`` is either a nodal array or a callable ``c(x, y)``; a callable
        is integrated against each element's strain modes with a
        ``subsamples x subsamples`` midpoint rule, which resolves a sharp
        inclusion below the mesh scale.
        """
        if callable(c_field):
            b = self._function_load(c_field, subsamples)
        else:
            c = np.asarray(c_field, dtype=float)
            if not np.all(np.isfinite(c)):
                raise ElasticityError("non-finite concentration field")
            b = self.G @ c.ravel()
        if body_force is not None:
            b = b - self.M @ np.asarray(body_force).reshape(2, -1).ravel()
        return b

    def _function_load(self, cfun, m: int) -> np.ndarray:
        hx, hy = self.grid.hx, self.grid.hy
        V, ev = self.C.V, to_voigt(self.Estar.M)
        X, Y = self.grid.mesh
        x0, y0 = X[:-1, :-1].ravel(), Y[:-1, :-1].ravel()
        q = (np.arange(m) + 0.5) / m
        fe = np.zeros((x0.size, 8))
        for xi in q:
            for eta in q:
                _, dxi, deta = _shape(xi, eta)
                vec = _B(dxi / hx, deta / hy).T @ (V @ ev) * (hx * hy / m**2)
                cv = np.asarray(cfun(x0 + xi * hx, y0 + eta * hy), dtype=float)
                fe += cv[:, None] * vec[None, :]
        if not np.all(np.isfinite(fe)):
            raise ElasticityError("non-finite concentration field")
        b = np.zeros(2 * self.grid.nx * self.grid.ny)
        np.add.at(b, self._elem_dofs.ravel(), fe.ravel())
        return b

    def solve(self, c_field, tol: float = 1e-10, body_force=None,
              u0: np.ndarray | None = None, maxiter: int = 200):
        """Returns (u of shape (2, nx, ny), iterations, relative residual)."""
        if not (1e-12 < tol < 1e-4):
            raise ValueError("tol must lie in (1e-12, 1e-4)")
        nx, ny = self.grid.shape
        b = self.load(c_field, body_force)[self.free]
        x = np.zeros_like(b) if u0 is None else np.asarray(u0).ravel()[self.free].copy()
        lu = self._factor()
        A = self.Kff
        r = b - A @ x
        r0 = np.linalg.norm(b) if u0 is None else max(np.linalg.norm(r), np.linalg.norm(b))
        u = np.zeros(2 * nx * ny)
        if r0 == 0.0:
            return u.reshape(2, nx, ny), 0, 0.0
        z = lu.solve(r)
        p = z.copy()
        rz = r @ z
        it = 0
        res = np.linalg.norm(r) / r0
        while res > tol:
            if it >= maxiter:
                raise ElasticityError(f"CG did not converge in {maxiter} iterations (residual {res:.3e})")
            Ap = A @ p
            alpha = rz / (p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            res = np.linalg.norm(r) / r0
            it += 1
            if res <= tol:
                break
            z = lu.solve(r)
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        u[self.free] = x
        return u.reshape(2, nx, ny), it, res

    def energy(self, c_field: np.ndarray, u: np.ndarray) -> float:
        c = np.asarray(c_field).ravel()
        uu = np.asarray(u).ravel()
        return float(0.5 * uu @ (self.K @ uu) - uu @ (self.G @ c) + 0.5 * c @ (self.H @ c))

    def dW_dc(self, c_field: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Nodal W_{,c}: gradient of the discrete energy in the trapezoid inner product."""
        c = np.asarray(c_field).ravel()
        g = -(self.G.T @ np.asarray(u).ravel()) + self.H @ c
        return (g / self.node_weights).reshape(self.grid.shape)

    def quadratic_c_bound(self) -> float:
        """Largest eigenvalue of H relative to the trapezoid weights (bounds the c-curvature of E2)."""
        d = np.asarray(self.H.sum(axis=1)).ravel() / self.node_weights
        return float(d.max())


@lru_cache(maxsize=8)
def get_solver(grid: Grid2D, C: ElasticityTensor, Estar: Eigenstrain) -> ElasticSolver:
    return ElasticSolver(grid, C, Estar)


def solve_displacement(C: ElasticityTensor, Estar: Eigenstrain, c_field, grid: Grid2D,
                       tol: float = 1e-10, body_force=None, u0=None) -> np.ndarray:
    """Clamped displacement minimizing the discrete elastic energy for ``c_field``.

    ``body_force`` b (shape (2, nx, ny)) adds a load so that the discrete
    equation approximates ``div C(E(u) - E* c) = b``.  ``c_field`` may be a
    callable ``c(x, y)`` (see :meth:`ElasticSolver.load`).
    """
    u, _, _ = get_solver(grid, C, Estar).solve(c_field, tol, body_force, u0)
    return u


def nodal_grad_u(u: np.ndarray, grid: Grid2D) -> np.ndarray:
    """(nx, ny, 2, 2) array with ``G[..., i, j] = d u_i / d x_j``."""
    G = np.empty(grid.shape + (2, 2))
    for i in range(2):
        gx, gy = grid.gradient(u[i])
        G[..., i, 0] = gx
        G[..., i, 1] = gy
    return G
