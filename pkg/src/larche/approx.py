"""Approximate solutions of orders 0 and 1, their residuals, and rate fits.

A build glues an inner expansion (profiles in the stretched normal variable)
to outer values with the cutoff ``zeta(d/delta)``.  ``p`` always denotes
laplacian(d) at the projected interface point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elasticity import Eigenstrain, ElasticityTensor, energy_and_stress, radial_diffuse_displacement
from .geometry import Circle, SignedDistanceMap
from .grid import Grid2D
from .phasefield import ElasticSpec, check_glue_preconditions
from .potential import DoubleWell
from .profile import BridgingFunction, Profiles, cutoff_zeta
from .sharpref import radial_reference


class ApproxError(ValueError):
    pass


# -- sharp fields --------------------------------------------------------------


def _const(v):
    return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(v))


@dataclass(frozen=True, eq=False)
class SharpFields:
    """Outer data: callables of (x, y); ``u_*`` return arrays (2, ...) and
    ``grad_u_*`` arrays (..., 2, 2) with ``G[..., i, j] = d u_i / d x_j``."""

    mu_plus: object
    mu_minus: object
    u_plus: object = None
    u_minus: object = None
    grad_u_plus: object = None
    grad_u_minus: object = None
    tag: str = ""

    @property
    def elastic(self) -> bool:
        return self.u_plus is not None


def radial_sharp_fields(R: float, sigma: float, elastic: ElasticSpec | None = None,
                        center=(0.5, 0.5), Rout: float | None = None) -> SharpFields:
    """Stationary-circle outer fields; each elastic branch is extended by its own formula."""
    Rout = Rout if Rout is not None else 2.0 * R
    ref = radial_reference(R, Rout, sigma, elastic, center)
    mu = _const(ref.mu_value)
    if ref.elastic is None:
        return SharpFields(mu, mu, tag="radial")
    f = ref.elastic

    def branch(side):
        def disp(x, y):
            X = np.asarray(x, dtype=float) - center[0]
            Y = np.asarray(y, dtype=float) - center[1]
            r2 = np.maximum(X**2 + Y**2, 1e-300)
            phi = np.full_like(r2, f.A) if side == "in" else f.B + f.D / r2
            return np.stack([phi * X, phi * Y])

        def grad(x, y):
            return f.grad_u(x, y, side=side)
        return disp, grad

    up, gp = branch("out")
    um, gm = branch("in")
    return SharpFields(mu, mu, up, um, gp, gm, tag="radial-elastic")


def curvature_sharp_fields(shape: SignedDistanceMap, sigma: float) -> SharpFields:
    """mu = sigma kappa at the projected point, constant along normals (no elasticity)."""
    def mu(x, y):
        return -sigma * shape.projected_laplacian(x, y)
    return SharpFields(mu, mu, tag="local-curvature")


# -- builds --------------------------------------------------------------------


@dataclass(eq=False)
class ApproxSolution:
    grid: Grid2D
    c: np.ndarray
    mu: np.ndarray
    u: np.ndarray | None
    order: int
    epsilon: float
    delta: float
    shape: SignedDistanceMap
    d: np.ndarray
    zeta: np.ndarray
    p: np.ndarray
    outer: np.ndarray
    grad_u: np.ndarray | None = None
    elastic: ElasticSpec | None = None
    metadata: dict = field(default_factory=dict)


def build(grid: Grid2D, shape: SignedDistanceMap, epsilon: float, delta: float, order: int,
          profiles: Profiles, sharp: SharpFields | None = None, eta: BridgingFunction | None = None,
          elastic: ElasticSpec | None = None, elastic_mode: str = "bridge") -> ApproxSolution:
    """Glued approximate solution of order 0 or 1.

    ``c`` is ``zeta [theta0 + eps c1_in] + (1 - zeta) [±1 + eps c1±]`` where the
    outer correction is ``c1± = (mu± - W_c(±1, E(u±))) / f'(±1)`` (order 1 only)
    and the inner one is ``p theta1(z)`` plus an eta-bridge of the constant
    mismatch ``c1± - p theta1(±inf)`` (zero without elasticity).

    ``mu`` and ``u`` (``elastic_mode="bridge"``) interpolate the outer fields
    with ``eta(d/eps)`` inside the tube.  ``elastic_mode="radial-diffuse"``
    instead uses the exact plane radial displacement for the built ``c``
    (circles only).
    """
    if order not in (0, 1):
        raise ApproxError("order must be 0 or 1")
    if elastic_mode not in ("bridge", "radial-diffuse"):
        raise ApproxError(f"unknown elastic mode {elastic_mode!r}")
    check_glue_preconditions(grid, shape, epsilon, delta)
    P = profiles.potential
    eta = eta or profiles.eta
    if sharp is None:
        if isinstance(shape, Circle):
            sharp = radial_sharp_fields(shape.R, profiles.sigma, elastic, shape.center,
                                        Rout=_inscribed(shape, grid))
        else:
            raise ApproxError("missing sharp fields for a non-circular shape")
    if elastic is not None and not sharp.elastic:
        raise ApproxError("elastic build needs elastic sharp fields")
    X, Y = grid.mesh
    return _assemble(grid, X, Y, shape, epsilon, delta, order, profiles, sharp, eta, elastic,
                     elastic_mode, P)


def _inscribed(shape: Circle, grid: Grid2D) -> float:
    cx, cy = shape.center
    return float(min(cx, cy, grid.Lx - cx, grid.Ly - cy))


def _fields_at(X, Y, shape, epsilon, delta, order, profiles, sharp, eta, elastic, P):
    """Pointwise c, mu (and outer pieces) of a build."""
    d, _, _, k = shape.evaluate(X, Y)
    z = d / epsilon
    zeta = cutoff_zeta(d / delta)
    plus = d >= 0
    mu_p, mu_m = sharp.mu_plus(X, Y), sharp.mu_minus(X, Y)
    c_out = np.where(plus, 1.0, -1.0)
    inner = profiles.theta0(z)
    p = k if order == 1 else np.zeros_like(d)
    if order == 1:
        t1 = profiles.theta1
        wp = wm = 0.0
        if elastic is not None:
            C, E = elastic.tensor, elastic.eigenstrain
            _, _, wp = energy_and_stress(C, E, np.ones_like(d), sharp.grad_u_plus(X, Y))
            _, _, wm = energy_and_stress(C, E, -np.ones_like(d), sharp.grad_u_minus(X, Y))
        c1p = (mu_p - wp) / P.df(1.0)
        c1m = (mu_m - wm) / P.df(-1.0)
        mis_p = c1p - p * t1.limits[1]
        mis_m = c1m - p * t1.limits[0]
        e = eta(z)
        inner = inner + epsilon * (p * t1(z) + mis_p * e + mis_m * (1.0 - e))
        c_out = c_out + epsilon * np.where(plus, c1p, c1m)
    c = zeta * inner + (1.0 - zeta) * c_out
    e = eta(z)
    mu = zeta * (mu_p * e + mu_m * (1.0 - e)) + (1.0 - zeta) * np.where(plus, mu_p, mu_m)
    return c, mu, d, zeta, p, c_out


def _assemble(grid, X, Y, shape, epsilon, delta, order, profiles, sharp, eta, elastic, mode, P):
    c, mu, d, zeta, p, c_out = _fields_at(X, Y, shape, epsilon, delta, order, profiles, sharp,
                                         eta, elastic, P)
    u = grad_u = None
    meta = {"elastic_mode": mode if elastic is not None else "none", "sharp": sharp.tag}
    if elastic is not None and mode == "bridge":
        e = eta(d / epsilon)
        up, um = sharp.u_plus(X, Y), sharp.u_minus(X, Y)
        plus = d >= 0
        u = zeta * (up * e + um * (1.0 - e)) + (1.0 - zeta) * np.where(plus, up, um)
    elif elastic is not None:
        if not isinstance(shape, Circle):
            raise ApproxError("radial-diffuse elasticity needs a circle")
        cx, cy = shape.center
        corners = [(0, 0), (grid.Lx, 0), (0, grid.Ly), (grid.Lx, grid.Ly)]
        Rout = max(np.hypot(a - cx, b - cy) for a, b in corners) * 1.01

        def c_of_r(r):
            r = np.asarray(r, dtype=float)
            cr, *_ = _fields_at(cx + r, np.full_like(r, cy), shape, epsilon, delta, order,
                                profiles, sharp, eta, elastic, P)
            return cr

        phi, dphi = radial_diffuse_displacement(c_of_r, Rout, elastic.lam, elastic.mu,
                                                elastic.estar, Rout, n=200001)
        Xc, Yc = X - cx, Y - cy
        r = np.hypot(Xc, Yc)
        ph, dph = phi(r), dphi(r)
        u = np.stack([ph * Xc, ph * Yc])
        rs = np.where(r > 0, r, 1.0)
        xv = np.stack([Xc, Yc], axis=-1)
        grad_u = (ph[..., None, None] * np.eye(2)
                  + np.where(r > 0, dph / rs, 0.0)[..., None, None] * xv[..., :, None] * xv[..., None, :])
        meta["Rout"] = Rout
    return ApproxSolution(grid, c, mu, u, order, epsilon, delta, shape, d, zeta, p, c_out,
                          grad_u, elastic, meta)


# -- residual meters -------------------------------------------------------------


def fd_derivative(f: np.ndarray, h: float, axis: int, order: int = 4) -> np.ndarray:
    """Centered first derivative (order 2 or 4); two-point-wide rims fall back to order 2."""
    g = np.gradient(f, h, axis=axis, edge_order=2)
    if order == 2:
        return g
    if order != 4:
        raise ValueError("order must be 2 or 4")
    f = np.moveaxis(f, axis, 0)
    g = np.moveaxis(g, axis, 0).copy()
    g[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    return np.moveaxis(g, 0, axis)


def fd_laplacian(grid: Grid2D, f: np.ndarray, order: int = 4) -> np.ndarray:
    """Neumann (mirror) Laplacian; order 2 is the stepper's 5-point operator."""
    if order == 2:
        return grid.laplacian(f)
    if order != 4:
        raise ValueError("order must be 2 or 4")
    p = np.pad(f, 2, mode="reflect")
    c = p[2:-2, 2:-2]
    dxx = (-p[:-4, 2:-2] + 16 * p[1:-3, 2:-2] - 30 * c + 16 * p[3:-1, 2:-2] - p[4:, 2:-2]) / (12 * grid.hx**2)
    dyy = (-p[2:-2, :-4] + 16 * p[2:-2, 1:-3] - 30 * c + 16 * p[2:-2, 3:-1] - p[2:-2, 4:]) / (12 * grid.hy**2)
    return dxx + dyy


def fd_grad_u(u: np.ndarray, grid: Grid2D, order: int = 4) -> np.ndarray:
    G = np.empty(grid.shape + (2, 2))
    for i in range(2):
        G[..., i, 0] = fd_derivative(u[i], grid.hx, 0, order)
        G[..., i, 1] = fd_derivative(u[i], grid.hy, 1, order)
    return G


@dataclass(eq=False)
class Residuals:
    r_A: np.ndarray
    s_A: np.ndarray | None
    mass_defect: np.ndarray
    norms: dict


def residuals(a: ApproxSolution, potential: DoubleWell | None = None, fd_order: int = 4,
              interior_margin: int = 0) -> Residuals:
    """r_A, s_A and the mass defect of a build, with their L2 norms.

    ``fd_order`` selects the difference operators of the meter (2 or 4).
    ``interior_margin`` drops that many node rows next to the boundary from
    the norms (the displacement builds are not clamped there).
    """
    P = potential or DoubleWell.quartic()
    g, eps = a.grid, a.epsilon
    r = a.mu + eps * fd_laplacian(g, a.c, fd_order) - P.f(a.c) / eps
    s = None
    if a.elastic is not None:
        C, E = a.elastic.tensor, a.elastic.eigenstrain
        G = a.grad_u if a.grad_u is not None else fd_grad_u(a.u, g, fd_order)
        _, S, dWdc = energy_and_stress(C, E, a.c, G)
        r = r - dWdc
        s = np.stack([
            fd_derivative(S[..., 0, 0], g.hx, 0, fd_order) + fd_derivative(S[..., 0, 1], g.hy, 1, fd_order),
            fd_derivative(S[..., 1, 0], g.hx, 0, fd_order) + fd_derivative(S[..., 1, 1], g.hy, 1, fd_order),
        ])
    mass = fd_laplacian(g, a.mu, fd_order)
    mask = np.ones(g.shape, dtype=bool)
    if interior_margin:
        m = interior_margin
        mask[:] = False
        mask[m:-m, m:-m] = True

    def l2(v):
        return float(np.sqrt(np.sum((g.weights * v**2)[mask])))

    norms = {"rA": l2(r), "mass": l2(mass), "rA_max": float(np.max(np.abs(r[mask])))}
    if s is not None:
        norms["sA"] = l2(np.sqrt(s[0] ** 2 + s[1] ** 2))
    return Residuals(r, s, mass, norms)


# -- admissible-form audit -------------------------------------------------------


@dataclass
class StructureReport:
    C_star: float
    sup_p: float
    sup_weighted_q: float
    sup_tangential_grad: float
    min_outer_df: float
    outer_sign_ok: bool
    passed: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def structure_check(a: ApproxSolution, profiles: Profiles, C_star: float = 10.0,
                    delta0: float | None = None, fd_order: int = 4) -> StructureReport:
    """Decompose ``c`` into ``zeta (theta0 + eps p theta1 + eps^2 q) + (1 - zeta) phi±``
    and check the bounds with a single constant ``C_star``."""
    if a.order != 1:
        raise ApproxError("structure_check expects an order-1 build")
    P = profiles.potential
    eps = a.epsilon
    delta0 = delta0 or a.delta
    z = a.d / eps
    lead = profiles.theta0(z) + eps * a.p * profiles.theta1(z)
    tube = (np.abs(a.d) < delta0) & (a.zeta > 1e-3)
    q = np.zeros_like(a.c)
    q[tube] = ((a.c[tube] - (1 - a.zeta[tube]) * a.outer[tube]) / a.zeta[tube] - lead[tube]) / eps**2
    w = eps / (eps + np.abs(a.d))
    in_tube = np.abs(a.d) < delta0
    sup_p = float(np.max(np.abs(a.p[in_tube])))
    sup_q = float(np.max((w * np.abs(q))[in_tube]))
    gx = fd_derivative(a.c, a.grid.hx, 0, fd_order)
    gy = fd_derivative(a.c, a.grid.hy, 1, fd_order)
    # normal direction from the distance field
    nx = fd_derivative(a.d, a.grid.hx, 0, fd_order)
    ny = fd_derivative(a.d, a.grid.hy, 1, fd_order)
    nn = np.maximum(np.hypot(nx, ny), 1e-12)
    nx, ny = nx / nn, ny / nn
    gn = gx * nx + gy * ny
    tg = np.hypot(gx - gn * nx, gy - gn * ny)
    inner_nodes = in_tube.copy()
    inner_nodes[:2, :] = inner_nodes[-2:, :] = False
    inner_nodes[:, :2] = inner_nodes[:, -2:] = False
    sup_t = float(np.max(tg[inner_nodes]))
    plus = a.d >= 0
    outer_ok = bool(np.all(a.outer[plus] > 0) and np.all(a.outer[~plus] < 0))
    min_df = float(np.min(P.df(a.outer)))
    passed = (sup_p + sup_q <= C_star and sup_t <= C_star and min_df >= 1.0 / C_star and outer_ok)
    return StructureReport(C_star, sup_p, sup_q, sup_t, min_df, outer_ok, bool(passed))


# -- rates ---------------------------------------------------------------------


def rate_fit(epsilons, errors) -> tuple[float, float]:
    """Least-squares slope and constant of ``log error = order log eps + log constant``."""
    e = np.asarray(epsilons, dtype=float)
    r = np.asarray(errors, dtype=float)
    if e.size < 3 or e.size != r.size:
        raise ValueError("need at least three (epsilon, error) pairs")
    if np.any(e <= 0) or np.any(r <= 0):
        raise ValueError("epsilons and errors must be positive")
    if np.any(np.diff(e) >= 0):
        raise ValueError("epsilons must be strictly decreasing")
    A = np.stack([np.log(e), np.ones_like(e)], axis=1)
    (order, logc), *_ = np.linalg.lstsq(A, np.log(r), rcond=None)
    return float(order), float(np.exp(logc))
