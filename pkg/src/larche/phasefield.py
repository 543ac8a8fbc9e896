"""Cahn-Larché evolution on a rectangle.

Scheme (one step, elasticity lagged by one step)::

    mu^{n+1} = -eps lap(c^{n+1}) + (s/eps)(c^{n+1} - c^n) + f(c^n)/eps + W_c(c^n, u^n)
    (c^{n+1} - c^n) / tau = lap(mu^{n+1})
    u^{n+1} = argmin_u E2(c^{n+1}, u)

The fourth-order linear system for c^{n+1} is diagonal in the type-I cosine
basis, so each step is one forward and one inverse transform.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .elasticity import Eigenstrain, ElasticityTensor, ElasticSolver, get_solver
from .geometry import GeometryError, SignedDistanceMap, boundary_clearance, extract_zero_contour
from .grid import Grid2D
from .potential import DoubleWell
from .profile import ProfileTable, cutoff_zeta


class PhaseFieldError(RuntimeError):
    pass


@dataclass(frozen=True)
class ElasticSpec:
    """Isotropic elasticity parameters with an isotropic eigenstrain ``estar * Id``."""

    lam: float = 1.0
    mu: float = 1.0
    estar: float = 0.05
    enabled: bool = True

    @property
    def tensor(self) -> ElasticityTensor:
        return ElasticityTensor.isotropic(self.lam, self.mu)

    @property
    def eigenstrain(self) -> Eigenstrain:
        return Eigenstrain.isotropic(self.estar)

    @classmethod
    def from_dict(cls, d: dict | None) -> "ElasticSpec | None":
        if not d or not d.get("enabled", True):
            return None
        return cls(float(d.get("lambda", 1.0)), float(d.get("mu", 1.0)), float(d.get("estar", 0.05)))

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "mu": self.mu, "estar": self.estar, "enabled": self.enabled}


@dataclass(frozen=True)
class PFConfig:
    epsilon: float
    tau: float | None = None
    tau_factor: float = 1.0
    s: float = 14.0
    cg_tol: float = 1e-10
    elasticity: ElasticSpec | None = None
    end_time: float = 0.0
    tripwire: float = 1.5

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.s < 0:
            raise ValueError("stabilization must be non-negative")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.end_time < 0:
            raise ValueError("end_time must be non-negative")

    @property
    def dt(self) -> float:
        return self.tau if self.tau is not None else self.tau_factor * self.epsilon**3

    @property
    def elastic(self) -> bool:
        return self.elasticity is not None and self.elasticity.enabled

    def check_grid(self, grid: Grid2D) -> None:
        if grid.nx < 32 or grid.ny < 32:
            raise PhaseFieldError("phase-field grids need at least 32 nodes per direction")
        if self.epsilon < 2 * grid.h - 1e-14:
            raise PhaseFieldError(
                f"epsilon = {self.epsilon} under-resolved: need epsilon >= 2 h = {2 * grid.h:.4g}")

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "tau": self.dt, "s": self.s, "cg_tol": self.cg_tol,
                "elasticity": self.elasticity.to_dict() if self.elasticity else {"enabled": False},
                "end_time": self.end_time}


@dataclass(frozen=True, eq=False)
class PFState:
    grid: Grid2D
    c: np.ndarray
    mu: np.ndarray
    u: np.ndarray
    time: float = 0.0

    def copy(self) -> "PFState":
        return PFState(self.grid, self.c.copy(), self.mu.copy(), self.u.copy(), self.time)


# -- initial data ----------------------------------------------------------------


def glued_profile(shape: SignedDistanceMap, X, Y, epsilon: float, delta: float,
                  theta0: ProfileTable, theta1: ProfileTable | None = None,
                  outer_shift=None):
    """Returns (c, d, zeta, p) for the glued inner/outer field.

    Inside the tube ``c = theta0(d/eps) + eps p theta1(d/eps)``; outside it
    ``c = sign(d) + eps c1`` with ``c1 = p theta1(±inf)`` unless ``outer_shift``
    (a pair of arrays or scalars for the minus and plus sides) is given.
    ``p`` is laplacian(d) at the projected interface point.
    """
    d, _, _, k = shape.evaluate(X, Y)
    z = d / epsilon
    zeta = cutoff_zeta(d / delta)
    inner = theta0(z)
    outer = np.where(d < 0, -1.0, 1.0)
    if theta1 is not None:
        p = k
        inner = inner + epsilon * p * theta1(z)
        if outer_shift is None:
            c1 = np.where(d < 0, theta1.limits[0], theta1.limits[1]) * p
        else:
            c1 = np.where(d < 0, outer_shift[0], outer_shift[1])
        outer = outer + epsilon * c1
    else:
        p = np.zeros_like(d)
    return zeta * inner + (1.0 - zeta) * outer, d, zeta, p


def check_glue_preconditions(grid: Grid2D, shape: SignedDistanceMap, epsilon: float, delta: float) -> None:
    if delta < 4 * epsilon - 1e-14:
        raise PhaseFieldError(f"delta = {delta} must be at least 4 epsilon = {4 * epsilon}")
    clearance = boundary_clearance(shape, grid)
    if clearance <= 2 * delta:
        raise PhaseFieldError(
            f"interface too close to the boundary: clearance {clearance:.4g} <= 2 delta = {2 * delta:.4g}")
    if delta >= shape.min_radius():
        raise PhaseFieldError("delta must be smaller than the smallest radius of curvature")
    if epsilon < 2 * grid.h - 1e-14:
        raise PhaseFieldError(
            f"epsilon = {epsilon} under-resolved: need epsilon >= 2 h = {2 * grid.h:.4g}")


def init_glued(grid: Grid2D, shape: SignedDistanceMap, epsilon: float, delta: float,
               theta0: ProfileTable, theta1: ProfileTable | None = None,
               use_first_order: bool = False, outer_shift=None) -> np.ndarray:
    """Glued initial concentration of order 0 or 1 (see :func:`glued_profile`)."""
    check_glue_preconditions(grid, shape, epsilon, delta)
    if use_first_order and theta1 is None:
        raise PhaseFieldError("first-order initial data needs theta1")
    X, Y = grid.mesh
    c, _, _, _ = glued_profile(shape, X, Y, epsilon, delta, theta0,
                               theta1 if use_first_order else None, outer_shift)
    return c


# -- model ---------------------------------------------------------------------


class CahnLarche:
    """Stepper bound to a grid, a configuration and a potential."""

    def __init__(self, grid: Grid2D, config: PFConfig, potential: DoubleWell | None = None):
        config.check_grid(grid)
        self.grid, self.config = grid, config
        self.potential = potential or DoubleWell.quartic()
        eps, tau, s = config.epsilon, config.dt, config.s
        self._Lam = -grid.laplacian_symbol
        self._lhs = 1.0 + tau * eps * self._Lam**2 + tau * (s / eps) * self._Lam
        self._keep = 1.0 + tau * (s / eps) * self._Lam
        self.solver: ElasticSolver | None = None
        if config.elastic:
            self.solver = get_solver(grid, config.elasticity.tensor, config.elasticity.eigenstrain)

    # -- pieces

    def elastic_state(self, c: np.ndarray, u0: np.ndarray | None = None) -> np.ndarray:
        if self.solver is None:
            return np.zeros((2,) + self.grid.shape)
        u, _, _ = self.solver.solve(c, self.config.cg_tol, u0=u0)
        return u

    def coupling(self, c: np.ndarray, u: np.ndarray) -> np.ndarray | None:
        """Nodal W_c(c, E(u)), or None when elasticity is off."""
        if self.solver is None:
            return None
        return self.solver.dW_dc(c, u)

    def chemical_potential(self, c: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Fully consistent ``-eps lap(c) + f(c)/eps + W_c`` for a given state."""
        eps = self.config.epsilon
        mu = -eps * self.grid.laplacian(c) + self.potential.f(c) / eps
        w = self.coupling(c, u)
        return mu if w is None else mu + w

    def energy(self, c: np.ndarray, u: np.ndarray) -> tuple[float, float]:
        eps = self.config.epsilon
        E1 = 0.5 * eps * self.grid.dirichlet_form(c) + self.grid.integrate(self.potential.F(c)) / eps
        E2 = 0.0 if self.solver is None else self.solver.energy(c, u)
        return float(E1), float(E2)

    def initial_state(self, c0: np.ndarray, time: float = 0.0) -> PFState:
        c0 = np.array(c0, dtype=float)
        if c0.shape != self.grid.shape:
            raise PhaseFieldError("initial field does not match the grid")
        if not np.all(np.isfinite(c0)):
            raise PhaseFieldError("non-finite initial field")
        u = self.elastic_state(c0)
        return PFState(self.grid, c0, self.chemical_potential(c0, u), u, time)

    # -- time stepping

    def step(self, state: PFState) -> PFState:
        eps, tau, s = self.config.epsilon, self.config.dt, self.config.s
        c = state.c
        g = self.potential.f(c) / eps
        w = self.coupling(c, state.u)
        if w is not None:
            g = g + w
        grid = self.grid
        c_hat = grid.dct(c)
        g_hat = grid.dct(g)
        new_hat = (self._keep * c_hat - tau * self._Lam * g_hat) / self._lhs
        new_hat[0, 0] = c_hat[0, 0]
        c_new = grid.idct(new_hat)
        if not np.all(np.isfinite(c_new)):
            raise PhaseFieldError(f"non-finite concentration at t = {state.time + tau:.6g}")
        peak = float(np.max(np.abs(c_new)))
        if peak > self.config.tripwire:
            raise PhaseFieldError(f"max |c| = {peak:.4g} exceeds the tripwire {self.config.tripwire}")
        mu_hat = eps * self._Lam * new_hat + (s / eps) * (new_hat - c_hat) + g_hat
        mu_new = grid.idct(mu_hat)
        u_new = self.elastic_state(c_new, u0=state.u) if self.solver is not None else state.u
        return PFState(grid, c_new, mu_new, u_new, state.time + tau)

    def diagnostics(self, state: PFState) -> dict:
        E1, E2 = self.energy(state.c, state.u)
        return {"t": state.time, "mass": self.grid.integrate(state.c), "E1": E1, "E2": E2,
                "Etot": E1 + E2, "max_abs_c": float(np.max(np.abs(state.c)))}

    def run(self, init: PFState, end_time: float | None = None, record_every: int = 1,
            snapshot_times=(), polylines: bool = False, callback=None) -> "Trajectory":
        """Step from ``init.time`` to ``end_time`` (defaults to the config's).

        Diagnostics are recorded every ``record_every`` steps; full states are
        kept at the first step reaching each requested snapshot time.
        """
        T = self.config.end_time if end_time is None else end_time
        tau = self.config.dt
        nsteps = max(0, int(math.ceil((T - init.time) / tau - 1e-9)))
        pending = sorted(float(t) for t in snapshot_times)
        traj = Trajectory(self.grid, self.config)
        state = init
        traj.record(self.diagnostics(state))
        while pending and pending[0] <= state.time + 1e-12:
            traj.add_snapshot(state, polylines)
            pending.pop(0)
        for n in range(1, nsteps + 1):
            state = self.step(state)
            if n % record_every == 0 or n == nsteps:
                traj.record(self.diagnostics(state))
            while pending and pending[0] <= state.time + 1e-12:
                traj.add_snapshot(state, polylines)
                pending.pop(0)
            if callback is not None:
                callback(n, state)
        traj.final = state
        return traj


@dataclass(eq=False)
class Trajectory:
    grid: Grid2D
    config: PFConfig
    series: list[dict] = field(default_factory=list)
    snapshots: list[PFState] = field(default_factory=list)
    contours: list = field(default_factory=list)
    final: PFState | None = None

    COLUMNS = ("t", "mass", "E1", "E2", "Etot", "max_abs_c")

    def record(self, row: dict) -> None:
        self.series.append(row)

    def add_snapshot(self, state: PFState, polyline: bool) -> None:
        self.snapshots.append(state.copy())
        if polyline:
            try:
                self.contours.append(extract_zero_contour(state.c, self.grid))
            except GeometryError:
                # topology change or no interface: diagnostics only
                self.contours.append(None)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.series])

    def write_timeseries(self, path) -> None:
        write_timeseries(path, self.series)


def write_timeseries(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(Trajectory.COLUMNS)
        for row in rows:
            w.writerow([repr(float(row[k])) for k in Trajectory.COLUMNS])


def read_timeseries(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


# -- grid dumps ----------------------------------------------------------------


def write_grid(stem, field_values: np.ndarray, grid: Grid2D, time: float, name: str) -> tuple[Path, Path]:
    """Raw little-endian float64 in row-major order plus a JSON sidecar."""
    stem = Path(stem)
    raw = stem.with_suffix(".bin")
    meta = stem.with_suffix(".json")
    arr = np.ascontiguousarray(field_values, dtype="<f8")
    if arr.shape != grid.shape:
        raise ValueError("field does not match the grid")
    raw.write_bytes(arr.tobytes(order="C"))
    meta.write_text(json.dumps({"nx": grid.nx, "ny": grid.ny, "Lx": grid.Lx, "Ly": grid.Ly,
                                "time": float(time), "field": name}, indent=1))
    return raw, meta


def read_grid(stem) -> tuple[np.ndarray, dict]:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    arr = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype="<f8")
    return arr.reshape(meta["nx"], meta["ny"]).copy(), meta


def dump_state(directory, state: PFState, index: int) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    fields = {"c": state.c, "mu": state.mu, "u1": state.u[0], "u2": state.u[1]}
    for name, arr in fields.items():
        out.extend(write_grid(directory / f"{name}_{index:05d}", arr, state.grid, state.time, name))
    return out


# -- module-level conveniences ---------------------------------------------------

_MODELS: dict = {}


def _model(grid, config, potential):
    key = (grid, config, potential)
    m = _MODELS.get(key)
    if m is None:
        if len(_MODELS) > 8:
            _MODELS.clear()
        m = _MODELS[key] = CahnLarche(grid, config, potential)
    return m


def step(state: PFState, config: PFConfig, potential: DoubleWell | None = None) -> PFState:
    return _model(state.grid, config, potential or DoubleWell.quartic()).step(state)


def run(init: PFState, config: PFConfig, potential: DoubleWell | None = None, **kwargs) -> Trajectory:
    return _model(init.grid, config, potential or DoubleWell.quartic()).run(init, **kwargs)


def energy(state: PFState, config: PFConfig, potential: DoubleWell | None = None) -> tuple[float, float]:
    return _model(state.grid, config, potential or DoubleWell.quartic()).energy(state.c, state.u)


def with_time(state: PFState, t: float) -> PFState:
    return replace(state, time=t)
