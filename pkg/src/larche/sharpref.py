"""Sharp-interface references and interface-condition residual meters."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .elasticity import (Eigenstrain, ElasticityTensor, RadialElasticFields, elastic_jump,
                         nodal_grad_u, radial_solution)
from .geometry import GeometryError, InterfacePolyline, PolylineDistance, one_sided_sample
from .grid import Grid2D


@dataclass(frozen=True)
class RadialReference:
    """Stationary circle: piecewise-constant mu equal to a single global constant."""

    R: float
    Rout: float
    sigma: float
    kappa: float
    mu_value: float
    elastic_jump: float
    velocity: float = 0.0
    geometry: str = "any"
    elastic: RadialElasticFields | None = None

    def mu_field(self, x, y) -> np.ndarray:
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, self.mu_value)


def radial_reference(R: float, Rout: float, sigma: float, elastic=None,
                     center=(0.5, 0.5)) -> RadialReference:
    """``elastic`` is None or anything with ``lam``, ``mu`` and ``estar`` attributes
    (or a dict with keys ``lambda``, ``mu``, ``estar``)."""
    if not (0 < R < Rout):
        raise ValueError("need 0 < R < Rout")
    kappa = -1.0 / R
    if elastic is None:
        return RadialReference(R, Rout, sigma, kappa, sigma * kappa, 0.0)
    if isinstance(elastic, dict):
        lam, mu, es = float(elastic["lambda"]), float(elastic["mu"]), float(elastic["estar"])
    else:
        lam, mu, es = elastic.lam, elastic.mu, elastic.estar
    fields = radial_solution(R, Rout, lam, mu, es, -1.0, 1.0, center)
    return RadialReference(R, Rout, sigma, kappa, sigma * kappa + fields.jump, fields.jump,
                           0.0, "disk", fields)


@dataclass(eq=False)
class ResidualTable:
    columns: tuple[str, ...]
    data: dict

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    def __len__(self) -> int:
        return len(next(iter(self.data.values())))

    @property
    def residual(self) -> np.ndarray:
        return self.data["residual"]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for i in range(len(self)):
                w.writerow([repr(float(self.data[k][i])) for k in self.columns])


GT_COLUMNS = ("s", "x", "y", "mu_meas", "kappa", "elastic_term", "residual")
STEFAN_COLUMNS = ("s", "x", "y", "V", "jump", "residual")


def _sample_grad(G: np.ndarray, grid: Grid2D, pts: np.ndarray) -> np.ndarray:
    out = np.empty((len(pts), 2, 2))
    for i in range(2):
        for j in range(2):
            out[:, i, j] = grid.sample(G[..., i, j], pts[:, 0], pts[:, 1])
    return out


def interface_elastic_term(u: np.ndarray, grid: Grid2D, poly: InterfacePolyline,
                           C: ElasticityTensor, Estar: Eigenstrain, offset: float) -> np.ndarray:
    """Elastic jump term from gradients sampled at ``p ± offset nu`` with phases ±1."""
    G = nodal_grad_u(u, grid)
    plus = _sample_grad(G, grid, poly.points + offset * poly.normals)
    minus = _sample_grad(G, grid, poly.points - offset * poly.normals)
    return elastic_jump(C, Estar, plus, minus, 1.0, -1.0, poly.normals)


def gibbs_thomson_residual(state, poly: InterfacePolyline, sigma: float,
                           C: ElasticityTensor | None = None, Estar: Eigenstrain | None = None,
                           offset: float | None = None, epsilon: float | None = None,
                           elastic_term=None) -> ResidualTable:
    """``mu - sigma kappa - elastic term`` at each interface point.

    The elastic term is sampled one-sidedly from the state's displacement
    unless ``elastic_term`` (scalar or per-point array) is supplied, e.g. the
    closed-form disk value.
    """
    grid = state.grid
    if offset is None:
        offset = max(2 * (epsilon or 0.0), 3 * grid.h)
    if epsilon is not None and offset < max(2 * epsilon, 3 * grid.h) - 1e-14:
        raise GeometryError("offset must be at least max(2 eps, 3 h)")
    pts = poly.points
    mu_meas = grid.sample(state.mu, pts[:, 0], pts[:, 1])
    if elastic_term is not None:
        el = np.broadcast_to(np.asarray(elastic_term, dtype=float), mu_meas.shape).copy()
    elif C is not None and Estar is not None:
        el = interface_elastic_term(state.u, grid, poly, C, Estar, offset)
    else:
        el = np.zeros_like(mu_meas)
    res = mu_meas - sigma * poly.curvature - el
    data = {"s": poly.s, "x": pts[:, 0], "y": pts[:, 1], "mu_meas": mu_meas,
            "kappa": poly.curvature, "elastic_term": el, "residual": res}
    return ResidualTable(GT_COLUMNS, data)


def normal_velocity(poly0: InterfacePolyline, poly1: InterfacePolyline, dt: float,
                    max_shift: float) -> np.ndarray:
    """Normal velocity at the points of ``poly0`` from the nearest point of ``poly1``.

    Positive along the normal, i.e. when the negative phase grows.
    """
    d1 = PolylineDistance(poly1)(poly0.points[:, 0], poly0.points[:, 1])
    if poly1 is poly0 or not np.any(d1):
        return np.zeros(len(poly0))
    if dt <= 0:
        raise ValueError("frames must be separated by a positive time")
    if np.max(np.abs(d1)) > max_shift:
        raise GeometryError("contour matching ambiguous: a point moved more than the allowed shift")
    return -d1 / dt


def stefan_residual(frame0, frame1, poly0: InterfacePolyline, poly1: InterfacePolyline,
                    offset: float, tau: float | None = None, dt: float | None = None) -> ResidualTable:
    """``V + 1/2 [d mu / d nu]`` on the earlier frame's interface."""
    grid = frame0.grid
    dt = frame1.time - frame0.time if dt is None else dt
    if tau is not None and poly1 is not poly0 and dt < 10 * tau - 1e-14:
        raise ValueError("frames must be at least 10 time steps apart")
    V = normal_velocity(poly0, poly1, dt, 5 * grid.h)
    _, _, jump = one_sided_sample(frame0.mu, grid, poly0.points, poly0.normals, offset)
    data = {"s": poly0.s, "x": poly0.points[:, 0], "y": poly0.points[:, 1],
            "V": V, "jump": jump, "residual": V + 0.5 * jump}
    return ResidualTable(STEFAN_COLUMNS, data)
