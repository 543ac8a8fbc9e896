"""Signed distances, zero-contour extraction, normals and curvature.

Conventions: d < 0 in the inner phase, the normal is grad d (pointing from
c < 0 into c > 0) and the curvature is kappa = -laplacian(d) on the interface,
so a circle of radius R enclosing the negative phase has kappa = -1/R.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from skimage.measure import find_contours, points_in_poly

from .grid import Grid2D


class GeometryError(ValueError):
    pass


# -- signed distance maps ------------------------------------------------------


class SignedDistanceMap:
    """Base class: ``d(x, y)``, the projection onto the zero set and ``laplacian(d)``."""

    kind = "abstract"

    def __call__(self, x, y) -> np.ndarray:
        return self.evaluate(x, y)[0]

    def evaluate(self, x, y):
        """Returns (d, px, py, k) with (px, py) the nearest interface point and k the
        interface curvature there (positive for a convex inner phase)."""
        raise NotImplementedError

    def project(self, x, y):
        _, px, py, _ = self.evaluate(x, y)
        return px, py

    def laplacian(self, x, y) -> np.ndarray:
        """laplacian(d) = k / (1 + k d) with k the curvature at the projected point."""
        d, _, _, k = self.evaluate(x, y)
        return k / (1.0 + k * d)

    def projected_laplacian(self, x, y) -> np.ndarray:
        """laplacian(d) evaluated at the projection onto the interface (equal to k)."""
        return self.evaluate(x, y)[3]

    def min_radius(self) -> float:
        raise NotImplementedError

    def bbox(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Circle(SignedDistanceMap):
    center: tuple[float, float] = (0.5, 0.5)
    R: float = 0.25
    kind = "circle"

    def __post_init__(self):
        if self.R <= 0:
            raise GeometryError("radius must be positive")

    def evaluate(self, x, y):
        X = np.asarray(x, dtype=float) - self.center[0]
        Y = np.asarray(y, dtype=float) - self.center[1]
        r = np.hypot(X, Y)
        safe = np.where(r > 0, r, 1.0)
        ux = np.where(r > 0, X / safe, 1.0)
        uy = np.where(r > 0, Y / safe, 0.0)
        k = np.full_like(r, 1.0 / self.R)
        return r - self.R, self.center[0] + self.R * ux, self.center[1] + self.R * uy, k

    def laplacian(self, x, y):
        r = np.hypot(np.asarray(x) - self.center[0], np.asarray(y) - self.center[1])
        return 1.0 / r

    def min_radius(self) -> float:
        return self.R

    def bbox(self):
        cx, cy = self.center
        return cx - self.R, cx + self.R, cy - self.R, cy + self.R


@dataclass(frozen=True)
class Ellipse(SignedDistanceMap):
    center: tuple[float, float] = (0.5, 0.5)
    a: float = 0.3
    b: float = 0.2
    tol: float = 1e-12
    max_iter: int = 50
    kind = "ellipse"

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise GeometryError("semi-axes must be positive")

    def evaluate(self, x, y):
        X = np.asarray(x, dtype=float) - self.center[0]
        Y = np.asarray(y, dtype=float) - self.center[1]
        shape = np.broadcast(X, Y).shape
        X = np.broadcast_to(X, shape).ravel()
        Y = np.broadcast_to(Y, shape).ravel()
        a, b = self.a, self.b
        # coarse start from dense parameter sampling
        ts = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        t = np.empty(X.size)
        for lo in range(0, X.size, 4096):
            sl = slice(lo, lo + 4096)
            dist2 = (X[sl, None] - a * np.cos(ts)) ** 2 + (Y[sl, None] - b * np.sin(ts)) ** 2
            t[sl] = ts[np.argmin(dist2, axis=1)]
        # Newton on g(t) = (p - e(t)) . e'(t)
        for it in range(self.max_iter):
            c, s = np.cos(t), np.sin(t)
            ex, ey = a * c, b * s
            dx, dy = -a * s, b * c
            g = (X - ex) * dx + (Y - ey) * dy
            dg = -(dx * dx + dy * dy) + (X - ex) * (-a * c) + (Y - ey) * (-b * s)
            dg = np.where(np.abs(dg) < 1e-300, -1e-300, dg)
            step = g / dg
            # keep the update bounded; the coarse start is within one sample spacing
            step = np.clip(step, -0.05, 0.05)
            t = t - step
            if np.max(np.abs(step)) < self.tol:
                break
        else:
            raise GeometryError(f"ellipse projection did not converge in {self.max_iter} iterations")
        px, py = a * np.cos(t), b * np.sin(t)
        dist = np.hypot(X - px, Y - py)
        inside = (X / a) ** 2 + (Y / b) ** 2 < 1.0
        d = np.where(inside, -dist, dist)
        k = a * b / (a**2 * np.sin(t) ** 2 + b**2 * np.cos(t) ** 2) ** 1.5
        out = (d, px + self.center[0], py + self.center[1], k)
        return tuple(v.reshape(shape) for v in out)

    def min_radius(self) -> float:
        return min(self.a, self.b) ** 2 / max(self.a, self.b)

    def bbox(self):
        cx, cy = self.center
        return cx - self.a, cx + self.a, cy - self.b, cy + self.b


class PolylineDistance(SignedDistanceMap):
    """Approximate signed distance to a closed polyline (nearest vertex/segment)."""

    kind = "from-polyline"

    def __init__(self, poly: "InterfacePolyline"):
        if poly.curvature is None:
            poly = curvature_normals(poly)
        self.poly = poly
        self._k = -poly.curvature

    def evaluate(self, x, y):
        X = np.asarray(x, dtype=float)
        Y = np.asarray(y, dtype=float)
        shape = np.broadcast(X, Y).shape
        P = np.stack([np.broadcast_to(X, shape).ravel(), np.broadcast_to(Y, shape).ravel()], axis=1)
        A = self.poly.points
        Bp = np.roll(A, -1, axis=0)
        AB = Bp - A
        L2 = np.einsum("ij,ij->i", AB, AB)
        best = np.full(len(P), np.inf)
        proj = np.zeros_like(P)
        kk = np.zeros(len(P))
        for lo in range(0, len(P), 2048):
            Q = P[lo:lo + 2048]
            t = np.clip(np.einsum("pij,ij->pi", Q[:, None, :] - A[None], AB) / L2, 0.0, 1.0)
            C = A[None] + t[..., None] * AB[None]
            dist = np.linalg.norm(Q[:, None, :] - C, axis=2)
            j = np.argmin(dist, axis=1)
            rows = np.arange(len(Q))
            best[lo:lo + 2048] = dist[rows, j]
            proj[lo:lo + 2048] = C[rows, j]
            tj = t[rows, j]
            kk[lo:lo + 2048] = (1 - tj) * self._k[j] + tj * np.roll(self._k, -1)[j]
        inside = points_in_poly(P, A)
        # the negative phase lies on the side the normals point away from
        neg_inside = self.poly.signed_area() > 0
        sign = np.where(inside == neg_inside, -1.0, 1.0)
        d = sign * best
        return (d.reshape(shape), proj[:, 0].reshape(shape), proj[:, 1].reshape(shape), kk.reshape(shape))

    def min_radius(self) -> float:
        return 1.0 / max(np.max(np.abs(self.poly.curvature)), 1e-12)

    def bbox(self):
        p = self.poly.points
        return p[:, 0].min(), p[:, 0].max(), p[:, 1].min(), p[:, 1].max()


def sdf(shape) -> SignedDistanceMap:
    """Build a signed distance map from a config dict, a map, or a polyline.

    Dicts look like ``{"kind": "circle", "center": [0.5, 0.5], "R": 0.25}`` or
    ``{"kind": "ellipse", "center": [...], "a": 0.3, "b": 0.2}``.
    """
    if isinstance(shape, SignedDistanceMap):
        return shape
    if isinstance(shape, InterfacePolyline):
        return PolylineDistance(shape)
    if isinstance(shape, dict):
        kind = shape.get("kind")
        center = tuple(float(v) for v in shape.get("center", (0.5, 0.5)))
        if kind == "circle":
            return Circle(center, float(shape["R"]))
        if kind == "ellipse":
            return Ellipse(center, float(shape["a"]), float(shape["b"]))
        raise GeometryError(f"unknown shape kind {kind!r}")
    raise GeometryError(f"cannot build a signed distance from {type(shape).__name__}")


def shape_to_dict(shape: SignedDistanceMap) -> dict:
    if isinstance(shape, Circle):
        return {"kind": "circle", "center": list(shape.center), "R": shape.R}
    if isinstance(shape, Ellipse):
        return {"kind": "ellipse", "center": list(shape.center), "a": shape.a, "b": shape.b}
    return {"kind": shape.kind}


def boundary_clearance(shape: SignedDistanceMap, grid: Grid2D) -> float:
    """Distance from the interface's bounding box to the domain boundary."""
    x0, x1, y0, y1 = shape.bbox()
    return float(min(x0, y0, grid.Lx - x1, grid.Ly - y1))


# -- polylines -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InterfacePolyline:
    """Closed polyline; the negative phase lies to the left of the point order."""

    points: np.ndarray
    normals: np.ndarray = field(default=None)
    curvature: np.ndarray = field(default=None)
    s: np.ndarray = field(default=None)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def length(self) -> float:
        d = np.diff(np.vstack([self.points, self.points[:1]]), axis=0)
        return float(np.linalg.norm(d, axis=1).sum())

    def segment_lengths(self) -> np.ndarray:
        d = np.roll(self.points, -1, axis=0) - self.points
        return np.linalg.norm(d, axis=1)

    def signed_area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def reversed(self) -> "InterfacePolyline":
        return InterfacePolyline(self.points[::-1].copy())

    def mean_radius(self, center) -> float:
        return float(np.mean(np.linalg.norm(self.points - np.asarray(center), axis=1)))

    def weights(self) -> np.ndarray:
        """Trapezoid arclength weights for integrating per-point data around the loop."""
        seg = self.segment_lengths()
        return 0.5 * (seg + np.roll(seg, 1))

    def integrate(self, values) -> float:
        return float(np.sum(self.weights() * np.asarray(values)))

    def to_csv(self, path) -> None:
        if self.normals is None or self.curvature is None:
            raise GeometryError("compute normals and curvature before dumping")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "nx", "ny", "kappa", "s"])
            for p, n, k, s in zip(self.points, self.normals, self.curvature, self.s):
                w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(n[0])),
                            repr(float(n[1])), repr(float(k)), repr(float(s))])


def _resample_closed(points: np.ndarray, spacing: float) -> np.ndarray:
    pts = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    keep = np.concatenate([[True], seg > 1e-14])
    pts = pts[keep]
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    pts[-1] = pts[0]
    L = s[-1]
    n = max(16, int(round(L / spacing)))
    spl = CubicSpline(s, pts, bc_type="periodic")
    return spl(np.linspace(0.0, L, n, endpoint=False))


def _refine_on_spline(field, grid, pts, iters: int = 3):
    """Newton-project points onto the zero set of the cubic-spline interpolant."""
    step = 1e-3 * grid.h
    for _ in range(iters):
        x, y = pts[:, 0], pts[:, 1]
        v = grid.sample(field, x, y, order=3)
        gx = (grid.sample(field, np.clip(x + step, 0, grid.Lx), y, order=3)
              - grid.sample(field, np.clip(x - step, 0, grid.Lx), y, order=3)) / (2 * step)
        gy = (grid.sample(field, x, np.clip(y + step, 0, grid.Ly), order=3)
              - grid.sample(field, x, np.clip(y - step, 0, grid.Ly), order=3)) / (2 * step)
        g2 = gx**2 + gy**2
        ok = g2 > 0
        move = np.zeros_like(pts)
        move[ok, 0] = v[ok] * gx[ok] / g2[ok]
        move[ok, 1] = v[ok] * gy[ok] / g2[ok]
        # never move further than half a cell; marching squares is already that close
        lim = 0.5 * grid.h
        norm = np.linalg.norm(move, axis=1)
        move[norm > lim] *= (lim / norm[norm > lim])[:, None]
        pts = pts - move
    return pts


def extract_zero_contour(field: np.ndarray, grid: Grid2D, spacing: float | None = None,
                         compute_curvature: bool = True, refine: bool = True) -> InterfacePolyline:
    """Closed c = 0 contour by marching squares, resampled to uniform arclength.

    With ``refine`` the marching-squares points are projected onto the zero
    set of the cubic-spline interpolant, which removes the kinks of the
    piecewise-linear contour before curvature is differentiated.

    The loop is ordered so that c < 0 lies on its left; normals then point
    from the c < 0 region into the c > 0 region.
    """
    field = np.asarray(field, dtype=float)
    if field.shape != grid.shape:
        raise GeometryError("field shape does not match the grid")
    if field.min() >= 0 or field.max() <= 0:
        raise GeometryError("no interface: field does not change sign")
    contours = find_contours(field, 0.0)
    contours = [cc for cc in contours if len(cc) > 2]
    if len(contours) != 1:
        raise GeometryError(f"expected a single interface component, found {len(contours)}")
    cc = contours[0]
    if np.linalg.norm(cc[0] - cc[-1]) > 1e-9:
        raise GeometryError("interface contour is open (touches the boundary)")
    pts = np.stack([cc[:-1, 0] * grid.hx, cc[:-1, 1] * grid.hy], axis=1)
    pts = _resample_closed(pts, spacing or grid.h)
    if refine:
        pts = _refine_on_spline(field, grid, pts)
        pts = _resample_closed(pts, spacing or grid.h)
    poly = InterfacePolyline(pts)
    # orient: sample just to the left of the first segment
    t = pts[1] - pts[0]
    t = t / np.linalg.norm(t)
    mid = 0.5 * (pts[0] + pts[1])
    left = mid + 0.5 * grid.h * np.array([-t[1], t[0]])
    right = mid - 0.5 * grid.h * np.array([-t[1], t[0]])
    if grid.sample(field, left[0], left[1]) > grid.sample(field, right[0], right[1]):
        poly = poly.reversed()
    return curvature_normals(poly) if compute_curvature else poly


def _smooth5(v: np.ndarray) -> np.ndarray:
    w = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
    return sum(wk * np.roll(v, 2 - k) for k, wk in enumerate(w))


def curvature_normals(poly: InterfacePolyline, canonical: bool = False) -> InterfacePolyline:
    """Normals (right-hand normal of the tangent) and kappa = -d(angle)/ds.

    With the point order leaving the negative phase on the left, this gives
    kappa = -laplacian(d).  ``canonical=True`` first reorders the loop
    counter-clockwise, which assumes the negative phase is the enclosed one.
    """
    pts = np.asarray(poly.points, dtype=float)
    if len(pts) < 16:
        raise GeometryError("curvature needs at least 16 points")
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    if np.any(seg < 1e-14):
        raise GeometryError("duplicate consecutive points")
    if canonical and InterfacePolyline(pts).signed_area() < 0:
        pts = pts[::-1].copy()
        seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    ds_f = seg
    ds_b = np.roll(seg, 1)
    tan = (np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)) / (ds_f + ds_b)[:, None]
    tan /= np.linalg.norm(tan, axis=1)[:, None]
    normals = np.stack([tan[:, 1], -tan[:, 0]], axis=1)
    # tangent-angle increments per segment, wrapped to (-pi, pi]
    seg_vec = np.roll(pts, -1, axis=0) - pts
    ang = np.arctan2(seg_vec[:, 1], seg_vec[:, 0])
    dang = np.angle(np.exp(1j * (ang - np.roll(ang, 1))))
    kappa = -_smooth5(dang / (0.5 * (ds_f + ds_b)))
    s = np.concatenate([[0.0], np.cumsum(seg[:-1])])
    return InterfacePolyline(pts, normals, kappa, s)


def one_sided_sample(field: np.ndarray, grid: Grid2D, p, nu, offset: float, order: int = 1):
    """Samples at ``p ± offset nu`` and one-sided normal derivatives.

    Returns (plus, minus, jump) with jump = (outer slope on the + side) minus
    (outer slope on the - side), slopes taken along nu over one grid spacing.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    nu = np.atleast_2d(np.asarray(nu, dtype=float))
    h = grid.h
    if offset < 2 * h - 1e-12:
        raise GeometryError("offset must be at least two grid spacings")

    def at(dist):
        q = p + dist * nu
        return grid.sample(field, q[:, 0], q[:, 1], order=order)

    plus, plus2 = at(offset), at(offset + h)
    minus, minus2 = at(-offset), at(-offset - h)
    jump = (plus2 - plus) / h - (minus - minus2) / h
    return plus, minus, jump


def c3_proxy(poly: InterfacePolyline) -> float:
    """max |kappa| + max |d kappa / ds| (reported, not a verified bound)."""
    seg = poly.segment_lengths()
    dk = (np.roll(poly.curvature, -1) - poly.curvature) / seg
    return float(np.max(np.abs(poly.curvature)) + np.max(np.abs(dk)))


def grad_norm_defect(shape: SignedDistanceMap, grid: Grid2D, halfwidth: float, step: float = 1e-5) -> float:
    """max | |grad d|^2 - 1 | over grid nodes with |d| < halfwidth.

    The gradient is a centered difference of the map itself with a small step,
    so the result measures the map rather than grid truncation.
    """
    X, Y = grid.mesh
    d = shape(X, Y)
    m = np.abs(d) < halfwidth
    x, y = X[m], Y[m]
    gx = (shape(x + step, y) - shape(x - step, y)) / (2 * step)
    gy = (shape(x, y + step) - shape(x, y - step)) / (2 * step)
    return float(np.max(np.abs(gx**2 + gy**2 - 1.0)))
