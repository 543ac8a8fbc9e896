import numpy as np
import pytest

from larche.geometry import (Circle, Ellipse, GeometryError, InterfacePolyline, PolylineDistance,
                             boundary_clearance, c3_proxy, curvature_normals, extract_zero_contour,
                             grad_norm_defect, one_sided_sample, sdf)
from larche.grid import Grid2D


def circle_points(n, R=0.25, center=(0.5, 0.5), ccw=True):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    if not ccw:
        t = t[::-1]
    return np.stack([center[0] + R * np.cos(t), center[1] + R * np.sin(t)], axis=1)


def test_circle_distance_and_laplacian():
    c = Circle((0.5, 0.5), 0.25)
    assert c(0.5, 0.5) == pytest.approx(-0.25)
    assert c(1.0, 0.5) == pytest.approx(0.25)
    px, py = c.project(0.9, 0.5)
    assert (px, py) == pytest.approx((0.75, 0.5))
    assert c.laplacian(0.9, 0.5) == pytest.approx(1 / 0.4)
    assert c.projected_laplacian(0.9, 0.5) == pytest.approx(4.0)


def test_ellipse_distance_matches_dense_sampling():
    e = Ellipse((0.5, 0.5), 0.3, 0.2)
    t = np.linspace(0, 2 * np.pi, 200001)
    bx, by = 0.5 + 0.3 * np.cos(t), 0.5 + 0.2 * np.sin(t)
    pts = np.array([[0.62, 0.55], [0.9, 0.5], [0.5, 0.8], [0.3, 0.41]])
    for x, y in pts:
        dist = np.min(np.hypot(bx - x, by - y))
        inside = ((x - 0.5) / 0.3) ** 2 + ((y - 0.5) / 0.2) ** 2 < 1
        assert e(x, y) == pytest.approx(-dist if inside else dist, abs=1e-8)


def test_ellipse_curvature_at_vertices():
    e = Ellipse((0.5, 0.5), 0.3, 0.2)
    assert e.projected_laplacian(0.85, 0.5) == pytest.approx(0.3 / 0.2**2, rel=1e-8)
    assert e.projected_laplacian(0.5, 0.75) == pytest.approx(0.2 / 0.3**2, rel=1e-8)


def test_grad_norm_defect_small():
    g = Grid2D.square(65)
    assert grad_norm_defect(Circle(), g, 0.1) < 1e-8
    assert grad_norm_defect(Ellipse(), g, 0.1) < 1e-6


def test_sdf_factory():
    assert isinstance(sdf({"kind": "circle", "R": 0.2}), Circle)
    assert isinstance(sdf({"kind": "ellipse", "a": 0.3, "b": 0.2}), Ellipse)
    with pytest.raises(GeometryError):
        sdf({"kind": "star"})
    assert boundary_clearance(Circle((0.5, 0.5), 0.25), Grid2D.square(9)) == pytest.approx(0.25)


def test_curvature_of_sampled_circle():
    poly = curvature_normals(InterfacePolyline(circle_points(400)))
    np.testing.assert_allclose(poly.curvature, -4.0, rtol=1e-3)
    # outward normals
    radial = (poly.points - 0.5) / 0.25
    np.testing.assert_allclose(np.sum(poly.normals * radial, axis=1), 1.0, atol=1e-6)
    assert poly.length == pytest.approx(2 * np.pi * 0.25, rel=1e-4)


def test_reversed_loop_canonical():
    poly = curvature_normals(InterfacePolyline(circle_points(200, ccw=False)), canonical=True)
    np.testing.assert_allclose(poly.curvature, -4.0, rtol=1e-3)
    raw = curvature_normals(InterfacePolyline(circle_points(200, ccw=False)))
    np.testing.assert_allclose(raw.curvature, 4.0, rtol=1e-3)


def test_curvature_needs_points():
    with pytest.raises(GeometryError):
        curvature_normals(InterfacePolyline(circle_points(10)))


def test_extract_circle_contour():
    g = Grid2D.square(129)
    X, Y = g.mesh
    c = np.tanh(Circle((0.5, 0.5), 0.25)(X, Y) / (np.sqrt(2) * 0.02))
    poly = extract_zero_contour(c, g)
    r = np.hypot(poly.points[:, 0] - 0.5, poly.points[:, 1] - 0.5)
    assert np.max(np.abs(r - 0.25)) < 1e-4
    assert np.max(np.abs(poly.curvature + 4.0)) < 0.05
    assert poly.signed_area() > 0


def test_extract_errors():
    g = Grid2D.square(33)
    with pytest.raises(GeometryError):
        extract_zero_contour(np.ones(g.shape), g)
    X, Y = g.mesh
    two = np.minimum(np.hypot(X - 0.25, Y - 0.5), np.hypot(X - 0.75, Y - 0.5)) - 0.1
    with pytest.raises(GeometryError):
        extract_zero_contour(two, g)
    with pytest.raises(GeometryError):
        extract_zero_contour(X - 0.5, g)


def test_polyline_distance_sign():
    poly = InterfacePolyline(circle_points(400))
    d = PolylineDistance(poly)
    assert d(0.5, 0.5) == pytest.approx(-0.25, abs=1e-4)
    assert d(0.9, 0.5) == pytest.approx(0.15, abs=1e-4)


def test_one_sided_sample_of_kink():
    g = Grid2D.square(101)
    X, Y = g.mesh
    f = np.where(X > 0.5, 3.0 * (X - 0.5), -1.0 * (X - 0.5))
    plus, minus, jump = one_sided_sample(f, g, [[0.5, 0.5]], [[1.0, 0.0]], 0.05)
    assert plus[0] == pytest.approx(0.15)
    assert minus[0] == pytest.approx(0.05)
    assert jump[0] == pytest.approx(4.0)
    with pytest.raises(GeometryError):
        one_sided_sample(f, g, [[0.5, 0.5]], [[1.0, 0.0]], 0.01)


def test_c3_proxy_circle():
    poly = curvature_normals(InterfacePolyline(circle_points(400)))
    assert c3_proxy(poly) == pytest.approx(4.0, rel=1e-2)


def test_polyline_csv(tmp_path):
    poly = curvature_normals(InterfacePolyline(circle_points(64)))
    poly.to_csv(tmp_path / "p.csv")
    head = (tmp_path / "p.csv").read_text().splitlines()
    assert head[0] == "x,y,nx,ny,kappa,s"
    assert len(head) == 65
