"""Cell-vertex rectangular grid with mirror-ghost Neumann operators.

Fields are arrays of shape ``(nx, ny)`` indexed ``[i, j]`` for the node
``(x_i, y_j) = (i hx, j hy)``.  Quadrature uses trapezoid weights, and the
5-point Laplacian with mirror ghosts is self-adjoint in that weighted inner
product and diagonal in the type-I discrete cosine basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft
from scipy.ndimage import map_coordinates


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("grid needs at least 4 nodes per direction")
        if self.Lx <= 0 or self.Ly <= 0:
            raise ValueError("domain lengths must be positive")

    @classmethod
    def square(cls, n: int, L: float = 1.0) -> "Grid2D":
        return cls(n, n, L, L)

    @property
    def hx(self) -> float:
        return self.Lx / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.Ly / (self.ny - 1)

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.Lx, self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.Ly, self.ny)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def weights(self) -> np.ndarray:
        wx = np.full(self.nx, self.hx)
        wx[[0, -1]] *= 0.5
        wy = np.full(self.ny, self.hy)
        wy[[0, -1]] *= 0.5
        return np.outer(wx, wy)

    @property
    def area(self) -> float:
        return self.Lx * self.Ly

    def integrate(self, field: np.ndarray) -> float:
        return float(np.sum(self.weights * field))

    def mean(self, field: np.ndarray) -> float:
        return self.integrate(field) / self.area

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.sum(self.weights * a * b))

    def l2(self, field: np.ndarray) -> float:
        return float(np.sqrt(self.integrate(field * field)))

    def lp(self, field: np.ndarray, p: float) -> float:
        return float(self.integrate(np.abs(field) ** p) ** (1.0 / p))

    # -- Neumann Laplacian -------------------------------------------------

    def laplacian(self, u: np.ndarray) -> np.ndarray:
        """5-point Laplacian with mirror ghost nodes (u_{-1} = u_1)."""
        p = np.pad(u, 1, mode="reflect")
        return ((p[2:, 1:-1] - 2 * u + p[:-2, 1:-1]) / self.hx**2
                + (p[1:-1, 2:] - 2 * u + p[1:-1, :-2]) / self.hy**2)

    @cached_property
    def laplacian_symbol(self) -> np.ndarray:
        """Eigenvalues ``-Lambda <= 0`` of :meth:`laplacian` on the DCT-I modes."""
        kx = np.arange(self.nx)
        ky = np.arange(self.ny)
        lx = 4.0 / self.hx**2 * np.sin(np.pi * kx / (2 * (self.nx - 1))) ** 2
        ly = 4.0 / self.hy**2 * np.sin(np.pi * ky / (2 * (self.ny - 1))) ** 2
        return -(lx[:, None] + ly[None, :])

    def dct(self, u: np.ndarray) -> np.ndarray:
        return fft.dctn(u, type=1)

    def idct(self, u: np.ndarray) -> np.ndarray:
        return fft.idctn(u, type=1)

    def solve_poisson(self, rhs: np.ndarray) -> np.ndarray:
        """Mean-zero Psi with ``-laplacian(Psi) = rhs - mean(rhs)``."""
        r = self.dct(rhs)
        lam = -self.laplacian_symbol
        r[0, 0] = 0.0
        lam = lam.copy()
        lam[0, 0] = 1.0
        return self.idct(r / lam)

    def dirichlet_form(self, u: np.ndarray) -> float:
        """Trapezoid quadrature of ``∫ |grad u|^2`` from edge differences.

        Equals ``-<laplacian(u), u>`` in the weighted inner product.
        """
        dx = np.diff(u, axis=0) / self.hx
        dy = np.diff(u, axis=1) / self.hy
        wy = np.full(self.ny, self.hy)
        wy[[0, -1]] *= 0.5
        wx = np.full(self.nx, self.hx)
        wx[[0, -1]] *= 0.5
        return float(np.sum(dx**2 * self.hx * wy[None, :]) + np.sum(dy**2 * self.hy * wx[:, None]))

    # -- differentiation and sampling --------------------------------------

    def gradient(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Centered differences inside, second-order one-sided on the boundary."""
        return (np.gradient(u, self.hx, axis=0, edge_order=2),
                np.gradient(u, self.hy, axis=1, edge_order=2))

    def sample(self, field: np.ndarray, x, y, order: int = 1) -> np.ndarray:
        """Bilinear (order=1) or cubic-spline (order=3) samples at physical points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        tol = 1e-9 * max(self.Lx, self.Ly)
        if np.any((x < -tol) | (x > self.Lx + tol) | (y < -tol) | (y > self.Ly + tol)):
            raise ValueError("sample point outside the domain")
        coords = np.stack([x.ravel() / self.hx, y.ravel() / self.hy])
        out = map_coordinates(field, coords, order=order, mode="nearest")
        return out.reshape(x.shape)

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "Lx": self.Lx, "Ly": self.Ly}
