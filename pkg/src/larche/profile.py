"""One-dimensional transition profiles and the scalar constants built from them.

theta0 is the heteroclinic of ``-w'' + f(w) = 0`` with ``w(0) = 0``; theta1 is the
bounded solution of ``theta1'' - f'(theta0) theta1 = sigma - theta0'`` normalized
by ``theta1(0) = 0``.  Both live on a symmetric truncated line ``[-Z, Z]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import LinAlgError, solve_banded

from .potential import DoubleWell, validate


class ProfileError(RuntimeError):
    pass


# 6th-order central stencils
_D1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def _stencil(values: np.ndarray, weights: np.ndarray, h: float, power: int) -> np.ndarray:
    """Apply a 7-point central stencil; the three nodes at each end are NaN."""
    out = np.full_like(values, np.nan)
    n = len(values)
    out[3:-3] = sum(w * values[k:n - 6 + k] for k, w in enumerate(weights)) / h**power
    return out


def second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    return _stencil(values, _D2, h, 2)


def first_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """6th order inside, 2nd order one-sided on the last three nodes of each end."""
    out = _stencil(values, _D1, h, 1)
    g = np.gradient(values, h, edge_order=2)
    out[:3], out[-3:] = g[:3], g[-3:]
    return out


@dataclass(frozen=True, eq=False)
class ProfileTable:
    z: np.ndarray
    values: np.ndarray
    derivative: np.ndarray
    limits: tuple[float, float]
    decay_alpha: float
    name: str = "theta0"
    potential: DoubleWell | None = None

    @property
    def half_width(self) -> float:
        return float(self.z[-1])

    @property
    def step(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def center_index(self) -> int:
        return len(self.z) // 2

    def _spline(self) -> CubicHermiteSpline:
        sp = self.__dict__.get("_sp")
        if sp is None:
            sp = CubicHermiteSpline(self.z, self.values, self.derivative)
            object.__setattr__(self, "_sp", sp)
        return sp

    def __call__(self, zq):
        """Hermite interpolation inside [-Z, Z]; the limit values outside."""
        zq = np.asarray(zq, dtype=float)
        Z = self.half_width
        out = self._spline()(np.clip(zq, -Z, Z))
        out = np.where(zq < -Z, self.limits[0], out)
        return np.where(zq > Z, self.limits[1], out)

    def deriv(self, zq):
        zq = np.asarray(zq, dtype=float)
        Z = self.half_width
        out = self._spline().derivative()(np.clip(zq, -Z, Z))
        return np.where(np.abs(zq) > Z, 0.0, out)

    def with_derivative_scaled(self, factor: float) -> "ProfileTable":
        return ProfileTable(self.z, self.values, factor * self.derivative, self.limits,
                            self.decay_alpha, self.name, self.potential)

    def same_grid(self, other: "ProfileTable") -> bool:
        return self.z.shape == other.z.shape and bool(np.array_equal(self.z, other.z))


def _grid(Z: float, h: float) -> tuple[np.ndarray, int]:
    n = int(round(Z / h))
    if n <= 0 or abs(n * h - Z) > 1e-9 * Z:
        raise ValueError(f"Z/h must be an integer (Z={Z}, h={h})")
    return np.linspace(-Z, Z, 2 * n + 1), n


def _march(rate_coeffs, deflated: bool, h: float, n: int, sign: float, substeps: int) -> np.ndarray:
    """Fixed-step RK4 for w' = sqrt(2 F(w)) from w(0) = 0, in direction ``sign``."""
    co = tuple(reversed(rate_coeffs))

    def rate(w):
        q = 0.0
        for a in co:
            q = q * w + a
        if deflated:
            return abs(1.0 - w * w) * (2.0 * q) ** 0.5 if q > 0 else 0.0
        return (2.0 * q) ** 0.5 if q > 0 else 0.0

    out = np.empty(n + 1)
    w = 0.0
    out[0] = 0.0
    k = sign * h / substeps
    for i in range(n):
        for _ in range(substeps):
            k1 = rate(w)
            k2 = rate(w + 0.5 * k * k1)
            k3 = rate(w + 0.5 * k * k2)
            k4 = rate(w + k * k3)
            w += k / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = w
    return out


def solve_theta0(potential: DoubleWell, Z: float = 10.0, h: float = 0.005, substeps: int = 8) -> ProfileTable:
    """Heteroclinic profile from the first integral ``w' = sqrt(2 F(w))``.

    Since F(±1) = 0, multiplying the ODE by w' and integrating gives
    ``(w')^2 / 2 = F(w)`` along the heteroclinic, a first-order problem that
    is integrated outward from ``w(0) = 0``.  No shooting is needed.
    """
    if Z < 8 or h > 0.01:
        raise ValueError("solve_theta0 needs Z >= 8 and h <= 0.01")
    report = validate(potential, 1000)
    if not report.passed:
        raise ProfileError("potential fails the double-well assumptions: " + "; ".join(report.lines()))
    u = np.linspace(-1, 1, 4001)[1:-1]
    if np.any(potential.F(u) <= 0):
        raise ProfileError("degenerate well: F <= 0 somewhere in (-1, 1)")

    z, n = _grid(Z, h)
    deflated = potential.deflated_coefficients
    coeffs = deflated if deflated is not None else potential.coefficients
    right = _march(coeffs, deflated is not None, h, n, +1.0, substeps)
    if potential.is_symmetric:
        left = -right
    else:
        left = _march(coeffs, deflated is not None, h, n, -1.0, substeps)
    values = np.concatenate([left[:0:-1], right])
    dv = np.diff(values)
    unsaturated = np.abs(values[:-1]) < 1.0 - 1e-12
    if np.any(dv < 0) or np.any(dv[unsaturated] <= 0):
        raise ProfileError("theta0 table is not strictly increasing; refine h or shrink Z")
    derivative = potential.sqrt_2F(values)
    alpha_max = min(np.sqrt(potential.df(-1.0)), np.sqrt(potential.df(1.0)))
    return ProfileTable(z, values, derivative, (-1.0, 1.0), 0.95 * alpha_max, "theta0", potential)


def ode_residual_theta0(theta0: ProfileTable) -> np.ndarray:
    """``theta0'' - f(theta0)`` on interior nodes, theta0'' from the derivative table."""
    P = theta0.potential
    d2 = first_derivative(theta0.derivative, theta0.step)
    return (d2 - P.f(theta0.values))[3:-3]


def fit_decay_rate(theta0: ProfileTable, z_min: float = 4.0, floor: float = 1e-11) -> float:
    """Least-squares exponent alpha in ``|theta0(±z) ∓ 1| ~ C exp(-alpha z)``; the
    smaller of the two sides is returned."""
    z, v = theta0.z, theta0.values
    rates = []
    for side, lim in ((z >= z_min, 1.0), (z <= -z_min, -1.0)):
        gap = np.abs(v[side] - lim)
        keep = gap > floor
        zz = np.abs(z[side][keep])
        slope = np.polyfit(zz, np.log(gap[keep]), 1)[0]
        rates.append(-slope)
    return float(min(rates))


@dataclass(frozen=True)
class SigmaResult:
    value: float
    tail_bound: float

    def __float__(self):
        return self.value


def sigma(theta0: ProfileTable) -> SigmaResult:
    """Surface tension ``1/2 ∫ (theta0')^2`` by the trapezoid rule on [-Z, Z].

    The exponential tails beyond ±Z are not added; their size
    ``(theta0'(±Z))^2 / (4 alpha)`` is reported as ``tail_bound``.
    """
    d = theta0.derivative
    val = 0.5 * np.trapezoid(d * d, theta0.z)
    P = theta0.potential
    if P is not None:
        a_lo, a_hi = np.sqrt(P.df(-1.0)), np.sqrt(P.df(1.0))
    else:
        a_lo = a_hi = theta0.decay_alpha
    tail = d[0] ** 2 / (4 * a_lo) + d[-1] ** 2 / (4 * a_hi)
    return SigmaResult(float(val), float(tail))


class BridgingFunction:
    """Monotone C^2 ramp eta with eta = 0 for z <= -1 and eta = 1 for z >= 1.

    eta is the quintic smoothstep plus ``a (1 - z^2)^3 + b z (1 - z^2)^3``;
    the coefficients are chosen so that ``∫ (eta - 1/2) theta0'`` and
    ``∫ z eta' theta0'`` vanish.  For symmetric wells a = b = 0.
    """

    def __init__(self, a: float = 0.0, b: float = 0.0, moment_defect=(0.0, 0.0), eta0: float = float("nan")):
        self.a, self.b = float(a), float(b)
        base = Polynomial([0.5, 15 / 16, 0.0, -5 / 8, 0.0, 3 / 16])
        bump = Polynomial([1.0, 0.0, -1.0]) ** 3
        self._poly = base + self.a * bump + self.b * Polynomial([0.0, 1.0]) * bump
        self._dpoly = self._poly.deriv()
        self.moment_defect = tuple(float(m) for m in moment_defect)
        self.eta0 = eta0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        inner = self._poly(np.clip(z, -1.0, 1.0))
        return np.where(z <= -1.0, 0.0, np.where(z >= 1.0, 1.0, inner))

    def deriv(self, z):
        z = np.asarray(z, dtype=float)
        return np.where(np.abs(z) >= 1.0, 0.0, self._dpoly(np.clip(z, -1.0, 1.0)))

    def min_derivative(self, samples: int = 20001) -> float:
        return float(np.min(self.deriv(np.linspace(-1, 1, samples))))

    def representation(self) -> dict:
        return {"kind": "piecewise-polynomial", "support": [-1.0, 1.0],
                "coefficients": self._poly.coef.tolist(), "left": 0.0, "right": 1.0}


def _eta_moments(eta: BridgingFunction, theta0: ProfileTable) -> np.ndarray:
    z, d = theta0.z, theta0.derivative
    return np.array([
        np.trapezoid((eta(z) - 0.5) * d, z),
        np.trapezoid(z * eta.deriv(z) * d, z),
    ])


def make_eta(theta0: ProfileTable) -> BridgingFunction:
    """Bridging function with both moment conditions against theta0'."""
    base = BridgingFunction()
    m0 = _eta_moments(base, theta0)
    P = theta0.potential
    if P is not None and P.is_symmetric:
        a = b = 0.0
    else:
        # moments are affine in (a, b)
        cols = []
        for ab in ((1.0, 0.0), (0.0, 1.0)):
            cols.append(_eta_moments(BridgingFunction(*ab), theta0) - m0)
        a, b = np.linalg.solve(np.column_stack(cols), -m0)
    eta = BridgingFunction(a, b)
    if eta.min_derivative() < 0:
        raise ProfileError("moment correction makes eta non-monotone")
    defect = _eta_moments(eta, theta0)
    eta0 = 0.5 * np.trapezoid(eta.deriv(theta0.z) * theta0.derivative, theta0.z)
    return BridgingFunction(a, b, defect, float(eta0))


def solve_theta1(potential: DoubleWell, theta0: ProfileTable, sig: float | None = None) -> ProfileTable:
    """Bounded solution of ``theta1'' - f'(theta0) theta1 = sigma - theta0'``, theta1(0) = 0.

    Numerov discretization (4th order, tridiagonal) with the far-field values
    ``theta1(±Z) = -sigma / f'(±1)`` forced by the equation as z -> ±inf, then
    the homogeneous solution theta0' is added to pin ``theta1(0) = 0``.
    """
    if sig is None:
        sig = sigma(theta0).value
    z, h = theta0.z, theta0.step
    g = potential.df(theta0.values)
    s = sig - theta0.derivative
    bc_lo = -sig / potential.df(-1.0)
    bc_hi = -sig / potential.df(1.0)
    k = h * h / 12.0
    a = 1.0 - k * g
    b = -(2.0 + 10.0 * k * g)
    m = len(z) - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = a[2:-1]
    ab[1, :] = b[1:-1]
    ab[2, :-1] = a[1:-2]
    rhs = k * (s[2:] + 10.0 * s[1:-1] + s[:-2])
    rhs[0] -= a[0] * bc_lo
    rhs[-1] -= a[-1] * bc_hi
    try:
        inner = solve_banded((1, 1), ab, rhs)
    except (LinAlgError, ValueError) as exc:
        raise ProfileError(f"singular theta1 system (Z or h inadequate): {exc}") from exc
    if not np.all(np.isfinite(inner)):
        raise ProfileError("singular theta1 system (Z or h inadequate)")
    vals = np.concatenate([[bc_lo], inner, [bc_hi]])
    c = theta0.center_index
    vals = vals - vals[c] / theta0.derivative[c] * theta0.derivative
    vals[c] = 0.0
    deriv = first_derivative(vals, h)
    return ProfileTable(z, vals, deriv, (bc_lo, bc_hi), theta0.decay_alpha, "theta1", potential)


def ode_residual_theta1(theta0: ProfileTable, theta1: ProfileTable, sig: float) -> np.ndarray:
    P = theta1.potential
    d2 = second_derivative(theta1.values, theta1.step)
    res = d2 - P.df(theta0.values) * theta1.values - (sig - theta0.derivative)
    return res[3:-3]


def check_orthogonality(theta0: ProfileTable, theta1: ProfileTable, potential: DoubleWell | None = None) -> float:
    """``∫ theta1 (theta0')^2 f''(theta0) dz`` by the trapezoid rule."""
    if not theta0.same_grid(theta1):
        raise ValueError("theta0 and theta1 tables are on different grids")
    P = potential or theta0.potential
    integrand = theta1.values * theta0.derivative**2 * P.d2f(theta0.values)
    return float(np.trapezoid(integrand, theta0.z))


def zero_profile(like: ProfileTable) -> ProfileTable:
    zeros = np.zeros_like(like.values)
    return ProfileTable(like.z, zeros, zeros.copy(), (0.0, 0.0), like.decay_alpha, "zero", like.potential)


@dataclass(frozen=True, eq=False)
class Profiles:
    """theta0, theta1, eta and the constants, computed together."""

    potential: DoubleWell
    theta0: ProfileTable
    theta1: ProfileTable
    eta: BridgingFunction
    sigma: float

    @classmethod
    def compute(cls, potential: DoubleWell | None = None, Z: float = 10.0, h: float = 0.005) -> "Profiles":
        P = potential or DoubleWell.quartic()
        t0 = solve_theta0(P, Z, h)
        sig = sigma(t0).value
        t1 = solve_theta1(P, t0, sig)
        return cls(P, t0, t1, make_eta(t0), sig)


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def cutoff_zeta(z):
    """Smooth even cutoff: 1 for |z| <= 1/2, 0 for |z| >= 1, non-increasing in |z|."""
    return 1.0 - _smooth_step(2.0 * np.abs(np.asarray(z, dtype=float)) - 1.0)
