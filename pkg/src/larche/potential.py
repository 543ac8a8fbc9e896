"""Polynomial double-well potentials and checks of the structural assumptions on f."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial


@dataclass(frozen=True)
class DoubleWell:
    """A polynomial double well F with f = F', f' and f'' available exactly.

    ``coefficients`` are in increasing-degree order, so ``(1, 0, -2, 0, 1)``
    is the standard quartic ``(1 - c**2)**2``.
    """

    kind: str = "quartic"
    coefficients: tuple[float, ...] = (1.0, 0.0, -2.0, 0.0, 1.0)
    C0: float = 0.0
    range_hint: tuple[float, float] = (-1.5, 1.5)
    _polys: tuple = field(init=False, repr=False, compare=False)
    _deflated: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("quartic", "custom-polynomial"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.C0 < 0:
            raise ValueError("C0 must be non-negative")
        coeffs = tuple(float(a) for a in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        F = Polynomial(coeffs)
        object.__setattr__(self, "_polys", (F, F.deriv(1), F.deriv(2), F.deriv(3)))
        q, r = np.polynomial.polynomial.polydiv(coeffs, (1.0, 0.0, -2.0, 0.0, 1.0))
        deflated = Polynomial(q) if np.max(np.abs(r), initial=0.0) <= 1e-13 else None
        object.__setattr__(self, "_deflated", deflated)

    @classmethod
    def quartic(cls, C0: float = 0.0) -> "DoubleWell":
        return cls("quartic", (1.0, 0.0, -2.0, 0.0, 1.0), C0=C0)

    @classmethod
    def from_coefficients(cls, coefficients, C0: float = 0.0, range_hint=(-1.5, 1.5)) -> "DoubleWell":
        return cls("custom-polynomial", tuple(coefficients), C0=C0, range_hint=tuple(range_hint))

    @classmethod
    def from_config(cls, cfg: dict | None) -> "DoubleWell":
        cfg = cfg or {"kind": "quartic"}
        kind = cfg.get("kind", "quartic")
        if kind == "quartic":
            return cls.quartic(C0=cfg.get("C0", 0.0))
        return cls.from_coefficients(cfg["coefficients"], C0=cfg.get("C0", 0.0),
                                     range_hint=cfg.get("range_hint", (-1.5, 1.5)))

    def evaluate(self, c, deriv: int = 0):
        """F (deriv=0), f (1), f' (2) or f'' (3) at ``c``; works on arrays."""
        if deriv not in (0, 1, 2, 3):
            raise ValueError(f"deriv must be in 0..3, got {deriv}")
        return self._polys[deriv](c)

    def F(self, c):
        return self._polys[0](c)

    def f(self, c):
        return self._polys[1](c)

    def df(self, c):
        return self._polys[2](c)

    def d2f(self, c):
        return self._polys[3](c)

    @property
    def is_symmetric(self) -> bool:
        # F even <=> f odd
        odd = np.asarray(self.coefficients[1::2])
        return bool(np.all(np.abs(odd) <= 1e-14))

    def max_df(self, lo: float = -1.0, hi: float = 1.0, samples: int = 2001) -> float:
        """Largest value of f' on [lo, hi] (used to pick the stabilization constant)."""
        c = np.linspace(lo, hi, samples)
        crit = self._polys[3].roots()
        crit = crit[np.isreal(crit)].real
        crit = crit[(crit >= lo) & (crit <= hi)]
        return float(np.max(self.df(np.concatenate([c, crit]))))

    def sqrt_2F(self, c):
        """sqrt(2 F(c)), evaluated as |1 - c^2| sqrt(2 Q(c)) when F = (1 - c^2)^2 Q.

        The factored form keeps full relative accuracy next to the wells,
        where expanding F loses about half the significant digits.
        """
        if self._deflated is not None:
            Q = self._deflated(c)
            return np.abs(1.0 - np.asarray(c) ** 2) * np.sqrt(2.0 * np.maximum(Q, 0.0))
        return np.sqrt(2.0 * np.maximum(self.F(c), 0.0))

    @property
    def deflated_coefficients(self) -> tuple[float, ...] | None:
        """Coefficients of Q with F = (1 - c^2)^2 Q, or None if F has no double roots at ±1."""
        return None if self._deflated is None else tuple(self._deflated.coef)

    def roots_of_f(self) -> np.ndarray:
        """Real roots of f inside ``range_hint``, sorted."""
        r = self._polys[1].roots()
        r = np.sort(r[np.abs(r.imag) < 1e-9].real)
        lo, hi = self.range_hint
        return r[(r >= lo - 1e-12) & (r <= hi + 1e-12)]


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    worst_sample: float | None
    worst_value: float | None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[AssumptionCheck]

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def __getitem__(self, name: str) -> AssumptionCheck:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for ch in self.checks:
            status = "pass" if ch.passed else "FAIL"
            out.append(f"{ch.name}: {status} (worst sample {ch.worst_sample}, value {ch.worst_value}) {ch.detail}".rstrip())
        return out


def validate(potential: DoubleWell, samples: int = 1000) -> ValidationReport:
    """Check the double-well assumptions on a uniform sample grid.

    Failures are recorded in the report; nothing is raised for a bad potential.
    """
    if samples < 100:
        raise ValueError("validate needs at least 100 samples")
    tol = 0.0 if potential.kind == "quartic" else 1e-12
    checks = []

    Fm, Fp = potential.F(-1.0), potential.F(1.0)
    fm, fp = potential.f(-1.0), potential.f(1.0)
    u = np.linspace(-1.0, 1.0, samples + 2)[1:-1]
    vals = np.array([abs(Fm), abs(Fp), abs(fm), abs(fp)])
    worst = int(np.argmax(vals))
    checks.append(AssumptionCheck(
        "minimum-at-±1",
        bool(np.all(vals <= max(tol, 1e-12))),
        [-1.0, 1.0, -1.0, 1.0][worst], float(vals[worst]),
        "F(±1) = 0 and f(±1) = 0",
    ))

    dfm, dfp = potential.df(-1.0), potential.df(1.0)
    checks.append(AssumptionCheck(
        "f'(±1)>0", bool(dfm > 0 and dfp > 0),
        -1.0 if dfm <= dfp else 1.0, float(min(dfm, dfp)),
    ))

    # int_{-1}^u f = F(u) - F(-1) and int_{1}^u f = F(u) - F(1)
    left = potential.F(u) - Fm
    right = potential.F(u) - Fp
    gap = np.minimum(left, right)
    mismatch = np.max(np.abs(left - right))
    i = int(np.argmin(gap))
    checks.append(AssumptionCheck(
        "equal-well-integrals",
        bool(gap[i] > 0 and mismatch <= 1e-12),
        float(u[i]), float(gap[i]),
        f"max |left - right| = {mismatch:.3e}",
    ))

    lo, hi = potential.range_hint
    big = np.linspace(min(lo, -potential.C0 - 1.0), max(hi, potential.C0 + 1.0), samples)
    big = big[np.abs(big) >= potential.C0]
    prod = big * potential.d2f(big)
    j = int(np.argmin(prod))
    checks.append(AssumptionCheck(
        "convexity-at-infinity", bool(prod[j] >= -1e-12),
        float(big[j]), float(prod[j]), f"C0 = {potential.C0}",
    ))
    return ValidationReport(checks)
