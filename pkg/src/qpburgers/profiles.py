"""Boundary data, the current solver and closed-form stationary profiles.

Every stationary profile of the Burgers flux f(u) = u(1-u) with constant
current J has the form ``u(x) = 1/2 + A tanh(A (x - x0))`` with
``A = sqrt(1/4 - J)``.  The current of a finite interval is fixed by

    int_{u_-}^{u_+} dr / (r(1 - r) - J) = b - a,

whose left side is available in closed form (``atanh``), so the root solve
never sees quadrature error.  Internally the unknown is the gap
``E = J* - J`` to the largest admissible current ``J* = min r(1-r)``, which
keeps the e^{-alpha l} asymptotics resolvable far below machine epsilon of J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate, optimize

from .grid import GridFunction, PhiPath

SYMMETRY_TOL = 1e-14


class InfeasibleError(ValueError):
    """Raised when the data admit no profile in the admissible class."""


def logit(u):
    return np.log(u) - np.log1p(-u)


@dataclass(frozen=True)
class BoundaryData:
    u_minus: float
    u_plus: float
    phi_minus: float
    phi_plus: float
    alpha: float | None = None

    @property
    def symmetric(self) -> bool:
        return self.alpha is not None

    @property
    def sign(self) -> int:
        """+1 if u_- + u_+ > 1, -1 if < 1, 0 for the standing-wave case."""
        if self.symmetric:
            return 0
        return 1 if self.u_minus + self.u_plus > 1.0 else -1

    @property
    def critical_current(self) -> float:
        """Largest admissible current, min over [u_-, u_+] of r(1 - r)."""
        return min(self.u_minus * (1 - self.u_minus), self.u_plus * (1 - self.u_plus))

    @property
    def whole_line_current(self) -> float:
        if not self.symmetric:
            raise ValueError("the whole-line current needs u_- + u_+ = 1")
        return (1.0 - self.alpha**2) / 4.0

    def as_dict(self) -> dict:
        return {"u_minus": self.u_minus, "u_plus": self.u_plus,
                "phi_minus": self.phi_minus, "phi_plus": self.phi_plus,
                "alpha": self.alpha}


def make_boundary(u_minus: float, u_plus: float) -> BoundaryData:
    u_minus, u_plus = float(u_minus), float(u_plus)
    if not (math.isfinite(u_minus) and math.isfinite(u_plus)):
        raise ValueError("boundary densities must be finite")
    if not 0.0 < u_minus < u_plus < 1.0:
        raise ValueError(f"need 0 < u_- < u_+ < 1, got ({u_minus}, {u_plus})")
    phi_plus = float(logit(u_plus))
    if abs(u_minus + u_plus - 1.0) <= SYMMETRY_TOL:
        return BoundaryData(u_minus, u_plus, -phi_plus, phi_plus, u_plus - u_minus)
    return BoundaryData(u_minus, u_plus, float(logit(u_minus)), phi_plus, None)


def boundary_from_alpha(alpha: float) -> BoundaryData:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    b = make_boundary((1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0)
    # keep the user's alpha, not the rounded difference of the densities
    return BoundaryData(b.u_minus, b.u_plus, b.phi_minus, b.phi_plus, float(alpha))


# -- current -----------------------------------------------------------------


def _endpoint_terms(boundary: BoundaryData, gap: float):
    """Amplitude A and the signed atanh(y/A) at both ends for J = J* - gap."""
    y_minus, y_plus = boundary.u_minus - 0.5, boundary.u_plus - 0.5
    y_max = max(abs(y_minus), abs(y_plus))
    amp = math.sqrt(y_max * y_max + gap)

    def term(y):
        ay = abs(y)
        # A^2 - y^2 = (y_max^2 - y^2) + gap, exact zero first term at the binding end
        d = (y_max - ay) * (y_max + ay) + gap
        return math.copysign(0.5 * (2.0 * math.log(amp + ay) - math.log(d)), y)

    return amp, term(y_minus), term(y_plus)


def length_for_gap(boundary: BoundaryData, gap: float) -> float:
    """Closed form of int dr / (r(1-r) - J) over [u_-, u_+] with J = J* - gap."""
    amp, t_minus, t_plus = _endpoint_terms(boundary, gap)
    return (t_plus - t_minus) / amp


def current_integral_quad(boundary: BoundaryData, current: float | None = None,
                          gap: float | None = None) -> float:
    """Adaptive-quadrature fallback for the current condition.

    Pass ``gap = J* - J`` instead of ``current`` when the current is within
    rounding of J*.  With y = r - 1/2 and t = y_max - |y| the integrand is
    1 / (t (2 y_max - t) + gap), integrated in t so the pole layer at t = 0
    is represented exactly.
    """
    if gap is None:
        if current is None or not current < boundary.critical_current:
            raise ValueError("current must stay below min r(1-r)")
        gap = boundary.critical_current - current
    if not gap > 0.0:
        raise ValueError("gap must be positive")
    y_minus, y_plus = abs(boundary.u_minus - 0.5), abs(boundary.u_plus - 0.5)
    y_max = max(y_minus, y_plus)

    def f(t):
        return 1.0 / (t * (2.0 * y_max - t) + gap)

    def half(c):
        # int_0^c dy / (A^2 - y^2) = int_{y_max - c}^{y_max} f(t) dt
        t0 = y_max - c
        cuts = {t0, y_max}
        cuts.update(t0 + gap * 10.0**k for k in range(-2, 30))
        cuts = sorted(v for v in cuts if t0 <= v <= y_max)
        return sum(integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)[0]
                   for lo, hi in zip(cuts[:-1], cuts[1:]))

    # y_- < 0 < y_+ unless both densities sit on one side of 1/2
    s_minus = 1.0 if boundary.u_minus < 0.5 else -1.0
    s_plus = 1.0 if boundary.u_plus > 0.5 else -1.0
    return s_minus * half(y_minus) + s_plus * half(y_plus)


def solve_current_gap(boundary: BoundaryData, length: float) -> tuple[float, float]:
    """Return (J, J* - J) for an interval of the given length.

    Bracketed root finding (Brent: bisection safeguarding secant and inverse
    quadratic steps) in log(J* - J); the length is strictly decreasing there.
    """
    length = float(length)
    if not math.isfinite(length) or length <= 0.0:
        raise ValueError(f"interval length must be positive and finite, got {length}")

    def f(t):
        return length_for_gap(boundary, math.exp(t)) - length

    lo, hi = -700.0, 40.0
    if f(lo) < 0.0:
        raise InfeasibleError(f"length {length} too large: current gap underflows")
    if f(hi) > 0.0:
        raise InfeasibleError(f"length {length} too small to bracket the current")
    t = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    gap = math.exp(t)
    return boundary.critical_current - gap, gap


def solve_current(boundary: BoundaryData, length: float) -> float:
    return solve_current_gap(boundary, length)[0]


# -- domains -----------------------------------------------------------------


@dataclass(frozen=True)
class FiniteInterval:
    a: float
    b: float
    name = "finite"


@dataclass(frozen=True)
class HalfLinePlus:
    name = "half_line_plus"


@dataclass(frozen=True)
class HalfLineMinus:
    name = "half_line_minus"


@dataclass(frozen=True)
class WholeLine:
    name = "whole_line"


@dataclass(frozen=True)
class GluedRecovery:
    z: float
    ell: float
    name = "glued_recovery"


Domain = Union[FiniteInterval, HalfLinePlus, HalfLineMinus, WholeLine, GluedRecovery]


def _sech2(y):
    e = np.exp(-2.0 * np.abs(y))
    return 4.0 * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class StationaryProfile:
    """Closed-form stationary solution ``1/2 + A tanh(A (x - offset))``.

    Outside its domain the profile is extended by the boundary densities
    (the clamped extension).  A glued recovery profile keeps its two
    finite-interval halves in ``pieces``; its scalar fields then describe the
    left half and ``offset`` is the gluing point z.
    """

    boundary: BoundaryData
    domain: Domain
    current: float
    amplitude: float
    offset: float
    gap: float
    pieces: tuple = field(default=(), repr=False)

    @property
    def flagged(self) -> bool:
        """Non-positive current: the chemical potential slope exceeds one."""
        return any(p.flagged for p in self.pieces) or self.current <= 0.0

    @property
    def support(self) -> tuple[float, float]:
        d = self.domain
        if isinstance(d, FiniteInterval):
            return d.a, d.b
        if isinstance(d, GluedRecovery):
            return -d.ell, d.ell
        if isinstance(d, HalfLinePlus):
            return 0.0, math.inf
        if isinstance(d, HalfLineMinus):
            return -math.inf, 0.0
        return -math.inf, math.inf

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Points where the clamped extension is not smooth."""
        d = self.domain
        if isinstance(d, GluedRecovery):
            return (-d.ell, d.z, d.ell)
        return tuple(v for v in self.support if math.isfinite(v))

    # evaluation on the analytic piece, no clamping
    def _raw(self, x):
        y = self.amplitude * (np.asarray(x, dtype=float) - self.offset)
        return np.tanh(y), _sech2(y)

    def _eval(self, x):
        """(u, u', u(1-u), phi) at x, with clamping and gluing.

        Values at the support endpoints are pinned to the boundary data while
        u' keeps its one-sided interior limit there.
        """
        x = np.asarray(x, dtype=float)
        if self.pieces:
            z = self.domain.z
            left, right = self.pieces
            parts_l = left._eval(x - z)
            parts_r = right._eval(x - z)
            on_left = x < z
            u, du, q, phi = (np.where(on_left, pl, pr) for pl, pr in zip(parts_l, parts_r))
        else:
            t, s2 = self._raw(x)
            u = 0.5 + self.amplitude * t
            du = self.amplitude**2 * s2
            q = self.current + du  # u(1-u) = J + u', no cancellation
            phi = logit(u)
        lo, hi = self.support
        at_lo, at_hi = x <= lo, x >= hi
        if np.any(at_lo) or np.any(at_hi):
            b = self.boundary
            u = np.where(at_lo, b.u_minus, np.where(at_hi, b.u_plus, u))
            phi = np.where(at_lo, b.phi_minus, np.where(at_hi, b.phi_plus, phi))
            outside = (x < lo) | (x > hi)
            du = np.where(outside, 0.0, du)
            q = np.where(x < lo, b.u_minus * (1 - b.u_minus),
                         np.where(x > hi, b.u_plus * (1 - b.u_plus), q))
        return u, du, q, phi

    def u(self, x):
        return self._eval(x)[0]

    def du(self, x):
        return self._eval(x)[1]

    def phi(self, x):
        return self._eval(x)[3]

    def phi_slope(self, x):
        """phi' = u' / (u(1-u)) = 1 - J / (u(1-u)), exact."""
        _, du, q, _ = self._eval(x)
        return du / q

    def ode_residual(self, x):
        """u' - u(1-u) + J on the analytic piece(s), evaluated independently."""
        x = np.asarray(x, dtype=float)
        if self.pieces:
            z = self.domain.z
            left, right = self.pieces
            return np.where(x < z, left.ode_residual(x - z), right.ode_residual(x - z))
        t, s2 = self._raw(x)
        u = 0.5 + self.amplitude * t
        return self.amplitude**2 * s2 - u * (1.0 - u) + self.current

    def translate(self, z: float) -> "StationaryProfile":
        if not isinstance(self.domain, WholeLine):
            raise ValueError("only whole-line profiles are translation invariant")
        return StationaryProfile(self.boundary, self.domain, self.current,
                                 self.amplitude, self.offset + z, self.gap)

    def descriptor(self) -> dict:
        d = {"domain": self.domain.name, "u_minus": self.boundary.u_minus,
             "u_plus": self.boundary.u_plus, "J": self.current, "A": self.amplitude,
             "x0": self.offset}
        if isinstance(self.domain, FiniteInterval):
            d["a"], d["b"] = self.domain.a, self.domain.b
        if isinstance(self.domain, GluedRecovery):
            d["z"], d["ell"] = self.domain.z, self.domain.ell
            d["pieces"] = [p.descriptor() for p in self.pieces]
        return d


def _atanh_ratio(y, amp):
    return math.atanh(y / amp)


def stationary_profile(boundary: BoundaryData, domain: Domain) -> StationaryProfile:
    if isinstance(domain, FiniteInterval):
        a, b = float(domain.a), float(domain.b)
        if not b > a:
            raise ValueError(f"need a < b, got ({a}, {b})")
        current, gap = solve_current_gap(boundary, b - a)
        amp, t_minus, t_plus = _endpoint_terms(boundary, gap)
        # u(a) = u_-, u(b) = u_+: A(a - x0) = t_-, A(b - x0) = t_+
        offset = 0.5 * (a + b) - 0.5 * (t_minus + t_plus) / amp
        return StationaryProfile(boundary, domain, current, amp, offset, gap)

    if isinstance(domain, (HalfLinePlus, HalfLineMinus)):
        if boundary.symmetric:
            raise ValueError("half-line profiles need u_- + u_+ != 1")
        plus = isinstance(domain, HalfLinePlus)
        if plus != (boundary.sign > 0):
            raise ValueError("HalfLinePlus needs u_- + u_+ > 1, HalfLineMinus < 1")
        far = boundary.u_plus if plus else boundary.u_minus
        pinned = boundary.u_minus if plus else boundary.u_plus
        amp = abs(far - 0.5)
        current = far * (1.0 - far)
        offset = -_atanh_ratio(pinned - 0.5, amp) / amp
        return StationaryProfile(boundary, domain, current, amp, offset,
                                 boundary.critical_current - current)

    if isinstance(domain, WholeLine):
        if not boundary.symmetric:
            raise ValueError("the whole-line standing wave needs u_- + u_+ = 1")
        amp = boundary.alpha / 2.0
        return StationaryProfile(boundary, domain, boundary.whole_line_current, amp, 0.0, 0.0)

    if isinstance(domain, GluedRecovery):
        return recovery_profile(boundary, domain.z, domain.ell)

    raise TypeError(f"unknown domain {domain!r}")


def symmetric_profile(boundary: BoundaryData, ell: float) -> StationaryProfile:
    return stationary_profile(boundary, FiniteInterval(-ell, ell))


def recovery_profile(boundary: BoundaryData, z: float, ell: float) -> StationaryProfile:
    """Two symmetric finite-interval solutions glued at x = z, clamped beyond +-ell."""
    if not boundary.symmetric:
        raise ValueError("the recovery profile needs u_- + u_+ = 1")
    z, ell = float(z), float(ell)
    if not abs(z) < ell:
        raise ValueError(f"need |z| < ell, got z={z}, ell={ell}")
    left = symmetric_profile(boundary, ell + z)
    right = symmetric_profile(boundary, ell - z)
    return StationaryProfile(boundary, GluedRecovery(z, ell), left.current, left.amplitude,
                             z, left.gap, pieces=(left, right))


@dataclass(frozen=True)
class SampledProfile:
    u: GridFunction
    phi: GridFunction
    phi_slope: GridFunction

    def phi_path(self, analytic_slope: bool = True) -> PhiPath:
        return PhiPath(self.phi, self.phi_slope.values if analytic_slope else None)


def sample(profile: StationaryProfile, a: float, b: float, n: int) -> SampledProfile:
    if n < 2:
        raise ValueError("need at least two cells")
    x = np.linspace(a, b, n + 1)
    u, du, q, phi = profile._eval(x)
    return SampledProfile(GridFunction(a, b, u), GridFunction(a, b, phi),
                          GridFunction(a, b, du / q))
