"""Entropy, the integrand g and the energy functionals built on it.

Grid energies come in two flavours.  With exact node slopes (analytic
profiles) the full integrand is integrated by composite Simpson.  Without
them the slope is the forward difference on each cell, contributing
``h s(p_i)``, and the pointwise part ``s(u) + (1-u) phi - log(1+e^phi)`` uses
trapezoid node weights; this second-order form is exactly the discrete
energy minimized in :mod:`qpburgers.varmin`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate
from scipy.special import xlogy

from .grid import (SLOPE_TOL, GridFunction, PhiPath, node_quadrature_error, simpson_weights,
                   trapezoid_error, trapezoid_weights)
from .profiles import (BoundaryData, FiniteInterval, GluedRecovery, HalfLineMinus,
                       HalfLinePlus, StationaryProfile, WholeLine, logit, sample,
                       solve_current_gap)

CLAMP_TOL = 1e-9


class FlaggedProfileError(ValueError):
    """The profile has a non-positive current and lies outside the admissible class."""


@dataclass(frozen=True)
class EnergyReport:
    value: float
    quadrature_error: float
    tail_bound: float
    a: float
    b: float

    def as_dict(self) -> dict:
        return asdict(self)

    def __add__(self, other: "EnergyReport") -> "EnergyReport":
        return EnergyReport(self.value + other.value,
                            self.quadrature_error + other.quadrature_error,
                            self.tail_bound + other.tail_bound,
                            min(self.a, other.a), max(self.b, other.b))


@dataclass(frozen=True)
class ReferenceStep:
    """The step function a_- 1(x<0) + a_+ 1(x>0)."""

    a_minus: float
    a_plus: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, self.a_minus, np.where(x > 0, self.a_plus,
                                                       0.5 * (self.a_minus + self.a_plus)))


def entropy(p):
    """Bernoulli entropy p log p + (1-p) log(1-p), with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0.0) | (p > 1.0)) or np.any(np.isnan(p)):
        raise ValueError("entropy is defined on [0, 1] only")
    out = xlogy(p, p) + xlogy(1.0 - p, 1.0 - p)
    return float(out) if out.ndim == 0 else out


def entropy_derivative(p):
    return logit(p)


def _pointwise(u, phi):
    # s(u) + (1-u) phi - log(1 + e^phi); logaddexp never overflows
    return entropy(u) + (1.0 - u) * phi - np.logaddexp(0.0, phi)


def eval_g(u, phi, p):
    u = np.asarray(u, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("u must lie in [0, 1]")
    out = _pointwise(u, phi) + entropy(p)
    return float(out) if np.ndim(out) == 0 else out


def reference_g(boundary: BoundaryData, side: int = 1) -> float:
    """g(u_+-, phi_+-, 0) = log(u(1-u)); equals log J in the standing-wave case."""
    u = boundary.u_plus if side > 0 else boundary.u_minus
    return math.log(u * (1.0 - u))


def g_closed_form(u, du, current):
    """log J + phi' log((u(1-u) - J)/J) along a stationary profile, u' = u(1-u) - J."""
    q = current + du
    return math.log(current) + (du / q) * np.log(du / current)


# -- grid energies -----------------------------------------------------------


def _sub_grid(f: GridFunction, a: float, b: float) -> slice:
    x = f.x
    tol = 1e-9 * max(1.0, abs(f.a), abs(f.b))
    i = int(np.argmin(np.abs(x - a)))
    j = int(np.argmin(np.abs(x - b)))
    if abs(x[i] - a) > tol or abs(x[j] - b) > tol or j - i < 2:
        raise ValueError(f"interval ({a}, {b}) is not spanned by grid nodes")
    return slice(i, j + 1)


def energy_interval(u: GridFunction, phi: PhiPath, interval=None,
                    reference: float = 0.0) -> EnergyReport:
    """Integral of g(u, phi, phi') - reference over an interval of grid nodes."""
    grid = phi.grid
    if not u.same_grid(grid):
        raise ValueError("u and phi must share the grid")
    a, b = (grid.a, grid.b) if interval is None else interval
    sl = _sub_grid(grid, a, b)
    uu, pp = u.values[sl], grid.values[sl]
    if np.any((uu < 0) | (uu > 1)):
        raise ValueError("u must be density valued")
    h = grid.h
    node = _pointwise(uu, pp) - reference
    if phi.slope is not None:
        slope = phi.slope[sl]
        if np.any(slope < -SLOPE_TOL) or np.any(slope > 1 + SLOPE_TOL):
            raise ValueError("phi slope leaves [0, 1]")
        node = node + entropy(np.clip(slope, 0.0, 1.0))
        w = simpson_weights(node.size - 1, h)
        return EnergyReport(float(w @ node), node_quadrature_error(node, h), 0.0, a, b)

    p = np.diff(pp) / h
    if np.any(p < -SLOPE_TOL) or np.any(p > 1 + SLOPE_TOL):
        raise ValueError("phi cell slope leaves [0, 1]")
    cells = entropy(np.clip(p, 0.0, 1.0))
    w = trapezoid_weights(node.size - 1, h)
    value = float(w @ node) + h * float(cells.sum())
    err = trapezoid_error(node, h)
    if cells.size % 2 == 0:
        pc = 0.5 * (p[0::2] + p[1::2])
        coarse = 2 * h * float(entropy(np.clip(pc, 0.0, 1.0)).sum())
        err += abs(h * float(cells.sum()) - coarse) / 3.0
    return EnergyReport(value, err, 0.0, a, b)


def _clamped(grid_u: GridFunction, grid_phi: GridFunction, mask, u0, phi0) -> bool:
    return bool(np.all(np.abs(grid_u.values[mask] - u0) <= CLAMP_TOL)
                and np.all(np.abs(grid_phi.values[mask] - phi0) <= CLAMP_TOL))


def energy_G_ell(u: GridFunction, phi: PhiPath, ell: float, boundary: BoundaryData,
                 variant: str | None = None):
    """Finite-volume energy, +inf outside the clamped admissible set.

    ``variant`` is "symmetric" on (-ell, ell) (needs u_- + u_+ = 1), "plus" on
    (0, ell) or "minus" on (-ell, 0); by default it follows the boundary data.
    """
    if variant is None:
        variant = {0: "symmetric", 1: "plus", -1: "minus"}[boundary.sign]
    if (variant == "symmetric") != boundary.symmetric:
        raise ValueError(f"variant {variant!r} does not match the boundary data")
    if not u.same_grid(phi.grid):
        raise ValueError("u and phi must share the grid")
    if not phi.is_admissible():
        return math.inf
    x = u.x
    tol = 1e-12 * max(1.0, ell)
    b = boundary
    if variant == "symmetric":
        lo, hi, ref = -ell, ell, reference_g(b, 1)
        left_ok = _clamped(u, phi.grid, x <= lo + tol, b.u_minus, b.phi_minus)
        right_ok = _clamped(u, phi.grid, x >= hi - tol, b.u_plus, b.phi_plus)
    elif variant == "plus":
        lo, hi, ref = 0.0, ell, reference_g(b, 1)
        left_ok = abs(phi.grid.values[np.argmin(np.abs(x))] - b.phi_minus) <= CLAMP_TOL
        right_ok = _clamped(u, phi.grid, x >= hi - tol, b.u_plus, b.phi_plus)
    elif variant == "minus":
        lo, hi, ref = -ell, 0.0, reference_g(b, -1)
        left_ok = _clamped(u, phi.grid, x <= lo + tol, b.u_minus, b.phi_minus)
        right_ok = abs(phi.grid.values[np.argmin(np.abs(x))] - b.phi_plus) <= CLAMP_TOL
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if u.a > lo + tol or u.b < hi - tol or not (left_ok and right_ok):
        return math.inf
    if not u.is_density():
        return math.inf
    return energy_interval(u, phi, (lo, hi), ref)


# -- analytic profiles ---------------------------------------------------------


def _reference_for(profile: StationaryProfile) -> float:
    side = -1 if isinstance(profile.domain, HalfLineMinus) else 1
    return reference_g(profile.boundary, side)


def _piece_energy(profile, a, b, n, reference, shift=0.0) -> EnergyReport:
    n += n % 2
    s = sample(profile, a - shift, b - shift, n)
    rep = energy_interval(s.u, s.phi_path(), None, reference)
    return EnergyReport(rep.value, rep.quadrature_error, 0.0, a, b)


def _cells_for(length, density):
    return max(8, int(math.ceil(length * density / 4.0)) * 4)


def profile_energy(profile: StationaryProfile, density: float = 400.0,
                   truncation: float | None = None) -> EnergyReport:
    """Energy of the clamped extension of an analytic profile.

    Finite supports are integrated exactly up to quadrature, piece by piece;
    unbounded supports are truncated and carry a fitted tail estimate.
    """
    if profile.flagged:
        raise FlaggedProfileError("profile with non-positive current")
    ref = _reference_for(profile)
    d = profile.domain
    if isinstance(d, GluedRecovery):
        left, right = profile.pieces
        return (_piece_energy(left, -d.ell, d.z, _cells_for(d.ell + d.z, density), ref, d.z)
                + _piece_energy(right, d.z, d.ell, _cells_for(d.ell - d.z, density), ref, d.z))
    if isinstance(d, FiniteInterval):
        return _piece_energy(profile, d.a, d.b, _cells_for(d.b - d.a, density), ref)
    if truncation is None:
        raise ValueError("unbounded profiles need a truncation length")
    L = float(truncation)
    if isinstance(d, WholeLine):
        lo, hi = profile.offset - L, profile.offset + L
    elif isinstance(d, HalfLinePlus):
        lo, hi = 0.0, L
    else:
        lo, hi = -L, 0.0
    rep = _piece_energy(profile, lo, hi, _cells_for(hi - lo, density), ref)
    tail = 0.0
    if isinstance(d, (WholeLine, HalfLineMinus)):
        tail += _tail_estimate(profile, lo, -1, ref)
    if isinstance(d, (WholeLine, HalfLinePlus)):
        tail += _tail_estimate(profile, hi, 1, ref)
    return EnergyReport(rep.value, rep.quadrature_error, tail, lo, hi)


def _tail_estimate(profile, x_end, direction, ref) -> float:
    """|integral beyond x_end| from an exponential fit over the last decade."""
    width = 2.3 / max(profile.amplitude, 1e-12)  # one decade of e^{-2A|x|}
    xs = x_end - direction * np.linspace(width, 0.0, 11)
    u, du, q, phi = profile._eval(xs)
    f = np.abs(_pointwise(u, phi) + entropy(np.clip(du / q, 0, 1)) - ref)
    f = np.maximum(f, np.finfo(float).tiny)
    rate = -np.polyfit(direction * xs, np.log(f), 1)[0]
    if not rate > 0:
        return math.inf
    return float(f[-1] / rate)


def energy_G_infinity(source, truncation: float | None = None,
                      boundary: BoundaryData | None = None,
                      density: float = 400.0) -> EnergyReport:
    """Whole- or half-line energy of an analytic profile or a clamped grid pair.

    ``source`` is a :class:`StationaryProfile` or a ``(u, phi)`` pair of grid
    functions already equal to the far-field values at both grid ends, so the
    omitted tails vanish identically.
    """
    if isinstance(source, StationaryProfile):
        return profile_energy(source, density, truncation)
    u, phi = source
    if boundary is None:
        raise ValueError("a grid pair needs its boundary data")
    if not isinstance(phi, PhiPath):
        phi = PhiPath(phi)
    b = boundary
    ends = (abs(u.values[0] - b.u_minus) <= CLAMP_TOL and abs(u.values[-1] - b.u_plus) <= CLAMP_TOL
            and abs(phi.endpoint_left - b.phi_minus) <= CLAMP_TOL
            and abs(phi.endpoint_right - b.phi_plus) <= CLAMP_TOL)
    if not ends:
        raise ValueError("unclamped grid pair: tail contribution unknown")
    return energy_interval(u, phi, None, reference_g(b, 1 if b.sign >= 0 else -1))


# -- closed forms ----------------------------------------------------------------


def _log_gap_integral(half_width: float, amp: float, current: float, tol: float) -> float:
    """2 int_0^w log((A^2 - y^2)/J) / (1/4 - y^2) dy, singular or nearly so at y = w."""
    delta = amp - half_width  # >= 0; zero for the whole-line profile

    def regular(y):
        return (np.log(amp + y) - math.log(current)) / (0.25 - y * y)

    reg, _ = integrate.quad(regular, 0.0, half_width, epsabs=tol, epsrel=1e-13, limit=200)
    if delta == 0.0:
        # log(w - y) against weight-free smooth factor: QUADPACK algebraic-log weight
        sing, _ = integrate.quad(lambda y: 1.0 / (0.25 - y * y), 0.0, half_width,
                                 weight="alg-logb", wvar=(0.0, 0.0), epsabs=tol, epsrel=1e-13)
    else:
        # log(delta + w - y): geometric breakpoints resolve the delta-wide layer
        pts = [half_width - delta * 10.0**k for k in range(0, 20)
               if delta * 10.0**k < half_width]
        sing, _ = integrate.quad(lambda y: np.log(delta + half_width - y) / (0.25 - y * y),
                                 0.0, half_width, points=sorted(pts) or None,
                                 epsabs=tol, epsrel=1e-13, limit=500)
    return 2.0 * (reg + sing)


def minimum_energy_whole_line(boundary: BoundaryData) -> float:
    """G(u_bar, phi_bar): int_{u-}^{u+} log((r(1-r) - J)/J) / (r(1-r)) dr."""
    if not boundary.symmetric:
        raise ValueError("needs u_- + u_+ = 1")
    w = boundary.alpha / 2.0
    return _log_gap_integral(w, w, boundary.whole_line_current, 1e-15)


def minimizer_energy(boundary: BoundaryData, ell: float) -> float:
    """G_ell(u_bar_ell, phi_bar_ell) through the x -> u change of variables."""
    if not boundary.symmetric:
        raise ValueError("needs u_- + u_+ = 1")
    current, gap = solve_current_gap(boundary, 2.0 * ell)
    if current <= 0.0:
        raise FlaggedProfileError(f"J_ell = {current} <= 0 at ell = {ell}")
    w = boundary.alpha / 2.0
    amp = math.sqrt(w * w + gap)
    shift = 2.0 * ell * math.log1p(-gap / boundary.whole_line_current)
    return shift + _log_gap_integral(w, amp, current, 1e-15)


def excess_energy_closed_form(boundary: BoundaryData, ell: float) -> float:
    """G_ell(u_bar_ell, phi_bar_ell) - G(u_bar, phi_bar) for the standing-wave data.

    Evaluated after the substitution r = (1 + alpha - eps s)/2 with
    eps = 4 (J - J_ell), which turns both endpoint layers into an integrable
    log singularity at s = 0 on the stretched range [0, alpha/eps].
    """
    if not boundary.symmetric:
        raise ValueError("needs u_- + u_+ = 1")
    current, gap = solve_current_gap(boundary, 2.0 * ell)
    if current <= 0.0:
        raise FlaggedProfileError(f"J_ell = {current} <= 0 at ell = {ell}")
    a = boundary.alpha
    c = 1.0 - a * a
    eps = 4.0 * gap
    x = eps / c
    # kappa = 1 + (1 - x) log(1 - x) / x, series below x = 1e-4
    kappa = x / 2 + x * x / 6 + x**3 / 12 if x < 1e-4 else 1.0 + (1.0 - x) * math.log1p(-x) / x

    def integrand(s):
        q = s * (2.0 * a - eps * s)
        lead = 1.0 / (c + 2.0 * a * eps * s - eps * eps * s * s)
        # log(1 + 1/q) - 1/(1 + q) without cancellation for large q
        t = 1.0 / q
        series = t * t * (0.5 - t * (2.0 / 3.0 - t * (0.75 - 0.8 * t)))
        exact = np.log1p(t) - t / (1.0 + t)
        core = np.where(t < 1e-3, series, exact)
        return lead * (core + kappa / (1.0 + q))

    top = a / eps
    edges = [0.0] + [10.0**k for k in range(-8, 40) if 10.0**k < top] + [top]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-16, epsrel=1e-13, limit=200)
        total += val
    return 4.0 * eps * total


def homogeneous_quasipotential(u: GridFunction, u_circ: float) -> float:
    """int s_{u_circ}(u) dx, the relative entropy to the constant state."""
    if not 0.0 < u_circ < 1.0:
        raise ValueError("u_circ must lie in (0, 1)")
    vals = u.values
    if np.any((vals < 0) | (vals > 1)):
        raise ValueError("u must be density valued")
    # relative-entropy form of s(u) - s(c) - s'(c)(u - c): exact zero at u = c
    rel = xlogy(vals, vals / u_circ) + xlogy(1.0 - vals, (1.0 - vals) / (1.0 - u_circ))
    return float(simpson_weights(u.n, u.h) @ rel)
