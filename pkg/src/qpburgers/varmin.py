"""Inner minimization over the chemical potential for a fixed density profile.

Both solvers minimize the same discrete energy as
:func:`qpburgers.energy.energy_interval` on cells: trapezoid node weights for
the pointwise part plus ``h s(p_i)`` for every cell slope ``p_i``.

* :func:`minimize_phi_dp` is the global oracle on a lattice of phi levels.
* :func:`minimize_phi_collocation` runs damped Newton on the discrete
  Euler-Lagrange equations ``w_i dP/dphi(u_i, phi_i) + s'(p_{i-1}) - s'(p_i) = 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import expit, xlogy

from .energy import _pointwise, energy_G_ell, reference_g
from .grid import GridFunction, PhiPath, trapezoid_weights
from .profiles import BoundaryData, InfeasibleError

SLOPE_FLOOR = 1e-12
KKT_TOL = 1e-10


@dataclass(frozen=True)
class MinimizationResult:
    phi_star: PhiPath
    value: float
    method: str
    active_constraint_fraction: float
    converged: bool
    iterations: int = 0
    kkt_residual: float = 0.0
    tie_nodes: int = 0
    tie_break: str = ""

    def as_dict(self) -> dict:
        return {"value": self.value, "method": self.method,
                "active_constraint_fraction": self.active_constraint_fraction,
                "converged": self.converged, "iterations": self.iterations,
                "kkt_residual": self.kkt_residual, "tie_nodes": self.tie_nodes,
                "tie_break": self.tie_break}


def _setup(u: GridFunction, ell: float, boundary: BoundaryData, variant):
    if variant is None:
        variant = {0: "symmetric", 1: "plus", -1: "minus"}[boundary.sign]
    lo, hi = {"symmetric": (-ell, ell), "plus": (0.0, ell), "minus": (-ell, 0.0)}[variant]
    tol = 1e-12 * max(1.0, ell)
    if abs(u.a - lo) > tol or abs(u.b - hi) > tol:
        raise ValueError(f"u must be sampled on the energy domain ({lo}, {hi})")
    if not u.is_density():
        raise ValueError("u must be density valued")
    side = -1 if variant == "minus" else 1
    return variant, reference_g(boundary, side)


def _check_rise(boundary: BoundaryData, u: GridFunction):
    rise = boundary.phi_plus - boundary.phi_minus
    if u.n * u.h < rise * (1 - 1e-12):
        raise InfeasibleError(
            f"phi cannot climb {rise:.6g} over length {u.b - u.a:.6g} with slope <= 1")
    return rise


def _entropy(p):
    return xlogy(p, p) + xlogy(1.0 - p, 1.0 - p)


def _finish(u, phi_values, ell, boundary, variant, **kw) -> MinimizationResult:
    path = PhiPath(u.with_values(phi_values))
    value = energy_G_ell(u, path, ell, boundary, variant)
    value = value.value if not isinstance(value, float) else value
    p = path.cell_slopes()
    active = float(np.mean((p <= SLOPE_FLOOR * 10) | (p >= 1 - SLOPE_FLOOR * 10)))
    return MinimizationResult(path, value, active_constraint_fraction=active, **kw)


# -- dynamic programming ---------------------------------------------------------


def phi_lattice(boundary: BoundaryData, m: int) -> np.ndarray:
    return boundary.phi_minus + np.arange(m) * ((boundary.phi_plus - boundary.phi_minus) / (m - 1))


def minimize_phi_dp(u: GridFunction, ell: float, boundary: BoundaryData, m: int = 400,
                    variant: str | None = None, min_levels: int = 50) -> MinimizationResult:
    """Exact minimum of the discrete energy over lattice-valued phi paths.

    States are the m equally spaced levels between phi_- and phi_+; a cell may
    climb j levels with j * dphi <= h.  The cost-to-go is computed right to
    left, and the path is rebuilt left to right taking the smallest optimal
    successor, which yields the lexicographically smallest optimal path.
    """
    if m < min_levels:
        raise ValueError(f"need at least {min_levels} phi levels, got {m}")
    variant, ref = _setup(u, ell, boundary, variant)
    _check_rise(boundary, u)
    n, h = u.n, u.h
    levels = phi_lattice(boundary, m)
    dphi = levels[1] - levels[0]
    cap = min(m - 1, int(math.floor(h / dphi * (1 + 1e-12))))
    if cap * n < m - 1:
        raise InfeasibleError(f"lattice too coarse: {n} cells of at most {cap} levels "
                              f"cannot climb {m - 1} levels")
    step_cost = h * _entropy(np.minimum(np.arange(cap + 1) * dphi / h, 1.0))
    w = trapezoid_weights(n, h)
    u_vals = u.values

    # reachable band: from the left k <= cap*i, to the right k >= m-1 - cap*(n-i)
    k_lo = np.maximum(0, (m - 1) - cap * (n - np.arange(n + 1)))
    k_hi = np.minimum(m - 1, cap * np.arange(n + 1))

    value = np.full((n + 1, m), np.inf)
    value[n, m - 1] = w[n] * (_pointwise(u_vals[n], levels[m - 1]) - ref)
    for i in range(n - 1, -1, -1):
        lo, hi = k_lo[i], k_hi[i]
        ks = np.arange(lo, hi + 1)
        nxt = value[i + 1]
        best = np.full(ks.size, np.inf)
        for j in range(cap + 1):
            tgt = ks + j
            ok = tgt <= m - 1
            cand = np.full(ks.size, np.inf)
            cand[ok] = step_cost[j] + nxt[tgt[ok]]
            np.minimum(best, cand, out=best)
        value[i, lo:hi + 1] = best + w[i] * (_pointwise(u_vals[i], levels[ks]) - ref)

    if not np.isfinite(value[0, 0]):
        raise InfeasibleError("no lattice path connects phi_- to phi_+")
    path = np.empty(n + 1, dtype=int)
    path[0] = 0
    ties = 0
    for i in range(n):
        k = path[i]
        js = np.arange(min(cap, m - 1 - k) + 1)
        cand = step_cost[js] + value[i + 1, k + js]
        best = cand.min()
        near = np.abs(cand - best) <= 1e-12 * (1.0 + abs(best))
        ties += int(near.sum() > 1)
        path[i + 1] = k + js[np.argmax(cand == best)]

    return _finish(u, levels[path], ell, boundary, variant, method="DP", converged=True,
                   tie_nodes=ties, tie_break="lexicographic-smallest")


# -- collocation --------------------------------------------------------------------


def linear_ramp(u: GridFunction, boundary: BoundaryData) -> PhiPath:
    """phi_- to phi_+ at constant slope across the grid; feasible whenever the problem is."""
    _check_rise(boundary, u)
    t = (u.x - u.a) / (u.b - u.a)
    vals = boundary.phi_minus + (boundary.phi_plus - boundary.phi_minus) * t
    vals[0], vals[-1] = boundary.phi_minus, boundary.phi_plus
    return PhiPath(u.with_values(vals))


def _gradient(phi, u_vals, w, h):
    p = np.diff(phi) / h
    ds = np.log(p) - np.log1p(-p)
    dP = (1.0 - u_vals) - expit(phi)
    g = w * dP
    g[1:] += ds
    g[:-1] -= ds
    return g, p


def _objective(phi, u_vals, w, h):
    p = np.diff(phi) / h
    return float(w @ (_pointwise(u_vals, phi))) + h * float(_entropy(p).sum())


def minimize_phi_collocation(u: GridFunction, ell: float, boundary: BoundaryData,
                             init: PhiPath | None = None, variant: str | None = None,
                             max_iter: int = 200, dp_levels: int = 400) -> MinimizationResult:
    """Damped Newton on the discrete first-order conditions.

    Slopes are kept in [1e-12, 1 - 1e-12] by a fraction-to-boundary step
    rule; ``converged`` means the interior gradient (KKT residual) fell below
    1e-10.  Without convergence the DP oracle is run and its path, if better,
    replaces the Newton iterate.
    """
    variant, ref = _setup(u, ell, boundary, variant)
    rise = _check_rise(boundary, u)
    n, h = u.n, u.h
    if n * h <= rise * (1 + 1e-12):
        vals = boundary.phi_minus + np.minimum(u.x - u.a, rise)
        vals[-1] = boundary.phi_plus
        return _finish(u, vals, ell, boundary, variant, method="Collocation", converged=True)
    if init is None:
        init = linear_ramp(u, boundary)
    if not init.grid.same_grid(u):
        raise ValueError("init must live on the grid of u")
    if not init.is_admissible():
        raise ValueError("init must be an admissible phi path")
    lo_p, hi_p = SLOPE_FLOOR, 1.0 - SLOPE_FLOOR
    # move saturated initial slopes strictly inside, keeping the total rise
    p = np.clip(np.diff(init.grid.values) / h, lo_p, hi_p)
    p *= rise / (h * p.sum())
    phi = boundary.phi_minus + np.concatenate([[0.0], np.cumsum(p) * h])
    phi[-1] = boundary.phi_plus

    u_vals = u.values
    w = trapezoid_weights(n, h)
    energy = _objective(phi, u_vals, w, h)
    converged = False
    it = 0
    res = math.inf
    for it in range(max_iter + 1):
        g, p = _gradient(phi, u_vals, w, h)
        gi = g[1:-1]
        res = float(np.max(np.abs(gi)))
        if res < KKT_TOL:
            converged = True
            break
        if it == max_iter:
            break
        s2 = 1.0 / (p * (1.0 - p)) / h
        sig = expit(phi[1:-1])
        diag = w[1:-1] * (-sig * (1.0 - sig)) + s2[:-1] + s2[1:]
        off = -s2[1:-1]
        d = _newton_direction(diag, off, gi)
        step = np.zeros_like(phi)
        step[1:-1] = d
        dp = np.diff(step) / h
        # fraction to boundary: keep every slope inside [lo_p, hi_p]
        t = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            lim_lo = np.where(dp < 0, (lo_p - p) / dp, np.inf)
            lim_hi = np.where(dp > 0, (hi_p - p) / dp, np.inf)
        t = min(1.0, 0.99 * float(np.min(lim_lo)), 0.99 * float(np.min(lim_hi)))
        slope_g = float(gi @ d)
        noise = 1e-13 * max(1.0, abs(energy))
        if abs(slope_g) < noise:
            # energy differences are below rounding: judge the step by the residual
            trial = phi + t * step
            g_trial, _ = _gradient(trial, u_vals, w, h)
            if float(np.max(np.abs(g_trial[1:-1]))) >= res:
                break
            phi, energy = trial, _objective(trial, u_vals, w, h)
            continue
        while True:
            trial = phi + t * step
            e_trial = _objective(trial, u_vals, w, h)
            if e_trial <= energy + 1e-4 * t * slope_g:
                break
            t *= 0.5
            if t < 1e-12:
                break
        if e_trial > energy + noise:
            break
        phi, energy = trial, e_trial

    result = _finish(u, phi, ell, boundary, variant, method="Collocation", converged=converged,
                     iterations=it, kkt_residual=res)
    if converged:
        return result
    warnings.warn(f"collocation stalled at KKT residual {res:.3g}; refining with DP")
    dp = minimize_phi_dp(u, ell, boundary, dp_levels, variant)
    return dp if dp.value < result.value else result


def _newton_direction(diag, off, grad):
    """Solve H d = -grad for the tridiagonal Hessian, shifting it until positive definite."""
    shift = 0.0
    scale = float(np.max(np.abs(diag))) or 1.0
    for _ in range(60):
        ab = np.zeros((2, diag.size))
        ab[0, 1:] = off
        ab[1] = diag + shift
        try:
            c = linalg.cholesky_banded(ab, lower=False)
            return linalg.cho_solve_banded((c, False), -grad)
        except linalg.LinAlgError:
            shift = max(2.0 * shift, 1e-8 * scale)
    return -grad / scale


def reduced_F(u: GridFunction, ell: float, boundary: BoundaryData, variant: str | None = None,
              use_dp: bool = False, dp_levels: int = 400) -> float:
    """F_ell(u): collocation, with the DP oracle as fallback or, on request, as a second route."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        col = minimize_phi_collocation(u, ell, boundary, variant=variant, dp_levels=dp_levels)
    if not use_dp or col.method == "DP":
        return col.value
    dp = minimize_phi_dp(u, ell, boundary, dp_levels, variant)
    return min(col.value, dp.value)
