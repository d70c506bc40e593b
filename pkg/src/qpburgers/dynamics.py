"""Explicit finite differences for u_t + (u(1-u))_x = u_xx with pinned ends."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction
from .profiles import BoundaryData
from .varmin import reduced_F

CFL = 0.4
RANGE_TOL = 1e-12


class EvolutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionState:
    u: GridFunction
    time: float
    dt: float

    @property
    def dx(self) -> float:
        return self.u.h


def initial_state(u: GridFunction, boundary: BoundaryData, dt: float | None = None) -> EvolutionState:
    dx = u.h
    dt = CFL * dx * dx if dt is None else float(dt)
    state = EvolutionState(u, 0.0, dt)
    _check(state, boundary)
    return state


def _check(state: EvolutionState, boundary: BoundaryData):
    if state.dt > CFL * state.dx**2 * (1 + 1e-12):
        raise EvolutionError(f"dt={state.dt:.3g} violates dt <= {CFL} dx^2 = {CFL * state.dx**2:.3g}")
    v = state.u.values
    if abs(v[0] - boundary.u_minus) > RANGE_TOL or abs(v[-1] - boundary.u_plus) > RANGE_TOL:
        raise EvolutionError("boundary nodes must carry u_- and u_+")
    if np.any(v < -RANGE_TOL) or np.any(v > 1 + RANGE_TOL):
        raise EvolutionError("initial data leave [0, 1]")


def _advance(v: np.ndarray, dt: float, dx: float, steps: int) -> np.ndarray:
    """``steps`` explicit updates in place; returns v."""
    a = dt / (dx * dx)
    c = dt / (2.0 * dx)
    f = np.empty_like(v)
    for _ in range(steps):
        np.multiply(v, 1.0 - v, out=f)
        # centered diffusion and centered (conservative) flux difference
        incr = a * (v[2:] - 2.0 * v[1:-1] + v[:-2]) - c * (f[2:] - f[:-2])
        v[1:-1] += incr
        lo, hi = v[1:-1].min(), v[1:-1].max()
        if lo < -RANGE_TOL or hi > 1 + RANGE_TOL:
            raise EvolutionError(f"maximum principle violated: range [{lo}, {hi}]")
    return v


def step(state: EvolutionState, boundary: BoundaryData) -> EvolutionState:
    _check(state, boundary)
    v = _advance(np.array(state.u.values), state.dt, state.dx, 1)
    return EvolutionState(state.u.with_values(v), state.time + state.dt, state.dt)


def evolve(state: EvolutionState, boundary: BoundaryData, T: float,
           sample_every: float | None = None, callback=None) -> EvolutionState:
    """Integrate up to time T; ``callback(state)`` fires at t=0 and every ``sample_every``."""
    _check(state, boundary)
    v = np.array(state.u.values)
    dt, dx = state.dt, state.dx
    total = int(round((T - state.time) / dt))
    chunk = total if sample_every is None else max(1, int(round(sample_every / dt)))
    done = 0
    current = state
    if callback is not None:
        callback(current)
    while done < total:
        k = min(chunk, total - done)
        _advance(v, dt, dx, k)
        done += k
        current = EvolutionState(state.u.with_values(v.copy()), state.time + done * dt, dt)
        if callback is not None:
            callback(current)
    return current


def lyapunov_trace(initial: GridFunction, ell: float, boundary: BoundaryData, T: float,
                   sample_every: float) -> tuple[list[tuple[float, float]], EvolutionState]:
    """Reduced energy F_ell(u(t)) at the sampled times, and the final state."""
    trace: list[tuple[float, float]] = []

    def record(st):
        trace.append((st.time, reduced_F(st.u, ell, boundary)))

    # largest stable dt dividing the sampling interval, so samples land on exact times
    dt = sample_every / math.ceil(sample_every / (CFL * initial.h**2))
    final = evolve(initial_state(initial, boundary, dt), boundary, T, sample_every, record)
    return trace, final


def discrete_current(u: GridFunction) -> np.ndarray:
    """Face fluxes of the scheme, mean of u(1-u) minus the forward difference.

    The update is the divergence of these fluxes, so they are exactly
    constant at a fixed point.
    """
    v = u.values
    f = v * (1 - v)
    return 0.5 * (f[1:] + f[:-1]) - np.diff(v) / u.h


def random_initial(base: GridFunction, boundary: BoundaryData, rng: np.random.Generator,
                   modes: int = 6, amplitude: float = 0.1) -> GridFunction:
    """``base`` plus a random sine series vanishing at the ends, kept inside (0, 1).

    The standing-wave translation mode relaxes only at a rate of order
    e^{-alpha ell}, so large perturbations need long horizons to settle.
    """
    t = (base.x - base.a) / (base.b - base.a)
    coef = rng.normal(size=modes) / np.arange(1, modes + 1)
    pert = sum(c * np.sin(np.pi * (k + 1) * t) for k, c in enumerate(coef))
    pert *= amplitude / max(np.abs(pert).max(), 1e-12)
    v = np.clip(base.values + pert, 0.02, 0.98)
    v[0], v[-1] = boundary.u_minus, boundary.u_plus
    return base.with_values(v)
