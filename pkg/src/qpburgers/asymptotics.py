"""Exponentially rescaled convergence tables for the large-volume limit.

Every row is computed from closed-form or semi-analytic routes: the current
gap comes straight out of the root solve in log(J* - J), and the excess
energy from the stretched r-integral, because the e^{alpha ell} rescaling
would amplify any grid quadrature error.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import integrate

from .energy import excess_energy_closed_form, minimizer_energy, profile_energy
from .profiles import (BoundaryData, FiniteInterval, HalfLineMinus, HalfLinePlus,
                       InfeasibleError, StationaryProfile, WholeLine, boundary_from_alpha,
                       recovery_profile, solve_current_gap, stationary_profile)

COLUMNS = ("alpha", "ell", "z", "raw", "scaled", "limit", "gap")
SWEEP_KINDS = ("current", "excess", "gamma", "beta")


@dataclass(frozen=True)
class AsymptoticRow:
    alpha: float
    ell: float
    z: float
    raw_value: float
    scaled_value: float
    limit_value: float
    relative_gap: float

    def as_csv(self) -> tuple:
        return (self.alpha, self.ell, self.z, self.raw_value, self.scaled_value,
                self.limit_value, self.relative_gap)


@dataclass(frozen=True)
class SweepSpec:
    alpha_list: tuple
    ell_list: tuple
    z_list: tuple = (0.0,)
    grid_n: int = 0
    output_path: str = ""
    kind: str = "gamma"
    beta: float | None = None

    def __post_init__(self):
        for name in ("alpha_list", "ell_list", "z_list"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if any(not 0.0 < a < 1.0 for a in self.alpha_list):
            raise ValueError("every alpha must lie in (0, 1)")
        if any(not ell > 0.0 for ell in self.ell_list):
            raise ValueError("every ell must be positive")
        if self.kind == "gamma" and self.z_list and self.ell_list:
            if max(abs(z) for z in self.z_list) >= min(self.ell_list):
                raise ValueError("need |z| < ell for every pair")
        if self.kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.kind!r}")


def _row(alpha, ell, z, raw, scaled, limit) -> AsymptoticRow:
    gap = abs(scaled / limit - 1.0) if math.isfinite(limit) else math.nan
    return AsymptoticRow(float(alpha), float(ell), float(z), float(raw), float(scaled),
                         float(limit), gap)


def excess_limit(alpha: float) -> float:
    return 8.0 * alpha / (1.0 - alpha * alpha)


def current_asymptotic(alpha: float, ell: float) -> AsymptoticRow:
    """raw = J - J_ell on (-ell, ell), scaled by e^{alpha ell}; limit alpha^2."""
    b = boundary_from_alpha(alpha)
    current, gap = solve_current_gap(b, 2.0 * ell)
    if current <= 0.0:
        raise InfeasibleError(f"J_ell = {current} <= 0 at ell = {ell}")
    return _row(alpha, ell, 0.0, gap, math.exp(alpha * ell) * gap, alpha * alpha)


def excess_asymptotic(alpha: float, ell: float) -> AsymptoticRow:
    return dev_gamma_cost(alpha, ell, 0.0)


def dev_gamma_cost(alpha: float, ell: float, z: float) -> AsymptoticRow:
    """Excess energy of the recovery profile glued at z, from the gluing identity.

    raw = (excess(ell + z) + excess(ell - z)) / 2; the limit of the rescaled
    cost is 8 alpha/(1 - alpha^2) cosh(alpha z).  At z = 0 both halves are the
    same call, so the row coincides with :func:`excess_asymptotic`.
    """
    if not abs(z) < ell:
        raise ValueError(f"need |z| < ell, got z={z}, ell={ell}")
    b = boundary_from_alpha(alpha)
    if z == 0.0:
        raw = excess_energy_closed_form(b, ell)
    else:
        raw = 0.5 * (excess_energy_closed_form(b, ell + z) + excess_energy_closed_form(b, ell - z))
    return _row(alpha, ell, z, raw, math.exp(alpha * ell) * raw,
                excess_limit(alpha) * math.cosh(alpha * z))


def beta_scaled_excess(alpha: float, ell: float, beta: float, z: float = 0.0) -> AsymptoticRow:
    """Excess cost rescaled by e^{beta ell}; there is no finite limit to compare with."""
    base = dev_gamma_cost(alpha, ell, z)
    return _row(alpha, ell, z, base.raw_value, math.exp(beta * ell) * base.raw_value, math.nan)


def cosh_law_slope(alpha: float, ell: float, z_values) -> float:
    """Least-squares slope through the origin of acosh(cost(z)/cost(0)) against |z|.

    Under the cosh law the points lie on the line alpha |z|.
    """
    base = dev_gamma_cost(alpha, ell, 0.0).scaled_value
    zs = np.array([abs(float(z)) for z in z_values if z != 0.0])
    if zs.size == 0:
        raise ValueError("need at least one nonzero shift")
    ys = np.array([math.acosh(max(1.0, dev_gamma_cost(alpha, ell, z).scaled_value / base))
                   for z in zs])
    return float(zs @ ys / (zs @ zs))


# -- convergence of minimizers ---------------------------------------------------


def _integrate_pieces(f, cuts) -> float:
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=400)
        total += val
    return total


def profile_distance(p: StationaryProfile, q: StationaryProfile, shift: float = 0.0,
                     half_line: int = 0) -> tuple[float, float]:
    """(L2 distance of u, L1 distance of phi) between p(. + shift) and q.

    Both profiles are taken with their clamped extensions; the integral runs
    over the whole line, or over x > 0 / x < 0 when ``half_line`` is +1 / -1.
    """
    lo = 0.0 if half_line > 0 else -math.inf
    hi = 0.0 if half_line < 0 else math.inf
    cuts = sorted({lo, hi, *(c - shift for c in p.breakpoints), *q.breakpoints, 0.0})
    cuts = [c for c in cuts if lo <= c <= hi]

    def du2(x):
        return float((p.u(x + shift) - q.u(x)) ** 2)

    def dphi(x):
        return float(abs(p.phi(x + shift) - q.phi(x)))

    return math.sqrt(_integrate_pieces(du2, cuts)), _integrate_pieces(dphi, cuts)


@dataclass(frozen=True)
class ConvergenceRow:
    ell: float
    l2_u: float
    l1_phi: float
    pinned_value: float


def minimizer_convergence(boundary: BoundaryData, ell_list) -> list[ConvergenceRow]:
    """Distances between finite-volume minimizers and their infinite-volume limit.

    Standing-wave data compare u_bar_ell on (-ell, ell) with the whole-line
    wave; otherwise the minimizer on (0, ell) (or (-ell, 0)) is compared with
    the half-line profile, whose pinned value at 0 is recorded.
    """
    rows = []
    if boundary.symmetric:
        limit = stationary_profile(boundary, WholeLine())
        side = 0
    elif boundary.sign > 0:
        limit = stationary_profile(boundary, HalfLinePlus())
        side = 1
    else:
        limit = stationary_profile(boundary, HalfLineMinus())
        side = -1
    for ell in ell_list:
        ell = float(ell)
        dom = {0: FiniteInterval(-ell, ell), 1: FiniteInterval(0.0, ell),
               -1: FiniteInterval(-ell, 0.0)}[side]
        prof = stationary_profile(boundary, dom)
        l2, l1 = profile_distance(prof, limit, half_line=side)
        rows.append(ConvergenceRow(ell, l2, l1, float(prof.u(0.0))))
    return rows


@dataclass(frozen=True)
class ProbeRow:
    ell: float
    z: float
    raw_excess: float
    scaled_excess: float
    unshifted_l2: float
    recentered_l2: float


def equicoercivity_probe(alpha: float, ell_list, drift: float = 0.5) -> list[ProbeRow]:
    """Recovery profiles glued at z = drift * ell: bounded energy, drifting interface.

    The raw excess tends to zero while the profile itself moves away; only
    after translating back by z does it converge to the standing wave.
    """
    b = boundary_from_alpha(alpha)
    wave = stationary_profile(b, WholeLine())
    rows = []
    for ell in ell_list:
        ell = float(ell)
        z = drift * ell
        row = dev_gamma_cost(alpha, ell, z)
        rec = recovery_profile(b, z, ell)
        far, _ = profile_distance(rec, wave)
        near, _ = profile_distance(rec, wave, shift=z)
        rows.append(ProbeRow(ell, z, row.raw_value, row.scaled_value, far, near))
    return rows


def gluing_check(alpha: float, ell: float, z: float, density: float = 800.0) -> tuple[float, float]:
    """(x-space quadrature of G_ell on the recovery profile, half-sum of the two
    sub-interval minima evaluated through the u-integral closed form)."""
    b = boundary_from_alpha(alpha)
    glued = profile_energy(recovery_profile(b, z, ell), density).value
    return glued, 0.5 * (minimizer_energy(b, ell + z) + minimizer_energy(b, ell - z))


# -- sweeps ----------------------------------------------------------------------


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("QPB_THREADS", "")))
    except ValueError:
        return min(8, os.cpu_count() or 1)


def _cases(spec: SweepSpec):
    zs = spec.z_list if spec.kind in ("gamma", "beta") else (0.0,)
    for alpha in spec.alpha_list:
        for ell in spec.ell_list:
            for z in zs:
                yield alpha, ell, z


def _evaluate(spec: SweepSpec, case) -> AsymptoticRow:
    alpha, ell, z = case
    if spec.kind == "current":
        return current_asymptotic(alpha, ell)
    if spec.kind == "excess":
        return excess_asymptotic(alpha, ell)
    if spec.kind == "beta":
        if spec.beta is None:
            raise ValueError("beta sweep needs beta")
        return beta_scaled_excess(alpha, ell, spec.beta, z)
    return dev_gamma_cost(alpha, ell, z)


def run_sweep(spec: SweepSpec) -> list[AsymptoticRow]:
    """Evaluate all rows concurrently; results keep the input order."""
    cases = list(_cases(spec))
    with ThreadPoolExecutor(max_workers=_thread_cap()) as pool:
        rows = list(pool.map(lambda c: _evaluate(spec, c), cases))
    if spec.output_path:
        write_rows(rows, spec.output_path)
    return rows


def write_rows(rows, path, header_lines=()) -> None:
    """Append rows to a CSV (header written only when the file is new)."""
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        if new:
            for line in header_lines:
                fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(COLUMNS)
        for r in rows:
            w.writerow([f"{v:.17g}" for v in r.as_csv()])


def summary(rows, spec: SweepSpec) -> dict:
    gaps = [r.relative_gap for r in rows if math.isfinite(r.relative_gap)]
    return {"max_gap": max(gaps) if gaps else None,
            "rows": [asdict(r) for r in rows],
            "spec": asdict(spec)}


def summary_json(rows, spec: SweepSpec) -> str:
    return json.dumps(summary(rows, spec), indent=2, allow_nan=True)
