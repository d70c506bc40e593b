"""Uniform grids, grid-sampled functions and node quadrature weights."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SLOPE_TOL = 1e-9


@dataclass(frozen=True)
class GridFunction:
    """Real function sampled at the n+1 nodes of a uniform grid on [a, b]."""

    a: float
    b: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a grid function needs at least two nodes")
        if not self.b > self.a:
            raise ValueError(f"empty grid interval ({self.a}, {self.b})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, func, a, b, n):
        x = np.linspace(a, b, n + 1)
        return cls(a, b, func(x))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 1)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.n == other.n and self.a == other.a and self.b == other.b

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.a, self.b, values)

    def is_density(self) -> bool:
        return bool(np.all((self.values >= 0.0) & (self.values <= 1.0)))

    def cell_slopes(self) -> np.ndarray:
        return np.diff(self.values) / self.h

    def reflect(self) -> "GridFunction":
        """x -> -x, for grids symmetric about the origin."""
        return GridFunction(-self.b, -self.a, self.values[::-1].copy())


@dataclass(frozen=True)
class PhiPath:
    """Candidate chemical potential: nondecreasing, slope at most one.

    ``slope`` optionally carries exact node values of the derivative (analytic
    profiles). When absent, slopes are the forward differences on cells.
    """

    grid: GridFunction
    slope: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.slope is not None:
            slope = np.asarray(self.slope, dtype=float)
            if slope.shape != self.grid.values.shape:
                raise ValueError("slope samples must live on the path grid")
            slope.setflags(write=False)
            object.__setattr__(self, "slope", slope)

    @property
    def endpoint_left(self) -> float:
        return float(self.grid.values[0])

    @property
    def endpoint_right(self) -> float:
        return float(self.grid.values[-1])

    def cell_slopes(self) -> np.ndarray:
        return self.grid.cell_slopes()

    def is_admissible(self, tol: float = SLOPE_TOL) -> bool:
        p = self.cell_slopes()
        ok = bool(np.all(p >= -tol) and np.all(p <= 1.0 + tol))
        if ok and self.slope is not None:
            ok = bool(np.all(self.slope >= -tol) and np.all(self.slope <= 1.0 + tol))
        return ok


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson node weights; 3/8 rule on the last three cells if n is odd."""
    if n < 2:
        raise ValueError("Simpson quadrature needs at least two cells")
    w = np.zeros(n + 1)
    m = n if n % 2 == 0 else n - 3
    if m > 0:
        c = np.full(m + 1, 2.0)
        c[1::2] = 4.0
        c[0] = c[-1] = 1.0
        w[: m + 1] += c * (h / 3.0)
    if m != n:
        w[m:] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def trapezoid_error(values: np.ndarray, h: float) -> float:
    """Richardson estimate of the composite trapezoid error (needs an even cell count)."""
    values = np.asarray(values, dtype=float)
    n = values.size - 1
    fine = float(trapezoid_weights(n, h) @ values)
    if n % 2:
        return abs(fine - simpson(values, h))
    coarse = float(trapezoid_weights(n // 2, 2 * h) @ values[::2])
    return abs(fine - coarse) / 3.0


def simpson(values: np.ndarray, h: float) -> float:
    values = np.asarray(values, dtype=float)
    return float(simpson_weights(values.size - 1, h) @ values)


def node_quadrature_error(values: np.ndarray, h: float) -> float:
    """Richardson estimate of the composite Simpson error on the given nodes."""
    values = np.asarray(values, dtype=float)
    n = values.size - 1
    fine = simpson(values, h)
    if n % 4 == 0 and n >= 4:
        return abs(fine - simpson(values[::2], 2 * h)) / 15.0
    trap = h * (values.sum() - 0.5 * (values[0] + values[-1]))
    return abs(fine - trap)
