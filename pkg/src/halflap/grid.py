"""Uniform grids, piecewise-linear grid functions and nodal quadrature.

A grid function stores values at the ``n`` interior nodes of ``(a, b)``; it
stands for the continuous piecewise-linear interpolant that vanishes at the
endpoints and everywhere outside the interval.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError, NodalOverflowError

EXP_CAP = 700.0


def capped_exp(x):
    """``np.exp`` that refuses exponents above ``EXP_CAP``.

    Raises :class:`NodalOverflowError` with ``node`` set to the flat index of
    the first offending entry.
    """
    x = np.asarray(x, dtype=float)
    bad = x > EXP_CAP
    if np.any(bad):
        idx = int(np.flatnonzero(bad.ravel())[0])
        raise NodalOverflowError(
            f"exponent {x.ravel()[idx]:.6g} exceeds cap {EXP_CAP:g}",
            node=idx,
            value=float(x.ravel()[idx]),
        )
    return np.exp(x)


def capped_expm1(x):
    """``expm1`` with the same exponent cap as :func:`capped_exp`."""
    x = np.asarray(x, dtype=float)
    capped_exp(np.minimum(x, EXP_CAP + 1.0))  # raises past the cap
    return np.expm1(x)


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidArgumentError(f"endpoints must be finite, got ({self.a}, {self.b})")
        if not self.a < self.b:
            raise InvalidArgumentError(f"need a < b, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgumentError(f"need n >= 1 interior nodes, got {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(1, self.n + 1)

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return abs(self.a + self.b) <= tol * max(1.0, abs(self.a), abs(self.b))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.n))


def make_grid(a: float, b: float, n: int) -> Grid:
    """Uniform grid on ``(a, b)`` with ``n`` interior nodes and ``h = (b-a)/(n+1)``."""
    return Grid(float(a), float(b), int(n) if isinstance(n, (int, np.integer)) else n)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise InvalidArgumentError(
                f"expected {self.grid.n} nodal values, got shape {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        """Evaluate the zero-extended interpolant at arbitrary points."""
        g = self.grid
        xp = np.concatenate(([g.a], g.nodes, [g.b]))
        fp = np.concatenate(([0.0], self.values, [0.0]))
        return np.interp(x, xp, fp, left=0.0, right=0.0)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __neg__(self):
        return self.with_values(-self.values)

    def __add__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        return self.with_values(float(c) * self.values)

    __rmul__ = __mul__

    def reflected(self) -> "GridFunction":
        """The function ``x -> u(a + b - x)``."""
        return self.with_values(self.values[::-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "u"])
        for x, u in zip(self.grid.nodes, self.values):
            w.writerow([f"{x:.17g}", f"{u:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, a: float, b: float) -> "GridFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "u"]:
            raise InvalidArgumentError("CSV must start with header 'x,u'")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        grid = make_grid(a, b, len(data))
        if not np.allclose(data[:, 0], grid.nodes, rtol=0, atol=1e-12 * grid.length):
            raise InvalidArgumentError("node column does not match a uniform grid on (a, b)")
        return cls(grid, data[:, 1])


def check_same_grid(u: GridFunction, v: GridFunction) -> None:
    if u.grid != v.grid:
        raise GridMismatchError(f"grid mismatch: {u.grid} vs {v.grid}")


def _sample(sampler: Callable, x: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(sampler(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(sampler(float(xi))) for xi in x])


def interpolate(grid: Grid, sampler: Callable) -> GridFunction:
    """Nodal interpolant of ``sampler``; the exterior is implicitly zero."""
    x = grid.nodes
    with np.errstate(all="ignore"):
        vals = _sample(sampler, x)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise InvalidArgumentError(f"sampler is not finite at node {i + 1} (x={x[i]!r})")
    return GridFunction(grid, vals)


def integrate_nodal(u: GridFunction, g: Callable) -> float:
    """Mass-lumped quadrature ``h * sum_i (g(u_i) - g(0))``.

    Subtracting ``g(0)`` accounts for the zero exterior, so for example
    ``g = exp(alpha t^2)`` yields the integral of ``exp(alpha u^2) - 1``.
    """
    try:
        with np.errstate(over="raise", invalid="raise"):
            vals = _sample(g, u.values)
            g0 = float(_sample(g, np.zeros(1))[0])
    except NodalOverflowError as exc:
        node = exc.node
        raise NodalOverflowError(
            f"overflow evaluating integrand at node {node}: {exc}",
            node=node,
            value=None if node is None else float(u.values[node]),
        ) from exc
    except FloatingPointError as exc:
        raise NodalOverflowError(f"overflow evaluating integrand: {exc}") from exc
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NodalOverflowError(
            f"integrand not finite at node {i} (u={u.values[i]!r})", node=i, value=float(u.values[i])
        )
    # fsum: exactly rounded, hence independent of node order
    return u.grid.h * math.fsum(vals - g0)
