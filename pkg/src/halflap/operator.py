"""Gagliardo form of the zero-extended P1 space, mass matrix, linear solves.

The stiffness matrix has entries

    A[i, j] = int_{R^2} (phi_i(x) - phi_i(y)) (phi_j(x) - phi_j(y)) / |x - y|^2 dx dy

for hat functions ``phi_i`` extended by zero.  Since ``|x - y|^{-2}`` is the
mixed derivative of ``log|x - y|``, two integrations by parts turn this into
``-2 int int u'(x) v'(y) log|x - y|``.  Hat slopes are piecewise constant, so
every entry collapses to a fourth difference of ``t^2 log|t|`` at integer
arguments; the mesh size drops out entirely.  The matrix is symmetric
Toeplitz and depends on ``n`` only through its size.

The discrete ``(-Delta)^{1/2}`` is ``A / (2 pi)``; the factor is applied at
the equation level, never folded into ``A``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import linalg as sla

from .errors import GridMismatchError, InvalidArgumentError, SolverFailureError
from .grid import Grid, GridFunction, check_same_grid, interpolate

TWO_PI = 2.0 * math.pi

FFT_THRESHOLD = 512
CHOLESKY_LIMIT = 2048
MAX_CG_RESTARTS = 8

# Coefficients of x^(4+2m) in (2 sinh(x/2))^4, the symbol of the centred
# fourth difference.
_SERIES = (
    1.0,
    1.0 / 6.0,
    1.0 / 80.0,
    17.0 / 30240.0,
    31.0 / 1814400.0,
    1.0 / 2661120.0,
    5461.0 / 871782912000.0,
    257.0 / 3138418483200.0,
    73.0 / 84687482880000.0,
    1271.0 / 170303140572364800.0,
)
_SERIES_FROM = 10


def _t2logt(t: np.ndarray) -> np.ndarray:
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    nz = t > 0
    out[nz] = t[nz] ** 2 * np.log(t[nz])
    return out


def gagliardo_generator(n: int) -> np.ndarray:
    """First row ``a_0 .. a_{n-1}`` of the Gagliardo stiffness matrix.

    For ``k < 10`` the fourth difference is evaluated directly (relative error
    below 1e-13); beyond that cancellation is replaced by the asymptotic
    expansion ``sum_m c_m g^{(4+2m)}(k)`` with ``g^{(j)}(t) = -2 (j-3)! / t^(j-2)``
    for even ``j >= 4``, which is accurate to rounding from ``k = 10`` on.
    """
    k = np.arange(n, dtype=float)
    out = np.empty(n)
    small = k < _SERIES_FROM
    ks = k[small]
    out[small] = (
        _t2logt(ks + 2) - 4 * _t2logt(ks + 1) + 6 * _t2logt(ks) - 4 * _t2logt(ks - 1) + _t2logt(ks - 2)
    )
    kl = k[~small]
    if kl.size:
        inv2 = 1.0 / (kl * kl)
        acc = np.zeros_like(kl)
        power = inv2.copy()
        for m, c in enumerate(_SERIES):
            acc += c * math.factorial(2 * m + 1) * power
            power = power * inv2
        out[~small] = -2.0 * acc
    return out


@dataclass(frozen=True, eq=False)
class GagliardoForm:
    """Symmetric positive definite Toeplitz matrix of ``||u||_X^2`` on a grid."""

    grid: Grid
    first_row: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.array(self.first_row, dtype=float)
        if r.shape != (self.grid.n,):
            raise InvalidArgumentError("first_row length must equal grid.n")
        r.setflags(write=False)
        object.__setattr__(self, "first_row", r)

    @property
    def n(self) -> int:
        return self.grid.n

    @cached_property
    def dense(self) -> np.ndarray:
        m = sla.toeplitz(self.first_row)
        m.setflags(write=False)
        return m

    @cached_property
    def _circulant_fft(self) -> np.ndarray:
        r = self.first_row
        c = np.concatenate((r, [0.0], r[:0:-1]))
        return np.fft.rfft(c)

    @property
    def row_norm(self) -> float:
        """Max absolute row sum (infinity norm) of the matrix."""
        r = np.abs(self.first_row)
        csum = np.cumsum(r)
        # row i sums r[0..i] + r[1..n-1-i]
        i = np.arange(self.n)
        rows = csum[i] + (csum[self.n - 1 - i] - r[0])
        return float(rows.max())

    @cached_property
    def _cholesky(self):
        return sla.cho_factor(self.dense)

    def matvec(self, v: np.ndarray, method: str = "auto") -> np.ndarray:
        return apply_form(self, v, method=method)

    def solve(self, rhs) -> np.ndarray:
        """``A^{-1} rhs``: cached dense Cholesky up to ``n = 2048``, CG beyond."""
        rhs = np.asarray(rhs, dtype=float)
        if self.n <= CHOLESKY_LIMIT:
            if not np.all(np.isfinite(rhs)):
                raise SolverFailureError("right-hand side is not finite")
            return sla.cho_solve(self._cholesky, rhs)
        return solve_form(self, rhs)[0]

    def to_csv(self) -> str:
        lines = ["k,a_k"]
        lines += [f"{k},{a:.17g}" for k, a in enumerate(self.first_row)]
        return "\n".join(lines) + "\n"


def assemble_stiffness(grid: Grid) -> GagliardoForm:
    return GagliardoForm(grid, gagliardo_generator(grid.n))


def _direct_matvec(row: np.ndarray, v: np.ndarray) -> np.ndarray:
    # diagonal-by-diagonal, fixed summation order
    n = len(v)
    y = row[0] * v
    for k in range(1, n):
        a = row[k]
        y[k:] += a * v[:-k]
        y[:-k] += a * v[k:]
    return y


def apply_form(A: GagliardoForm, v, method: str = "auto") -> np.ndarray:
    """Compute ``A @ v``.

    ``method`` is ``"dense"`` (cached full matrix), ``"direct"`` (Toeplitz
    diagonals, no full matrix), ``"fft"`` (circulant embedding) or ``"auto"``,
    which picks the FFT path from ``n >= 512`` on.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[0] != A.n:
        raise InvalidArgumentError(f"vector length {v.shape[0]} != n = {A.n}")
    if method == "auto":
        method = "fft" if A.n >= FFT_THRESHOLD else "dense"
    if method == "dense":
        return A.dense @ v
    if method == "direct":
        if v.ndim != 1:
            return np.column_stack([_direct_matvec(A.first_row, c) for c in v.T])
        return _direct_matvec(A.first_row, v)
    if method == "fft":
        m = 2 * A.n
        vf = np.fft.rfft(v, n=m, axis=0)
        sym = A._circulant_fft if v.ndim == 1 else A._circulant_fft[:, None]
        return np.fft.irfft(sym * vf, n=m, axis=0)[: A.n]
    raise InvalidArgumentError(f"unknown matvec method {method!r}")


def quadratic_form(A: GagliardoForm, u: GridFunction) -> float:
    """Discrete ``||u||_X^2 = u^T A u``."""
    if u.grid != A.grid:
        raise GridMismatchError(f"grid mismatch: {u.grid} vs {A.grid}")
    return float(u.values @ apply_form(A, u.values))


def x_norm(A: GagliardoForm, u: GridFunction) -> float:
    return math.sqrt(max(quadratic_form(A, u), 0.0))


@dataclass(frozen=True)
class MassMatrix:
    """Consistent P1 mass matrix ``h/6 [1 4 1]`` and its lumped version ``h I``."""

    grid: Grid

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def diagonal(self) -> float:
        return 2.0 * self.h / 3.0

    @property
    def off_diagonal(self) -> float:
        return self.h / 6.0

    def matvec(self, v, lumped: bool = False) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if lumped:
            return self.h * v
        y = self.diagonal * v
        y[1:] += self.off_diagonal * v[:-1]
        y[:-1] += self.off_diagonal * v[1:]
        return y

    def inner(self, u, v, lumped: bool = False) -> float:
        return float(np.dot(np.asarray(u, dtype=float), self.matvec(v, lumped=lumped)))

    def dense(self, lumped: bool = False) -> np.ndarray:
        n = self.grid.n
        if lumped:
            return self.h * np.eye(n)
        return (
            np.diag(np.full(n, self.diagonal))
            + np.diag(np.full(n - 1, self.off_diagonal), 1)
            + np.diag(np.full(n - 1, self.off_diagonal), -1)
        )


def assemble_mass(grid: Grid) -> MassMatrix:
    return MassMatrix(grid)


@dataclass
class CGInfo:
    iterations: int
    final_residual: float
    history: list

    def to_json(self, n: int) -> str:
        return json.dumps(
            {"schema": 1, "n": n, "iterations": self.iterations, "final_residual": self.final_residual}
        )


def conjugate_gradient(
    matvec: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    rtol: float = 1e-12,
    maxiter: int | None = None,
    x0: np.ndarray | None = None,
    precond: np.ndarray | None = None,
) -> tuple[np.ndarray, CGInfo]:
    """Plain (optionally Jacobi-preconditioned) conjugate gradients.

    Stops when the true residual satisfies ``||b - A x|| <= rtol * ||b||``.
    Whenever the recurrence claims convergence but the true residual does not
    agree, the iteration restarts from the current iterate.  Raises
    :class:`SolverFailureError` after ``maxiter`` (default ``10 n``) steps in
    total.
    """
    b = np.asarray(rhs, dtype=float)
    n = b.shape[0]
    maxiter = 10 * n if maxiter is None else maxiter
    with np.errstate(over="ignore"):
        bnorm = float(np.linalg.norm(b))
    if not math.isfinite(bnorm):
        raise SolverFailureError("CG right-hand side is not finite", [], None)
    if bnorm == 0.0:
        return np.zeros(n), CGInfo(0, 0.0, [0.0])
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    history = []
    it = 0
    for _restart in range(MAX_CG_RESTARTS + 1):
        r = b - matvec(x) if it > 0 or x0 is not None else b.copy()
        true_rel = float(np.linalg.norm(r)) / bnorm
        history.append(true_rel)
        if true_rel <= rtol:
            return x, CGInfo(it, true_rel, history)
        if it >= maxiter:
            break
        z = r / precond if precond is not None else r
        p = z.copy()
        rz = float(r @ z)
        while it < maxiter:
            it += 1
            Ap = matvec(p)
            pAp = float(p @ Ap)
            if pAp <= 0.0:
                raise SolverFailureError("CG breakdown: operator not positive definite", history, x)
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            rel = float(np.linalg.norm(r)) / bnorm
            history.append(rel)
            if rel <= 0.5 * rtol:
                break
            z = r / precond if precond is not None else r
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
    raise SolverFailureError(
        f"CG did not reach rtol={rtol:g} in {it} iterations (last {history[-1]:.3e})",
        history,
        x,
    )


def solve_form(A: GagliardoForm, rhs, rtol: float = 1e-12, preconditioned: bool = False):
    """Solve ``A x = rhs`` by CG; returns ``(x, CGInfo)``."""
    precond = np.full(A.n, A.first_row[0]) if preconditioned else None
    return conjugate_gradient(lambda v: apply_form(A, v), rhs, rtol=rtol, precond=precond)


def solve_dirichlet_linear(
    A: GagliardoForm,
    M: MassMatrix,
    g: Callable,
    rtol: float = 1e-12,
    preconditioned: bool = False,
    return_info: bool = False,
):
    """Discrete solution of ``(-Delta)^{1/2} u = g`` in ``(a, b)``, ``u = 0`` outside.

    Solves ``A u / (2 pi) = M g_h`` with ``g_h`` the nodal interpolant of ``g``.
    """
    if M.grid != A.grid:
        raise GridMismatchError("stiffness and mass matrices live on different grids")
    gh = interpolate(A.grid, g)
    rhs = TWO_PI * M.matvec(gh.values)
    x, info = solve_form(A, rhs, rtol=rtol, preconditioned=preconditioned)
    u = GridFunction(A.grid, x)
    return (u, info) if return_info else u
