"""Smallest generalized eigenpairs ``A v = lambda M v`` of the Gagliardo form.

``lambda1_X`` is the discrete Poincare constant (the minimum of
``u^T A u / u^T M u``); dividing by ``2 pi`` gives the eigenvalue of the
discrete ``(-Delta)^{1/2}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .errors import GridMismatchError, InvalidArgumentError, SolverFailureError
from .grid import GridFunction
from .operator import TWO_PI, GagliardoForm, MassMatrix, apply_form, conjugate_gradient

DENSE_LIMIT = 512


@dataclass(frozen=True)
class EigenResult:
    lambda1_X: float
    lambda1_spec: float
    eigenfunction: GridFunction
    higher: list = field(default_factory=list)
    residual: float = 0.0
    iterations: int = 0

    @property
    def eigenvalues_X(self) -> list:
        return [self.lambda1_X] + [lam for lam, _ in self.higher]

    @property
    def eigenfunctions(self) -> list:
        return [self.eigenfunction] + [v for _, v in self.higher]

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "n": self.eigenfunction.grid.n,
                "domain": [self.eigenfunction.grid.a, self.eigenfunction.grid.b],
                "lambda1_X": self.lambda1_X,
                "lambda1_spec": self.lambda1_spec,
                "residual": self.residual,
                "iterations": self.iterations,
                "eigenvalues_X": self.eigenvalues_X,
            }
        )


def _normalize_sign(v: np.ndarray) -> np.ndarray:
    # largest magnitude positive; near-ties (mirror images) go to the smallest index
    mag = np.abs(v)
    i = int(np.flatnonzero(mag >= (1 - 1e-8) * mag.max())[0])
    return v if v[i] >= 0 else -v


def _pack(A, M, lams, vecs, residual, iterations) -> EigenResult:
    funcs = []
    for j in range(vecs.shape[1]):
        v = vecs[:, j] / math.sqrt(M.inner(vecs[:, j], vecs[:, j]))
        funcs.append(GridFunction(A.grid, _normalize_sign(v)))
    higher = [(float(lams[j]), funcs[j]) for j in range(1, len(funcs))]
    return EigenResult(
        lambda1_X=float(lams[0]),
        lambda1_spec=float(lams[0]) / TWO_PI,
        eigenfunction=funcs[0],
        higher=higher,
        residual=float(residual),
        iterations=int(iterations),
    )


def _residuals(A, M, lams, vecs) -> np.ndarray:
    return np.linalg.norm(apply_form(A, vecs) - M.matvec(vecs) * lams[None, :], axis=0)


def dense_eigenpairs(A: GagliardoForm, M: MassMatrix, k: int = 1) -> EigenResult:
    """Reference solution by a dense generalized symmetric eigensolve."""
    lams, vecs = sla.eigh(A.dense, M.dense(), subset_by_index=[0, k - 1])
    res = _residuals(A, M, lams, vecs / np.sqrt(np.einsum("ij,ij->j", vecs, _mass_block(M, vecs))))
    return _pack(A, M, lams, vecs, float(np.max(res / lams)), 0)


def _mass_block(M: MassMatrix, X: np.ndarray) -> np.ndarray:
    return M.matvec(X)


def smallest_eigenpairs(
    A: GagliardoForm,
    M: MassMatrix,
    k: int = 1,
    tol: float = 1e-10,
    maxiter: int = 500,
    guard: int = 2,
    seed: int = 0,
) -> EigenResult:
    """``k`` smallest eigenpairs by block inverse iteration (shift 0).

    Each sweep solves ``A Y = M X`` column-wise by CG, then M-orthonormalizes
    ``Y`` and applies a Rayleigh-Ritz rotation; the extra ``guard`` columns
    only speed up convergence of the wanted ones.  Converged when every wanted
    pair satisfies ``||A v - lambda M v|| <= tol * lambda`` with ``v``
    M-normalized.
    """
    if A.grid != M.grid:
        raise GridMismatchError("stiffness and mass matrices live on different grids")
    n = A.n
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= n = {n}, got k={k}")
    p = min(n, k + guard)
    if p == n:
        return dense_eigenpairs(A, M, k)

    x = A.grid.nodes
    rng = np.random.default_rng(seed)
    # smooth start: low sine modes, plus a little noise against lucky orthogonality
    X = np.column_stack(
        [np.sin((j + 1) * math.pi * (x - A.grid.a) / A.grid.length) for j in range(p)]
    ) + 1e-3 * rng.standard_normal((n, p))
    lams = np.ones(p)
    history = []
    for it in range(1, maxiter + 1):
        MX = _mass_block(M, X)
        Y = np.empty_like(X)
        for j in range(p):
            y0 = X[:, j] / lams[j] if it > 1 else None
            Y[:, j], _ = conjugate_gradient(lambda v: apply_form(A, v), MX[:, j], rtol=1e-12, x0=y0)
        # Rayleigh-Ritz on span(Y)
        AY = apply_form(A, Y)
        MY = _mass_block(M, Y)
        Ar = 0.5 * (Y.T @ AY + (Y.T @ AY).T)
        Mr = 0.5 * (Y.T @ MY + (Y.T @ MY).T)
        try:
            lams, C = sla.eigh(Ar, Mr)
        except np.linalg.LinAlgError as exc:
            raise SolverFailureError(f"Rayleigh-Ritz failed: {exc}", history) from exc
        X = Y @ C
        AX = AY @ C
        MX = MY @ C
        norms = np.sqrt(np.einsum("ij,ij->j", X, MX))
        X /= norms
        AX /= norms
        MX /= norms
        res = np.linalg.norm(AX[:, :k] - MX[:, :k] * lams[None, :k], axis=0)
        rel = float(np.max(res / lams[:k]))
        history.append(rel)
        if rel <= tol:
            return _pack(A, M, lams[:k], X[:, :k], rel, it)
        if it > 20 and rel >= 0.999 * min(history[-20:-1]):
            raise SolverFailureError(f"inverse iteration stagnated at {rel:.3e}", history)
    raise SolverFailureError(f"inverse iteration did not converge in {maxiter} sweeps", history)


def poincare_constant(A: GagliardoForm, M: MassMatrix) -> float:
    return smallest_eigenpairs(A, M, 1).lambda1_X
