"""Polarization, symmetry diagnostics and a Trudinger-Moser supremum probe.

Polarization with respect to the half-line ``(c, inf)`` keeps, at each pair
``{x, 2c - x}``, the larger value on the right and the smaller on the left.
On a grid ``c`` must be a node or a midpoint so that reflection maps nodes
to nodes.  The discrete inequality ``q(u^H) <= q(u)`` is exact here: every
off-diagonal entry of the stiffness matrix is negative with magnitude
nonincreasing in ``|i - j|``, and for such lattice kernels the two-point
rearrangement can only raise ``sum_{i != j} |a_{i-j}| u_i u_j`` while
keeping ``sum u_i^2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NodalOverflowError
from .grid import GridFunction, capped_expm1, integrate_nodal
from .operator import GagliardoForm, apply_form, quadratic_form


def _reflection_index(u: GridFunction, a_node: float) -> int:
    """``2 (a_node - a) / h`` as an integer, or an error."""
    g = u.grid
    m2 = 2.0 * (a_node - g.a) / g.h
    m = round(m2)
    if abs(m2 - m) > 1e-9 * max(1.0, abs(m2)):
        raise InvalidArgumentError(f"a_node={a_node!r} is neither a node nor a midpoint of the grid")
    return int(m)


def polarize(u: GridFunction, a_node: float) -> GridFunction:
    """Two-point rearrangement of a nonnegative ``u`` across ``a_node``.

    For nodes right of ``a_node`` the value is ``max(u(x), u(2 a_node - x))``,
    left of it ``min``; a node at ``a_node`` is unchanged and reflected
    positions outside ``(a, b)`` read as 0.  ``a_node`` must not exceed the
    midpoint of the interval: otherwise the rearranged function would move
    mass past ``b`` and leave the space.
    """
    m = _reflection_index(u, a_node)
    g = u.grid
    if a_node > g.center + 1e-12 * g.length:
        raise InvalidArgumentError("a_node must not lie right of the interval midpoint")
    if m < 0:
        raise InvalidArgumentError("a_node must not lie left of the interval")
    v = u.values
    if np.any(v < 0):
        raise InvalidArgumentError("polarization needs a nonnegative grid function")
    # padded with the boundary zeros: index 0 and n + 1
    p = np.concatenate(([0.0], v, [0.0]))
    out = p.copy()
    i = np.arange(1, g.n + 1)
    j = m - i  # reflected index; anything outside [0, n+1] is exterior, i.e. 0
    refl = np.where((j >= 0) & (j <= g.n + 1), p[np.clip(j, 0, g.n + 1)], 0.0)
    right = 2 * i > m
    left = 2 * i < m
    out[i[right]] = np.maximum(p[i[right]], refl[right])
    out[i[left]] = np.minimum(p[i[left]], refl[left])
    return GridFunction(g, out[1:-1])


@dataclass
class PolarizationReport:
    trials: int
    violations: int
    F_violations: int
    phi_violations: int
    worst_form_margin: float  # max of q(u^H) - q(u); <= 0 means no increase
    worst_F_defect: float
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.F_violations == 0 and self.phi_violations == 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "trials": self.trials,
                "violations": self.violations,
                "F_violations": self.F_violations,
                "phi_violations": self.phi_violations,
                "worst_form_margin": self.worst_form_margin,
                "worst_F_defect": self.worst_F_defect,
                "passed": self.passed,
                "counterexamples": self.counterexamples,
            }
        )


def _random_nonneg(rng: np.random.Generator, grid) -> np.ndarray:
    kind = rng.integers(4)
    n = grid.n
    if kind == 0:
        return rng.random(n)
    if kind == 1:
        x = (grid.nodes - grid.a) / grid.length
        c = rng.standard_normal(5) / np.arange(1, 6)
        return np.abs(sum(cj * np.sin((j + 1) * math.pi * x) for j, cj in enumerate(c)))
    if kind == 2:
        v = np.zeros(n)
        idx = rng.choice(n, size=max(1, n // 8), replace=False)
        v[idx] = rng.exponential(size=idx.size)
        return v
    # a few bumps at random places and widths
    x = grid.nodes
    v = np.zeros(n)
    for _ in range(3):
        c = rng.uniform(grid.a, grid.b)
        w = rng.uniform(0.02, 0.3) * grid.length
        v += rng.random() * np.maximum(0.0, 1.0 - np.abs(x - c) / w)
    return v


def verify_polarization_inequality(A: GagliardoForm, E, trials: int = 1000, seed: int = 42, tol: float = 1e-12) -> PolarizationReport:
    """Randomized check of ``q(u^H) <= q(u) + tol`` and ``int F(u^H) = int F(u)``.

    ``E`` supplies ``F`` (an :class:`~halflap.energy.EnergyFunctional` on the
    same grid); ``phi(u^H) <= phi(u) + tol`` is checked as well.  Pivots are
    drawn among the reflection-compatible points from ``a + h/2`` up to the
    midpoint.  Tolerances are relative to the size of the compared values.
    """
    g = A.grid
    if E.grid != g:
        raise InvalidArgumentError("energy functional lives on a different grid")
    if trials < 0:
        raise InvalidArgumentError("trials must be nonnegative")
    rng = np.random.default_rng(seed)
    viol = fviol = pviol = 0
    worst = -math.inf
    worst_F = 0.0
    bad = []
    for _ in range(trials):
        u = GridFunction(g, _random_nonneg(rng, g))
        m = int(rng.integers(1, g.n + 2))  # a_node = a + m h / 2 <= midpoint
        uh = polarize(u, g.a + 0.5 * m * g.h)
        q, qh = quadratic_form(A, u), quadratic_form(A, uh)
        margin = qh - q
        worst = max(worst, margin)
        Fu, Fh = integrate_nodal(u, E.nl.F), integrate_nodal(uh, E.nl.F)
        dF = abs(Fh - Fu)
        worst_F = max(worst_F, dF)
        scale = max(1.0, abs(q))
        hit = False
        if margin > tol * scale:
            viol += 1
            hit = True
        if dF > tol * max(1.0, abs(Fu)):
            fviol += 1
            hit = True
        if E.value(uh) > E.value(u) + tol * max(1.0, abs(q), abs(Fu)):
            pviol += 1
            hit = True
        if hit and len(bad) < 5:
            bad.append({"a_node": g.a + 0.5 * m * g.h, "values": u.values.tolist()})
    return PolarizationReport(trials, viol, fviol, pviol, worst if trials else 0.0, worst_F, bad)


@dataclass(frozen=True)
class SymmetryReport:
    evenness_defect: float
    monotonicity_defect: float
    nonneg_defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.evenness_defect, self.monotonicity_defect, self.nonneg_defect) <= self.tol

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "evenness_defect": self.evenness_defect,
                "monotonicity_defect": self.monotonicity_defect,
                "nonneg_defect": self.nonneg_defect,
                "tol": self.tol,
                "passed": self.passed,
            }
        )


def verify_symmetry(u: GridFunction, tol: float = 1e-8) -> SymmetryReport:
    """Defects from being even, nonincreasing on ``[0, b)`` and nonnegative."""
    g = u.grid
    if not g.is_symmetric():
        raise InvalidArgumentError(f"grid on ({g.a}, {g.b}) is not symmetric about 0")
    v = u.values
    even = float(np.max(np.abs(v - v[::-1])))
    right = v[g.nodes >= -1e-12 * g.length]
    mono = float(max(0.0, np.max(np.diff(right)))) if right.size > 1 else 0.0
    nonneg = float(max(0.0, -np.min(v)))
    return SymmetryReport(even, mono, nonneg, tol)


# ------------------------------------------------------------ TM probe


@dataclass(frozen=True)
class TMConfig:
    restarts: int = 8
    seed: int = 42
    step_init: float = 1.0
    step_min: float = 1e-12
    maxiter: int = 2000
    tol: float = 1e-12

    def __post_init__(self):
        if self.restarts < 1:
            raise InvalidArgumentError("restarts must be at least 1")
        if not (self.step_init > 0 and self.step_min > 0 and self.tol > 0):
            raise InvalidArgumentError("step sizes and tol must be positive")


@dataclass(frozen=True)
class TMProbeResult:
    alpha: float
    sup_estimate: float
    maximizer: GridFunction
    restarts: int
    saturated: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "alpha": self.alpha,
                "sup_estimate": self.sup_estimate,
                "restarts": self.restarts,
                "saturated": self.saturated,
            }
        )


def tm_functional(u: GridFunction, alpha: float) -> float:
    """``(b - a) + int (exp(alpha u^2) - 1)``, exponent capped."""
    return u.grid.length + integrate_nodal(u, lambda t: capped_expm1(alpha * np.square(t)))


def _ascend(A: GagliardoForm, u: np.ndarray, alpha: float, cfg: TMConfig):
    """Projected Sobolev-gradient ascent on ``u^T A u = 1``.

    Returns ``(u, J, saturated)``.  Steps that overflow count as rejected
    and mark the run saturated.
    """
    g = A.grid
    h = g.h
    u = u / math.sqrt(float(u @ apply_form(A, u)))
    J = tm_functional(GridFunction(g, u), alpha)
    saturated = False
    tau = cfg.step_init
    for _ in range(cfg.maxiter):
        e = np.exp(alpha * u * u)  # u is bounded on the sphere at fixed n and J was finite
        grad = 2.0 * alpha * h * u * e
        G = A.solve(grad)
        G -= float(u @ grad) * u  # tangent part, since u^T A G = u^T grad
        gn2 = float(G @ grad)  # squared X-norm of the tangent gradient
        if gn2 <= (cfg.tol * J) ** 2:
            break
        while tau >= cfg.step_min:
            w = u + tau * G
            w /= math.sqrt(float(w @ apply_form(A, w)))
            try:
                Jw = tm_functional(GridFunction(g, w), alpha)
            except NodalOverflowError:
                saturated = True
                tau *= 0.5
                continue
            if Jw > J:
                break
            tau *= 0.5
        else:
            break
        gain = Jw - J
        u, J = w, Jw
        tau = min(cfg.step_init, 2.0 * tau)
        if gain <= cfg.tol * J:
            break
    return u, J, saturated


def tm_probe(A: GagliardoForm, alpha: float, cfg: TMConfig | None = None, init=None) -> TMProbeResult:
    """Estimate ``sup { (b - a) + int (e^{alpha u^2} - 1) : u^T A u = 1 }``.

    Best of ``cfg.restarts`` random smooth and peaked starts (seeded), plus
    any states given in ``init``; grid functions from other grids are
    resampled onto ``A.grid``.  Ties go to the earliest start.
    """
    if not alpha > 0:
        raise InvalidArgumentError("alpha must be positive")
    cfg = cfg or TMConfig()
    g = A.grid
    rng = np.random.default_rng(cfg.seed)
    x = (g.nodes - g.a) / g.length
    starts = []
    for u0 in init or []:
        vals = u0.values if u0.grid == g else u0(g.nodes)
        if np.any(vals != 0):
            starts.append(np.asarray(vals, dtype=float))
    for r in range(cfg.restarts):
        if r % 2 == 0:
            c = rng.standard_normal(4) / np.arange(1, 5) ** 2
            v = sum(cj * np.sin((j + 1) * math.pi * x) for j, cj in enumerate(c))
        else:
            c, w = rng.uniform(0.1, 0.9), rng.uniform(0.02, 0.3)
            v = np.maximum(0.0, 1.0 - np.abs(x - c) / w)
        if not np.any(v != 0):
            v = np.sin(math.pi * x)
        starts.append(v)
    best_u, best_J, sat = None, -math.inf, False
    for v in starts:
        try:
            u, J, s = _ascend(A, v, alpha, cfg)
        except NodalOverflowError:
            sat = True
            continue
        sat = sat or s
        if J > best_J:
            best_u, best_J = u, J
    if best_u is None:
        return TMProbeResult(alpha, math.inf, g.zeros(), len(starts), True)
    return TMProbeResult(alpha, best_J, GridFunction(g, best_u), len(starts), sat)


def tm_sweep(A: GagliardoForm, alphas, cfg: TMConfig | None = None) -> list:
    """``tm_probe`` over increasing ``alphas``, each warm-started from the
    previous maximizer so that the estimates are nondecreasing in ``alpha``."""
    alphas = [float(a) for a in alphas]
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise InvalidArgumentError("alpha list must be nondecreasing")
    out = []
    prev = None
    for a in alphas:
        res = tm_probe(A, a, cfg, init=[prev] if prev is not None else None)
        out.append(res)
        if not res.saturated:
            prev = res.maximizer
    return out
