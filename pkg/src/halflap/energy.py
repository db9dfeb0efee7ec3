"""Energy functional, Sobolev gradient and critical-point solvers.

On a grid the functional is

    phi(u) = u^T A u / (4 pi) - h sum_i F(u_i)

with algebraic gradient ``r(u) = A u / (2 pi) - h f(u)``.  The Sobolev
gradient ``g`` solves ``A g = 2 pi r``, i.e. it is the Riesz representative of
``phi'(u)`` for the inner product ``<u, v>_X / (2 pi)``; the residual reported
everywhere is the dual norm ``sqrt(r^T A^{-1} r)``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import optimize
from scipy.sparse import linalg as spla

from .errors import InvalidArgumentError, NodalOverflowError, SolverFailureError
from .grid import GridFunction, integrate_nodal
from .nonlinearity import Nonlinearity
from .operator import TWO_PI, GagliardoForm, apply_form, quadratic_form

log = logging.getLogger(__name__)

DENSE_NEWTON_LIMIT = 2048


@dataclass(frozen=True)
class MPConfig:
    path_points: int = 41
    descent_tol: float = 1e-8
    max_outer: int = 5000
    step_init: float = 1.0
    step_min: float = 1e-14
    armijo: float = 1e-4
    newton_tol: float = 1e-12
    newton_switch: float | None = 1e-3
    newton_maxiter: int = 60
    deflation_radius: float = 1e-3
    deflation_shift: float = 1.0
    seed: int = 42

    def __post_init__(self):
        for name in ("descent_tol", "newton_tol", "deflation_radius", "step_init", "step_min"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.path_points < 3:
            raise InvalidArgumentError("path_points must be at least 3")
        if self.max_outer < 1:
            raise InvalidArgumentError("max_outer must be at least 1")


@dataclass(frozen=True, eq=False)
class EnergyFunctional:
    A: GagliardoForm
    nl: Nonlinearity

    @property
    def grid(self):
        return self.A.grid

    @property
    def h(self) -> float:
        return self.A.grid.h

    def _check(self, u: GridFunction):
        if u.grid != self.grid:
            raise InvalidArgumentError("grid function lives on a different grid")

    def value(self, u: GridFunction) -> float:
        self._check(u)
        return quadratic_form(self.A, u) / (2 * TWO_PI) - integrate_nodal(u, self.nl.F)

    def algebraic_gradient(self, x: np.ndarray) -> np.ndarray:
        return apply_form(self.A, x) / TWO_PI - self.h * self.nl.f(x)

    def riesz(self, r: np.ndarray) -> np.ndarray:
        """Solve ``A y = r``."""
        return self.A.solve(r)

    def dual_norm(self, r: np.ndarray) -> float:
        return math.sqrt(max(float(r @ self.riesz(r)), 0.0))

    def residual(self, u: GridFunction) -> float:
        return self.dual_norm(self.algebraic_gradient(u.values))

    def x_norm(self, x: np.ndarray) -> float:
        return math.sqrt(max(float(x @ apply_form(self.A, x)), 0.0))


def energy(E: EnergyFunctional, u: GridFunction) -> float:
    return E.value(u)


def gradient(E: EnergyFunctional, u: GridFunction) -> tuple[GridFunction, float]:
    """Sobolev gradient ``g`` (``A g = 2 pi r``) and the dual-norm residual."""
    E._check(u)
    r = E.algebraic_gradient(u.values)
    y = E.riesz(r)
    res = math.sqrt(max(float(r @ y), 0.0))
    return GridFunction(E.grid, TWO_PI * y), res


def _safe_value(E: EnergyFunctional, x: np.ndarray) -> float:
    try:
        return E.value(GridFunction(E.grid, x))
    except NodalOverflowError:
        return -math.inf


def find_endpoint(E: EnergyFunctional, direction: GridFunction, level: float = -1.0, t_cap: float = 2.0**60) -> GridFunction:
    """Point ``t d / ||d||_X`` on the ray with ``phi < level`` (doubling ``t`` from 1).

    If doubling jumps past the overflow cap the step is bisected back until
    the energy is finite.
    """
    E._check(direction)
    nrm = E.x_norm(direction.values)
    if nrm == 0.0:
        raise InvalidArgumentError("direction must be nonzero")
    d = direction.values / nrm
    t_prev, t = 0.0, 1.0
    while t <= t_cap:
        val = _safe_value(E, t * d)
        if val == -math.inf:
            lo, hi = t_prev, t
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                v = _safe_value(E, mid * d)
                if v == -math.inf:
                    hi = mid
                elif v < level:
                    return GridFunction(E.grid, mid * d)
                else:
                    lo = mid
            raise SolverFailureError("could not locate a finite endpoint below the level before overflow")
        if val < level:
            return GridFunction(E.grid, t * d)
        t_prev, t = t, 2.0 * t
    raise SolverFailureError(
        f"energy stayed above {level} along the ray up to t={t_cap:g}; growth hypotheses look violated"
    )


@dataclass
class MPResult:
    solution: GridFunction
    level_c: float
    residual: float
    path_levels: list
    iterations: int
    refined: bool
    newton_iterations: int = 0
    restarts: int = 0
    x_norm: float = 0.0
    hypothesis_warnings: list = field(default_factory=list)
    level_report: dict | None = None

    @property
    def nontrivial(self) -> bool:
        return self.x_norm > 0.0 and bool(np.max(np.abs(self.solution.values)) > 0)

    def report(self) -> dict:
        out = {
            "schema": 1,
            "n": self.solution.grid.n,
            "domain": [self.solution.grid.a, self.solution.grid.b],
            "level_c": self.level_c,
            "residual": self.residual,
            "iterations": self.iterations,
            "newton_iterations": self.newton_iterations,
            "refined": self.refined,
            "restarts": self.restarts,
            "x_norm": self.x_norm,
            "nontrivial": self.nontrivial,
            "hypothesis_warnings": list(self.hypothesis_warnings),
        }
        if self.level_report is not None:
            out["level_report"] = self.level_report
        return out

    def to_json(self) -> str:
        return json.dumps(self.report())


@dataclass
class NewtonInfo:
    iterations: int
    history: list
    gradient_steps: int = 0


def _jacobian_solve(E: EnergyFunctional, x: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(A / 2pi - h diag f'(x)) d = rhs``; the matrix is indefinite in general."""
    diag = E.h * E.nl.fprime(x)
    if E.grid.n <= DENSE_NEWTON_LIMIT:
        J = E.A.dense / TWO_PI - np.diag(diag)
        try:
            d = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverFailureError(f"singular Jacobian: {exc}") from exc
        if not np.all(np.isfinite(d)):
            raise SolverFailureError("singular Jacobian: non-finite Newton step")
        return d
    op = spla.LinearOperator((E.grid.n, E.grid.n), matvec=lambda v: apply_form(E.A, v) / TWO_PI - diag * v)
    d, info = spla.minres(op, rhs, rtol=1e-13, maxiter=20 * E.grid.n)
    if info != 0:
        raise SolverFailureError(f"MINRES breakdown in Jacobian solve (info={info})")
    return d


def _gradient_step(E: EnergyFunctional, x: np.ndarray, res: float):
    """One backtracking Sobolev-gradient step on the squared residual-free energy."""
    r = E.algebraic_gradient(x)
    g = TWO_PI * E.riesz(r)
    phi0 = _safe_value(E, x)
    slope = float(r @ g)
    tau = 1.0
    while tau > 1e-14:
        xn = x - tau * g
        if _safe_value(E, xn) <= phi0 - 1e-4 * tau * slope:
            return xn
        tau *= 0.5
    return x


def newton_refine(
    E: EnergyFunctional,
    u: GridFunction,
    tol: float = 1e-12,
    maxiter: int = 60,
    switch: float | None = None,
    return_info: bool = False,
):
    """Damped Newton polish of a critical point of the energy.

    Uses the one-sided Jacobian ``A / 2pi - h diag f'(u)``.  When some nodal
    value sits within 1e-9 of the kink ``|t| = 1`` a Sobolev-gradient step is
    taken instead.  Raises :class:`SolverFailureError` (with ``best``) on a
    singular Jacobian, after three consecutive residual increases, or when
    ``maxiter`` is exhausted.
    """
    E._check(u)
    x = np.array(u.values, dtype=float)
    res = E.residual(u)
    if switch is not None and res > switch:
        raise InvalidArgumentError(f"residual {res:.3e} above Newton switch {switch:.3e}")
    history = [res]
    best_x, best_res = x.copy(), res
    grows = 0
    grad_steps = 0
    it = 0
    while res > tol:
        if it >= maxiter:
            raise SolverFailureError(
                f"Newton stalled at residual {best_res:.3e} after {it} steps", history, GridFunction(E.grid, best_x)
            )
        it += 1
        if np.any(E.nl.near_kink(x)):
            xn = _gradient_step(E, x, res)
            grad_steps += 1
        else:
            r = E.algebraic_gradient(x)
            try:
                d = _jacobian_solve(E, x, -r)
            except SolverFailureError as exc:
                exc.history = history
                exc.best = GridFunction(E.grid, best_x)
                raise
            # damping on the residual norm
            tau = 1.0
            xn = x + d
            while tau > 1e-4:
                try:
                    rn = E.residual(GridFunction(E.grid, x + tau * d))
                except NodalOverflowError:
                    rn = math.inf
                if rn < res or tau == 1.0 and rn < 10 * res:
                    break
                tau *= 0.5
            xn = x + tau * d
        try:
            res_new = E.residual(GridFunction(E.grid, xn))
        except NodalOverflowError:
            res_new = math.inf
        history.append(res_new)
        grows = grows + 1 if res_new > res else 0
        x, res = xn, res_new
        if res < best_res:
            best_x, best_res = x.copy(), res
        if grows >= 3:
            raise SolverFailureError(
                f"Newton diverging (residual {res:.3e})", history, GridFunction(E.grid, best_x)
            )
    out = GridFunction(E.grid, x)
    if return_info:
        return out, NewtonInfo(it, history, grad_steps)
    return out


def _radial_derivative(E, v, vAv, s):
    """d/ds phi(s v) = s v^T A v / 2pi - h sum f(s v_i) v_i  (``-inf`` past overflow)."""
    try:
        return s * vAv / TWO_PI - E.h * float(E.nl.f(s * v) @ v)
    except NodalOverflowError:
        return -math.inf


def ray_max(E: EnergyFunctional, v: np.ndarray, s_hint: float = 1.0) -> tuple[float, float]:
    """Maximize ``s -> phi(s v)`` over ``s > 0``; returns ``(s_star, phi(s_star v))``.

    The maximizer is located as the sign change of the radial derivative
    (bracketed by doubling/halving around ``s_hint``, then Brent's method),
    which pins it down to rounding rather than to the square root of it.
    """
    vAv = float(v @ apply_form(E.A, v))
    D = lambda s: _radial_derivative(E, v, vAv, s)  # noqa: E731
    lo, hi = 0.0, max(s_hint, 1e-300)
    if D(hi) > 0:
        lo = hi
        hi *= 2.0
        while D(hi) > 0:
            lo, hi = hi, 2.0 * hi
            if hi > 2.0**200:
                raise SolverFailureError("energy increases along the whole ray; no mountain-pass geometry")
    else:
        while lo == 0.0:
            t = 0.5 * hi
            if t < 1e-300:
                raise SolverFailureError("energy decreases from the origin; no mountain-pass geometry")
            if D(t) > 0:
                lo = t
            else:
                hi = t
    # Brent needs finite values at both ends
    while not math.isfinite(D(hi)):
        mid = 0.5 * (lo + hi)
        if D(mid) > 0:
            lo = mid
        else:
            hi = mid
    s_star = optimize.brentq(D, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return s_star, E.value(GridFunction(E.grid, s_star * v))


def _try_newton(E, x, level, cfg):
    """Newton from the current top point; accepted only if it lands on a
    nontrivial critical point no higher than the current path level."""
    try:
        u, info = newton_refine(E, GridFunction(E.grid, x), tol=cfg.newton_tol, maxiter=cfg.newton_maxiter, return_info=True)
    except SolverFailureError:
        return None
    val = E.value(u)
    if E.x_norm(u.values) <= 100 * cfg.descent_tol or val <= 0 or val > level + 1e-10 * max(1.0, abs(level)):
        return None
    return u, info


def mountain_pass(
    E: EnergyFunctional,
    cfg: MPConfig | None = None,
    direction: GridFunction | None = None,
    path=None,
    warnings_: list | None = None,
    omega_hat: float = math.pi,
    subspace: str | None = None,
) -> MPResult:
    """Mountain-pass critical point by deformation of straight paths.

    The initial path is the segment from 0 to an endpoint ``e`` with
    ``phi(e) < -1`` along ``direction`` (default: the first eigenfunction),
    sampled at ``cfg.path_points`` states; an explicit ``path`` (sequence of
    states) may be given instead.  Each outer iteration

    1. takes the sampled state of highest energy (lowest index on ties) and
       re-maximizes exactly along the segment through it;
    2. moves that top point one backtracking Sobolev-gradient step;
    3. replaces the path by the segment from 0 through the moved point.

    A step is accepted only if the maximum over the new path lies below the
    old one, so ``path_levels`` never increases.  The loop stops once the
    residual at the top is at most ``cfg.descent_tol``, after which Newton
    polishes to ``cfg.newton_tol``.  With ``cfg.newton_switch`` set, Newton is
    also tried as soon as the top residual falls below it.

    A result with ``||u||_X <= 100 descent_tol`` counts as collapsed onto the
    trivial critical point; the run is then repeated with ``2 P - 1`` path
    points (twice at most).  For critical growth the level is reported
    against ``omega_hat / (2 alpha0)``.

    ``subspace="odd"`` (``"even"``) keeps every iterate antisymmetric
    (symmetric) under reflection about the midpoint of the interval.  For odd
    ``f`` the energy is invariant under ``u -> -u(a + b - x)``, so critical
    points found inside the odd subspace are critical points outright; this
    is how sign-changing solutions are reached.
    """
    cfg = cfg or MPConfig()
    proj = _projector(subspace, E.nl)
    restarts = 0
    while True:
        try:
            res = _mountain_pass_once(E, cfg, direction, path, warnings_, proj)
            collapsed = res.x_norm <= 100 * cfg.descent_tol
        except _Collapsed:
            collapsed, res = True, None
        if not collapsed:
            break
        if path is not None or restarts >= 2:
            raise SolverFailureError("mountain pass collapsed to the trivial critical point")
        restarts += 1
        cfg = replace(cfg, path_points=2 * cfg.path_points - 1)
    res.restarts = restarts
    if E.nl.growth_class == "critical":
        res.level_report = critical_level_report(res.level_c, E.nl.alpha0, omega_hat)
    return res


class _Collapsed(Exception):
    pass


def critical_level_report(level: float, alpha0: float, omega_hat: float = math.pi) -> dict:
    """Compare a level with the compactness threshold ``omega_hat / (2 alpha0)``."""
    if not 0 < omega_hat <= math.pi:
        raise InvalidArgumentError(f"omega_hat must lie in (0, pi], got {omega_hat}")
    threshold = omega_hat / (2.0 * alpha0)
    return {"level_c": level, "omega_hat": omega_hat, "threshold": threshold, "below_threshold": bool(level < threshold)}


def _projector(subspace, nl):
    if subspace is None:
        return lambda x: x
    if subspace == "even":
        return lambda x: 0.5 * (x + x[::-1])
    if subspace == "odd":
        if not nl.odd:
            raise InvalidArgumentError("the odd subspace is invariant only for odd nonlinearities")
        return lambda x: 0.5 * (x - x[::-1])
    raise InvalidArgumentError(f"unknown subspace {subspace!r}; use 'even', 'odd' or None")


def _mountain_pass_once(E, cfg, direction, path, warnings_, proj) -> MPResult:
    if direction is None and path is None:
        from .operator import assemble_mass
        from .spectrum import smallest_eigenpairs

        direction = smallest_eigenpairs(E.A, assemble_mass(E.grid), 1).eigenfunction

    if path is not None:
        P = np.array([p.values if isinstance(p, GridFunction) else p for p in path], dtype=float)
        if P.ndim != 2 or P.shape[1] != E.grid.n or P.shape[0] < 3:
            raise InvalidArgumentError("path must be a sequence of at least 3 states on the grid")
    else:
        e = find_endpoint(E, direction)
        P = np.linspace(0.0, 1.0, cfg.path_points)[:, None] * proj(e.values)[None, :]
    vals = np.array([_safe_value(E, P[i]) for i in range(P.shape[0])])
    k = 1 + int(np.argmax(vals[1:-1]))  # first index on ties
    if vals[k] <= max(vals[0], vals[-1]):
        raise SolverFailureError("path has no interior maximum above its endpoints; no mountain-pass geometry")

    # top of the segment through the sampled maximum
    x = proj(P[k])
    s_star, top = ray_max(E, x, 1.0)
    if top < vals[k]:
        s_star, top = 1.0, float(vals[k])
    x = s_star * x
    path_levels = [top]
    outer = 0
    tau = cfg.step_init
    newton_tried_at = math.inf
    while True:
        r = E.algebraic_gradient(x)
        y = E.riesz(r)
        res = math.sqrt(max(float(r @ y), 0.0))
        if res <= cfg.descent_tol:
            break
        if cfg.newton_switch is not None and res <= cfg.newton_switch and res < 0.1 * newton_tried_at:
            newton_tried_at = res
            got = _try_newton(E, x, top, cfg)
            if got is not None:
                u, info = got
                return _finish(E, u, path_levels, outer, True, info.iterations, warnings_)
        if outer >= cfg.max_outer:
            raise SolverFailureError(
                f"mountain pass did not converge in {cfg.max_outer} outer iterations (top residual {res:.3e})",
                path_levels,
                GridFunction(E.grid, x),
            )
        outer += 1
        g = proj(TWO_PI * y)
        slope = float(r @ g)
        tau = min(cfg.step_init, 2.0 * tau)
        while True:
            xt = proj(x - tau * g)
            try:
                st, vt = ray_max(E, xt, 1.0)
            except SolverFailureError:
                vt = math.inf
            decrease = cfg.armijo * tau * slope
            noise = 8 * np.finfo(float).eps * max(1.0, abs(top))
            if vt <= top - decrease or (decrease < noise and vt <= top):
                break
            tau *= 0.5
            if tau < cfg.step_min:
                # no visible decrease left: the top is critical up to rounding
                got = _try_newton(E, x, top, cfg)
                if got is not None:
                    u, info = got
                    return _finish(E, u, path_levels, outer, True, info.iterations, warnings_)
                raise SolverFailureError(
                    f"line search failed at top residual {res:.3e}", path_levels, GridFunction(E.grid, x)
                )
        x = st * xt
        top = vt
        path_levels.append(top)

    u = GridFunction(E.grid, x)
    refined = False
    newton_its = 0
    if res > cfg.newton_tol:
        try:
            u, info = newton_refine(E, u, tol=cfg.newton_tol, maxiter=cfg.newton_maxiter, return_info=True)
            refined, newton_its = True, info.iterations
        except SolverFailureError as exc:
            log.warning("Newton polish failed (%s); keeping the descent iterate", exc)
    return _finish(E, u, path_levels, outer, refined, newton_its, warnings_)


def _finish(E, u, path_levels, outer, refined, newton_its, warnings_):
    xn = E.x_norm(u.values)
    if not xn > 0:
        raise _Collapsed()
    return MPResult(
        solution=u,
        level_c=E.value(u),
        residual=E.residual(u),
        path_levels=path_levels,
        iterations=outer,
        refined=refined,
        newton_iterations=newton_its,
        x_norm=xn,
        hypothesis_warnings=list(warnings_ or []),
    )


# ---------------------------------------------------------------- deflation


def _deflation(E, x, roots, shift):
    """Deflation factor ``m(x) = prod_j (||x - u_j||_X^-2 + shift)`` and
    ``grad log m`` as a function of a direction (A-weighted)."""
    logm = 0.0
    coef = []
    for uj in roots:
        d = x - uj
        Ad = apply_form(E.A, d)
        q = float(d @ Ad)
        if q == 0.0:
            return math.inf, None
        p = 1.0 / q + shift
        logm += math.log(p)
        coef.append((-2.0 / (q * q * p), Ad))
    return logm, coef


def _distinct(E, u, found, radius):
    for v in found:
        if E.x_norm(u - v) <= radius or E.x_norm(u + v) <= radius:
            return False
    return True


def deflated_newton(E: EnergyFunctional, x0: np.ndarray, found: list, cfg: MPConfig, maxiter: int = 200):
    """Newton on the deflated residual ``m(u) r(u)``.

    Roots deflated are 0 and every ``+-u_j`` in ``found``.  The undeflated
    Newton step ``d`` is rescaled by ``1 / (1 - grad log m . d)``, which is the
    exact Newton step for ``m r``; the damping backtracks on ``m(u) ||r||``.
    Returns the converged point or ``None``.
    """
    roots = [np.zeros(E.grid.n)] + [s * v for v in found for s in (1.0, -1.0)]
    x = np.array(x0, dtype=float)
    for _ in range(maxiter):
        try:
            r = E.algebraic_gradient(x)
            res = E.dual_norm(r)
        except (NodalOverflowError, SolverFailureError):
            return None
        if res <= cfg.newton_tol:
            return x
        logm, coef = _deflation(E, x, roots, cfg.deflation_shift)
        if coef is None:
            return None
        if np.any(E.nl.near_kink(x)):
            d = -TWO_PI * E.riesz(r)
        else:
            try:
                d = _jacobian_solve(E, x, -r)
            except SolverFailureError:
                return None
        slope = sum(c * float(Ad @ d) for c, Ad in coef)
        scale = 1.0 / (1.0 - slope) if slope < 1.0 else 1.0
        d = scale * d
        # trust cap: never move further than the current distance from 0 (or 1)
        dn = E.x_norm(d)
        cap = max(1.0, E.x_norm(x))
        if dn > cap:
            d *= cap / dn
        merit = logm + math.log(res)
        tau = 1.0
        while tau > 1e-6:
            xn = x + tau * d
            try:
                lm, cf = _deflation(E, xn, roots, cfg.deflation_shift)
                rn = E.dual_norm(E.algebraic_gradient(xn))
            except (NodalOverflowError, SolverFailureError):
                lm, cf, rn = 0.0, None, math.inf
            if cf is not None and math.isfinite(rn) and (rn == 0.0 or lm + math.log(rn) < merit):
                break
            tau *= 0.5
        else:
            return None
        x = xn
    return None


def _parity(v: np.ndarray, tol: float = 1e-6) -> str | None:
    scale = float(np.max(np.abs(v)))
    if np.max(np.abs(v - v[::-1])) <= tol * scale:
        return "even"
    if np.max(np.abs(v + v[::-1])) <= tol * scale:
        return "odd"
    return None


def deflated_search(E: EnergyFunctional, cfg: MPConfig | None = None, k: int = 2, extra_starts: int = 8) -> list:
    """Up to ``k`` nontrivial critical points, pairwise distinct modulo sign.

    Mountain pass is run along the eigenfunctions ``phi_1, phi_2, ...``; an
    eigenfunction that is reflection-odd (even) is searched inside the odd
    (even) invariant subspace, which leads to sign-changing solutions.  After
    the eigen-directions come ``extra_starts`` random smooth states (seeded by
    ``cfg.seed``), each driven by deflated Newton from its ray maximum with 0
    and all found ``+-u_j`` deflated.  Every candidate is Newton-polished and
    kept if nontrivial and at X-distance above ``cfg.deflation_radius`` from
    all ``+-u_j``.  Returns the solutions sorted by energy, possibly fewer
    than ``k``.
    """
    cfg = cfg or MPConfig()
    if k < 0:
        raise InvalidArgumentError("k must be nonnegative")
    if k == 0:
        return []
    from .operator import assemble_mass
    from .spectrum import smallest_eigenpairs

    n = E.grid.n
    eig = smallest_eigenpairs(E.A, assemble_mass(E.grid), min(n, k + 2))
    found = []

    def accept(u):
        if u is not None and E.x_norm(u) > 100 * cfg.descent_tol and _distinct(E, u, found, cfg.deflation_radius):
            found.append(u)

    for phi in eig.eigenfunctions:
        if len(found) >= k:
            break
        sub = _parity(phi.values)
        if sub == "odd" and not E.nl.odd:
            sub = None
        try:
            accept(mountain_pass(E, cfg, direction=phi, subspace=sub).solution.values)
        except SolverFailureError as exc:
            log.info("mountain pass from an eigen-direction failed: %s", exc)

    rng = np.random.default_rng(cfg.seed)
    x = (E.grid.nodes - E.grid.a) / E.grid.length
    for _ in range(extra_starts):
        if len(found) >= k:
            break
        coeffs = rng.standard_normal(6) / np.arange(1, 7)
        v = sum(c * np.sin((j + 1) * math.pi * x) for j, c in enumerate(coeffs))
        try:
            s_star, _ = ray_max(E, v, 1.0 / E.x_norm(v))
        except SolverFailureError:
            continue
        cand = deflated_newton(E, s_star * v, found, cfg)
        if cand is None:
            continue
        try:
            accept(newton_refine(E, GridFunction(E.grid, cand), tol=cfg.newton_tol, maxiter=cfg.newton_maxiter).values)
        except SolverFailureError:
            continue
    return sorted((GridFunction(E.grid, v) for v in found), key=E.value)


# ----------------------------------------------------------------- H'(v)


class HvResult(NamedTuple):
    sup_value: float
    threshold: float
    verdict: str  # "pass" or "fail"
    t_star: float
    unbounded: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "sup_value": self.sup_value if math.isfinite(self.sup_value) else None,
                "threshold": self.threshold,
                "verdict": self.verdict,
                "t_star": self.t_star,
                "unbounded": self.unbounded,
            }
        )


def check_Hv(
    E: EnergyFunctional,
    psi: GridFunction,
    alpha0: float,
    omega_hat: float = math.pi,
    dt: float = 0.05,
    t_cap: float = 2.0**60,
) -> HvResult:
    """``sup_t g(t)``, ``g(t) = t^2 / (4 pi) - int F(t psi)``, against ``omega_hat / (2 alpha0)``.

    ``psi`` is normalized to ``||psi||_X = 1``.  A scan with step ``dt`` runs
    until ``g`` has decreased at 10 consecutive points; the best bracket is
    then refined by bounded golden-section/Brent search.  Past ``t = 100`` the
    step doubles.  If ``g`` still increases at the overflow cap or at
    ``t_cap`` the supremum is reported as infinite (``unbounded``), and the
    verdict is ``"fail"``.
    """
    E._check(psi)
    if not 0 < omega_hat <= math.pi:
        raise InvalidArgumentError(f"omega_hat must lie in (0, pi], got {omega_hat}")
    if not alpha0 > 0:
        raise InvalidArgumentError("alpha0 must be positive")
    nrm = E.x_norm(psi.values)
    if nrm == 0.0:
        raise InvalidArgumentError("psi must be nonzero")
    v = psi.values / nrm
    threshold = omega_hat / (2.0 * alpha0)

    def g(t):
        return t * t / (2 * TWO_PI) - integrate_nodal(GridFunction(E.grid, t * v), E.nl.F)

    ts, gs = [0.0], [0.0]
    drops = 0
    t, step = 0.0, dt
    unbounded = False
    while drops < 10:
        t_next = t + step
        if t_next > t_cap:
            unbounded = True
            break
        try:
            val = g(t_next)
        except NodalOverflowError:
            # past the cap: unbounded only if g was still climbing
            unbounded = drops == 0
            break
        drops = drops + 1 if val < gs[-1] else 0
        t = t_next
        ts.append(t)
        gs.append(val)
        if t >= 100.0:
            step *= 2.0
    if unbounded:
        return HvResult(math.inf, threshold, "fail", math.inf, True)
    j = int(np.argmax(gs))
    lo, hi = ts[max(j - 1, 0)], ts[min(j + 1, len(ts) - 1)]
    best_t, best = ts[j], gs[j]
    if hi > lo:
        opt = optimize.minimize_scalar(lambda t: -g(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if -opt.fun > best:
            best_t, best = float(opt.x), float(-opt.fun)
    return HvResult(best, threshold, "pass" if best < threshold else "fail", best_t, False)
