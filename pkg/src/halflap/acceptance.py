"""The acceptance suite: twelve end-to-end checks with fixed tolerances.

Each ``criterion_*`` function returns a :class:`CriterionResult`; nothing is
asserted here so that the CLI can print a full table even when some fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .energy import EnergyFunctional, MPConfig, check_Hv, deflated_search, mountain_pass
from .errors import NodalOverflowError, SolverFailureError
from .grid import GridFunction, interpolate, make_grid
from .nonlinearity import check_hypotheses, make_critical_example, make_subcritical_example
from .operator import _direct_matvec, apply_form, assemble_mass, assemble_stiffness, solve_dirichlet_linear
from .spectrum import dense_eigenpairs, smallest_eigenpairs
from .symmetry import TMConfig, tm_probe, tm_sweep, verify_polarization_inequality, verify_symmetry


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _setup(a, b, n):
    g = make_grid(a, b, n)
    A = assemble_stiffness(g)
    M = assemble_mass(g)
    return g, A, M


def _ex1(A, M, q=1.5):
    lam = smallest_eigenpairs(A, M, 1).lambda1_X
    return EnergyFunctional(A, make_subcritical_example(lam / (4 * math.pi), q)), lam


def half_laplacian_by_quadrature(u, x: float, support=(-1.0, 1.0)) -> float:
    """``(1/pi) int_0^inf (2u(x) - u(x+y) - u(x-y)) / y^2 dy`` for ``u`` vanishing off ``support``.

    The second difference cancels for tiny ``y``; below ``delta`` it is
    replaced by its limit ``-u''(x)`` (central difference of step 1e-3).
    Beyond the point where both shifts leave the support the integrand is
    ``2 u(x) / y^2`` and is integrated exactly.
    """
    a, b = support
    y_out = max(x - a, b - x)
    kinks = sorted({x - a, b - x})
    d = 1e-3
    upp = (u(x + d) - 2 * u(x) + u(x - d)) / d**2
    delta = 1e-4
    body = lambda y: (2 * u(x) - u(x + y) - u(x - y)) / (y * y)  # noqa: E731
    total = -upp * delta
    edges = [delta] + [k for k in kinks if k > delta] + [y_out]
    for lo, hi in zip(edges, edges[1:]):
        if hi > lo:
            val, _ = integrate.quad(body, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
            total += val
    total += 2 * u(x) / y_out
    return total / math.pi


def criterion_1() -> CriterionResult:
    exact = lambda x: np.sqrt(np.clip(1 - np.asarray(x) ** 2, 0, None))  # noqa: E731
    pts = [-0.75, -0.3, 0.0, 0.4, 0.9]
    oracle = [half_laplacian_by_quadrature(lambda t: float(exact(t)), x) for x in pts]
    oracle_err = max(abs(v - 1.0) for v in oracle)
    errs = []
    for n in (128, 256, 512, 1024):
        g, A, M = _setup(-1.0, 1.0, n)
        u = solve_dirichlet_linear(A, M, lambda x: np.ones_like(x))
        e = u.values - exact(g.nodes)
        errs.append(math.sqrt(M.inner(e, e)))
    factors = [e0 / e1 for e0, e1 in zip(errs, errs[1:])]
    ok = oracle_err <= 1e-6 and all(f >= 1.3 for f in factors)
    detail = f"L2 errors {['%.3e' % e for e in errs]}, factors {['%.2f' % f for f in factors]}, closed-form check {oracle_err:.1e}"
    return CriterionResult(1, "linear analytic oracle", ok, detail)


def _richardson(ns, lams):
    # three meshes, observed order from the ratio of successive differences
    d1, d2 = lams[0] - lams[1], lams[1] - lams[2]
    p = math.log2(d1 / d2)
    return lams[2] - d2 / (2**p - 1), p


def criterion_2() -> CriterionResult:
    n = 512
    lam_01 = smallest_eigenpairs(*_setup(0.0, 1.0, n)[1:], 1).lambda1_X
    lam_sym = smallest_eigenpairs(*_setup(-1.0, 1.0, n)[1:], 1).lambda1_X
    scale_err = abs(lam_01 - 2 * lam_sym) / lam_01
    specs = [smallest_eigenpairs(*_setup(-1.0, 1.0, m)[1:], 1).lambda1_spec for m in (2048, 4096)]
    stable = abs(specs[0] - specs[1]) / specs[1]
    dense_ns = (128, 256, 512)
    dense = [dense_eigenpairs(*_setup(-1.0, 1.0, m)[1:], 1).lambda1_spec for m in dense_ns]
    extrap, order = _richardson(dense_ns, dense)
    gap = abs(specs[1] - extrap) / extrap
    ok = scale_err <= 1e-6 and stable < 5e-4 and gap <= 0.02
    detail = (
        f"scaling rel err {scale_err:.1e}; lambda1_spec {specs[0]:.6f} (2048) vs {specs[1]:.6f} (4096); "
        f"dense extrapolation {extrap:.6f} (order {order:.2f}), gap {gap:.1e}"
    )
    return CriterionResult(2, "eigenvalue consistency", ok, detail)


def criterion_3() -> CriterionResult:
    g, A, M = _setup(0.0, 1.0, 256)
    lam = smallest_eigenpairs(A, M, 1).lambda1_X
    rng = np.random.default_rng(42)
    worst = math.inf
    viol = 0
    for _ in range(100):
        u = rng.standard_normal(g.n) * rng.uniform(0.01, 10)
        q, m = float(u @ apply_form(A, u)), M.inner(u, u)
        margin = (q - lam * m) / q
        worst = min(worst, margin)
        if margin < -1e-12:
            viol += 1
    return CriterionResult(3, "discrete Poincare inequality", viol == 0, f"{viol} violations in 100, min relative margin {worst:.3e}")


def criterion_4() -> CriterionResult:
    g, A, M = _setup(0.0, 1.0, 256)
    lam = smallest_eigenpairs(A, M, 1).lambda1_X
    mu = lam / (4 * math.pi)
    rng = np.random.default_rng(7)
    x = g.nodes
    worst = 0.0
    for nl in (make_subcritical_example(mu, 1.5), make_critical_example(mu, 1.0)):
        E = EnergyFunctional(A, nl)
        for _ in range(20):
            c = rng.standard_normal(5) / np.arange(1, 6)
            u = 2.0 * sum(cj * np.sin((j + 1) * math.pi * x) for j, cj in enumerate(c))
            v = rng.standard_normal(g.n)
            eps = 1e-5
            fd = (E.value(GridFunction(g, u + eps * v)) - E.value(GridFunction(g, u - eps * v))) / (2 * eps)
            exact = float(E.algebraic_gradient(u) @ v)
            worst = max(worst, abs(fd - exact) / abs(exact))
    return CriterionResult(4, "gradient correctness", worst < 1e-6, f"max relative FD error {worst:.2e} over 40 pairs")


def criterion_5() -> CriterionResult:
    levels = []
    ok = True
    details = []
    for n in (256, 512):
        g, A, M = _setup(0.0, 1.0, n)
        E, _ = _ex1(A, M)
        r = mountain_pass(E, MPConfig())
        levels.append(r.level_c)
        if n == 256:
            ok = r.residual <= 1e-8 and r.x_norm > 1e-3 and r.level_c > 0
            details.append(f"n=256 residual {r.residual:.1e}, ||u||_X {r.x_norm:.4f}, level {r.level_c:.10f}")
    change = abs(levels[1] - levels[0]) / abs(levels[0])
    ok = ok and change < 0.01
    details.append(f"n=512 level {levels[1]:.10f}, change {change:.1e}")
    return CriterionResult(5, "mountain-pass existence", ok, "; ".join(details))


def criterion_6() -> CriterionResult:
    g, A, M = _setup(0.0, 1.0, 256)
    E, _ = _ex1(A, M)
    sols = deflated_search(E, MPConfig(), 2)
    if len(sols) < 2:
        return CriterionResult(6, "multiplicity", False, f"only {len(sols)} solution(s) found")
    u1, u2 = sols[:2]
    dist = min(E.x_norm(u1.values - u2.values), E.x_norm(u1.values + u2.values))
    levels = [E.value(u) for u in sols]
    res = [max(E.residual(u), E.residual(-u)) for u in sols]
    gap = abs(levels[1] - levels[0])
    ok = dist > MPConfig().deflation_radius and gap > 1e-6 and max(res) <= 1e-8
    detail = f"levels {['%.8f' % v for v in levels]}, distance mod sign {dist:.3f}, max residual (+-u) {max(res):.1e}"
    return CriterionResult(6, "multiplicity", ok, detail)


def criterion_7() -> CriterionResult:
    g, A, M = _setup(-1.0, 1.0, 256)
    E, _ = _ex1(A, M)
    r = mountain_pass(E, MPConfig())
    rep = verify_symmetry(r.solution, tol=1e-8)
    detail = (
        f"evenness {rep.evenness_defect:.1e}, monotonicity {rep.monotonicity_defect:.1e}, "
        f"nonnegativity {rep.nonneg_defect:.1e}"
    )
    return CriterionResult(7, "symmetry of the ground state", rep.passed, detail)


def criterion_8() -> CriterionResult:
    g, A, M = _setup(-1.0, 1.0, 255)
    E, _ = _ex1(A, M)
    rep = verify_polarization_inequality(A, E, trials=1000, seed=42, tol=1e-12)
    detail = (
        f"{rep.violations} form / {rep.F_violations} F / {rep.phi_violations} energy violations in 1000, "
        f"worst margin {rep.worst_form_margin:.1e}"
    )
    return CriterionResult(8, "polarization inequality", rep.violations == 0 and rep.F_violations == 0, detail)


def criterion_9() -> CriterionResult:
    cfg = TMConfig()
    ests = []
    sat = False
    for n in (128, 256, 512):
        r = tm_probe(assemble_stiffness(make_grid(0.0, 1.0, n)), 0.5, cfg)
        ests.append(r.sup_estimate)
        sat = sat or r.saturated
    spread = max(ests) / min(ests) - 1
    sweep = tm_sweep(assemble_stiffness(make_grid(0.0, 1.0, 256)), [0.1, 0.25, 0.5, 1.0, 2.0, 4.0], cfg)
    vals = [s.sup_estimate for s in sweep]
    mono = all(b >= a for a, b in zip(vals, vals[1:]))
    ok = all(math.isfinite(e) for e in ests) and not sat and spread <= 0.05 and mono
    detail = f"alpha=0.5 estimates {['%.6f' % e for e in ests]}, spread {spread:.1e}; sweep {['%.4f' % v for v in vals]}"
    return CriterionResult(9, "Trudinger-Moser probe", ok, detail)


def criterion_10() -> CriterionResult:
    g, A, M = _setup(0.0, 1.0, 256)
    eig = smallest_eigenpairs(A, M, 1)
    E = EnergyFunctional(A, make_critical_example(eig.lambda1_X / (4 * math.pi), 1.0))
    hv = check_Hv(E, eig.eigenfunction, 1.0, math.pi)
    r = mountain_pass(E, MPConfig(), direction=eig.eigenfunction, omega_hat=math.pi)
    rep = r.level_report or {}
    ok = (
        math.isfinite(hv.sup_value)
        and r.residual <= 1e-8
        and abs(rep.get("threshold", math.nan) - math.pi / 2) < 1e-15
    )
    detail = (
        f"sup_t g = {hv.sup_value:.8f} (verdict {hv.verdict}); level {r.level_c:.8f} vs threshold "
        f"{rep.get('threshold', float('nan')):.8f}, residual {r.residual:.1e}"
    )
    return CriterionResult(10, "critical-case machinery", ok, detail)


def criterion_11() -> CriterionResult:
    g, A, M = _setup(0.0, 1.0, 256)
    lam = smallest_eigenpairs(A, M, 1).lambda1_X
    r1 = check_hypotheses(make_subcritical_example(lam / (4 * math.pi), 1.5), lam)
    r2 = check_hypotheses(make_critical_example(lam / (4 * math.pi), 1.0), lam)
    r3 = check_hypotheses(make_subcritical_example(lam, 1.5), lam)
    ok = r1.passed and r2.passed and not r3.verdicts["H(iii)"]
    detail = f"ex1 {r1.verdicts}; ex2 {r2.verdicts}; mu=lambda1 H(iii) {r3.verdicts['H(iii)']}"
    return CriterionResult(11, "hypothesis checkers", ok, detail)


def _best_time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def criterion_12() -> CriterionResult:
    rng = np.random.default_rng(0)
    A = assemble_stiffness(make_grid(0.0, 1.0, 1000))
    v = rng.standard_normal(1000)
    diff = float(np.max(np.abs(apply_form(A, v) - A.dense @ v)))
    B = assemble_stiffness(make_grid(0.0, 1.0, 8192))
    w = rng.standard_normal(8192)
    apply_form(B, w)  # warm the cached symbol
    t_fast = _best_time(lambda: apply_form(B, w), 20)
    t_direct = _best_time(lambda: _direct_matvec(B.first_row, w), 3)
    speedup = t_direct / t_fast
    ok = diff <= 1e-12 and speedup >= 5
    detail = f"n=1000 max diff {diff:.1e}; n=8192 fast {t_fast * 1e3:.2f} ms vs direct {t_direct * 1e3:.1f} ms ({speedup:.0f}x)"
    return CriterionResult(12, "fast matvec", ok, detail)


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
]


def run_criterion(fn) -> CriterionResult:
    number = CRITERIA.index(fn) + 1
    t = time.perf_counter()
    try:
        res = fn()
    except (SolverFailureError, NodalOverflowError, ArithmeticError) as exc:
        res = CriterionResult(number, fn.__name__, False, f"raised {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t
    return res


def run_all(select=None) -> list:
    """Run the selected criteria (1-based numbers; all by default)."""
    chosen = CRITERIA if select is None else [CRITERIA[i - 1] for i in select]
    return [run_criterion(fn) for fn in chosen]
