import math

import numpy as np
import pytest

from halflap import (
    EnergyFunctional,
    GridFunction,
    InvalidArgumentError,
    MPConfig,
    SolverFailureError,
    check_Hv,
    deflated_search,
    energy,
    find_endpoint,
    gradient,
    mountain_pass,
    newton_refine,
)
from halflap.energy import critical_level_report, ray_max
from halflap.nonlinearity import make_linear, make_zero


def _smooth(grid, rng, amp=1.0):
    x = (grid.nodes - grid.a) / grid.length
    c = rng.standard_normal(5) / np.arange(1, 6)
    return amp * sum(cj * np.sin((j + 1) * math.pi * x) for j, cj in enumerate(c))


def test_energy_of_zero_and_linear_branch(unit256):
    E = unit256.ex1()
    g = unit256.grid
    assert energy(E, g.zeros()) == 0
    u = 0.9 * np.sin(math.pi * g.nodes)
    expected = float(u @ unit256.A.dense @ u) / (4 * math.pi) - 0.5 * unit256.mu * g.h * float(u @ u)
    assert energy(E, GridFunction(g, u)) == pytest.approx(expected, rel=1e-13)


def test_energy_negative_far_along_ground_state(unit256):
    E = unit256.ex1()
    phi = unit256.eig.eigenfunction
    vals = [energy(E, t * phi) for t in (1, 2, 4, 8)]
    assert vals[-1] < 0


def test_gradient_at_zero_and_linear_branch(unit256):
    E = unit256.ex1()
    g = unit256.grid
    s, res = gradient(E, g.zeros())
    assert res == 0 and np.all(s.values == 0)
    u = 0.5 * np.sin(math.pi * g.nodes)
    r = E.algebraic_gradient(u)
    assert np.allclose(r, unit256.A.dense @ u / (2 * math.pi) - unit256.mu * g.h * u, atol=1e-15)
    s, res = gradient(E, GridFunction(g, u))
    assert np.allclose(unit256.A.dense @ s.values, 2 * math.pi * r, atol=1e-11)
    assert res == pytest.approx(math.sqrt(r @ np.linalg.solve(unit256.A.dense, r)), rel=1e-10)


@pytest.mark.parametrize("family", ["ex1", "ex2"])
def test_gradient_finite_differences(unit256, family):
    E = getattr(unit256, family)()
    g = unit256.grid
    rng = np.random.default_rng(11)
    for _ in range(20):
        u = _smooth(g, rng, 2.0)
        v = rng.standard_normal(g.n)
        eps = 1e-5
        fd = (E.value(GridFunction(g, u + eps * v)) - E.value(GridFunction(g, u - eps * v))) / (2 * eps)
        exact = float(E.algebraic_gradient(u) @ v)
        assert abs(fd - exact) < 1e-6 * abs(exact)


def test_find_endpoint(unit256):
    E = unit256.ex1()
    e = find_endpoint(E, unit256.eig.eigenfunction)
    assert energy(E, e) < -1
    with pytest.raises(InvalidArgumentError):
        find_endpoint(E, unit256.grid.zeros())
    with pytest.raises(SolverFailureError):
        find_endpoint(EnergyFunctional(unit256.A, make_zero()), unit256.eig.eigenfunction)


def test_mountain_geometry_on_small_sphere(unit256):
    E = unit256.ex1()
    rng = np.random.default_rng(2)
    rho = 1e-2
    e = find_endpoint(E, unit256.eig.eigenfunction)
    vals = []
    for _ in range(200):
        u = rng.standard_normal(unit256.grid.n) if rng.random() < 0.5 else _smooth(unit256.grid, rng)
        u *= rho / E.x_norm(u)
        vals.append(E.value(GridFunction(unit256.grid, u)))
    assert min(vals) > 0 > energy(E, e)


def test_mountain_pass_ex1(mp_ex1):
    E, r = mp_ex1
    assert r.residual <= 1e-8 and r.level_c > 0 and r.x_norm > 1e-3
    assert r.nontrivial and np.max(np.abs(r.solution.values)) > 10 * 1e-8
    assert r.level_c == E.value(r.solution)
    assert all(b <= a for a, b in zip(r.path_levels, r.path_levels[1:]))
    assert r.level_report is None
    rep = r.report()
    assert rep["schema"] == 1 and rep["nontrivial"] is True


def test_solution_satisfies_discrete_weak_form(mp_ex1):
    E, r = mp_ex1
    u = r.solution.values
    residual = np.max(np.abs(E.A.dense @ u / (2 * math.pi) - E.h * E.nl.f(u)))
    assert residual <= 10 * 1e-12 * E.A.row_norm
    assert E.value(r.solution) >= 0


def test_mountain_pass_fixed_point(mp_ex1):
    E, r = mp_ex1
    path = [s * r.solution.values for s in np.linspace(0, 3, 31)]
    again = mountain_pass(E, path=path)
    assert again.iterations == 0
    assert np.max(np.abs(again.solution.values - r.solution.values)) <= 1e-12


def test_mountain_pass_mesh_stability(unit256, mp_ex1):
    from conftest import Setup

    fine = Setup(0.0, 1.0, 512)
    r = mountain_pass(fine.ex1())
    assert abs(r.level_c - mp_ex1[1].level_c) < 0.01 * mp_ex1[1].level_c


def test_mountain_pass_even_on_symmetric_interval(sym256):
    r = mountain_pass(sym256.ex1())
    v = r.solution.values
    assert np.max(np.abs(v - v[::-1])) <= 1e-8 and np.all(v > 0)


def test_mountain_pass_rejects_flat_path(unit256):
    E = unit256.ex1()
    with pytest.raises(SolverFailureError):
        mountain_pass(E, path=[np.zeros(unit256.grid.n)] * 5)


def test_mountain_pass_reports_nonconvergence(unit256):
    with pytest.raises(SolverFailureError) as info:
        mountain_pass(unit256.ex1(), MPConfig(max_outer=1, newton_switch=None))
    assert len(info.value.history) >= 1


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        MPConfig(descent_tol=0)
    with pytest.raises(InvalidArgumentError):
        MPConfig(path_points=2)


def test_ray_max_is_stationary(unit256):
    E = unit256.ex1()
    v = unit256.eig.eigenfunction.values
    s, val = ray_max(E, v)
    x = s * v
    assert float(E.algebraic_gradient(x) @ v) == pytest.approx(0, abs=1e-12 * float(v @ v) * s)
    assert val >= E.value(GridFunction(unit256.grid, 0.99 * x))
    assert val >= E.value(GridFunction(unit256.grid, 1.01 * x))


def test_newton_at_solution_and_quadratic_rate(mp_ex1, unit256):
    E, r = mp_ex1
    same, info = newton_refine(E, r.solution, return_info=True)
    assert info.iterations == 0 and np.array_equal(same.values, r.solution.values)
    start = r.solution + 0.05 * unit256.eig.eigenfunction
    _, info = newton_refine(E, start, return_info=True)
    h = [x for x in info.history if x > 1e-12]
    ratios = [math.log(b) / math.log(a) for a, b in zip(h, h[1:]) if a < 0.1]
    assert ratios and min(ratios) >= 1.8


def test_newton_linear_problem_one_step(unit256):
    E = EnergyFunctional(unit256.A, make_linear(0.5 * unit256.lam / (2 * math.pi)))
    u0 = GridFunction(unit256.grid, _smooth(unit256.grid, np.random.default_rng(0), 3.0))
    u, info = newton_refine(E, u0, return_info=True)
    assert info.iterations == 1 and np.max(np.abs(u.values)) < 1e-12


def test_newton_switch_guard(unit256):
    E = unit256.ex1()
    far = 3 * unit256.eig.eigenfunction
    with pytest.raises(InvalidArgumentError):
        newton_refine(E, far, switch=1e-3)


def test_deflated_search(unit256):
    E = unit256.ex1()
    assert deflated_search(E, MPConfig(), 0) == []
    sols = deflated_search(E, MPConfig(), 2)
    assert len(sols) == 2
    levels = [E.value(u) for u in sols]
    assert levels[0] < levels[1] and levels[1] - levels[0] > 1e-6
    for u in sols:
        assert E.residual(u) <= 1e-12 and E.residual(-u) <= 1e-12
    u1, u2 = sols
    assert min(E.x_norm(u1.values - u2.values), E.x_norm(u1.values + u2.values)) > MPConfig().deflation_radius
    # the second one changes sign
    assert u2.values.min() < 0 < u2.values.max()


def test_odd_subspace_requires_odd_f(unit256):
    from halflap.nonlinearity import Nonlinearity

    nl = unit256.ex1().nl
    even_f = Nonlinearity(f=nl.f, F=nl.F, fprime=nl.fprime, log_abs_f=nl.log_abs_f, odd=False)
    with pytest.raises(InvalidArgumentError):
        mountain_pass(EnergyFunctional(unit256.A, even_f), subspace="odd")


def test_check_hv_critical_example(unit256):
    E = unit256.ex2()
    res = check_Hv(E, unit256.eig.eigenfunction, 1.0, math.pi)
    assert math.isfinite(res.sup_value) and res.threshold == pytest.approx(math.pi / 2)
    # the sup along psi is a true maximum of the 1-D profile
    psi = unit256.eig.eigenfunction.values / E.x_norm(unit256.eig.eigenfunction.values)
    prof = lambda t: t * t / (4 * math.pi) - E.h * float(np.sum(E.nl.F(t * psi)))  # noqa: E731
    ts = np.linspace(0.01, 2 * res.t_star, 2001)
    assert res.sup_value >= max(prof(t) for t in ts) - 1e-12
    # scaling psi does not matter
    again = check_Hv(E, 7 * unit256.eig.eigenfunction, 1.0, math.pi)
    assert again.sup_value == pytest.approx(res.sup_value, rel=1e-12)


def test_check_hv_zero_is_unbounded(unit256):
    res = check_Hv(EnergyFunctional(unit256.A, make_zero()), unit256.eig.eigenfunction, 1.0, math.pi)
    assert res.unbounded and res.verdict == "fail" and math.isinf(res.sup_value)


def test_check_hv_monotone_in_omega(unit256):
    E = unit256.ex2(alpha0=1.0)
    verdicts = [check_Hv(E, unit256.eig.eigenfunction, 1.0, w).verdict for w in np.linspace(0.05, math.pi, 12)]
    first_pass = verdicts.index("pass") if "pass" in verdicts else len(verdicts)
    assert all(v == "pass" for v in verdicts[first_pass:])
    assert verdicts[0] == "fail"  # 0.05/2 is below the sup


def test_check_hv_validates(unit256):
    E = unit256.ex2()
    with pytest.raises(InvalidArgumentError):
        check_Hv(E, unit256.eig.eigenfunction, 1.0, 4.0)
    with pytest.raises(InvalidArgumentError):
        check_Hv(E, unit256.grid.zeros(), 1.0, 1.0)


def test_critical_mountain_pass_level_report(unit256):
    r = mountain_pass(unit256.ex2())
    assert r.residual <= 1e-8
    rep = r.level_report
    assert rep["threshold"] == pytest.approx(math.pi / 2) and rep["level_c"] == r.level_c
    assert rep["below_threshold"] == (r.level_c < math.pi / 2)
    assert critical_level_report(1.0, 2.0, 1.0)["threshold"] == 0.25
