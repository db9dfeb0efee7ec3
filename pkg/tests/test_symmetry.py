import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from halflap import (
    EnergyFunctional,
    GridFunction,
    InvalidArgumentError,
    TMConfig,
    assemble_stiffness,
    interpolate,
    make_grid,
    make_subcritical_example,
    polarize,
    quadratic_form,
    tm_probe,
    tm_sweep,
    verify_polarization_inequality,
    verify_symmetry,
)
from halflap.symmetry import tm_functional

G = make_grid(-1, 1, 63)
A = assemble_stiffness(G)
E = EnergyFunctional(A, make_subcritical_example(1.0, 1.5))


def _pivot(m):
    return G.a + 0.5 * m * G.h


nonneg = st.lists(st.floats(0, 5), min_size=G.n, max_size=G.n)
pivots = st.integers(0, G.n + 1)


@given(nonneg, pivots)
def test_polarization_properties(vals, m):
    u = GridFunction(G, vals)
    uh = polarize(u, _pivot(m))
    assert np.array_equal(polarize(uh, _pivot(m)).values, uh.values)
    assert np.array_equal(np.sort(uh.values), np.sort(u.values))
    q, qh = quadratic_form(A, u), quadratic_form(A, uh)
    assert qh <= q + 1e-12 * max(1.0, q)


def test_polarized_function_is_fixed():
    # radially decreasing about 0.3, so u(x) >= u(2c - x) for x > c whenever c <= 0.3
    u = interpolate(G, lambda x: np.maximum(0, 1 - np.abs(x - 0.3) / 0.5))
    for m in range(0, G.n + 2):
        assert np.array_equal(polarize(u, _pivot(m)).values, u.values)


def test_even_decreasing_bump_gives_equality():
    u = interpolate(G, lambda x: 1 - x * x)
    for m in range(1, G.n + 1, 7):
        uh = polarize(u, _pivot(m))
        assert abs(quadratic_form(A, uh) - quadratic_form(A, u)) <= 1e-12 * quadratic_form(A, u)


def test_polarization_moves_mass_right():
    u = interpolate(G, lambda x: np.maximum(0, 1 - 4 * (x + 0.5) ** 2))
    uh = polarize(u, 0.0)
    assert np.allclose(uh.values, u.values[::-1])


def test_polarize_errors():
    u = interpolate(G, lambda x: 1 - x * x)
    with pytest.raises(InvalidArgumentError, match="midpoint"):
        polarize(u, 0.25 * G.h + 0.0)
    with pytest.raises(InvalidArgumentError):
        polarize(u, G.h)  # right of the centre
    with pytest.raises(InvalidArgumentError):
        polarize(GridFunction(G, -u.values), 0.0)


def test_verify_polarization_inequality_report():
    rep = verify_polarization_inequality(A, E, trials=300, seed=3)
    assert rep.passed and rep.violations == 0 and rep.worst_F_defect <= 1e-12
    assert '"schema": 1' in rep.to_json()
    assert verify_polarization_inequality(A, E, trials=50, seed=3).to_json() == verify_polarization_inequality(A, E, trials=50, seed=3).to_json()


def test_verify_symmetry_examples():
    rep = verify_symmetry(interpolate(G, lambda x: np.sqrt(1 - x * x)))
    assert rep.passed and rep.monotonicity_defect == 0 and rep.nonneg_defect == 0
    assert rep.evenness_defect <= 1e-15
    rep = verify_symmetry(interpolate(G, lambda x: x))
    assert rep.evenness_defect == pytest.approx(2 * G.nodes.max())
    assert not rep.passed
    with pytest.raises(InvalidArgumentError):
        verify_symmetry(make_grid(0, 1, 5).zeros())


def test_symmetry_report_detects_nonmonotone_and_negative():
    u = interpolate(G, lambda x: np.cos(3 * np.pi * x))
    rep = verify_symmetry(u)
    assert rep.evenness_defect <= 1e-12 and rep.monotonicity_defect > 0 and rep.nonneg_defect > 0


UNIT = {n: assemble_stiffness(make_grid(0, 1, n)) for n in (63, 127)}


def test_tm_small_alpha_tends_to_length():
    r = tm_probe(UNIT[63], 1e-6, TMConfig(restarts=2))
    assert r.sup_estimate == pytest.approx(1.0, abs=1e-6)
    assert r.sup_estimate >= 1.0


def test_tm_constraint_and_monotone_sweep():
    res = tm_sweep(UNIT[63], [0.1, 0.5, 1.0, 3.0], TMConfig(restarts=4))
    vals = [r.sup_estimate for r in res]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    for r in res:
        u = r.maximizer.values
        assert abs(float(u @ UNIT[63].dense @ u) - 1) <= 1e-10
        assert r.sup_estimate == pytest.approx(tm_functional(r.maximizer, r.alpha), rel=1e-14)
        assert not r.saturated


def test_tm_monotone_under_nested_refinement():
    coarse = tm_probe(UNIT[63], 2.0, TMConfig(restarts=4))
    fine = tm_probe(UNIT[127], 2.0, TMConfig(restarts=4), init=[coarse.maximizer])
    assert fine.sup_estimate >= coarse.sup_estimate * (1 - 1e-6)


def test_tm_saturates_for_huge_alpha():
    r = tm_probe(UNIT[63], 5e4, TMConfig(restarts=2))
    assert r.saturated
    assert r.sup_estimate >= 1.0


def test_tm_validation():
    with pytest.raises(InvalidArgumentError):
        tm_probe(UNIT[63], 0.0)
    with pytest.raises(InvalidArgumentError):
        tm_sweep(UNIT[63], [1.0, 0.5])
    with pytest.raises(InvalidArgumentError):
        TMConfig(restarts=0)


def test_tm_deterministic():
    a = tm_probe(UNIT[63], 1.0, TMConfig(restarts=3, seed=9))
    b = tm_probe(UNIT[63], 1.0, TMConfig(restarts=3, seed=9))
    assert a.to_json() == b.to_json()
    assert math.isfinite(a.sup_estimate)
