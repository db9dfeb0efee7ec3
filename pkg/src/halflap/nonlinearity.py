"""Nonlinearities with exponential growth and sampled hypothesis checks.

Both example families are linear (``mu t``) on ``|t| <= 1`` and grow like an
exponential beyond, extended to negative ``t`` as odd functions:

* subcritical: ``mu t^{q-1} exp(t^q - 1)`` with ``1 < q < 2``;
* critical:    ``mu t exp(alpha0 (t^2 - 1))``.

Exponentials go through :func:`capped_exp`, so evaluating far in the tail
raises :class:`NodalOverflowError` instead of returning ``inf``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError
from .grid import capped_exp, capped_expm1

KINK = 1.0


@dataclass(frozen=True)
class Nonlinearity:
    """A nonlinearity ``f``, its primitive ``F`` and right derivative ``fprime``.

    ``log_abs_f`` gives ``log|f(t)|`` without overflow for the growth tests.
    ``alpha0`` is ``None`` for subcritical growth.
    """

    f: Callable
    F: Callable
    fprime: Callable
    log_abs_f: Callable
    params: dict = field(default_factory=dict)
    growth_class: str = "subcritical"
    alpha0: float | None = None
    odd: bool = True
    kinks: tuple = (-KINK, KINK)
    name: str = ""

    def near_kink(self, t, dist: float = 1e-9) -> np.ndarray:
        t = np.abs(np.asarray(t, dtype=float))
        return np.any([np.abs(t - abs(k)) <= dist for k in self.kinks], axis=0)


def _odd(g_pos: Callable) -> Callable:
    """Odd extension of a function given on ``t >= 0``."""

    def g(t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * g_pos(np.abs(t))

    return g


def _even(g_pos: Callable) -> Callable:
    def g(t):
        return g_pos(np.abs(np.asarray(t, dtype=float)))

    return g


def _piecewise(s, linear, tail):
    """Evaluate ``linear`` on ``s <= 1`` and ``tail`` on ``s > 1`` (``s >= 0``)."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    lo = s <= KINK
    out[lo] = linear(s[lo])
    if np.any(~lo):
        out[~lo] = tail(s[~lo])
    return out[()] if out.ndim == 0 else out


def make_subcritical_example(mu: float, q: float) -> Nonlinearity:
    if not (math.isfinite(q) and 1.0 < q < 2.0):
        raise InvalidArgumentError(f"q must satisfy 1 < q < 2, got q={q}")
    if not (math.isfinite(mu) and mu > 0):
        raise InvalidArgumentError(f"mu must be positive, got mu={mu}")
    mu = float(mu)
    q = float(q)

    def f_pos(s):
        return _piecewise(s, lambda x: mu * x, lambda x: mu * x ** (q - 1) * capped_exp(x**q - 1))

    def F_pos(s):
        return _piecewise(s, lambda x: 0.5 * mu * x * x, lambda x: 0.5 * mu + (mu / q) * capped_expm1(x**q - 1))

    def fp_pos(s):
        # right derivative at the kink s = 1
        return _piecewise(
            s,
            lambda x: np.where(x < KINK, mu, mu * (2 * q - 1)),
            lambda x: mu * ((q - 1) * x ** (q - 2) + q * x ** (2 * q - 2)) * capped_exp(x**q - 1),
        )

    def logf_pos(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(s <= KINK, np.log(mu * s), math.log(mu) + (q - 1) * np.log(np.maximum(s, 1.0)) + s**q - 1)

    return Nonlinearity(
        f=_odd(f_pos),
        F=_even(F_pos),
        fprime=_even(fp_pos),
        log_abs_f=_even(logf_pos),
        params={"mu": mu, "q": q},
        growth_class="subcritical",
        alpha0=None,
        odd=True,
        name="ex1",
    )


def make_critical_example(mu: float, alpha0: float) -> Nonlinearity:
    if not (math.isfinite(mu) and mu > 0):
        raise InvalidArgumentError(f"mu must be positive, got mu={mu}")
    if not (math.isfinite(alpha0) and alpha0 > 0):
        raise InvalidArgumentError(f"alpha0 must be positive, got alpha0={alpha0}")
    mu = float(mu)
    a0 = float(alpha0)

    def f_pos(s):
        return _piecewise(s, lambda x: mu * x, lambda x: mu * x * capped_exp(a0 * (x * x - 1)))

    def F_pos(s):
        return _piecewise(
            s,
            lambda x: 0.5 * mu * x * x,
            lambda x: 0.5 * mu + mu * capped_expm1(a0 * (x * x - 1)) / (2 * a0),
        )

    def fp_pos(s):
        return _piecewise(
            s,
            lambda x: np.where(x < KINK, mu, mu * (1 + 2 * a0)),
            lambda x: mu * (1 + 2 * a0 * x * x) * capped_exp(a0 * (x * x - 1)),
        )

    def logf_pos(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(s <= KINK, np.log(mu * s), np.log(mu * s) + a0 * (s * s - 1))

    return Nonlinearity(
        f=_odd(f_pos),
        F=_even(F_pos),
        fprime=_even(fp_pos),
        log_abs_f=_even(logf_pos),
        params={"mu": mu, "alpha0": a0},
        growth_class="critical",
        alpha0=a0,
        odd=True,
        name="ex2",
    )


def make_linear(mu: float) -> Nonlinearity:
    """``f(t) = mu t`` everywhere; useful as a degenerate test case."""
    mu = float(mu)
    return Nonlinearity(
        f=lambda t: mu * np.asarray(t, dtype=float),
        F=lambda t: 0.5 * mu * np.asarray(t, dtype=float) ** 2,
        fprime=lambda t: np.full_like(np.asarray(t, dtype=float), mu),
        log_abs_f=lambda t: np.log(mu * np.abs(np.asarray(t, dtype=float))),
        params={"mu": mu},
        growth_class="subcritical",
        odd=True,
        kinks=(),
        name="linear",
    )


def make_zero() -> Nonlinearity:
    """``f = F = 0``; the energy reduces to the quadratic term."""
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
    return Nonlinearity(
        f=zero,
        F=zero,
        fprime=zero,
        log_abs_f=lambda t: np.full_like(np.asarray(t, dtype=float), -np.inf),
        params={},
        growth_class="subcritical",
        odd=True,
        kinks=(),
        name="zero",
    )


# ---------------------------------------------------------------------------
# hypothesis checks


@dataclass
class HypothesisReport:
    """Sampled evidence for the growth hypotheses (never a proof)."""

    verdicts: dict
    witnesses: dict
    lambda1_X: float
    alpha0_detected: float | None
    sample_range: tuple
    label: str = "numerical evidence"

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "label": self.label,
                "verdicts": self.verdicts,
                "witnesses": self.witnesses,
                "lambda1_X": self.lambda1_X,
                "alpha0_detected": self.alpha0_detected,
                "sample_range": list(self.sample_range),
            }
        )


def default_t_grid(t_max: float = 1e8, n_small: int = 200, n_large: int = 2000) -> np.ndarray:
    """Dense near 0, log-spaced out to ``t_max``."""
    return np.unique(np.concatenate((np.logspace(-6, -1, n_small), np.logspace(-1, math.log10(t_max), n_large))))


def _finite_eval(fn, t):
    """Evaluate ``fn`` sample-wise, returning NaN where it overflows."""
    out = np.full(t.shape, np.nan)
    for i, ti in enumerate(t):
        try:
            with np.errstate(over="raise", invalid="raise"):
                v = float(fn(np.array([ti]))[0])
        except (OverflowError, FloatingPointError):
            continue
        if math.isfinite(v):
            out[i] = v
    return out


ALPHA_LADDER = (1e-3, 1e-2, 1e-1, 1.0, 10.0)


def _tail_decreasing(vals: np.ndarray, tail: int = 20) -> bool:
    v = vals[-tail:]
    with np.errstate(invalid="ignore"):  # -inf - -inf for f == 0
        return bool(np.all(np.diff(v) < 0))


def _tail_increasing(vals: np.ndarray, tail: int = 20) -> bool:
    v = vals[-tail:]
    with np.errstate(invalid="ignore"):  # -inf - -inf for f == 0
        return bool(np.all(np.diff(v) > 0))


def check_hypotheses(
    nl: Nonlinearity,
    lambda1_X: float,
    t_grid=None,
    small_t: float = 1e-2,
    omega_hat: float = math.pi,
    rel_tol: float = 1e-12,
) -> HypothesisReport:
    """Check the structural hypotheses on samples ``+-t`` for ``t`` in ``t_grid``.

    * ``H(i)``: ``0 < F(t) <= M |f(t)|`` for ``|t| >= t0``; ``t0`` is the
      smallest sample from which ``F`` and ``f`` are nonzero, ``M`` the largest
      observed ratio, and the ratio must not be growing over the tail.
    * ``H(ii)``: ``0 < 2F(t) <= f(t) t``; equality (up to ``rel_tol``) is
      accepted since the linear branch attains it exactly.
    * ``H(iii)``: ``max F(t)/t^2`` over ``0 < |t| <= small_t`` is below
      ``lambda1_X / (4 pi)``.
    * growth: for subcritical ``f``, ``log|f(t)| - alpha t^2`` decreases over
      the tail for every ``alpha`` in the ladder.  For critical ``f`` the
      exponent ``alpha0`` is estimated as the slope of ``log|f|`` against
      ``t^2``; the ratio must grow for ``0.9 alpha0`` and decay for
      ``1.1 alpha0``.  ``alpha0 < 2 pi omega_hat`` is checked against the
      configured ``omega_hat`` only, since the optimal constant is unknown.

    Only samples where ``f`` and ``F`` are representable enter H(i)/H(ii);
    the growth tests work with ``log|f|`` and use every sample.
    """
    t = np.asarray(default_t_grid() if t_grid is None else t_grid, dtype=float)
    t = np.unique(np.abs(t[t != 0]))
    if t.size == 0:
        raise InvalidArgumentError("t_grid has no nonzero samples")
    ts = np.concatenate((-t[::-1], t))

    fv = _finite_eval(nl.f, ts)
    Fv = _finite_eval(nl.F, ts)
    ok = np.isfinite(fv) & np.isfinite(Fv)
    verdicts, wit = {}, {}

    # H(ii)
    lhs, rhs = 2 * Fv[ok], fv[ok] * ts[ok]
    margin = rhs - lhs
    scale = np.maximum(np.abs(rhs), np.abs(lhs))
    slack = margin + rel_tol * scale
    h2 = bool(np.all(lhs > 0) and np.all(slack >= 0))
    equal = np.abs(margin) <= rel_tol * scale
    wit["H(ii)"] = {
        "min_margin": float(np.min(margin)),
        "min_2F": float(np.min(lhs)),
        "equality_samples": int(np.count_nonzero(equal)),
        "max_|t|_equality": float(np.max(np.abs(ts[ok][equal]))) if np.any(equal) else None,
    }
    verdicts["H(ii)"] = h2

    # H(i)
    absf = np.abs(ts[ok])
    good = (Fv[ok] > 0) & (fv[ok] != 0)
    bad_t = absf[~good]
    cand = absf[good & (absf > (bad_t.max() if bad_t.size else 0.0))]
    if cand.size == 0:
        verdicts["H(i)"] = False
        wit["H(i)"] = {"t0": None, "M": None}
    else:
        t0 = float(cand.min())
        sel = absf >= t0
        ratio = Fv[ok][sel] / np.abs(fv[ok][sel])
        order = np.argsort(absf[sel], kind="stable")
        r_sorted = ratio[order]
        quarter = max(1, r_sorted.size // 4)
        growing = r_sorted.size > 4 and bool(np.max(r_sorted[-quarter:]) > np.max(r_sorted[:-quarter]) * (1 + 1e-9))
        verdicts["H(i)"] = not growing
        wit["H(i)"] = {"t0": t0, "M": float(np.max(ratio)), "tail_ratio": float(r_sorted[-1]), "ratio_growing": growing}

    # H(iii)
    small = (np.abs(ts) <= small_t) & ok
    bound = lambda1_X / (4 * math.pi)
    if np.any(small):
        r3 = float(np.max(Fv[small] / ts[small] ** 2))
        verdicts["H(iii)"] = bool(r3 < bound)
        wit["H(iii)"] = {"max_F_over_t2": r3, "bound": bound, "small_t": small_t}
    else:
        verdicts["H(iii)"] = False
        wit["H(iii)"] = {"max_F_over_t2": None, "bound": bound, "small_t": small_t}

    # growth at infinity
    large = t[t >= max(2.0, float(t[-1]) ** 0.5)] if t[-1] > 4 else t[t > 1]
    alpha0_detected = None
    growth_key = "H'(iv)" if nl.growth_class == "critical" else "H(iv)"
    if large.size < 25:
        verdicts[growth_key] = False
        wit[growth_key] = {"reason": "too few large-t samples"}
    else:
        logf = nl.log_abs_f(large)
        if nl.growth_class == "critical":
            tt = large**2
            k = max(2, large.size // 5)
            slope = float(np.polyfit(tt[-k:], logf[-k:], 1)[0])
            alpha0_detected = slope
            below = logf - 0.9 * slope * tt
            above = logf - 1.1 * slope * tt
            grow_ok = _tail_increasing(below) and _tail_decreasing(above)
            bound_ok = slope < 2 * math.pi * omega_hat
            verdicts["H'(iv)"] = bool(grow_ok and bound_ok)
            wit["H'(iv)"] = {
                "alpha0_detected": slope,
                "omega_hat": omega_hat,
                "alpha0_below_2pi_omega_hat": bool(bound_ok),
                "t_range": [float(large[0]), float(large[-1])],
            }
        else:
            per_alpha = {}
            for alpha in ALPHA_LADDER:
                ratio = logf - alpha * large**2
                per_alpha[str(alpha)] = {
                    "decreasing_tail": _tail_decreasing(ratio),
                    "log_ratio_at_tmax": float(ratio[-1]),
                }
            verdicts["H(iv)"] = all(v["decreasing_tail"] for v in per_alpha.values())
            wit["H(iv)"] = {"ladder": per_alpha, "t_range": [float(large[0]), float(large[-1])]}

    finite_t = np.abs(ts[ok])
    return HypothesisReport(
        verdicts=verdicts,
        witnesses=wit,
        lambda1_X=float(lambda1_X),
        alpha0_detected=alpha0_detected,
        sample_range=(float(t[0]), float(t[-1]), float(finite_t.max()) if finite_t.size else 0.0),
    )
