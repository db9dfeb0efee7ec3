"""Command-line frontend.

Every subcommand prints a JSON report (``schema: 1``) or CSV on stdout and
writes the same artifacts into the output directory (``--output-dir``,
default ``$HALFLAP_OUTPUT_DIR`` or the working directory).  A ``--config``
file holds ``key = value`` lines named like the long flags; explicit flags
win.  Exit status: 0 success, 1 numerical failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .energy import EnergyFunctional, MPConfig, check_Hv, deflated_search, mountain_pass
from .errors import InvalidArgumentError, NodalOverflowError, SolverFailureError
from .grid import GridFunction, make_grid
from .nonlinearity import check_hypotheses, make_critical_example, make_subcritical_example
from .operator import assemble_mass, assemble_stiffness, solve_dirichlet_linear
from .spectrum import smallest_eigenpairs
from .symmetry import TMConfig, tm_sweep, verify_polarization_inequality

OUTPUT_ENV = "HALFLAP_OUTPUT_DIR"

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2


def _domain(text: str) -> tuple[float, float]:
    try:
        a, b = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise argparse.ArgumentTypeError(f"need finite a < b, got {text!r}")
    return a, b


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def _mu(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


def _float_list(text: str) -> list:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", type=_domain, default=(0.0, 1.0), help="interval a,b (default 0,1)")
    common.add_argument("--n", type=_positive_int, default=256, help="interior nodes (default 256)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--output-dir", default=None, help=f"artifact directory (default ${OUTPUT_ENV} or .)")
    common.add_argument("--config", default=None, help="key=value file mirroring the flags")
    common.add_argument("-v", "--verbose", action="store_true")

    nonlin = argparse.ArgumentParser(add_help=False)
    nonlin.add_argument("--nonlinearity", choices=("ex1", "ex2"), default="ex1")
    nonlin.add_argument("--mu", type=_mu, default="auto", help="number or 'auto' (lambda1_X / 4 pi)")
    nonlin.add_argument("--q", type=float, default=1.5, help="ex1 exponent, 1 < q < 2")
    nonlin.add_argument("--alpha0", type=float, default=1.0, help="ex2 critical exponent")
    nonlin.add_argument("--omega-hat", type=float, default=math.pi, help="assumed value of omega, in (0, pi]")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tol", type=float, default=1e-8, help="descent tolerance")
    solver.add_argument("--path-points", type=int, default=41)

    p = argparse.ArgumentParser(prog="halflap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")
    sub.add_parser("assemble", parents=[common], help="stiffness generator as CSV k,a_k")
    e = sub.add_parser("eigen", parents=[common], help="smallest eigenpairs")
    e.add_argument("--k", type=_positive_int, default=1)
    s = sub.add_parser("solve-linear", parents=[common], help="solve with a constant right-hand side")
    s.add_argument("--rhs", type=float, default=1.0, help="constant load g (default 1)")
    s.add_argument("--tol", type=float, default=1e-12, help="CG relative residual")
    sub.add_parser("mp-solve", parents=[common, nonlin, solver], help="mountain-pass solution")
    m = sub.add_parser("multi-solve", parents=[common, nonlin, solver], help="several solutions by deflation")
    m.add_argument("--k", type=_nonneg_int, default=2)
    sub.add_parser("check-hv", parents=[common, nonlin], help="sup along the first eigenfunction vs omega/(2 alpha0)")
    t = sub.add_parser("tm-probe", parents=[common], help="Trudinger-Moser supremum estimates")
    t.add_argument("--alpha-list", type=_float_list, default=[0.1, 0.25, 0.5, 1.0, 2.0, 4.0])
    t.add_argument("--restarts", type=_positive_int, default=8)
    pt = sub.add_parser("polarize-test", parents=[common], help="randomized polarization inequality")
    pt.add_argument("--trials", type=_nonneg_int, default=1000)
    sub.add_parser("verify-hypotheses", parents=[common, nonlin], help="sampled hypothesis checks")
    va = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    va.add_argument("--only", type=lambda s: [int(x) for x in s.split(",")], default=None, help="criterion numbers")
    return p


def _config_args(path: str) -> list:
    """Translate a key=value file into flag tokens."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read config file: {exc}") from exc
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out.append(f"--{key.replace('_', '-')}={value}")
    return out


def _normalize_argv(argv: list) -> list:
    # allow '--domain -1,1': a negative interval would otherwise look like a flag
    out = []
    it = iter(range(len(argv)))
    for i in it:
        tok = argv[i]
        if tok in ("--domain", "--alpha-list") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(tok)
    return out


def parse_args(argv: list) -> argparse.Namespace:
    parser = build_parser()
    argv = _normalize_argv(list(argv))
    args = parser.parse_args(argv)
    if args.config:
        file_args = _config_args(args.config)
        # file values first so that explicit flags override them
        args = parser.parse_args([argv[0]] + file_args + argv[1:])
    return args


# ----------------------------------------------------------------- runners


class Run:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        out = args.output_dir or os.environ.get(OUTPUT_ENV) or "."
        self.out = Path(out)
        a, b = args.domain
        self.grid = make_grid(a, b, args.n)
        self._A = None
        self._eig = None

    @property
    def A(self):
        if self._A is None:
            self._A = assemble_stiffness(self.grid)
        return self._A

    def eig(self, k: int = 1):
        if self._eig is None or len(self._eig.eigenvalues_X) < k:
            self._eig = smallest_eigenpairs(self.A, assemble_mass(self.grid), k)
        return self._eig

    def write(self, name: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)

    def emit(self, name: str, payload: dict) -> None:
        text = json.dumps(payload, indent=2)
        self.write(name, text + "\n")
        print(text)

    def nonlinearity(self):
        a = self.args
        if not 0 < a.omega_hat <= math.pi:
            raise InvalidArgumentError(f"--omega-hat must lie in (0, pi], got {a.omega_hat}")
        lam = self.eig().lambda1_X
        mu = lam / (4 * math.pi) if a.mu == "auto" else a.mu
        if a.nonlinearity == "ex1":
            return make_subcritical_example(mu, a.q), lam
        return make_critical_example(mu, a.alpha0), lam

    def mp_config(self) -> MPConfig:
        return MPConfig(descent_tol=self.args.tol, path_points=self.args.path_points, seed=self.args.seed)

    def warnings(self, nl, lam) -> list:
        rep = check_hypotheses(nl, lam, omega_hat=self.args.omega_hat)
        return [f"{k} not confirmed by sampling" for k, ok in rep.verdicts.items() if not ok]


def _header(run: Run) -> dict:
    g = run.grid
    return {"schema": 1, "n": g.n, "domain": [g.a, g.b]}


def cmd_assemble(run: Run) -> int:
    A = run.A
    run.write("stiffness.csv", A.to_csv())
    run.emit("assemble.json", {**_header(run), "h": run.grid.h, "a0": float(A.first_row[0]), "row_norm": A.row_norm})
    return EXIT_OK


def cmd_eigen(run: Run) -> int:
    res = run.eig(run.args.k)
    run.write("eigenfunction.csv", res.eigenfunction.to_csv())
    run.emit(
        "eigen.json",
        {
            **_header(run),
            "lambda1_X": res.lambda1_X,
            "lambda1_spec": res.lambda1_spec,
            "eigenvalues_X": res.eigenvalues_X[: run.args.k],
            "residual": res.residual,
            "iterations": res.iterations,
        },
    )
    return EXIT_OK


def cmd_solve_linear(run: Run) -> int:
    c = run.args.rhs
    u, info = solve_dirichlet_linear(
        run.A, assemble_mass(run.grid), lambda x: np.full_like(x, c), rtol=run.args.tol, return_info=True
    )
    g = run.grid
    exact = c * np.sqrt((g.nodes - g.a) * (g.b - g.nodes))
    e = u.values - exact
    run.write("solution.csv", u.to_csv())
    run.emit(
        "solve_linear.json",
        {
            **_header(run),
            "iterations": info.iterations,
            "final_residual": info.final_residual,
            "l2_error_closed_form": math.sqrt(assemble_mass(g).inner(e, e)),
            "max_error_closed_form": float(np.max(np.abs(e))),
        },
    )
    return EXIT_OK


def cmd_mp_solve(run: Run) -> int:
    nl, lam = run.nonlinearity()
    E = EnergyFunctional(run.A, nl)
    res = mountain_pass(
        E, run.mp_config(), direction=run.eig().eigenfunction, warnings_=run.warnings(nl, lam), omega_hat=run.args.omega_hat
    )
    run.write("mp_solution.csv", res.solution.to_csv())
    rep = res.report()
    rep["lambda1_X"] = lam
    rep["mu"] = nl.params["mu"]
    run.emit("mp_report.json", rep)
    return EXIT_OK


def cmd_multi_solve(run: Run) -> int:
    nl, lam = run.nonlinearity()
    E = EnergyFunctional(run.A, nl)
    sols = deflated_search(E, run.mp_config(), run.args.k)
    entries = []
    for i, u in enumerate(sols, 1):
        run.write(f"solution_{i}.csv", u.to_csv())
        entries.append({"level": E.value(u), "residual": E.residual(u), "x_norm": E.x_norm(u.values)})
    run.emit(
        "multi_report.json",
        {**_header(run), "requested": run.args.k, "found": len(sols), "solutions": entries, "hypothesis_warnings": run.warnings(nl, lam)},
    )
    return EXIT_OK


def cmd_check_hv(run: Run) -> int:
    nl, lam = run.nonlinearity()
    if nl.alpha0 is None:
        raise InvalidArgumentError("check-hv needs a critical nonlinearity (--nonlinearity ex2)")
    E = EnergyFunctional(run.A, nl)
    res = check_Hv(E, run.eig().eigenfunction, nl.alpha0, run.args.omega_hat)
    payload = {**_header(run), **json.loads(res.to_json()), "omega_hat": run.args.omega_hat, "alpha0": nl.alpha0}
    payload["note"] = "reported only; the optimal omega is unknown"
    run.emit("check_hv.json", payload)
    return EXIT_OK


def cmd_tm_probe(run: Run) -> int:
    cfg = TMConfig(restarts=run.args.restarts, seed=run.args.seed)
    results = tm_sweep(run.A, sorted(run.args.alpha_list), cfg)
    lines = ["alpha,sup_estimate,saturated"]
    lines += [f"{r.alpha:.17g},{r.sup_estimate:.17g},{str(r.saturated).lower()}" for r in results]
    text = "\n".join(lines) + "\n"
    run.write("tm_probe.csv", text)
    print(text, end="")
    return EXIT_OK


def cmd_polarize_test(run: Run) -> int:
    # any F works: the nodal integral is a symmetric function of the values
    E = EnergyFunctional(run.A, make_subcritical_example(1.0, 1.5))
    rep = verify_polarization_inequality(run.A, E, trials=run.args.trials, seed=run.args.seed)
    payload = {**_header(run), **json.loads(rep.to_json())}
    run.emit("polarize_test.json", payload)
    return EXIT_OK if rep.passed else EXIT_NUMERICAL


def cmd_verify_hypotheses(run: Run) -> int:
    nl, lam = run.nonlinearity()
    rep = check_hypotheses(nl, lam, omega_hat=run.args.omega_hat)
    run.emit("hypotheses.json", {**_header(run), **json.loads(rep.to_json())})
    return EXIT_OK


def cmd_verify_all(run: Run) -> int:
    from .acceptance import run_all

    results = run_all(run.args.only)
    for r in results:
        print(r.line(), flush=True)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    run.write(
        "verify_all.json",
        json.dumps(
            {"schema": 1, "results": [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail} for r in results]},
            indent=2,
        )
        + "\n",
    )
    return EXIT_OK if passed == len(results) else EXIT_NUMERICAL


COMMANDS = {
    "assemble": cmd_assemble,
    "eigen": cmd_eigen,
    "solve-linear": cmd_solve_linear,
    "mp-solve": cmd_mp_solve,
    "multi-solve": cmd_multi_solve,
    "check-hv": cmd_check_hv,
    "tm-probe": cmd_tm_probe,
    "polarize-test": cmd_polarize_test,
    "verify-hypotheses": cmd_verify_hypotheses,
    "verify-all": cmd_verify_all,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if exc.code is not None else EXIT_OK
    except InvalidArgumentError as exc:
        print(f"halflap: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        run = Run(args)
        return COMMANDS[args.command](run)
    except InvalidArgumentError as exc:
        print(f"halflap: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailureError, NodalOverflowError) as exc:
        print(f"halflap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
