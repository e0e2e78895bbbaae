"""Command line front end: ``descriptor-bvp {analyze,solve,verify}``.

Exit codes
----------
0  success (consistent problem solved, regular pencil, all certificates pass)
2  malformed input
3  singular pencil
4  solved, but the problem has no exact solution (an optimal one is reported)
5  strategy precondition violated (also: no finite dynamics for ``solve``,
   or a Jordan basis that cannot be built stably)
6  verification failure
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .bvp import (
    Case,
    NoFiniteDynamicsError,
    Strategy,
    StrategyError,
    build_reduced_system,
    classify,
    solve_bvp,
    dynamics_residual,
    trajectory,
    SolutionBundle,
)
from .certify import certify_solution
from .pencil import (
    DefectiveError,
    SingularPencilError,
    inject_form,
    is_regular,
    verify_finite_part,
    verify_wcf,
    weierstrass_decompose,
)
from .problem import STRATEGIES, ProblemFileError, dump_matrix, dump_scalar, dump_vector, load_problem

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SINGULAR = 3
EXIT_NONCONSISTENT = 4
EXIT_PRECONDITION = 5
EXIT_VERIFY = 6

TOL_ENV = "DESCRIPTOR_BVP_TOL"


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="descriptor-bvp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, metavar="PATH", help="problem file (JSON)")
    common.add_argument("--output", metavar="PATH", help="write the result here instead of stdout")
    common.add_argument("--tol", type=float, help=f"rank tolerance (default: ${TOL_ENV} or automatic)")
    common.add_argument("--seed", type=int, help="seed for randomized checks")
    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--strategy", choices=STRATEGIES, help="override the automatic strategy")
    solving.add_argument("--theta", type=float, help="regularization size for E = theta*I")

    sub.add_parser("analyze", parents=[common], help="regularity and canonical form of the pencil")
    s = sub.add_parser("solve", parents=[common, solving], help="solve the boundary value problem")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    v = sub.add_parser("verify", parents=[common, solving], help="solve and certify the solution")
    v.add_argument("--corrupt", type=float, default=0.0, metavar="DELTA",
                   help="add DELTA to the first entry of C before certifying (self-test)")
    return ap


def _tol(args, pf):
    if args.tol is not None:
        return args.tol
    if pf.tol is not None:
        return pf.tol
    env = os.environ.get(TOL_ENV)
    return float(env) if env else None


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _form(pf, seed):
    if pf.wcf is not None:
        w = pf.wcf
        return inject_form(w["Qp"], w["Jp"], w.get("P"), w.get("Q"), w.get("Hq")), True
    return weierstrass_decompose(pf.bvp().pencil, seed=seed), False


def _eig_list(eigs):
    return [{"value": dump_scalar(v), "multiplicity": k} for v, k in eigs]


def cmd_analyze(args) -> int:
    pf = load_problem(args.input)
    seed = args.seed if args.seed is not None else pf.seed
    pencil = pf.bvp().pencil
    verdict = is_regular(pencil, seed)
    doc = {"regular": verdict.regular, "m": pencil.m,
           "det_magnitudes": [float(x) for x in verdict.det_magnitudes]}
    if not verdict.regular:
        doc["error"] = "singular pencil"
        _emit(_dumps(doc), args.output)
        return EXIT_SINGULAR
    try:
        form, _ = weierstrass_decompose(pencil, seed=seed)
    except DefectiveError as exc:
        doc["error"] = str(exc)
        _emit(_dumps(doc), args.output)
        return EXIT_PRECONDITION
    rF, rG = verify_wcf(pencil, form)
    doc.update({"p": form.p, "q": form.q, "q_star": form.q_star,
                "finite_eigenvalues": _eig_list(form.finite_eigenvalues),
                "wcf_residuals": {"F": rF, "G": rG}})
    if pf.wcf is not None:
        (inj, _), _ = _form(pf, seed)
        doc["injected_wcf"] = {"p": inj.p, "finite_eigenvalues": _eig_list(inj.finite_eigenvalues),
                               "finite_part_residual": verify_finite_part(pencil, pf.wcf["Qp"], inj.Jp)}
    _emit(_dumps(doc), args.output)
    return EXIT_OK


def _solve(args, pf):
    seed = args.seed if args.seed is not None else pf.seed
    bvp = pf.bvp()
    (form, part), injected = _form(pf, seed)
    theta = args.theta if args.theta is not None else pf.theta
    strategy = args.strategy or pf.strategy
    report, bundle = solve_bvp(bvp, tol=_tol(args, pf), theta=theta, E=pf.E,
                               strategy=strategy, wcf=(form, part), seed=seed)
    return bvp, form, part, report, bundle, theta, injected


def _bundle_dict(bundle):
    return {
        "strategy": bundle.strategy.value,
        "C_hat": dump_vector(bundle.C_hat),
        "trajectory": [dump_vector(y) for y in bundle.trajectory],
        "dynamics_residual": bundle.dynamics_residual,
        "boundary_residual": list(bundle.boundary_residual),
        "perturbation_magnitude": bundle.perturbation_magnitude,
    }


def trajectory_csv(Y: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    m = Y.shape[1]
    w.writerow(["k"] + [f"y{i}_{part}" for i in range(m) for part in ("re", "im")])
    for k, y in enumerate(Y):
        w.writerow([k] + [repr(float(v)) for z in y for v in (z.real, z.imag)])
    return buf.getvalue()


def cmd_solve(args) -> int:
    pf = load_problem(args.input)
    _, form, _, report, bundle, _, injected = _solve(args, pf)
    code = EXIT_NONCONSISTENT if report.case is Case.NONE else EXIT_OK
    doc = {"report": report.to_dict(), "solution": _bundle_dict(bundle),
           "pencil": {"p": form.p, "q": form.q, "injected_wcf": injected},
           "optimal_for_nonconsistent": code == EXIT_NONCONSISTENT}
    if args.format == "csv":
        _emit(trajectory_csv(bundle.trajectory), args.output)
        (sys.stdout if args.output else sys.stderr).write(_dumps(doc))
    else:
        _emit(_dumps(doc), args.output)
    return code


def cmd_verify(args) -> int:
    pf = load_problem(args.input)
    seed = args.seed if args.seed is not None else pf.seed
    try:
        bvp, form, part, report, bundle, theta, _ = _solve(args, pf)
    except NoFiniteDynamicsError:
        m = pf.F.shape[0]
        doc = {"certificates": [], "passed": True, "p": 0,
               "note": "no finite dynamics; the only trajectory is zero",
               "trajectory": [dump_vector(np.zeros(m)) for _ in range(pf.N + 1)]}
        _emit(_dumps(doc), args.output)
        return EXIT_OK
    if args.corrupt:
        C = bundle.C_hat.copy()
        C[0, 0] += args.corrupt
        Y = trajectory(form, part, C, bvp.N)
        bundle = SolutionBundle(C, bundle.strategy, Y, dynamics_residual(bvp.pencil, Y),
                                bundle.boundary_residual, bundle.perturbation_magnitude)
    rs = build_reduced_system(form, part, bvp)
    E = pf.E if bundle.strategy is Strategy.REGULARIZED else None
    certs = certify_solution(bvp.pencil, form, part, rs, bundle, E=E, theta=theta, seed=seed)
    passed = all(c.passed for c in certs)
    doc = {"report": report.to_dict(), "strategy": bundle.strategy.value,
           "certificates": [c.to_dict() for c in certs], "passed": passed}
    _emit(_dumps(doc), args.output)
    return EXIT_OK if passed else EXIT_VERIFY


COMMANDS = {"analyze": cmd_analyze, "solve": cmd_solve, "verify": cmd_verify}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ProblemFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        # dimension errors surfacing from the numerics are input problems too,
        # but the more specific classes below are ValueErrors as well
        if isinstance(exc, SingularPencilError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SINGULAR
        if isinstance(exc, (StrategyError, NoFiniteDynamicsError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DefectiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
