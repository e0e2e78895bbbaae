"""
Certifying a solution, from Python and from the shell
=====================================================

A computed solution comes with residual certificates: stationarity of the
functional it minimizes, a finite-difference gradient, randomized local
optimality, minimum-norm sampling, the dynamics residual, and for one or
two unknowns an exhaustive grid search. The same checks run behind
``descriptor-bvp verify``.
"""

import json
from pathlib import Path

from descriptor_bvp import build_reduced_system, reference_problems as ref, solve_bvp, weierstrass_decompose
from descriptor_bvp.certify import certify_solution
from descriptor_bvp.cli import main

HERE = Path(__file__).resolve().parent

# %%
# Certificates for the full-rank reference problem.
bvp = ref.full_rank_problem()
form, part = weierstrass_decompose(bvp.pencil)
report, sol = solve_bvp(bvp, wcf=(form, part))
rs = build_reduced_system(form, part, bvp)
for cert in certify_solution(bvp.pencil, form, part, rs, sol):
    print(f"{cert.name:26s} {'pass' if cert.passed else 'FAIL'}  measured={cert.measured:.3e}  "
          f"threshold={cert.threshold:.3e}")

# %%
# The command line tool runs the same pipeline on a JSON problem file. Exit
# code 4 says the problem had no exact solution and an optimal one was
# reported; 0 from ``verify`` means every certificate passed.
problem = str(HERE / "problems" / "deficient_injected.json")
print("analyze ->", main(["analyze", "--input", problem, "--output", "/dev/null"]))
print("solve   ->", main(["solve", "--input", problem, "--output", "/dev/null"]))
print("verify  ->", main(["verify", "--input", problem, "--output", "/dev/null"]))

# %%
# Nudging the solution off the optimum makes ``verify`` fail with exit 6.
out = HERE / "corrupted_report.json"
code = main(["verify", "--input", str(HERE / "problems" / "full_rank.json"), "--corrupt", "0.1",
             "--output", str(out)])
failed = [c["name"] for c in json.loads(out.read_text())["certificates"] if not c["passed"]]
out.unlink()
print("verify --corrupt 0.1 ->", code, failed)
