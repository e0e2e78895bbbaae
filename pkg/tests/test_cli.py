import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from _helpers import crandn
from descriptor_bvp import reference_problems as ref
from descriptor_bvp.bvp import trajectory
from descriptor_bvp.cli import main
from descriptor_bvp.oracle import random_regular_pencil
from descriptor_bvp.pencil import weierstrass_decompose
from descriptor_bvp.problem import (
    ProblemFile,
    ProblemFileError,
    dump_matrix,
    load_problem,
    parse_matrix,
    parse_problem,
    problem_to_dict,
)


def problem_doc(bvp, **options):
    pf = ProblemFile(bvp.pencil.F, bvp.pencil.G, bvp.A1, bvp.B1, bvp.A2, bvp.B2, bvp.N)
    doc = problem_to_dict(pf)
    doc["options"].update(options)
    return doc


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="problem.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def deficient_injected(write):
    doc = problem_doc(ref.deficient_problem(), E=dump_matrix(ref.PUBLISHED_E),
                      wcf={"Qp": dump_matrix(ref.REFERENCE_QP), "Jp": dump_matrix(ref.REFERENCE_JP)})
    return write(doc)


@pytest.fixture
def full_rank(write):
    return write(problem_doc(ref.full_rank_problem()))


def minimal(F, G, **extra):
    m = len(F)
    doc = {"F": F, "G": G, "A1": np.eye(m).tolist(), "B1": [1.0] * m, "A2": [], "B2": [], "N": 2}
    doc.update(extra)
    return doc


class TestAnalyze:
    def test_reference(self, capsys, full_rank):
        code, out, _ = run(capsys, "analyze", "--input", full_rank)
        doc = json.loads(out)
        assert code == 0 and doc["regular"]
        assert (doc["p"], doc["q"], doc["q_star"]) == (3, 2, 2)
        vals = sorted(e["value"] for e in doc["finite_eigenvalues"])
        np.testing.assert_allclose(vals, [0, 0.25, 0.5], atol=1e-12)
        assert max(doc["wcf_residuals"].values()) <= 1e-8

    def test_identity_pencil(self, capsys, write):
        path = write(minimal(np.eye(3).tolist(), np.eye(3).tolist()))
        code, out, _ = run(capsys, "analyze", "--input", path)
        doc = json.loads(out)
        assert code == 0 and doc["p"] == 3
        assert doc["finite_eigenvalues"] == [{"value": 1.0, "multiplicity": 3}]

    def test_singular(self, capsys, write):
        path = write(minimal([[0]], [[0]]))
        code, out, _ = run(capsys, "analyze", "--input", path)
        assert code == 3
        assert json.loads(out)["error"] == "singular pencil"

    def test_injected_report(self, capsys, deficient_injected):
        code, out, _ = run(capsys, "analyze", "--input", deficient_injected)
        inj = json.loads(out)["injected_wcf"]
        assert code == 0 and inj["p"] == 3 and inj["finite_part_residual"] == 0.0

    def test_output_file(self, capsys, full_rank, tmp_path):
        target = tmp_path / "out.json"
        code, out, _ = run(capsys, "analyze", "--input", full_rank, "--output", str(target))
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["p"] == 3


class TestSolve:
    def test_deficient_injected(self, capsys, deficient_injected):
        code, out, _ = run(capsys, "solve", "--input", deficient_injected)
        doc = json.loads(out)
        assert code == 4
        assert doc["solution"]["strategy"] == "regularized"
        assert doc["report"]["case"] == "NoSolution" and doc["optimal_for_nonconsistent"]
        assert doc["pencil"]["injected_wcf"]

    def test_consistent_unique(self, capsys, write):
        rng = np.random.default_rng(3)
        c = random_regular_pencil(3, 2, 3)
        form, part = weierstrass_decompose(c.pencil)
        Y = trajectory(form, part, crandn(rng, 3, 1), 5)
        A1, A2 = rng.standard_normal((2, 5)), rng.standard_normal((2, 5))
        doc = {"F": dump_matrix(c.F), "G": dump_matrix(c.G), "A1": dump_matrix(A1),
               "B1": [[z.real, z.imag] for z in A1 @ Y[0]], "A2": dump_matrix(A2),
               "B2": [[z.real, z.imag] for z in A2 @ Y[-1]], "N": 5}
        code, out, _ = run(capsys, "solve", "--input", write(doc))
        sol = json.loads(out)
        assert code == 0 and sol["report"]["case"] == "UniqueSolution"
        assert max(sol["solution"]["boundary_residual"]) <= 1e-9

    def test_min_norm_on_tall_is_precondition_error(self, capsys, full_rank):
        code, _, err = run(capsys, "solve", "--input", full_rank, "--strategy", "minnorm")
        assert code == 5 and "minimum-norm" in err

    def test_no_finite_dynamics(self, capsys, write):
        c = random_regular_pencil(0, 2, 1)
        path = write(minimal(dump_matrix(c.F), dump_matrix(c.G)))
        code, _, err = run(capsys, "solve", "--input", path)
        assert code == 5 and "no finite dynamics" in err

    def test_theta_flag(self, capsys, deficient_injected):
        _, a, _ = run(capsys, "solve", "--input", deficient_injected)
        _, b, _ = run(capsys, "solve", "--input", deficient_injected, "--strategy", "regularized",
                      "--theta", "1e-3")
        # the file's E takes precedence over theta, so both agree
        assert json.loads(a)["solution"]["C_hat"] == json.loads(b)["solution"]["C_hat"]

    def test_csv(self, capsys, full_rank, tmp_path):
        target = tmp_path / "traj.csv"
        code, out, _ = run(capsys, "solve", "--input", full_rank, "--format", "csv", "--output", str(target))
        assert code == 4 and json.loads(out)["solution"]["strategy"] == "lsq"
        rows = list(csv.reader(io.StringIO(target.read_text())))
        assert rows[0][:3] == ["k", "y0_re", "y0_im"] and len(rows[0]) == 11
        assert len(rows) == 1 + ref.N + 1
        data = np.array(rows[1:], dtype=float)
        Y = np.array(json.loads(out)["solution"]["trajectory"], dtype=float)
        np.testing.assert_array_equal(data[:, 1::2], Y)

    def test_csv_to_stdout(self, capsys, full_rank):
        code, out, err = run(capsys, "solve", "--input", full_rank, "--format", "csv")
        assert out.startswith("k,y0_re") and json.loads(err)["report"]["rank_K"] == 3

    def test_deterministic_bytes(self, capsys, full_rank, tmp_path):
        outs = []
        for i in range(2):
            target = tmp_path / f"o{i}.json"
            run(capsys, "verify", "--input", full_rank, "--seed", "5", "--output", str(target))
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]

    def test_tolerance_sources(self, capsys, full_rank, monkeypatch):
        monkeypatch.setenv("DESCRIPTOR_BVP_TOL", "100")
        _, out, _ = run(capsys, "solve", "--input", full_rank, "--strategy", "pinv")
        rep = json.loads(out)["report"]
        assert rep["rank_tol"] == 100.0 and rep["rank_K"] < 3
        _, out, _ = run(capsys, "solve", "--input", full_rank, "--tol", "1e-9")
        assert json.loads(out)["report"]["rank_tol"] == 1e-9


class TestVerify:
    def test_full_rank_passes(self, capsys, full_rank):
        code, out, _ = run(capsys, "verify", "--input", full_rank)
        doc = json.loads(out)
        assert code == 0 and doc["passed"]
        names = {c["name"] for c in doc["certificates"]}
        assert {"lsq_stationarity", "local_optimality", "dynamics_residual"} <= names

    def test_deficient_passes(self, capsys, deficient_injected):
        code, out, _ = run(capsys, "verify", "--input", deficient_injected)
        names = {c["name"] for c in json.loads(out)["certificates"]}
        assert code == 0 and {"regularized_stationarity", "fd_gradient"} <= names

    def test_corrupted(self, capsys, full_rank):
        # the probe step is 1e-4 * max(1, ||C||) ~ 5e-3 here; offset by well over 10 steps
        code, out, _ = run(capsys, "verify", "--input", full_rank, "--corrupt", "0.1")
        doc = json.loads(out)
        failed = {c["name"] for c in doc["certificates"] if not c["passed"]}
        assert code == 6 and {"local_optimality", "lsq_stationarity"} <= failed

    def test_small_corruption_caught_by_stationarity(self, capsys, full_rank):
        code, out, _ = run(capsys, "verify", "--input", full_rank, "--corrupt", "1e-6")
        failed = {c["name"] for c in json.loads(out)["certificates"] if not c["passed"]}
        assert code == 6 and "lsq_stationarity" in failed

    def test_no_finite_dynamics(self, capsys, write):
        c = random_regular_pencil(0, 2, 1)
        code, out, _ = run(capsys, "verify", "--input", write(minimal(dump_matrix(c.F), dump_matrix(c.G))))
        doc = json.loads(out)
        assert code == 0 and doc["passed"] and doc["certificates"] == []
        assert doc["trajectory"] == [[0.0, 0.0]] * 3


class TestMalformed:
    @pytest.mark.parametrize("mutate, fragment", [
        (lambda d: d.pop("N"), "N: missing"),
        (lambda d: d.update(N=0), "N: must be >= 1"),
        (lambda d: d.update(N=1.5), "N: expected an integer"),
        (lambda d: d.update(F=[[1.0, 0.0]]), "F: must be square"),
        (lambda d: d["G"][1].append(0.0), "G[1]: row has"),
        (lambda d: d["A1"][1].pop(), "A1[1]: row has"),
        (lambda d: d.update(B1=[1.0]), "B1: has 1 entries"),
        (lambda d: d["F"][0].__setitem__(0, "x"), "F[0][0]: expected a number"),
        (lambda d: d["F"][0].__setitem__(0, [1, 2, 3]), "F[0][0]"),
        (lambda d: d.update(options={"colour": 1}), "unknown keys"),
        (lambda d: d.update(options={"strategy": "magic"}), "options.strategy"),
        (lambda d: d.update(options={"theta": -1}), "options.theta"),
        (lambda d: d.update(options={"wcf": {"Qp": [[1.0]]}}), "options.wcf.Jp: missing"),
    ])
    def test_field_diagnostics(self, capsys, write, mutate, fragment):
        doc = minimal(np.eye(2).tolist(), np.eye(2).tolist())
        mutate(doc)
        code, out, err = run(capsys, "solve", "--input", write(doc))
        assert code == 2 and fragment in err and out == ""

    def test_bad_json_reports_line(self, capsys, write):
        code, _, err = run(capsys, "analyze", "--input", write('{"F": [[1]],\n "G": [[1]\n}'))
        assert code == 2 and "line 3" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "analyze", "--input", str(tmp_path / "nope.json"))
        assert code == 2 and "error" in err

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["solve"])
        assert info.value.code == 2


class TestProblemFile:
    def test_complex_entries(self):
        A = parse_matrix([[1, [0, 2]], [[3.5, -1], 0]], "A")
        np.testing.assert_array_equal(A, [[1, 2j], [3.5 - 1j, 0]])
        assert dump_matrix(A) == [[1.0, [0.0, 2.0]], [[3.5, -1.0], 0.0]]

    def test_round_trip(self, deficient_injected):
        pf = load_problem(deficient_injected)
        doc = problem_to_dict(pf)
        again = parse_problem(json.loads(json.dumps(doc)))
        assert problem_to_dict(again) == doc
        for name in ("F", "G", "A1", "B1", "A2", "B2", "E"):
            np.testing.assert_array_equal(getattr(again, name), getattr(pf, name))
        np.testing.assert_array_equal(again.wcf["Qp"], pf.wcf["Qp"])

    def test_round_trip_is_bit_exact(self, rng):
        F = crandn(rng, 3, 3) / 7
        doc = minimal(dump_matrix(F), dump_matrix(F.T))
        pf = parse_problem(json.loads(json.dumps(doc)))
        np.testing.assert_array_equal(pf.F, F)

    def test_wcf_dimension_checks(self):
        doc = minimal(np.eye(2).tolist(), np.eye(2).tolist(),
                      options={"wcf": {"Qp": [[1.0]], "Jp": [[1.0]]}})
        with pytest.raises(ProblemFileError, match="must have 2 rows"):
            parse_problem(doc)

    def test_top_level(self):
        with pytest.raises(ProblemFileError):
            parse_problem([1, 2])


def test_console_entry_point(full_rank):
    proc = subprocess.run([sys.executable, "-m", "descriptor_bvp.cli", "analyze", "--input", full_rank],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["q"] == 2
