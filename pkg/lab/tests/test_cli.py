"""End-to-end tests for the runlab command."""

import json
from io import StringIO

import pytest

from lab.checkers.base import CheckResult
from lab.cli import run
from lab.constants import EVENT_CONSTANT, EXIT_INTERNAL, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, EXIT_VERIFICATION_FAILED
from lab.exceptions import jsonable
from lab.services.blockfactor import GridFunction, exact_run_probability
from lab.services.bounds import p_lower

DIAGONAL = {"k": 2, "M": 2, "r": 2, "table": [1, 0, 0, 1]}


def invoke(*argv):
    stdout, stderr = StringIO(), StringIO()
    code = run([str(a) for a in argv], stdout=stdout, stderr=stderr)
    return code, stdout.getvalue(), stderr.getvalue()


def invoke_json(*argv):
    code, out, err = invoke(*argv)
    assert code == EXIT_OK, err
    return json.loads(out)


class TestGraph:

    def test_counts(self):
        data = invoke_json("graph", "--k", 2, "--m", 3)
        assert data == {"k": 2, "m": 3, "vertex_count": 3, "edge_count": 1}

    def test_edge_list_csv(self):
        code, out, _ = invoke("graph", "--k", 2, "--m", 3, "--output", "csv")
        assert code == EXIT_OK
        assert out == "source_rank,target_rank\n0,2\n"

    def test_human_output(self):
        code, out, _ = invoke("graph", "--k", 2, "--m", 3, "--output", "human")
        assert code == EXIT_OK
        assert "vertex_count: 3" in out.splitlines()

    def test_budget_override(self):
        code, out, err = invoke("graph", "--k", 2, "--m", 100, "--budget", "VERTEX_BUDGET=10")
        assert code == EXIT_RESOURCE
        assert out == ""
        assert json.loads(err)["error"] == "resource"

    def test_budget_override_is_scoped(self):
        invoke("graph", "--k", 2, "--m", 100, "--budget", "VERTEX_BUDGET=10")
        assert invoke_json("graph", "--k", 2, "--m", 100)["vertex_count"] == 4950


class TestUsage:

    def test_missing_option(self):
        code, _, err = invoke("graph", "--k", 2)
        assert code == EXIT_USAGE
        assert json.loads(err)["error"] == "usage"

    def test_unknown_subcommand(self):
        assert invoke("plot")[0] == EXIT_USAGE

    def test_invalid_dimension(self):
        code, _, err = invoke("graph", "--k", 4, "--m", 3)
        assert code == EXIT_USAGE
        assert json.loads(err)["error"] == "invalid-dimension"

    def test_unknown_budget_key(self):
        code, _, err = invoke("graph", "--k", 2, "--m", 3, "--budget", "NOPE=1")
        assert code == EXIT_USAGE
        assert json.loads(err)["error"] == "invalid-input"

    def test_malformed_budget(self):
        assert invoke("graph", "--k", 2, "--m", 3, "--budget", "VERTEX_BUDGET")[0] == EXIT_USAGE

    def test_unexpected_exception_is_reported_as_json(self, monkeypatch):
        def crash(k, m):
            raise RuntimeError("boom")

        monkeypatch.setattr("lab.management.commands.runlab.build_graph", crash)
        code, out, err = invoke("graph", "--k", 2, "--m", 3)
        assert code == EXIT_INTERNAL
        assert out == ""
        error = json.loads(err)
        assert error["error"] == "internal"
        assert error["message"] == "RuntimeError: boom"
        assert error["details"] == {"subcommand": "graph"}

    def test_bad_function_file(self, write_json):
        path = write_json("f.json", {"k": 2, "M": 2, "r": 2, "table": [0, 1]})
        code, _, err = invoke("prob-exact", "--function-file", path, "--l", 2)
        assert code == EXIT_USAGE
        assert json.loads(err)["error"] == "invalid-input"

    def test_prob_mc_needs_one_source(self, write_json, avoiding_coloring):
        f = write_json("f.json", DIAGONAL)
        c = write_json("c.json", avoiding_coloring.to_dict())
        assert invoke("prob-mc", "--l", 2, "--samples", 10)[0] == EXIT_USAGE
        assert invoke("prob-mc", "--function-file", f, "--coloring-file", c, "--l", 2, "--samples", 10)[0] == EXIT_USAGE


class TestBounds:

    def test_p_lower(self):
        data = invoke_json("bounds", "--k", 2, "--l", 2, "--r", 2)
        assert data["M"] == "4"
        assert data["p_lower"] == "1/64"

    def test_theorem3(self):
        data = invoke_json("bounds", "--k", 4, "--theorem3")
        assert "theorem3_M" in data

    def test_needs_run_length(self):
        assert invoke("bounds", "--k", 2, "--r", 2)[0] == EXIT_USAGE


class TestProbabilities:

    def test_exact(self, write_json):
        path = write_json("f.json", DIAGONAL)
        data = invoke_json("prob-exact", "--function-file", path, "--l", 2)
        assert data["probability"] == "1/2"

    def test_exact_with_oracle(self, write_json):
        path = write_json("f.json", DIAGONAL)
        data = invoke_json("prob-exact", "--function-file", path, "--l", 3, "--event", "increasing", "--naive")
        assert data["oracle"]["passed"]

    def test_monte_carlo_is_reproducible(self, write_json):
        path = write_json("f.json", DIAGONAL)
        args = ("prob-mc", "--function-file", path, "--l", 2, "--samples", 20000, "--seed", 77)
        first = invoke(*args)
        assert first == invoke(*args)
        assert first[0] == EXIT_OK
        assert json.loads(first[1])["seed"] == "77"

    def test_seed_is_reported_when_omitted(self, write_json):
        path = write_json("f.json", DIAGONAL)
        data = invoke_json("prob-mc", "--function-file", path, "--l", 2, "--samples", 500)
        seed = data["seed"]
        again = invoke_json("prob-mc", "--function-file", path, "--l", 2, "--samples", 500, "--seed", seed)
        assert again["hits"] == data["hits"]

    def test_monte_carlo_of_h(self, write_json, avoiding_coloring):
        path = write_json("c.json", avoiding_coloring.to_dict())
        data = invoke_json("prob-mc", "--coloring-file", path, "--l", 7, "--samples", 20000, "--seed", 1)
        assert data["samples"] == 20000
        assert 0 <= data["estimate_decimal"] < 1


class TestChecks:

    def test_mono_path(self, write_json):
        path = write_json("c.json", {"k": 2, "m": 3, "r": 1, "colors": [0, 0, 0]})
        data = invoke_json("mono-path", "--coloring-file", path, "--l", 2)
        assert data["found"]
        assert data["count"] == 1
        assert data["path"]["words"] == [[1, 2], [2, 3]]

    def test_corollary_boundary_exits_cleanly(self):
        data = invoke_json("corollary-check", "--k", 2, "--M", 4, "--r", 2, "--l", 2)
        assert data["hypothesis_met"] is False
        assert "seed" in data

    def test_chvatal(self):
        data = invoke_json("chvatal-check", "--k", 1, "--m", 5, "--r", 2, "--l", 2)
        assert data["passed"]
        assert data["counts"]["colorings_checked"] == 1024

    def test_verify_h(self, write_json, avoiding_coloring):
        path = write_json("c.json", avoiding_coloring.to_dict())
        data = invoke_json("verify-h", "--coloring-file", path, "--mode", "sampled", "--samples", 5000, "--seed", 3)
        assert data["passed"]

    def test_run_bound(self, write_json, avoiding_coloring):
        path = write_json("c.json", avoiding_coloring.to_dict())
        data = invoke_json("run-bound-check", "--coloring-file", path)
        assert data["passed"]
        assert data["mode"] == "exhaustive"
        assert data["details"]["quadratic_bound"] == "9"

    def test_verification_failure(self, monkeypatch, write_json):
        def broken(self, f, ell, **kwargs):
            result = CheckResult(check="counting-bridge")
            result.fail("identity broken", kind="identity-violation")
            return result

        monkeypatch.setattr("lab.management.commands.runlab.CountingBridgeChecker.check", broken)
        path = write_json("f.json", DIAGONAL)
        code, out, _ = invoke("bridge-check", "--function-file", path, "--l", 2)
        assert code == EXIT_VERIFICATION_FAILED
        assert json.loads(out)["passed"] is False

    def test_lift_from_vertex_coloring_file(self, write_json):
        # colors of D(3,4) read as an edge coloring of D(2,4)
        path = write_json("c.json", {"k": 3, "m": 4, "r": 2, "colors": [0, 0, 1, 1]})
        data = invoke_json("lift", "--coloring-file", path)
        assert data["colors_used"] <= data["max_colors"] == 4


@pytest.mark.slow
def test_search_coloring():
    data = invoke_json("search-coloring", "--k", 3, "--m", 6, "--r", 2, "--l", 3)
    assert data["status"] == "found"


class TestThinAdapter:

    def test_bounds_report_matches_library(self):
        expected = json.loads(json.dumps(jsonable(p_lower(3, 2, 2).to_dict())))
        assert invoke_json("bounds", "--k", 3, "--l", 2, "--r", 2) == expected

    def test_exact_report_matches_library(self, write_json):
        path = write_json("f.json", DIAGONAL)
        f = GridFunction.from_table(2, 2, DIAGONAL["table"], r=2)
        expected = exact_run_probability(f, EVENT_CONSTANT, 4).to_dict()
        assert invoke_json("prob-exact", "--function-file", path, "--l", 4) == expected
