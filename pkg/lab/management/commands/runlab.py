"""
RunLab command line.

    python manage.py runlab <subcommand> [options]

Every subcommand is a thin adapter over a service or checker. Reports go
to stdout (json, csv or human); errors go to stderr as one JSON object.
Exit codes: 0 ok, 1 property violated, 2 usage, 3 budget or timeout,
4 internal error.
"""

import csv
import io
import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Tuple

from django.conf import settings
from django.core.management.base import BaseCommand

from lab.checkers.base import CheckResult
from lab.checkers.bridge_checker import CountingBridgeChecker
from lab.checkers.chvatal_checker import ChvatalChecker
from lab.checkers.corollary_checker import CorollaryChecker
from lab.checkers.impossibility_checker import ImpossibilityChecker, RunBoundChecker
from lab.checkers.lower_bound_checker import LowerBoundChecker
from lab.checkers.oracle_checker import OracleEquivalenceChecker
from lab.constants import (
    CHECK_MODES,
    EVENT_CONSTANT,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_VERIFICATION_FAILED,
    MODE_EXHAUSTIVE,
    NOISE_DISCRETE,
    NOISE_MODES,
    OUTPUT_FORMATS,
    RUN_EVENTS,
    DEFAULT_LOCAL_SEARCH_STEPS,
)
from lab.exceptions import (
    InternalError,
    InvalidInputError,
    LabError,
    ResourceError,
    SearchTimeoutError,
    VerificationError,
    jsonable,
)
from lab.serializers import (
    ColoringFileSerializer,
    CommandConfigSerializer,
    EdgeColoringFileSerializer,
    FunctionFileSerializer,
)
from lab.services.adversarial import adversarial_min
from lab.services.blockfactor import GridFunction, ProcessSpec, exact_run_probability, mono_path_count
from lab.services.bounds import p_lower, theorem3_constants, trichotomy_p_lower
from lab.services.coloring import (
    SEARCH_TIMEOUT,
    EdgeColoring,
    VertexColoring,
    chromatic_bounds,
    chromatic_coloring,
    find_mono_path,
    lift_edge_coloring,
    longest_mono_path_length,
    search_coloring,
)
from lab.services.construction import construct_h
from lab.services.debruijn import build_graph
from lab.services.simulation import mc_estimate
from lab.services.streams import generate_seed

logger = logging.getLogger(__name__)

# subcommands that draw random numbers and therefore always report a seed
RANDOMIZED = {
    "prob-mc", "adversarial-min", "verify-h", "run-bound-check", "chvatal-check", "verify-theorem2", "corollary-check",
}

RUN_OPTIONS = {"seed", "output", "threads", "budget", "mode", "noise"}
DJANGO_OPTIONS = {
    "verbosity", "settings", "pythonpath", "traceback", "no_color", "force_color", "skip_checks",
    "subcommand", "stdout", "stderr",
}


@dataclass
class CommandReport:
    """What a subcommand hands back: the payload and how to exit."""
    payload: Dict[str, Any]
    exit_code: int = EXIT_OK
    csv_text: Optional[str] = None
    error: Optional[LabError] = None


@contextmanager
def budget_overrides(overrides: Dict[str, Any]) -> Iterator[None]:
    """Temporarily layer --budget values over settings.RUNLAB."""
    if not overrides:
        yield
        return
    original = settings.RUNLAB
    settings.RUNLAB = {**original, **overrides}
    try:
        yield
    finally:
        settings.RUNLAB = original


def _flatten(data: Any, prefix: str = "") -> List[Tuple[str, str]]:
    if isinstance(data, dict):
        rows: List[Tuple[str, str]] = []
        for key in sorted(data):
            rows.extend(_flatten(data[key], f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(data, list):
        return [(prefix, json.dumps(data, separators=(",", ":")))]
    return [(prefix, "" if data is None else str(data))]


def render(report: CommandReport, output: str) -> str:
    data = jsonable(report.payload)
    if output == "json":
        return json.dumps(data, indent=2, sort_keys=True)
    if output == "csv":
        if report.csv_text is not None:
            return report.csv_text.rstrip("\n")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        writer.writerows(_flatten(data))
        return buffer.getvalue().rstrip("\n")
    return "\n".join(f"{key}: {value}" for key, value in _flatten(data))


def check_report(result: CheckResult) -> CommandReport:
    return CommandReport(result.to_dict(), EXIT_OK if result.passed else EXIT_VERIFICATION_FAILED)


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"Cannot read {path}: {e}", path=path)


def _validated(serializer_class, data: Any, path: str) -> Dict[str, Any]:
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise InvalidInputError(f"Invalid file {path}", path=path, errors=serializer.errors)
    return serializer.validated_data


def load_coloring(path: str) -> VertexColoring:
    return _validated(ColoringFileSerializer, _load_json(path), path)["coloring"]


def load_edge_coloring(path: str) -> EdgeColoring:
    """An edge coloring file, or a vertex coloring of D(k+1,m) read as one."""
    data = _load_json(path)
    if isinstance(data, dict) and "q" in data:
        return _validated(EdgeColoringFileSerializer, data, path)["coloring"]
    return EdgeColoring.from_vertex_coloring(_validated(ColoringFileSerializer, data, path)["coloring"])


def load_function(path: str) -> GridFunction:
    return _validated(FunctionFileSerializer, _load_json(path), path)["function"]


class Command(BaseCommand):
    help = "Verification laboratory for runs in k-block factors and increasing de Bruijn graphs."

    requires_system_checks = []

    # Arguments

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

        def sub(name: str, help_text: str):
            p = subparsers.add_parser(name, help=help_text, description=help_text)
            p.add_argument("--output", choices=OUTPUT_FORMATS, default="json", help="Report format (default json)")
            p.add_argument("--budget", action="append", default=[], metavar="KEY=VALUE",
                           help="Override a RUNLAB budget for this run, e.g. EXACT_STATE_BUDGET=1e8")
            p.add_argument("--threads", type=int, default=None, help="Worker threads (default 1)")
            return p

        def k(p, required=True):
            p.add_argument("--k", type=int, required=required, help="Word or window length")

        def m(p, required=True):
            p.add_argument("--m", "--M", dest="m", type=int, required=required, help="Alphabet or grid size")

        def r(p, required=True, help_text="Number of colors or values"):
            p.add_argument("--r", type=int, required=required, help=help_text)

        def ell(p, help_text, required=True):
            p.add_argument("--l", dest="ell", type=int, required=required, help=help_text)

        def randomized(p, default_mode: Optional[str]):
            p.add_argument("--seed", type=int, default=None, help="64-bit seed (generated and reported if omitted)")
            p.add_argument("--samples", type=int, default=None, help="Random draws in sampled mode")
            p.add_argument("--mode", choices=CHECK_MODES, default=default_mode,
                           help=f"exhaustive or sampled (default {default_mode or 'by budget'})")

        def coloring_file(p, required=True):
            p.add_argument("--coloring-file", required=required, help="JSON coloring file {k, m, r, colors}")

        def function_file(p, required=True):
            p.add_argument("--function-file", required=required, help="JSON grid function file {k, M, r, table}")

        def event(p):
            p.add_argument("--event", choices=RUN_EVENTS, default=EVENT_CONSTANT, help="Run event (default constant)")

        p = sub("graph", "Vertex and edge counts of D(k,m); csv output is the edge list")
        k(p); m(p)
        p.add_argument("--edges", action="store_true", help="Include the edge list in json output")

        p = sub("chromatic", "Exact chromatic number of D(k,m) with a witness coloring")
        k(p); m(p)

        p = sub("lift", "Lift an edge coloring of D(k,m) to a proper vertex coloring")
        coloring_file(p)

        p = sub("mono-path", "Find and count monochromatic directed paths of l vertices")
        coloring_file(p); ell(p, "Path length in vertices")

        p = sub("chvatal-check", "Check the Chvatal implication on D(k,m)")
        k(p); m(p); r(p); ell(p, "Path length in edges"); randomized(p, MODE_EXHAUSTIVE)

        p = sub("search-coloring", "Search an r-coloring of D(k,m) without monochromatic paths of l vertices")
        k(p); m(p); r(p); ell(p, "Forbidden path length in vertices")
        p.add_argument("--time-budget", type=float, default=None, help="Seconds before the search gives up")

        p = sub("construct-h", "Build the four-case grid function from a 2-coloring of D(k,M)")
        coloring_file(p)

        p = sub("verify-h", "Check that the four-case function has no constant run of 2k+1 windows")
        coloring_file(p); randomized(p, None)

        p = sub("run-bound-check", "Compare the constant-run probability of the four-case function with 1 - prod(1 - j/M)")
        coloring_file(p); randomized(p, None)

        p = sub("prob-exact", "Exact run probability of a grid function")
        function_file(p); event(p); ell(p, "Run length in windows")
        p.add_argument("--noise", choices=NOISE_MODES, default=NOISE_DISCRETE)
        p.add_argument("--naive", action="store_true", help="Also enumerate all tuples and compare")

        p = sub("prob-mc", "Monte Carlo run probability of a grid function (or of h from a coloring)")
        function_file(p, required=False); coloring_file(p, required=False)
        event(p); ell(p, "Run length in windows")
        p.add_argument("--seed", type=int, default=None, help="64-bit seed (generated and reported if omitted)")
        p.add_argument("--samples", type=int, required=True, help="Number of sampled tuples")
        p.add_argument("--noise", choices=NOISE_MODES, default=NOISE_DISCRETE)

        p = sub("adversarial-min", "Minimum exact constant-run probability over grid functions")
        k(p); m(p); r(p); ell(p, "Run length in windows"); randomized(p, MODE_EXHAUSTIVE)
        p.add_argument("--local-steps", type=int, default=DEFAULT_LOCAL_SEARCH_STEPS,
                       help="Hill-climbing moves in sampled mode")

        p = sub("bridge-check", "Check the run-to-path counting identities for a grid function")
        function_file(p); ell(p, "Run length in windows")

        p = sub("bounds", "Explicit constants: M(k,l,r), p = 1/M^(k+l-1), or the adversarial construction's")
        k(p); ell(p, "Run length", required=False); r(p, required=False)
        p.add_argument("--theorem3", action="store_true", help="Grid size and bound of the four-case construction")
        p.add_argument("--trichotomy", action="store_true", help="Constant inherited by monotone runs")

        p = sub("verify-theorem2", "Compare p(k,l,r) with the adversarial minimum at M = M(k,l,r)")
        k(p); ell(p, "Run length in windows"); r(p); randomized(p, None)

        p = sub("corollary-check", "Check that every r-coloring of D(k,M) has a monochromatic path of l vertices")
        k(p); m(p); r(p); ell(p, "Path length in vertices"); randomized(p, MODE_EXHAUSTIVE)

    # Dispatch

    def handle(self, *args, **options):
        subcommand = options["subcommand"]
        try:
            config = self._config(options)
            if subcommand in RANDOMIZED and options.get("seed") is None:
                options["seed"] = generate_seed()
            with budget_overrides(config["budget"]):
                report = getattr(self, "do_" + subcommand.replace("-", "_"))(options)
        except LabError as e:
            logger.debug(f"runlab {subcommand} failed: {e.message}")
            self._write_error(e)
            raise SystemExit(e.exit_code)
        except Exception as e:
            logger.debug(f"runlab {subcommand} crashed", exc_info=True)
            error = InternalError(f"{type(e).__name__}: {e}", subcommand=subcommand)
            self._write_error(error)
            raise SystemExit(error.exit_code)

        if subcommand in RANDOMIZED:
            report.payload.setdefault("seed", str(options["seed"]))
        self.stdout.write(render(report, config["output"]))
        if report.error is not None:
            self._write_error(report.error)
        if report.exit_code != EXIT_OK:
            raise SystemExit(report.exit_code)

    def _config(self, options: Dict[str, Any]) -> Dict[str, Any]:
        overrides: Dict[str, str] = {}
        for item in options.get("budget") or []:
            key, sep, value = item.partition("=")
            if not sep:
                raise InvalidInputError(f"--budget expects KEY=VALUE, got {item!r}")
            overrides[key.strip()] = value.strip()
        params = {
            key: value for key, value in options.items()
            if key not in RUN_OPTIONS and key not in DJANGO_OPTIONS and value is not None
        }
        serializer = CommandConfigSerializer(data={
            "subcommand": options["subcommand"],
            "params": params,
            "seed": options.get("seed"),
            "output": options.get("output") or "json",
            "threads": options.get("threads"),
            "mode": options.get("mode"),
            "noise": options.get("noise"),
            "budget": overrides,
        })
        if not serializer.is_valid():
            raise InvalidInputError("Invalid command configuration", errors=serializer.errors)
        return serializer.validated_data

    def _write_error(self, error: LabError) -> None:
        self.stderr.write(json.dumps(error.to_dict(), sort_keys=True), style_func=lambda text: text)

    # Subcommands

    def do_graph(self, options) -> CommandReport:
        graph = build_graph(options["k"], options["m"])
        payload = graph.summary()
        if options["edges"]:
            payload["edges"] = [list(edge) for edge in graph.edge_ranks()]
        return CommandReport(payload, csv_text=graph.edge_list_csv())

    def do_chromatic(self, options) -> CommandReport:
        graph = build_graph(options["k"], options["m"])
        chi, witness = chromatic_coloring(graph)
        lower, upper = chromatic_bounds(graph.k, graph.m)
        return CommandReport({
            "k": graph.k,
            "m": graph.m,
            "chromatic_number": chi,
            "lower_bound": lower,
            "upper_bound": upper,
            "coloring": witness.to_dict(),
        })

    def do_lift(self, options) -> CommandReport:
        ec = load_edge_coloring(options["coloring_file"])
        graph = build_graph(ec.k, ec.m)
        lifted = lift_edge_coloring(graph, ec)
        return CommandReport({
            "edge_coloring": ec.to_dict(),
            "lifted": lifted.to_dict(),
            "colors_used": lifted.colors_used,
            "max_colors": 2 ** ec.q,
        })

    def do_mono_path(self, options) -> CommandReport:
        vc = load_coloring(options["coloring_file"])
        graph = build_graph(vc.k, vc.m)
        path = find_mono_path(graph, vc, options["ell"])
        return CommandReport({
            "k": vc.k,
            "m": vc.m,
            "length_vertices": options["ell"],
            "found": path is not None,
            "path": path.to_dict(graph) if path else None,
            "count": mono_path_count(vc, options["ell"]),
            "longest_length_vertices": longest_mono_path_length(graph, vc),
        })

    def do_chvatal_check(self, options) -> CommandReport:
        graph = build_graph(options["k"], options["m"])
        return check_report(ChvatalChecker().check(
            graph, options["r"], options["ell"],
            mode=options["mode"], samples=options["samples"], seed=options["seed"], threads=options["threads"],
        ))

    def do_search_coloring(self, options) -> CommandReport:
        outcome = search_coloring(
            options["k"], options["m"], options["r"], options["ell"], time_budget=options["time_budget"],
        )
        report = CommandReport(outcome.to_dict())
        if outcome.found:
            graph = build_graph(options["k"], options["m"])
            path = find_mono_path(graph, outcome.coloring, options["ell"])
            if path is not None:
                raise VerificationError("Search returned a coloring with a forbidden path", path=list(path.vertices))
        elif outcome.status == SEARCH_TIMEOUT:
            report.exit_code = EXIT_RESOURCE
            report.error = SearchTimeoutError(
                "Search timed out; nothing is proven", nodes=outcome.nodes, elapsed=outcome.elapsed,
            )
        return report

    def do_construct_h(self, options) -> CommandReport:
        vc = load_coloring(options["coloring_file"])
        h = construct_h(vc)
        payload: Dict[str, Any] = {"k": h.k, "M": h.M, "r": h.r, "rule": "four-case"}
        try:
            payload["function"] = h.materialize().to_dict()
        except ResourceError as e:
            payload["function"] = None
            payload["message"] = e.message
        return CommandReport(payload)

    def do_verify_h(self, options) -> CommandReport:
        h = construct_h(load_coloring(options["coloring_file"]))
        return check_report(ImpossibilityChecker().check(
            h, mode=options["mode"], samples=options["samples"], seed=options["seed"], threads=options["threads"],
        ))

    def do_run_bound_check(self, options) -> CommandReport:
        h = construct_h(load_coloring(options["coloring_file"]))
        return check_report(RunBoundChecker().check(
            h, mode=options["mode"], samples=options["samples"], seed=options["seed"], threads=options["threads"],
        ))

    def do_prob_exact(self, options) -> CommandReport:
        f = load_function(options["function_file"])
        report = exact_run_probability(ProcessSpec(f, options["noise"]), options["event"], options["ell"])
        payload = report.to_dict()
        if not options["naive"]:
            return CommandReport(payload)
        oracle = OracleEquivalenceChecker().check(f, options["ell"], events=[options["event"]])
        payload["oracle"] = oracle.to_dict()
        return CommandReport(payload, EXIT_OK if oracle.passed else EXIT_VERIFICATION_FAILED)

    def do_prob_mc(self, options) -> CommandReport:
        if bool(options["function_file"]) == bool(options["coloring_file"]):
            raise InvalidInputError("prob-mc needs exactly one of --function-file or --coloring-file")
        if options["function_file"]:
            f = load_function(options["function_file"])
        else:
            f = construct_h(load_coloring(options["coloring_file"]))
        estimate = mc_estimate(
            ProcessSpec(f, options["noise"]), options["event"], options["ell"], options["samples"],
            seed=options["seed"], threads=options["threads"],
        )
        return CommandReport(estimate.to_dict())

    def do_adversarial_min(self, options) -> CommandReport:
        result = adversarial_min(
            options["k"], options["m"], options["r"], options["ell"],
            mode=options["mode"], samples=options["samples"], seed=options["seed"],
            threads=options["threads"], local_steps=options["local_steps"],
        )
        return CommandReport(result.to_dict())

    def do_bridge_check(self, options) -> CommandReport:
        f = load_function(options["function_file"])
        return check_report(CountingBridgeChecker().check(f, options["ell"]))

    def do_bounds(self, options) -> CommandReport:
        if options["theorem3"]:
            return CommandReport(theorem3_constants(options["k"]).to_dict())
        if options["ell"] is None:
            raise InvalidInputError("bounds needs --l (and --r unless --trichotomy or --theorem3)")
        if options["trichotomy"]:
            return CommandReport(trichotomy_p_lower(options["k"], options["ell"]).to_dict())
        if options["r"] is None:
            raise InvalidInputError("bounds needs --r")
        return CommandReport(p_lower(options["k"], options["ell"], options["r"]).to_dict())

    def do_verify_theorem2(self, options) -> CommandReport:
        return check_report(LowerBoundChecker().check(
            options["k"], options["ell"], options["r"],
            mode=options["mode"], samples=options["samples"], seed=options["seed"], threads=options["threads"],
        ))

    def do_corollary_check(self, options) -> CommandReport:
        return check_report(CorollaryChecker().check(
            options["k"], options["m"], options["r"], options["ell"],
            mode=options["mode"], samples=options["samples"], seed=options["seed"], threads=options["threads"],
        ))
