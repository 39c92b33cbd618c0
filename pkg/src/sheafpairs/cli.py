"""Command-line scenario runner producing JSON or text verification reports."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__, checks, transform
from .checks import FAIL, INCONCLUSIVE, PASS, Check

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
KINDS = ("gamma", "chart", "transition", "forward", "backward", "choice-dim", "chern", "ineq", "suite")


class ScenarioError(ValueError):
    pass


def build_report(scenario: dict, results: Sequence[Check]) -> dict:
    counts = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
    for c in results:
        counts[c.verdict] += 1
    return {
        "tool": "sheafpairs",
        "version": __version__,
        "scenario": scenario,
        "checks": [c.record() for c in results],
        "summary": counts,
    }


def exit_code(report: dict) -> int:
    s = report["summary"]
    if s[FAIL]:
        return EXIT_FAIL
    if s[INCONCLUSIVE] and not s[PASS]:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    lines = [f"sheafpairs {report['version']} {json.dumps(report['scenario'], sort_keys=True)}"]
    for c in report["checks"]:
        lines.append(f"{c['verdict'].upper():<12} {c['label']}  [{c['anchor']}]")
    s = report["summary"]
    lines.append(f"pass={s[PASS]} fail={s[FAIL]} inconclusive={s[INCONCLUSIVE]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# scenarios


def _int(params: dict, key: str, default=None, minimum: Optional[int] = None) -> int:
    if key not in params:
        if default is None:
            raise ScenarioError(f"field {key!r}: required")
        return default
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"field {key!r}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"field {key!r}: must be >= {minimum}")
    return value


def _graph(params: dict) -> tuple:
    if "graph" in params:
        src = params["graph"]
        if isinstance(src, str):
            try:
                text = Path(src).read_text()
            except OSError as exc:
                raise ScenarioError(f"field 'graph': cannot read {src}: {exc.strerror}") from exc
            name = Path(src).stem
        else:
            text, name = src, "inline"
        try:
            return transform.ResolutionGraph.from_json(text), name
        except transform.GraphFormatError as exc:
            raise ScenarioError(f"field 'graph': {exc}") from exc
    named = params.get("scenario", "2C")
    if named == "2C":
        d = _int(params, "d", minimum=1)
        return transform.graph_2c(d), f"2C,d={d}"
    if named == "picard1":
        csq = _int(params, "csq", 3, minimum=1)
        if params.get("nodal", False):
            return transform.graph_nodal(csq), f"picard1,nodal,csq={csq}"
        return transform.graph_smooth(csq), f"picard1,csq={csq}"
    if named == "two-lines":
        return transform.graph_two_lines(), "two-lines"
    raise ScenarioError(f"field 'scenario': unknown scenario {named!r}")


def _d_values(params: dict) -> List[int]:
    if "d_range" in params:
        raw = params["d_range"]
        if isinstance(raw, str):
            lo, _, hi = raw.partition("..")
            try:
                values = list(range(int(lo), int(hi or lo) + 1))
            except ValueError as exc:
                raise ScenarioError(f"field 'd_range': cannot parse {raw!r}") from exc
        else:
            values = [int(x) for x in raw]
    else:
        values = [_int(params, "d", minimum=1)]
    if not values:
        raise ScenarioError("field 'd_range': empty range")
    if any(d < 1 for d in values):
        raise ScenarioError("field 'd_range': every d must be >= 1")
    return values


def run_scenario(scenario: dict) -> dict:
    if not isinstance(scenario, dict):
        raise ScenarioError("scenario must be a JSON object")
    kind = scenario.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"field 'kind': expected one of {', '.join(KINDS)}")
    seed = _int(scenario, "seed", 0, minimum=0)
    strategy = scenario.get("strategy", "lex")
    if strategy not in transform.STRATEGIES:
        raise ScenarioError(f"field 'strategy': expected lex or max-mult")
    if kind == "gamma":
        d = _int(scenario, "d", minimum=1)
        results = checks.gamma_checks(d, seed, _int(scenario, "samples", 20, 1),
                                      scenario.get("limit_samples"))
    elif kind == "chart":
        results = checks.chart_checks(_int(scenario, "d", minimum=1), seed)
    elif kind == "transition":
        results = checks.transition_checks(_int(scenario, "d", minimum=1))
    elif kind == "forward":
        g, name = _graph(scenario)
        results = checks.forward_checks(g, strategy, name)
    elif kind == "backward":
        g, name = _graph(scenario)
        results = checks.backward_checks(g, strategy, name)
    elif kind == "choice-dim":
        g, name = _graph(scenario)
        expected = scenario.get("expected")
        if expected is None and scenario.get("scenario", "2C") == "2C" and "graph" not in scenario:
            expected = _int(scenario, "d") + 2
        results = checks.choice_checks(g, expected, "auto", strategy, name)
    elif kind == "chern":
        results = checks.chern_checks(_int(scenario, "d_max", 10, 1), _int(scenario, "chains", 200, 0), seed)
    elif kind == "ineq":
        results = checks.ineq_checks(_int(scenario, "m_max", 5, 1), _int(scenario, "r_max", 5, 1))
    else:
        results = checks.suite(_d_values(scenario), seed, strategy)
    return build_report(scenario, results)


# ---------------------------------------------------------------------------
# argument parsing


def _d_range(text: str) -> List[int]:
    lo, sep, hi = text.partition("..")
    try:
        values = list(range(int(lo), int(hi) + 1)) if sep else [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad d range {text!r}") from exc
    return values


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--strategy", choices=transform.STRATEGIES, default="lex")

    p = argparse.ArgumentParser(prog="sheafpairs", description=__doc__)
    p.add_argument("--version", action="version", version=f"sheafpairs {__version__}")
    sub = p.add_subparsers(dest="kind", required=True)

    s = sub.add_parser("gamma", parents=[common], help="boundary kernel battery")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--limit-samples", type=int)

    for name, text in (("chart", "invariance locus at the boundary point"), ("transition", "chart transition maps")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--d", type=int, required=True)

    for name in ("forward", "backward", "choice-dim"):
        s = sub.add_parser(name, parents=[common], help=f"{name} transform scenario")
        s.add_argument("--graph", help="resolution graph JSON file")
        s.add_argument("--scenario", choices=("2C", "picard1", "two-lines"), default="2C")
        s.add_argument("--d", type=int)
        s.add_argument("--csq", type=int)
        s.add_argument("--nodal", action="store_true")
        if name == "choice-dim":
            s.add_argument("--expected", type=int)

    s = sub.add_parser("chern", parents=[common], help="Chern character battery")
    s.add_argument("--d-max", type=int, default=10)
    s.add_argument("--chains", type=int, default=200)

    s = sub.add_parser("ineq", parents=[common], help="rank inequality battery")
    s.add_argument("--m-max", type=int, default=5)
    s.add_argument("--r-max", type=int, default=5)

    s = sub.add_parser("suite", parents=[common], help="full battery over a range of d")
    s.add_argument("--d", dest="d_range", type=_d_range, default=[1], help="e.g. 1..3 or 1,2")

    s = sub.add_parser("run", parents=[common], help="run a scenario from a JSON file or inline JSON")
    s.add_argument("scenario")
    return p


def _scenario_from_args(args: argparse.Namespace) -> dict:
    if args.kind == "run":
        src = args.scenario
        text = src if src.lstrip().startswith("{") else None
        if text is None:
            try:
                text = Path(src).read_text()
            except OSError as exc:
                raise ScenarioError(f"cannot read {src}: {exc.strerror}") from exc
        try:
            scenario = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if isinstance(scenario, dict):
            scenario.setdefault("seed", args.seed)
            scenario.setdefault("strategy", args.strategy)
        return scenario
    skip = {"out", "format"}
    scenario = {k: v for k, v in vars(args).items() if k not in skip and v is not None and v is not False}
    return scenario


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        scenario = _scenario_from_args(args)
        report = run_scenario(scenario)
    except (ScenarioError, ValueError) as exc:
        print(f"sheafpairs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
