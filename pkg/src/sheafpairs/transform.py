"""Numerical simulation of forward and backward elementary-transform sequences.

Only numbers are tracked: multiplicities of the pulled-back cokernel divisor,
self-intersections of the curves in a resolution graph, self-intersections of
blowup centres inside the ruled surfaces over those curves, and the dimension
of every free choice made along the way.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

EXCEPTIONAL = "exceptional"
STRICT = "strict-transform"
STRATEGIES = ("lex", "max-mult")


class GraphFormatError(ValueError):
    pass


class InvariantUnderflow(ArithmeticError):
    pass


@dataclass(frozen=True)
class CurveNode:
    label: str
    self_int: int
    mult: int
    kind: str = STRICT

    def __post_init__(self):
        if self.kind not in (EXCEPTIONAL, STRICT):
            raise GraphFormatError(f"unknown curve kind {self.kind!r}")
        if self.mult < 0:
            raise GraphFormatError(f"{self.label}: multiplicity must be non-negative")
        if self.kind == EXCEPTIONAL and self.self_int > -1:
            raise GraphFormatError(f"{self.label}: exceptional curves need self_int <= -1")

    @property
    def exceptional(self) -> bool:
        return self.kind == EXCEPTIONAL


@dataclass
class ResolutionGraph:
    nodes: List[CurveNode]
    edges: Dict[Tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        labels = [n.label for n in self.nodes]
        if len(set(labels)) != len(labels):
            raise GraphFormatError("duplicate node labels")
        clean: Dict[Tuple[str, str], int] = {}
        for (a, b), c in self.edges.items():
            if a not in labels or b not in labels:
                raise GraphFormatError(f"edge {a}-{b} references an unknown node")
            if a == b:
                raise GraphFormatError("self-edges are given by self_int")
            if c < 0:
                raise GraphFormatError(f"edge {a}-{b}: negative intersection count")
            key = tuple(sorted((a, b)))
            clean[key] = clean.get(key, 0) + c
        self.edges = {k: v for k, v in sorted(clean.items()) if v}

    def node(self, label: str) -> CurveNode:
        for n in self.nodes:
            if n.label == label:
                return n
        raise KeyError(label)

    def meet(self, a: str, b: str) -> int:
        if a == b:
            return self.node(a).self_int
        return self.edges.get(tuple(sorted((a, b))), 0)

    def neighbors(self, label: str) -> List[Tuple[CurveNode, int]]:
        return [(n, self.meet(label, n.label)) for n in self.nodes if n.label != label and self.meet(label, n.label)]

    def total_multiplicity(self) -> int:
        return sum(n.mult for n in self.nodes)

    def with_multiplicity(self, label: str, mult: int) -> "ResolutionGraph":
        nodes = [CurveNode(n.label, n.self_int, mult, n.kind) if n.label == label else n for n in self.nodes]
        return ResolutionGraph(nodes, dict(self.edges))

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"label": n.label, "self_int": n.self_int, "mult": n.mult, "kind": n.kind} for n in self.nodes
            ],
            "edges": [{"a": a, "b": b, "count": c} for (a, b), c in self.edges.items()],
        }

    @classmethod
    def from_json(cls, data) -> "ResolutionGraph":
        if isinstance(data, str):
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise GraphFormatError(f"line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, Mapping) or "nodes" not in data:
            raise GraphFormatError("graph must be an object with a 'nodes' list")
        nodes = []
        for i, raw in enumerate(data["nodes"]):
            try:
                kind = raw.get("kind", STRICT)
                if kind == "strict":
                    kind = STRICT
                nodes.append(CurveNode(str(raw["label"]), int(raw["self_int"]), int(raw["mult"]), kind))
            except KeyError as exc:
                raise GraphFormatError(f"nodes[{i}]: missing field {exc.args[0]!r}") from exc
            except (TypeError, ValueError) as exc:
                raise GraphFormatError(f"nodes[{i}]: {exc}") from exc
        edges: Dict[Tuple[str, str], int] = {}
        for i, raw in enumerate(data.get("edges", [])):
            try:
                key = (str(raw["a"]), str(raw["b"]))
                edges[key] = edges.get(key, 0) + int(raw.get("count", 1))
            except KeyError as exc:
                raise GraphFormatError(f"edges[{i}]: missing field {exc.args[0]!r}") from exc
        return cls(nodes, edges)


# ---------------------------------------------------------------------------
# pullback consistency


@dataclass(frozen=True)
class Violation:
    label: str
    value: int

    def record(self) -> dict:
        return {"node": self.label, "degree": self.value}


@dataclass
class PullbackCheck:
    violations: List[Violation]
    identities: List[Tuple[str, int, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_pullback(g: ResolutionGraph) -> PullbackCheck:
    """Degree of the pulled-back divisor on every exceptional curve must vanish."""
    violations, identities = [], []
    for e in g.nodes:
        if not e.exceptional:
            continue
        around = sum(d.mult * c for d, c in g.neighbors(e.label))
        degree = around + e.mult * e.self_int
        if degree:
            violations.append(Violation(e.label, degree))
        else:
            identities.append((e.label, -e.self_int * e.mult, around))
    return PullbackCheck(violations, identities if not violations else [])


# ---------------------------------------------------------------------------
# forward procedure


def _order(nodes: Iterable[CurveNode], strategy: str, mults: Optional[Mapping[str, int]] = None) -> List[CurveNode]:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    nodes = list(nodes)
    if strategy == "lex":
        return sorted(nodes, key=lambda n: n.label)
    mults = mults or {n.label: n.mult for n in nodes}
    return sorted(nodes, key=lambda n: (-mults[n.label], n.label))


@dataclass(frozen=True)
class ForwardStep:
    step: int
    component: str
    action: str
    n_before: int
    n_after: int

    def record(self) -> dict:
        return {
            "step": self.step,
            "component": self.component,
            "action": self.action,
            "N": [self.n_before, self.n_after],
        }


@dataclass
class ForwardState:
    multiplicities: Dict[str, int]
    totals: List[int]
    trace: List[ForwardStep]
    stages: List[str]
    trivial: bool

    @property
    def steps(self) -> int:
        return len(self.trace)

    def record(self) -> dict:
        return {
            "multiplicities": dict(sorted(self.multiplicities.items())),
            "N": self.totals,
            "trace": [s.record() for s in self.trace],
            "stages": self.stages,
            "trivial_bundle": self.trivial,
        }


def forward_run(g: ResolutionGraph, strategy: str = "lex") -> ForwardState:
    mults = {n.label: n.mult for n in g.nodes}
    total = sum(mults.values())
    totals = [total]
    trace: List[ForwardStep] = []
    stages = ["pullback to resolution"]
    while total:
        live = [n for n in g.nodes if mults[n.label] > 0]
        s = _order(live, strategy, mults)[0]
        # stay on the chosen component until it has left the cokernel divisor
        while mults[s.label] > 0:
            mults[s.label] -= 1
            trace.append(ForwardStep(len(trace) + 1, s.label, "elementary transformation", total, total - 1))
            total -= 1
            totals.append(total)
    stages += ["trivial bundle", "relative lc model"]
    return ForwardState(mults, totals, trace, stages, trivial=(total == 0))


# ---------------------------------------------------------------------------
# backward procedure


def blowup_section_selfint(a: int, b: int) -> int:
    """Self-intersection, inside the new exceptional divisor, of its meet with the old fibre surface."""
    return b - a


def ruled_invariant(a: int, b: int) -> int:
    return abs(a - b)


def section_space_dim(n: int, through_point: bool = False) -> int:
    """Dimension of the sections of F_n disjoint from the negative section."""
    if n < 1:
        raise ValueError("need n >= 1")
    return n if through_point else n + 1


@dataclass(frozen=True)
class LedgerEntry:
    step: str
    description: str
    dim: int
    heuristic: bool = False

    def record(self) -> dict:
        rec = {"step": self.step, "description": self.description, "dim": self.dim}
        if self.heuristic:
            rec["heuristic"] = True
        return rec


@dataclass
class ChoiceLedger:
    entries: List[LedgerEntry] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(e.dim for e in self.entries)

    def add(self, step: str, description: str, dim: int, heuristic: bool = False):
        if dim < 0:
            raise ValueError("choice dimensions are non-negative")
        self.entries.append(LedgerEntry(step, description, dim, heuristic))

    def record(self) -> dict:
        return {"entries": [e.record() for e in self.entries], "total": self.total}


@dataclass
class CurveTrace:
    label: str
    self_int: int
    mult: int
    a: List[int]
    own: List[int]
    neighbor: List[int]

    @property
    def final(self) -> int:
        return self.neighbor[-1] if self.neighbor else self.own[-1]

    def record(self) -> dict:
        return {
            "label": self.label,
            "self_int": self.self_int,
            "mult": self.mult,
            "a": self.a,
            "invariant_own": self.own,
            "invariant_neighbors": self.neighbor,
            "final": self.final,
        }


@dataclass
class StrictTrace:
    label: str
    self_int: int
    mult: int
    start: int
    centres: List[int]
    invariants: List[int]

    def record(self) -> dict:
        return {
            "label": self.label,
            "self_int": self.self_int,
            "mult": self.mult,
            "first_centre": self.start,
            "centres": self.centres,
            "invariants": self.invariants,
        }


@dataclass
class BackwardState:
    exceptional: List[CurveTrace]
    strict: List[StrictTrace]
    ledger: ChoiceLedger
    order: List[str]

    def record(self) -> dict:
        return {
            "order": self.order,
            "exceptional": [t.record() for t in self.exceptional],
            "strict": [t.record() for t in self.strict],
            "ledger": self.ledger.record(),
        }


def _exceptional_trace(g: ResolutionGraph, c: CurveNode) -> CurveTrace:
    """Transforms over an exceptional curve, taken first, then those of its neighbours."""
    b = -c.self_int
    a, own = [], [0]
    centre = 0
    for _ in range(c.mult):
        a.append(blowup_section_selfint(centre, c.self_int))
        own.append(ruled_invariant(centre, c.self_int))
        centre -= c.self_int
    neighbor: List[int] = []
    inv = own[-1]
    for d, count in sorted(g.neighbors(c.label), key=lambda x: x[0].label):
        for _ in range(d.mult):
            if count > inv:
                raise InvariantUnderflow(
                    f"{c.label}: transform over {d.label} would push the invariant below zero"
                )
            inv -= count
            neighbor.append(inv)
    assert all(x == -b * j for j, x in enumerate(a, start=1))
    return CurveTrace(c.label, c.self_int, c.mult, a, own, neighbor)


def backward_run(g: ResolutionGraph, strategy: str = "lex") -> BackwardState:
    ledger = ChoiceLedger()
    exc = _order([n for n in g.nodes if n.exceptional and n.mult], strategy)
    strict = _order([n for n in g.nodes if not n.exceptional and n.mult], strategy)
    if not exc and not strict:
        return BackwardState([], [], ledger, [])
    ledger.add("fibre", "point of the base line", 1)
    traces = [_exceptional_trace(g, c) for c in exc]
    for t in traces:
        for j in range(2, t.mult + 1):
            ledger.add(f"{t.label}.{j}", "centre over exceptional curve, contracted afterwards", 0)
    strict_traces = []
    for s in strict:
        b = s.self_int
        start = -sum(d.mult * c for d, c in g.neighbors(s.label) if d.exceptional)
        constraints = sum(c for d, c in g.neighbors(s.label) if not d.exceptional and d.mult)
        centre, centres, invariants = start, [start], []
        for j in range(1, s.mult + 1):
            invariants.append(ruled_invariant(centre, b))
            if j < s.mult:
                gap = blowup_section_selfint(centre, b)
                heuristic = constraints > 1
                if gap > 0:
                    ledger.add(f"{s.label}.{j + 1}", "unique negative section", 0, heuristic)
                elif gap == 0:
                    ledger.add(f"{s.label}.{j + 1}", "section of a trivial ruling", 0 if constraints else 1, True)
                else:
                    dim = section_space_dim(-gap, through_point=constraints > 0)
                    ledger.add(f"{s.label}.{j + 1}", "section disjoint from the negative section", dim, heuristic)
                centre -= b
                centres.append(centre)
        strict_traces.append(StrictTrace(s.label, b, s.mult, start, centres, invariants))
    order = [n.label for n in exc] + [n.label for n in strict]
    return BackwardState(traces, strict_traces, ledger, order)


# ---------------------------------------------------------------------------
# choice dimension and standard scenarios


@dataclass
class ChoiceResult:
    ledger: ChoiceLedger
    total: int
    scenario: str
    certified: bool

    def record(self) -> dict:
        return {
            "scenario": self.scenario,
            "certified": self.certified,
            "total": self.total,
            "ledger": self.ledger.record(),
        }


def classify(g: ResolutionGraph) -> str:
    if g.total_multiplicity() == 0:
        return "empty"
    exc = [n for n in g.nodes if n.exceptional]
    strict = [n for n in g.nodes if not n.exceptional and n.mult]
    if not exc and len(strict) == 1 and strict[0].mult == 2 and strict[0].self_int < 0:
        return "2C"
    if all(n.mult == 1 for n in strict):
        ok = True
        for s in strict:
            tail = sum(d.mult * c for d, c in g.neighbors(s.label) if d.exceptional)
            if s.self_int + tail <= 0:
                ok = False
        if ok and not any(g.meet(a.label, b.label) for a in strict for b in strict if a.label < b.label):
            return "picard1"
    return "heuristic"


def choice_dimension(g: ResolutionGraph, scenario: str = "auto", strategy: str = "lex") -> ChoiceResult:
    kind = classify(g)
    if scenario not in ("auto", kind):
        kind = "heuristic"
    state = backward_run(g, strategy)
    return ChoiceResult(state.ledger, state.ledger.total, kind, kind != "heuristic")


def graph_2c(d: int) -> ResolutionGraph:
    return ResolutionGraph([CurveNode("C", -d, 2, STRICT)])


def graph_two_lines() -> ResolutionGraph:
    return ResolutionGraph([CurveNode("H1", 1, 1), CurveNode("H2", 1, 1)], {("H1", "H2"): 1})


def graph_nodal(csq: int) -> ResolutionGraph:
    """A nodal curve with C^2 = csq resolved by one blowup at the node."""
    return ResolutionGraph(
        [CurveNode("C", csq - 4, 1, STRICT), CurveNode("E1", -1, 2, EXCEPTIONAL)], {("C", "E1"): 2}
    )


def graph_smooth(csq: int) -> ResolutionGraph:
    return ResolutionGraph([CurveNode("C", csq, 1, STRICT)])


def random_resolution_graph(rng: random.Random, curves: int = 2, blowups: int = 3, max_mult: int = 3) -> ResolutionGraph:
    """Build a consistent graph by actually blowing up points on random curves."""
    labels = [f"D{i + 1}" for i in range(curves)]
    self_int = {l: rng.randint(-3, 6) for l in labels}
    mult = {l: rng.randint(0, max_mult) for l in labels}
    kind = {l: STRICT for l in labels}
    meet: Dict[Tuple[str, str], int] = {}
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            c = rng.randint(0, 2)
            if c:
                meet[(a, b)] = c
    for k in range(blowups):
        pairs = [p for p, c in meet.items() if c > 0]
        current = list(self_int)
        if pairs and rng.random() < 0.6:
            through = list(rng.choice(pairs))
        else:
            through = [rng.choice(current)]
        e = f"E{k + 1}"
        for l in through:
            self_int[l] -= 1
        if len(through) == 2:
            key = tuple(sorted(through))
            meet[key] -= 1
        self_int[e] = -1
        mult[e] = sum(mult[l] for l in through)
        kind[e] = EXCEPTIONAL
        for l in through:
            meet[tuple(sorted((l, e)))] = 1
    nodes = [CurveNode(l, self_int[l], mult[l], kind[l]) for l in self_int]
    return ResolutionGraph(nodes, {k: v for k, v in meet.items() if v})
