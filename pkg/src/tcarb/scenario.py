"""Finite event-tree market models: types, JSON I/O, matrix completion, validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .rational import RationalError, fmt, to_rational


class ModelError(ValueError):
    """Malformed model input. `violations` is filled when validation failed."""

    def __init__(self, message: str, violations: list | None = None):
        super().__init__(message)
        self.violations = violations or []


class CompletionError(ModelError):
    pass


@dataclass(frozen=True)
class BidAskMatrix:
    """pi[i][j] = units of asset i paid for one unit of asset j."""

    pi: tuple[tuple[Fraction, ...], ...]

    @property
    def d(self) -> int:
        return len(self.pi)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return self.pi[ij[0]][ij[1]]

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "BidAskMatrix":
        return cls(tuple(tuple(to_rational(x) for x in row) for row in rows))

    def axiom_violations(self) -> list[tuple[str, str]]:
        """(rule, detail) for each violated axiom; indices in the detail are 1-based."""
        d = self.d
        out = []
        for i in range(d):
            if len(self.pi[i]) != d:
                return [("matrix.shape", f"row {i + 1} has {len(self.pi[i])} entries, expected {d}")]
        for i in range(d):
            for j in range(d):
                if self.pi[i][j] <= 0:
                    out.append(("axiom.positive", f"pi[{i + 1},{j + 1}] = {fmt(self.pi[i][j])} is not positive"))
        for i in range(d):
            if self.pi[i][i] != 1:
                out.append(("axiom.diagonal", f"pi[{i + 1},{i + 1}] = {fmt(self.pi[i][i])}, must be 1"))
        if out:
            return out
        for i in range(d):
            for k in range(d):
                for j in range(d):
                    if self.pi[i][j] > self.pi[i][k] * self.pi[k][j]:
                        out.append(
                            (
                                "axiom.triangle",
                                f"({i + 1},{k + 1},{j + 1}): pi[{i + 1},{j + 1}] = {fmt(self.pi[i][j])} > "
                                f"pi[{i + 1},{k + 1}]*pi[{k + 1},{j + 1}] = {fmt(self.pi[i][k] * self.pi[k][j])}",
                            )
                        )
        return out


@dataclass(frozen=True)
class NodeCone:
    """One node's trading cone: a bid-ask matrix or explicit generators of -K."""

    bid_ask: BidAskMatrix | None = None
    generators: tuple[tuple[Fraction, ...], ...] | None = None

    def __post_init__(self):
        if (self.bid_ask is None) == (self.generators is None):
            raise ModelError("a node cone needs exactly one of bid_ask or generators")

    @property
    def d(self) -> int:
        if self.bid_ask is not None:
            return self.bid_ask.d
        return len(self.generators[0]) if self.generators else 0

    @property
    def is_bid_ask(self) -> bool:
        return self.bid_ask is not None


@dataclass(frozen=True)
class Node:
    id: str
    parent: str | None
    t: int


@dataclass(frozen=True, eq=False)
class EventTree:
    nodes: tuple[Node, ...]
    leaf_prob: Mapping[str, Fraction]

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise ModelError(f"duplicate node id {dup!r}")
        known = set(ids)
        roots = [n for n in self.nodes if n.parent is None]
        if len(roots) != 1:
            raise ModelError(f"expected exactly one root, found {len(roots)}")
        for n in self.nodes:
            if n.parent is not None and n.parent not in known:
                raise ModelError(f"node {n.id!r} has unknown parent {n.parent!r}")
        # reachability from the root rules out cycles
        seen = {roots[0].id}
        frontier = [roots[0].id]
        kids = self.children
        while frontier:
            u = frontier.pop()
            for c in kids[u]:
                if c not in seen:
                    seen.add(c)
                    frontier.append(c)
        if seen != known:
            bad = sorted(known - seen)[0]
            raise ModelError(f"node {bad!r} is not reachable from the root")
        object.__setattr__(self, "leaf_prob", MappingProxyType(dict(self.leaf_prob)))

    @cached_property
    def by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None:
                out[n.parent].append(n.id)
        return out

    @cached_property
    def root(self) -> str:
        return next(n.id for n in self.nodes if n.parent is None)

    @cached_property
    def horizon(self) -> int:
        return max(n.t for n in self.nodes)

    @cached_property
    def leaves(self) -> list[str]:
        """Leaves in document order; this order fixes the claim-space layout."""
        return [n.id for n in self.nodes if not self.children[n.id]]

    @cached_property
    def leaf_index(self) -> dict[str, int]:
        return {leaf: k for k, leaf in enumerate(self.leaves)}

    @cached_property
    def leaves_under(self) -> dict[str, list[int]]:
        """Node id -> sorted leaf indices of its subtree."""
        out: dict[str, list[int]] = {}
        for u in reversed(self.topological):
            kids = self.children[u]
            if not kids:
                out[u] = [self.leaf_index[u]]
            else:
                out[u] = sorted(k for c in kids for k in out[c])
        return out

    @cached_property
    def topological(self) -> list[str]:
        """Root first, parents before children, document order among siblings."""
        order = [self.root]
        k = 0
        while k < len(order):
            order.extend(self.children[order[k]])
            k += 1
        return order

    def nodes_at(self, t: int) -> list[str]:
        return [n.id for n in self.nodes if n.t == t]

    def time(self, u: str) -> int:
        return self.by_id[u].t

    def prob(self, u: str) -> Fraction:
        return sum((self.leaf_prob.get(self.leaves[k], Fraction(0)) for k in self.leaves_under[u]), Fraction(0))

    def subtree(self, u: str) -> list[str]:
        out = [u]
        k = 0
        while k < len(out):
            out.extend(self.children[out[k]])
            k += 1
        return out

    def ancestor_at(self, u: str, t: int) -> str:
        while self.by_id[u].t > t:
            u = self.by_id[u].parent
        return u


@dataclass(frozen=True, eq=False)
class MarketModel:
    tree: EventTree
    cones: Mapping[str, NodeCone]
    d: int
    name: str | None = None
    vias: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "cones", MappingProxyType(dict(self.cones)))
        object.__setattr__(self, "vias", MappingProxyType(dict(self.vias)))

    @property
    def is_bid_ask(self) -> bool:
        return all(c.is_bid_ask for c in self.cones.values())

    def pi(self, u: str) -> BidAskMatrix:
        c = self.cones[u]
        if c.bid_ask is None:
            raise ModelError(f"node {u!r} is in generator form")
        return c.bid_ask

    def with_probabilities(self, probs: Mapping[str, Fraction]) -> "MarketModel":
        tree = EventTree(self.tree.nodes, probs)
        return MarketModel(tree, self.cones, self.d, self.name, self.vias)

    def with_cones(self, cones: Mapping[str, NodeCone], name: str | None = None) -> "MarketModel":
        return MarketModel(self.tree, cones, self.d, name or self.name)


# ---------------------------------------------------------------------------
# completion


def complete_matrix(partial: Sequence[Sequence], via: int) -> BidAskMatrix:
    """Fill holes (None) by the transfer through asset `via` (0-based).

    Raises CompletionError when a required entry is missing or when the
    completed matrix violates an axiom.
    """
    d = len(partial)
    if not 0 <= via < d:
        raise CompletionError(f"via asset {via + 1} out of range 1..{d}")
    rows = [list(r) for r in partial]
    for i in range(d):
        if len(rows[i]) != d:
            raise CompletionError(f"row {i + 1} has {len(rows[i])} entries, expected {d}")
        if rows[i][i] is None or rows[i][via] is None or rows[via][i] is None:
            raise CompletionError(f"entries on the diagonal and in row/column {via + 1} must be given (asset {i + 1})")
    vals = [[None if x is None else to_rational(x) for x in r] for r in rows]
    for i in range(d):
        for j in range(d):
            if vals[i][j] is None:
                vals[i][j] = vals[i][via] * vals[via][j]
    m = BidAskMatrix(tuple(tuple(r) for r in vals))
    bad = m.axiom_violations()
    if bad:
        raise CompletionError("completed matrix violates the axioms: " + "; ".join(d for _, d in bad), bad)
    return m


# ---------------------------------------------------------------------------
# validation


@dataclass
class Violation:
    node: str | None
    rule: str
    detail: str

    def to_json(self) -> dict:
        return {"node": self.node, "rule": self.rule, "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


def validate_model(m: MarketModel) -> ValidationReport:
    """Collect every violated invariant; an empty report means the model is valid."""
    rep = ValidationReport()
    add = lambda node, rule, detail: rep.violations.append(Violation(node, rule, detail))  # noqa: E731
    tree = m.tree
    T = tree.horizon
    if m.d < 1:
        add(None, "dim", "asset count must be at least 1")
    for n in tree.nodes:
        if n.parent is None:
            if n.t != 0:
                add(n.id, "tree.time", f"root must be at t=0, found t={n.t}")
        elif n.t != tree.by_id[n.parent].t + 1:
            add(n.id, "tree.time", f"t={n.t} but parent {n.parent!r} is at t={tree.by_id[n.parent].t}")
    for leaf in tree.leaves:
        if tree.time(leaf) != T:
            add(leaf, "tree.leaf_depth", f"leaf at t={tree.time(leaf)}, horizon is {T}")
    leaves = set(tree.leaves)
    for key in tree.leaf_prob:
        if key not in leaves:
            add(key, "prob.not_leaf", "probability given for a node that is not a leaf")
    for leaf in tree.leaves:
        p = tree.leaf_prob.get(leaf)
        if p is None:
            add(leaf, "prob.missing", "leaf has no probability")
        elif p <= 0:
            add(leaf, "prob.positive", f"probability {fmt(p)} is not strictly positive")
    total = sum(tree.leaf_prob.values(), Fraction(0))
    if total != 1:
        add(None, "prob.sum", f"probabilities must sum to 1, got {fmt(total)}")
    forms = {c.is_bid_ask for c in m.cones.values()}
    if len(forms) > 1:
        add(None, "cone.mixed_forms", "bid-ask and generator nodes cannot be mixed")
    for n in tree.nodes:
        c = m.cones.get(n.id)
        if c is None:
            add(n.id, "cone.missing", "node has no bid-ask matrix or generators")
            continue
        if c.d != m.d:
            add(n.id, "dim", f"cone has dimension {c.d}, model has {m.d} assets")
            continue
        if c.bid_ask is not None:
            for rule, detail in c.bid_ask.axiom_violations():
                add(n.id, rule, detail)
        else:
            _check_generators(n.id, c, n.t == T, m.d, add)
    return rep


def _check_generators(node, c: NodeCone, terminal: bool, d: int, add) -> None:
    gens = c.generators
    if any(len(g) != d for g in gens):
        add(node, "dim", "generator length differs from the asset count")
        return
    if not any(any(x != 0 for x in g) for g in gens):
        add(node, "generators.empty", "at least one nonzero generator required")
        return
    if not terminal:
        return
    from .cones import ConeV, cone_contains, meets_orthant

    cone = ConeV(d, tuple(tuple(g) for g in gens if any(x != 0 for x in g)))
    for i in range(d):
        e = [Fraction(-1 if k == i else 0) for k in range(d)]
        if not cone_contains(cone, e):
            add(node, "generators.terminal", f"-e^{i + 1} is not in the terminal cone")
    if meets_orthant(cone):
        add(node, "generators.terminal", "terminal cone meets the nonnegative orthant outside 0")


# ---------------------------------------------------------------------------
# JSON I/O

_TOP_KEYS = {"assets", "nodes", "leaf_prob", "name"}
_NODE_KEYS = {"id", "parent", "t", "pi", "via", "generators"}


def _reject_constant(token: str):
    raise ModelError(f"non-finite number {token} is not allowed")


def _num(x, where: str) -> Fraction:
    if isinstance(x, bool) or x is None:
        raise ModelError(f"{where}: expected a number, got {json.dumps(x)}")
    if isinstance(x, (int, Fraction, str)):
        try:
            return to_rational(x)
        except RationalError as exc:
            raise ModelError(f"{where}: {exc}") from None
    raise ModelError(f"{where}: expected a number, got {type(x).__name__}")


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ModelError(f"{where}: expected an integer")
    return x


def load_json(text: bytes | str):
    """json.loads with exact decimals and line/column error messages."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelError(f"input is not UTF-8: {exc}") from None
    try:
        return json.loads(text, parse_float=Fraction, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def model_from_obj(obj, validate: bool = True) -> MarketModel:
    if not isinstance(obj, dict):
        raise ModelError("top level must be a JSON object")
    extra = set(obj) - _TOP_KEYS
    if extra:
        raise ModelError(f"unknown field {sorted(extra)[0]!r}")
    for key in ("assets", "nodes", "leaf_prob"):
        if key not in obj:
            raise ModelError(f"missing field {key!r}")
    d = _int(obj["assets"], "assets")
    if d < 1:
        raise ModelError("assets must be at least 1")
    if not isinstance(obj["nodes"], list) or not obj["nodes"]:
        raise ModelError("nodes must be a nonempty list")
    nodes, cones, vias = [], {}, {}
    for k, raw in enumerate(obj["nodes"]):
        where = f"nodes[{k}]"
        if not isinstance(raw, dict):
            raise ModelError(f"{where}: expected an object")
        extra = set(raw) - _NODE_KEYS
        if extra:
            raise ModelError(f"{where}: unknown field {sorted(extra)[0]!r}")
        if not isinstance(raw.get("id"), str):
            raise ModelError(f"{where}: id must be a string")
        nid = raw["id"]
        where = f"node {nid!r}"
        parent = raw.get("parent")
        if parent is not None and not isinstance(parent, str):
            raise ModelError(f"{where}: parent must be a string or null")
        t = _int(raw.get("t"), f"{where}: t")
        nodes.append(Node(nid, parent, t))
        has_pi, has_gen = "pi" in raw, "generators" in raw
        if has_pi == has_gen:
            raise ModelError(f"{where}: give exactly one of 'pi' or 'generators'")
        if has_pi:
            cones[nid] = NodeCone(bid_ask=_parse_pi(raw["pi"], raw.get("via"), d, where))
            if raw.get("via") is not None:
                vias[nid] = _int(raw["via"], f"{where}: via")
        else:
            if "via" in raw:
                raise ModelError(f"{where}: 'via' only applies to 'pi'")
            gens = raw["generators"]
            if not isinstance(gens, list) or not gens:
                raise ModelError(f"{where}: generators must be a nonempty list")
            rows = []
            for g in gens:
                if not isinstance(g, list) or len(g) != d:
                    raise ModelError(f"{where}: each generator needs {d} entries")
                rows.append(tuple(_num(x, f"{where}: generator") for x in g))
            cones[nid] = NodeCone(generators=tuple(rows))
    probs_raw = obj["leaf_prob"]
    if not isinstance(probs_raw, dict):
        raise ModelError("leaf_prob must be an object")
    probs = {}
    for key, val in probs_raw.items():
        p = _num(val, f"leaf_prob[{key!r}]")
        if p <= 0:
            raise ModelError(f"leaf_prob[{key!r}]: probability must be strictly positive")
        probs[key] = p
    name = obj.get("name")
    if name is not None and not isinstance(name, str):
        raise ModelError("name must be a string")
    model = MarketModel(EventTree(tuple(nodes), probs), cones, d, name, vias)
    if validate:
        rep = validate_model(model)
        if not rep.ok:
            first = rep.violations[0]
            where = f"node {first.node!r}: " if first.node else ""
            raise ModelError(f"invalid model: {where}{first.rule}: {first.detail}", rep.violations)
    return model


def _parse_pi(raw, via, d: int, where: str) -> BidAskMatrix:
    if not isinstance(raw, list) or len(raw) != d or any(not isinstance(r, list) or len(r) != d for r in raw):
        raise ModelError(f"{where}: pi must be a {d}x{d} matrix")
    cells = [[None if x is None else _num(x, f"{where}: pi") for x in r] for r in raw]
    holes = any(x is None for r in cells for x in r)
    if via is None:
        if holes:
            raise ModelError(f"{where}: pi has holes but no 'via' asset")
        return BidAskMatrix(tuple(tuple(r) for r in cells))
    v = _int(via, f"{where}: via")
    if not 1 <= v <= d:
        raise ModelError(f"{where}: via must be in 1..{d}")
    try:
        return complete_matrix(cells, v - 1)
    except CompletionError as exc:
        raise CompletionError(f"{where}: {exc}", exc.violations) from None


def parse_model(text: bytes | str, validate: bool = True) -> MarketModel:
    """Parse the JSON model format. Raises ModelError on any problem."""
    return model_from_obj(load_json(text), validate=validate)


def json_num(q: Fraction):
    """Integers stay JSON integers; everything else becomes a "p/q" string."""
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else fmt(q)


def model_to_obj(m: MarketModel) -> dict:
    nodes = []
    for n in m.tree.nodes:
        entry: dict = {"id": n.id, "parent": n.parent, "t": n.t}
        c = m.cones[n.id]
        if c.bid_ask is not None:
            entry["pi"] = [[json_num(x) for x in row] for row in c.bid_ask.pi]
        else:
            entry["generators"] = [[json_num(x) for x in g] for g in c.generators]
        nodes.append(entry)
    obj: dict = {}
    if m.name:
        obj["name"] = m.name
    obj["assets"] = m.d
    obj["nodes"] = nodes
    obj["leaf_prob"] = {leaf: json_num(m.tree.leaf_prob[leaf]) for leaf in m.tree.leaves if leaf in m.tree.leaf_prob}
    return obj


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, ensure_ascii=False) + "\n"


def serialize_model(m: MarketModel) -> str:
    """Canonical JSON text; holes are written completed."""
    return dumps(model_to_obj(m))


def models_equal(a: MarketModel, b: MarketModel) -> bool:
    return model_to_obj(a) == model_to_obj(b)


def build_model(
    d: int,
    nodes: Iterable[tuple[str, str | None, int, object]],
    leaf_prob: Mapping[str, object],
    name: str | None = None,
    validate: bool = True,
) -> MarketModel:
    """Programmatic constructor: nodes are (id, parent, t, BidAskMatrix | rows | NodeCone)."""
    node_list, cones = [], {}
    for nid, parent, t, cone in nodes:
        node_list.append(Node(nid, parent, t))
        if isinstance(cone, NodeCone):
            cones[nid] = cone
        elif isinstance(cone, BidAskMatrix):
            cones[nid] = NodeCone(bid_ask=cone)
        else:
            cones[nid] = NodeCone(bid_ask=BidAskMatrix.of(cone))
    probs = {k: to_rational(v) for k, v in leaf_prob.items()}
    m = MarketModel(EventTree(tuple(node_list), probs), cones, d, name)
    if validate:
        rep = validate_model(m)
        if not rep.ok:
            raise ModelError(f"invalid model: {rep.violations[0].detail}", rep.violations)
    return m
