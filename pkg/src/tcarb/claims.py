"""Claim space R^{L*d}, attainable cones A_s^t, strategies and membership."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .cones import SubspaceBasis, max_support, node_generators
from .exactlp import LinearProgram, LpOutcome, solve_checked
from .linalg import sparse_independent
from .rational import fmt
from .scenario import MarketModel, ModelError, json_num

ZERO = Fraction(0)


@dataclass(frozen=True)
class Claim:
    """One d-vector per leaf, leaves in document order, flattened as leaf*d + i."""

    d: int
    values: tuple[Fraction, ...]

    @property
    def n_leaves(self) -> int:
        return len(self.values) // self.d if self.d else 0

    def at(self, leaf: int) -> tuple[Fraction, ...]:
        return self.values[leaf * self.d : (leaf + 1) * self.d]

    def __add__(self, other: "Claim") -> "Claim":
        return Claim(self.d, tuple(a + b for a, b in zip(self.values, other.values)))

    def __neg__(self) -> "Claim":
        return Claim(self.d, tuple(-a for a in self.values))

    def scale(self, c) -> "Claim":
        return Claim(self.d, tuple(c * a for a in self.values))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.values)

    def is_nonnegative(self) -> bool:
        return all(a >= 0 for a in self.values)

    def sparse(self) -> dict[int, Fraction]:
        return {k: a for k, a in enumerate(self.values) if a != 0}

    def to_json(self, m: MarketModel) -> dict:
        return {leaf: [json_num(x) for x in self.at(k)] for k, leaf in enumerate(m.tree.leaves)}


def zero_claim(m: MarketModel) -> Claim:
    return Claim(m.d, (ZERO,) * (len(m.tree.leaves) * m.d))


def lift(m: MarketModel, u: str, w: Sequence) -> Claim:
    """w on every leaf under u, zero elsewhere."""
    if u not in m.tree.by_id:
        raise ModelError(f"unknown node {u!r}")
    if len(w) != m.d:
        raise ValueError(f"vector has {len(w)} entries, expected {m.d}")
    vals = [ZERO] * (len(m.tree.leaves) * m.d)
    for leaf in m.tree.leaves_under[u]:
        for i, x in enumerate(w):
            vals[leaf * m.d + i] = Fraction(x)
    return Claim(m.d, tuple(vals))


def constant_claim(m: MarketModel, w: Sequence) -> Claim:
    return lift(m, m.tree.root, w)


def claim_from_obj(m: MarketModel, obj: Mapping[str, Sequence]) -> Claim:
    """Claim JSON {leaf-id: [d numbers]}; missing leaves are zero."""
    from .rational import to_rational

    vals = [ZERO] * (len(m.tree.leaves) * m.d)
    for leaf, vec in obj.items():
        if leaf not in m.tree.leaf_index:
            raise ModelError(f"claim refers to unknown leaf {leaf!r}")
        if not isinstance(vec, list) or len(vec) != m.d:
            raise ModelError(f"claim at {leaf!r} needs {m.d} entries")
        k = m.tree.leaf_index[leaf]
        for i, x in enumerate(vec):
            vals[k * m.d + i] = to_rational(x)
    return Claim(m.d, tuple(vals))


# ---------------------------------------------------------------------------
# strategies


@dataclass
class Strategy:
    """Orders, disposals and (generator form) generator weights per node."""

    window: tuple[int, int]
    orders: dict[str, dict[tuple[int, int], Fraction]] = field(default_factory=dict)
    disposal: dict[str, list[Fraction]] = field(default_factory=dict)
    weights: dict[str, dict[int, Fraction]] = field(default_factory=dict)

    def increment(self, m: MarketModel, u: str) -> list[Fraction]:
        """xi(u) = L_u(lambda(u)) - r(u) (+ sum of weighted generators)."""
        d = m.d
        out = [ZERO] * d
        c = m.cones[u]
        for (i, j), q in self.orders.get(u, {}).items():
            if i == j:
                continue
            pij = c.bid_ask.pi[i][j]
            out[j] += q
            out[i] -= q * pij
        for i, r in enumerate(self.disposal.get(u, ())):
            out[i] -= r
        if self.weights.get(u):
            gens = dict((kind[1], vec) for kind, vec in node_generators(c))
            for k, q in self.weights[u].items():
                for i in range(d):
                    out[i] += q * gens[k][i]
        return out

    def nodes(self) -> list[str]:
        return sorted(set(self.orders) | set(self.disposal) | set(self.weights))

    def induced_claim(self, m: MarketModel) -> Claim:
        vals = [ZERO] * (len(m.tree.leaves) * m.d)
        for u in self.nodes():
            xi = self.increment(m, u)
            if all(x == 0 for x in xi):
                continue
            for leaf in m.tree.leaves_under[u]:
                for i, x in enumerate(xi):
                    vals[leaf * m.d + i] += x
        return Claim(m.d, tuple(vals))

    def problems(self, m: MarketModel, nodes: set[str] | None = None) -> list[str]:
        """Structural checks: nonnegative sizes, zero diagonal, nodes inside the window."""
        out = []
        s, t = self.window
        for u in self.nodes():
            if u not in m.tree.by_id:
                out.append(f"unknown node {u!r}")
                continue
            tu = m.tree.time(u)
            if not s <= tu <= t:
                out.append(f"node {u!r} at t={tu} is outside the window [{s},{t}]")
            if nodes is not None and u not in nodes:
                out.append(f"node {u!r} is outside the allowed subtree")
            c = m.cones[u]
            if (self.orders.get(u) or self.disposal.get(u)) and c.bid_ask is None:
                out.append(f"node {u!r} is in generator form but has orders")
            for (i, j), q in self.orders.get(u, {}).items():
                if q < 0:
                    out.append(f"negative order at {u!r}")
                if i == j and q != 0:
                    out.append(f"diagonal order at {u!r}")
            if any(r < 0 for r in self.disposal.get(u, ())):
                out.append(f"negative disposal at {u!r}")
            if any(q < 0 for q in self.weights.get(u, {}).values()):
                out.append(f"negative generator weight at {u!r}")
        return out

    def scaled(self, c: Fraction) -> "Strategy":
        return Strategy(
            self.window,
            {u: {ij: c * q for ij, q in o.items()} for u, o in self.orders.items()},
            {u: [c * r for r in v] for u, v in self.disposal.items()},
            {u: {k: c * q for k, q in w.items()} for u, w in self.weights.items()},
        )

    def __add__(self, other: "Strategy") -> "Strategy":
        s = Strategy((min(self.window[0], other.window[0]), max(self.window[1], other.window[1])))
        for src in (self, other):
            for u, o in src.orders.items():
                dst = s.orders.setdefault(u, {})
                for ij, q in o.items():
                    dst[ij] = dst.get(ij, ZERO) + q
            for u, v in src.disposal.items():
                cur = s.disposal.get(u)
                s.disposal[u] = list(v) if cur is None else [a + b for a, b in zip(cur, v)]
            for u, w in src.weights.items():
                dst = s.weights.setdefault(u, {})
                for k, q in w.items():
                    dst[k] = dst.get(k, ZERO) + q
        return s

    def to_json(self, m: MarketModel | None = None) -> dict:
        out = {}
        order = m.tree.topological if m is not None else self.nodes()
        for u in order:
            if u not in self.orders and u not in self.disposal and u not in self.weights:
                continue
            entry: dict = {}
            orders = [[i + 1, j + 1, json_num(q)] for (i, j), q in sorted(self.orders.get(u, {}).items()) if q != 0]
            disp = self.disposal.get(u)
            if orders or u in self.orders:
                entry["orders"] = orders
            if disp is not None:
                entry["disposal"] = [json_num(r) for r in disp]
            if self.weights.get(u):
                entry["generators"] = [[k + 1, json_num(q)] for k, q in sorted(self.weights[u].items()) if q != 0]
            if entry.get("orders") or any(r != 0 for r in (disp or ())) or entry.get("generators"):
                out[u] = entry
        return out


def strategy_from_obj(m: MarketModel, obj: Mapping, window: tuple[int, int] | None = None) -> Strategy:
    """Strategy JSON {node: {"orders": [[i, j, q]], "disposal": [...]}} with 1-based assets."""
    from .rational import to_rational

    s = Strategy(window or (0, m.tree.horizon))
    for u, entry in obj.items():
        if u not in m.tree.by_id:
            raise ModelError(f"strategy refers to unknown node {u!r}")
        extra = set(entry) - {"orders", "disposal", "generators"}
        if extra:
            raise ModelError(f"unknown strategy field {sorted(extra)[0]!r}")
        orders = {}
        for trip in entry.get("orders", []):
            i, j, q = trip
            if not (1 <= i <= m.d and 1 <= j <= m.d):
                raise ModelError(f"asset index out of range in order {trip}")
            if i != j:
                orders[(i - 1, j - 1)] = orders.get((i - 1, j - 1), ZERO) + to_rational(q)
        if orders:
            s.orders[u] = orders
        if "disposal" in entry:
            s.disposal[u] = [to_rational(x) for x in entry["disposal"]]
        if "generators" in entry:
            s.weights[u] = {k - 1: to_rational(q) for k, q in entry["generators"]}
    return s


# ---------------------------------------------------------------------------
# attainable cones


@dataclass(frozen=True)
class Generator:
    node: str
    kind: tuple
    vec: tuple[Fraction, ...]

    def label(self) -> str:
        if self.kind[0] == "transfer":
            return f"{self.node}:transfer({self.kind[1] + 1},{self.kind[2] + 1})"
        if self.kind[0] == "disposal":
            return f"{self.node}:disposal({self.kind[1] + 1})"
        return f"{self.node}:generator({self.kind[1] + 1})"


class AttainableCone:
    """A_s^t: lifts of the node generators of -K at every node with time in [s, t].

    `within` restricts the nodes to a subtree (used for liquidation at one node).
    """

    def __init__(self, m: MarketModel, s: int, t: int, within: str | None = None):
        T = m.tree.horizon
        if not 0 <= s <= t <= T:
            raise ValueError(f"bad window [{s},{t}] for horizon {T}")
        self.model = m
        self.window = (s, t)
        self.within = within
        allowed = set(m.tree.subtree(within)) if within is not None else None
        gens = []
        for u in m.tree.topological:
            if not s <= m.tree.time(u) <= t:
                continue
            if allowed is not None and u not in allowed:
                continue
            for kind, vec in node_generators(m.cones[u]):
                gens.append(Generator(u, kind, vec))
        self.generators: list[Generator] = gens

    @property
    def dim(self) -> int:
        return len(self.model.tree.leaves) * self.model.d

    @cached_property
    def columns(self) -> list[dict[int, Fraction]]:
        d = self.model.d
        under = self.model.tree.leaves_under
        cols = []
        for g in self.generators:
            col = {}
            for leaf in under[g.node]:
                for i, x in enumerate(g.vec):
                    if x != 0:
                        col[leaf * d + i] = x
            cols.append(col)
        return cols

    def generator_claim(self, k: int) -> Claim:
        vals = [ZERO] * self.dim
        for r, x in self.columns[k].items():
            vals[r] = x
        return Claim(self.model.d, tuple(vals))

    def combine(self, weights: Sequence[Fraction]) -> Claim:
        vals = [ZERO] * self.dim
        for w, col in zip(weights, self.columns):
            if w:
                for r, x in col.items():
                    vals[r] += w * x
        return Claim(self.model.d, tuple(vals))

    def strategy(self, weights: Sequence[Fraction]) -> Strategy:
        s = Strategy(self.window)
        d = self.model.d
        for w, g in zip(weights, self.generators):
            if w == 0:
                continue
            kind = g.kind[0]
            if kind == "transfer":
                o = s.orders.setdefault(g.node, {})
                o[(g.kind[1], g.kind[2])] = o.get((g.kind[1], g.kind[2]), ZERO) + w
            elif kind == "disposal":
                r = s.disposal.setdefault(g.node, [ZERO] * d)
                r[g.kind[1]] += w
            else:
                o = s.weights.setdefault(g.node, {})
                o[g.kind[1]] = o.get(g.kind[1], ZERO) + w
        return s

    def admits(self, s: Strategy) -> bool:
        """Strategy only uses nodes this cone generates from."""
        nodes = {g.node for g in self.generators}
        return not s.problems(self.model, nodes)

    @cached_property
    def lineality_support(self) -> list[int]:
        """Generators whose negation lies in the cone (one maximal-support LP)."""
        return max_support(self.columns)


def build_attainable(m: MarketModel, s: int, t: int, within: str | None = None) -> AttainableCone:
    return AttainableCone(m, s, t, within)


def add_combination(rows: dict[int, dict[int, Fraction]], cone: AttainableCone, var_ids: Sequence[int], sign=1) -> None:
    """rows[coord][var] += sign * G[coord, k] for the k-th generator variable."""
    for v, col in zip(var_ids, cone.columns):
        for r, x in col.items():
            rows.setdefault(r, {})[v] = rows.setdefault(r, {}).get(v, ZERO) + sign * x


@dataclass
class FarkasCertificate:
    """A claim-space functional f with f.g >= 0 on every generator and f.v < 0."""

    functional: tuple[Fraction, ...]
    lp_outcome: LpOutcome | None = None

    def verify(self, cone: AttainableCone, v: Claim) -> bool:
        f = self.functional
        for col in cone.columns:
            if sum((f[r] * x for r, x in col.items()), ZERO) < 0:
                return False
        return sum((a * b for a, b in zip(f, v.values)), ZERO) < 0

    def to_json(self, m: MarketModel) -> dict:
        return {"functional": Claim(m.d, self.functional).to_json(m)}


def member_attainable(cone: AttainableCone, v: Claim) -> tuple[bool, Strategy | FarkasCertificate]:
    """Decide v in cone; returns a strategy inducing v or a separating functional."""
    if v.is_zero():
        return True, Strategy(cone.window)
    p = LinearProgram(sense="max")
    mus = p.vars(len(cone.generators), prefix="mu")
    rows: dict[int, dict[int, Fraction]] = {}
    add_combination(rows, cone, mus)
    coords = sorted(set(rows) | set(v.sparse()))
    for r in coords:
        p.add(rows.get(r, {}), "=", v.values[r])
    out = solve_checked(p)
    if out.optimal:
        weights = [out.point[j] for j in mus]
        strat = cone.strategy(weights)
        if cone.combine(weights) != v:
            raise AssertionError("membership strategy does not reproduce the claim")
        return True, strat
    f = [ZERO] * cone.dim
    for r, y in zip(coords, out.farkas):
        f[r] = -y
    cert = FarkasCertificate(tuple(f), out)
    if not cert.verify(cone, v):
        raise AssertionError("membership Farkas certificate failed re-verification")
    return False, cert


def lineality_attainable(cone: AttainableCone) -> SubspaceBasis:
    """Basis of A ∩ -A in claim space, from the maximal-support generators."""
    support = cone.lineality_support
    basis = sparse_independent([cone.columns[k] for k in support])
    dense = []
    for vec in basis:
        row = [ZERO] * cone.dim
        for r, x in vec.items():
            row[r] = x
        dense.append(tuple(row))
    return SubspaceBasis(cone.dim, tuple(dense), checked=False)


def verify_strategy_claim(m: MarketModel, s: Strategy, v: Claim, nodes: set[str] | None = None) -> bool:
    return not s.problems(m, nodes) and s.induced_claim(m) == v


def claim_str(v: Claim) -> str:
    return "[" + ", ".join(fmt(x) for x in v.values) + "]"
