"""Consistent price systems, the frictionless witness, and superhedging."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .claims import AttainableCone, Claim, Strategy, add_combination
from .cones import dual_cone_h, relint_point
from .exactlp import LinearProgram, LpOutcome, solve_checked, verify_certificate
from .rational import dot
from .scenario import BidAskMatrix, MarketModel, ModelError, NodeCone, json_num

ZERO = Fraction(0)

NORM_NODE_SUM = "sum_i Z^i(u) >= 1 at every node"
NORM_ROOT_SUM = "sum_i Z^i(root) = 1"
NORM_ROOT_FIRST = "Z^1(root) = 1"


class UnsupportedModel(ValueError):
    pass


@dataclass
class PriceSystem:
    z: dict[str, tuple[Fraction, ...]]
    normalization: str = NORM_NODE_SUM

    def to_json(self, m: MarketModel) -> dict:
        return {
            "normalization": self.normalization,
            "Z": {u: [json_num(x) for x in self.z[u]] for u in m.tree.topological},
        }


@dataclass
class CpsResult:
    found: bool
    price_system: PriceSystem | None
    lp: LinearProgram
    outcome: LpOutcome
    strict: bool = False
    epsilon: Fraction | None = None

    def verified(self, m: MarketModel) -> bool:
        if not verify_certificate(self.lp, self.outcome):
            return False
        if self.found:
            return not verify_price_system(m, self.price_system, strict=self.strict)
        return True

    def to_json(self, m: MarketModel) -> dict:
        out: dict = {"found": self.found, "strict": self.strict}
        if self.price_system is not None:
            out["price_system"] = self.price_system.to_json(m)
        if self.epsilon is not None:
            out["epsilon"] = json_num(self.epsilon)
        if not self.found:
            out["farkas"] = [json_num(y) for y in self.outcome.farkas] if self.outcome.farkas else None
            out["certificate"] = "infeasibility" if self.outcome.farkas else "optimum epsilon = 0"
        return out


def _z_vars(p: LinearProgram, m: MarketModel) -> dict[str, list[int]]:
    return {u: p.vars(m.d, lo=None, prefix=f"Z[{u}]") for u in m.tree.topological}


def _martingale(p: LinearProgram, m: MarketModel, z: dict[str, list[int]]) -> None:
    tree = m.tree
    for u in tree.topological:
        kids = tree.children[u]
        if not kids:
            continue
        pu = tree.prob(u)
        for i in range(m.d):
            row = {z[u][i]: pu}
            for c in kids:
                row[z[c][i]] = -tree.prob(c)
            p.add(row, "=", 0)


def _dual_rows(p: LinearProgram, m: MarketModel, z: dict[str, list[int]]) -> None:
    for u in m.tree.topological:
        for a in dual_cone_h(m.cones[u]).rows:
            p.add({z[u][i]: a[i] for i in range(m.d) if a[i] != 0}, ">=", 0)


def find_cps(m: MarketModel, strict: bool = False) -> CpsResult:
    """Search for a CPS (or SCPS when strict) by one exact LP."""
    if strict:
        return _find_scps(m)
    p = LinearProgram(sense="min")
    z = _z_vars(p, m)
    _dual_rows(p, m, z)
    _martingale(p, m, z)
    for u in m.tree.topological:
        p.add({v: 1 for v in z[u]}, ">=", 1)
    p.set_objective({v: 1 for v in z[m.tree.root]})
    out = solve_checked(p)
    if not out.optimal:
        return CpsResult(False, None, p, out)
    ps = PriceSystem({u: tuple(out.point[v] for v in z[u]) for u in z}, NORM_NODE_SUM)
    return CpsResult(True, ps, p, out)


def node_implicit_rows(c: NodeCone) -> list[int]:
    res = relint_point(dual_cone_h(c))
    return list(range(len(dual_cone_h(c).rows))) if res is None else res[1]


def _find_scps(m: MarketModel) -> CpsResult:
    if not m.is_bid_ask:
        raise UnsupportedModel("strictly consistent prices need bid-ask form")
    p = LinearProgram(sense="max")
    z = _z_vars(p, m)
    eps = p.var(0, 1, "eps")
    for u in m.tree.topological:
        h = dual_cone_h(m.cones[u])
        implicit = set(node_implicit_rows(m.cones[u]))
        for k, a in enumerate(h.rows):
            row = {z[u][i]: a[i] for i in range(m.d) if a[i] != 0}
            if k in implicit:
                p.add(row, "=", 0)
            else:
                row[eps] = Fraction(-1)
                p.add(row, ">=", 0)
    _martingale(p, m, z)
    p.add({v: 1 for v in z[m.tree.root]}, "=", 1)
    p.set_objective({eps: 1})
    out = solve_checked(p)
    if not out.optimal:
        return CpsResult(False, None, p, out, strict=True)
    e = out.point[eps]
    ps = PriceSystem({u: tuple(out.point[v] for v in z[u]) for u in z}, NORM_ROOT_SUM)
    return CpsResult(e > 0, ps if e > 0 else None, p, out, strict=True, epsilon=e)


def verify_price_system(m: MarketModel, ps: PriceSystem, strict: bool = False) -> list[str]:
    """Independent recheck of the CPS invariants; returns the list of problems."""
    bad = []
    tree = m.tree
    for u in tree.topological:
        zu = ps.z.get(u)
        if zu is None or len(zu) != m.d:
            bad.append(f"{u}: missing or malformed price vector")
            continue
        if all(x == 0 for x in zu):
            bad.append(f"{u}: Z is zero")
        h = dual_cone_h(m.cones[u])
        implicit = set(node_implicit_rows(m.cones[u])) if strict else set()
        for k, a in enumerate(h.rows):
            val = dot(a, zu)
            if val < 0:
                bad.append(f"{u}: dual-cone row {k} violated")
            elif strict and k not in implicit and val == 0:
                bad.append(f"{u}: row {k} active, not in the relative interior")
        kids = tree.children[u]
        if kids and all(c in ps.z for c in kids):
            for i in range(m.d):
                lhs = tree.prob(u) * zu[i]
                rhs = sum((tree.prob(c) * ps.z[c][i] for c in kids), ZERO)
                if lhs != rhs:
                    bad.append(f"{u}: martingale identity fails in asset {i + 1}")
    return bad


def cps_uniqueness_bounds(m: MarketModel, u: str, i: int) -> tuple[Fraction, Fraction]:
    """min and max of Z^i(u) (0-based asset) over price systems with Z^1(root) = 1.

    The LP ranges over the closure of the CPS set; when a CPS exists, that
    closure has the same infimum and supremum.
    """
    if not find_cps(m).found:
        raise ModelError("no consistent price system exists")
    vals = []
    for sense in ("min", "max"):
        p = LinearProgram(sense=sense)
        z = _z_vars(p, m)
        _dual_rows(p, m, z)
        _martingale(p, m, z)
        p.add({z[m.tree.root][0]: 1}, "=", 1)
        p.set_objective({z[u][i]: 1})
        out = solve_checked(p)
        if not out.optimal:
            raise ModelError(f"Z^{i + 1}({u}) is unbounded over the price systems")
        vals.append(out.value)
    return vals[0], vals[1]


def frictionless_witness(m: MarketModel, ps: PriceSystem) -> MarketModel:
    """pi~^{ij}(u) = Z^j(u) / Z^i(u), a frictionless process dominated by m."""
    if not m.is_bid_ask:
        raise UnsupportedModel("the frictionless witness needs bid-ask form")
    problems = verify_price_system(m, ps)
    if problems:
        raise ModelError("price system fails verification: " + problems[0])
    cones = {}
    for u in m.tree.topological:
        zu = ps.z[u]
        if any(x <= 0 for x in zu):
            raise ModelError(f"price vector at {u!r} is not strictly positive")
        pi = BidAskMatrix(tuple(tuple(zu[j] / zu[i] for j in range(m.d)) for i in range(m.d)))
        cones[u] = NodeCone(bid_ask=pi)
    w = m.with_cones(cones, name=(m.name or "model") + "-witness")
    for u in m.tree.topological:
        a, b = w.pi(u), m.pi(u)
        if a.axiom_violations():
            raise AssertionError("witness matrix violates the axioms")
        if any(a.pi[i][j] > b.pi[i][j] for i in range(m.d) for j in range(m.d)):
            raise AssertionError("witness does not dominate the model")
    return w


# ---------------------------------------------------------------------------
# superhedging


@dataclass
class SuperhedgeResult:
    price: Fraction | None
    numeraire: int
    primal: Strategy | None
    dual: PriceSystem | None
    gap: Fraction | None
    dual_is_cps: bool = False
    notes: list[str] = field(default_factory=list)
    lp: LinearProgram | None = None
    outcome: LpOutcome | None = None

    def to_json(self, m: MarketModel) -> dict:
        out: dict = {
            "price": None if self.price is None else json_num(self.price),
            "numeraire": self.numeraire + 1,
            "gap": None if self.gap is None else json_num(self.gap),
            "dual_is_cps": self.dual_is_cps,
        }
        if self.primal is not None:
            out["primal"] = self.primal.to_json(m)
        if self.dual is not None:
            out["dual"] = self.dual.to_json(m)
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def superhedge(m: MarketModel, v: Claim, numeraire: int = 0) -> SuperhedgeResult:
    """Smallest x with v - x e^numeraire in A_0^T, and the matching dual price system.

    The dual variable of the claim row at (leaf l, asset i) equals
    P(l) Z^i(l); Z at interior nodes is its conditional expectation.
    """
    if not 0 <= numeraire < m.d:
        raise ValueError(f"numeraire {numeraire + 1} out of range")
    cone = AttainableCone(m, 0, m.tree.horizon)
    p = LinearProgram(sense="min")
    mus = p.vars(len(cone.generators), prefix="mu")
    x = p.var(None, None, "x")
    rows: dict[int, dict[int, Fraction]] = {}
    add_combination(rows, cone, mus)
    d = m.d
    for leaf in range(len(m.tree.leaves)):
        rows.setdefault(leaf * d + numeraire, {})[x] = Fraction(1)
    coords = list(range(cone.dim))
    for r in coords:
        p.add(rows.get(r, {}), "=", v.values[r])
    p.set_objective({x: 1})
    out = solve_checked(p)
    if out.status != "optimal":
        return SuperhedgeResult(None, numeraire, None, None, None, notes=["no consistent price system: price is unbounded below"], lp=p, outcome=out)
    price = out.point[x]
    weights = [out.point[j] for j in mus]
    strat = cone.strategy(weights)
    if cone.combine(weights) + _const(m, numeraire, price) != v:
        raise AssertionError("superhedging strategy does not replicate the claim")
    y = {r: out.dual[k] for k, r in enumerate(coords)}
    tree = m.tree
    z = {}
    for u in tree.topological:
        pu = tree.prob(u)
        z[u] = tuple(sum((y[leaf * d + i] for leaf in tree.leaves_under[u]), ZERO) / pu for i in range(d))
    dual_value = sum((y[r] * v.values[r] for r in coords), ZERO)
    ps = PriceSystem(z, f"Z^{numeraire + 1}(root) = 1")
    problems = verify_price_system(m, ps)
    is_cps = not problems
    notes = []
    if not is_cps:
        notes.append("dual optimum lies on the boundary of the price-system set (some Z(u) = 0)")
    if z[tree.root][numeraire] != 1:
        raise AssertionError("dual normalization Z^num(root) = 1 failed")
    return SuperhedgeResult(price, numeraire, strat, ps, price - dual_value, is_cps, notes, p, out)


def verify_superhedge(m: MarketModel, v: Claim, res: SuperhedgeResult) -> bool:
    """Primal replication, dual feasibility over the price-system closure, zero gap."""
    if res.price is None:
        return res.outcome is not None and verify_certificate(res.lp, res.outcome)
    if res.primal.problems(m):
        return False
    if res.primal.induced_claim(m) + _const(m, res.numeraire, res.price) != v:
        return False
    tree = m.tree
    z = res.dual.z
    for u in tree.topological:
        if any(dot(a, z[u]) < 0 for a in dual_cone_h(m.cones[u]).rows):
            return False
        kids = tree.children[u]
        for i in range(m.d):
            if kids and tree.prob(u) * z[u][i] != sum((tree.prob(c) * z[c][i] for c in kids), ZERO):
                return False
    if z[tree.root][res.numeraire] != 1:
        return False
    dual_value = sum(
        (tree.leaf_prob[leaf] * dot(z[leaf], v.at(k)) for k, leaf in enumerate(tree.leaves)), ZERO
    )
    return res.gap == 0 and dual_value == res.price


def _const(m: MarketModel, i: int, x: Fraction) -> Claim:
    vals = [ZERO] * (len(m.tree.leaves) * m.d)
    for leaf in range(len(m.tree.leaves)):
        vals[leaf * m.d + i] = x
    return Claim(m.d, tuple(vals))
