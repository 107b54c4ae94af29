"""Split an order into its reversible part and a purely non-reversible rest.

The reversible part p(lam) is the point of

    P = {lt : 0 <= lt <= lam, -lift(u, L_u(lt)) in A_{t+1}^T within u's subtree}

nearest to lam in the Euclidean norm. P is a polytope given only through
an LP oracle, so the projection uses Wolfe's minimum-norm-point method on
Q = P - lam in exact arithmetic: finitely many LP vertices, affine
minimizers from a bordered Gram system, and a final LP whose certificate
is the optimality proof (x.q >= x.x for every q in Q).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .claims import AttainableCone, Strategy, add_combination, lift, member_attainable
from .exactlp import LinearProgram, LpOutcome, solve_checked, verify_certificate
from .linalg import solve_dense
from .rational import dot
from .scenario import MarketModel, ModelError, json_num

ZERO = Fraction(0)

Order = dict[tuple[int, int], Fraction]


class DecompositionError(ValueError):
    pass


def normalize_order(m: MarketModel, lam: Mapping[tuple[int, int], object]) -> Order:
    """Drop diagonal and zero entries; reject negative sizes."""
    out: Order = {}
    for (i, j), q in lam.items():
        if not (0 <= i < m.d and 0 <= j < m.d):
            raise DecompositionError(f"order index ({i + 1},{j + 1}) out of range")
        q = Fraction(q)
        if q < 0:
            raise DecompositionError("order sizes must be nonnegative")
        if i != j and q != 0:
            out[(i, j)] = out.get((i, j), ZERO) + q
    return out


def order_result(m: MarketModel, u: str, lam: Mapping[tuple[int, int], Fraction]) -> list[Fraction]:
    """L_u(lam) = sum lam^{ij} (e^j - pi^{ij} e^i)."""
    pi = m.pi(u).pi
    out = [ZERO] * m.d
    for (i, j), q in lam.items():
        out[j] += q
        out[i] -= q * pi[i][j]
    return out


def _check_node(m: MarketModel, u: str) -> int:
    if u not in m.tree.by_id:
        raise ModelError(f"unknown node {u!r}")
    t = m.tree.time(u)
    if t >= m.tree.horizon:
        raise DecompositionError(f"node {u!r} is at the horizon; no later trading exists")
    if m.cones[u].bid_ask is None:
        raise DecompositionError("orders need a bid-ask node")
    return t


def liquidation_cone(m: MarketModel, u: str) -> AttainableCone:
    t = m.tree.time(u)
    return AttainableCone(m, t + 1, m.tree.horizon, within=u)


def reversible_cone_test(m: MarketModel, u: str, lam: Mapping[tuple[int, int], object]) -> bool:
    """True iff the position bought by lam at u can be liquidated later for sure."""
    _check_node(m, u)
    lam = normalize_order(m, lam)
    if not lam:
        return True
    ok, _ = member_attainable(liquidation_cone(m, u), -lift(m, u, order_result(m, u, lam)))
    return ok


@dataclass
class Decomposition:
    node: str
    order: Order
    reversible: Order
    pure: Order
    liquidation: Strategy
    kkt_lp: LinearProgram | None = None
    kkt_outcome: LpOutcome | None = None
    iterations: int = 0

    def to_json(self, m: MarketModel) -> dict:
        def trip(o):
            return [[i + 1, j + 1, json_num(q)] for (i, j), q in sorted(o.items()) if q != 0]

        out = {
            "node": self.node,
            "order": trip(self.order),
            "reversible": trip(self.reversible),
            "pure": trip(self.pure),
            "liquidation": self.liquidation.to_json(m),
            "residual_norm_sq": json_num(sum((q * q for q in self.pure.values()), ZERO)),
        }
        if self.kkt_outcome is not None:
            out["kkt"] = {
                "lp_value": json_num(self.kkt_outcome.value),
                "dual": [json_num(y) for y in self.kkt_outcome.dual],
            }
        return out


class _Oracle:
    """Linear minimization over Q = P - lam, in coordinates of supp(lam)."""

    def __init__(self, m: MarketModel, u: str, lam: Order):
        self.m, self.u, self.lam = m, u, lam
        self.keys = sorted(lam)
        self.cone = liquidation_cone(m, u)
        pi = m.pi(u).pi
        d = m.d
        self.base = LinearProgram(sense="min")
        p = self.base
        self.lt = [p.var(0, lam[k], f"lt{k[0] + 1}{k[1] + 1}") for k in self.keys]
        self.mu = p.vars(len(self.cone.generators), prefix="mu")
        rows: dict[int, dict[int, Fraction]] = {}
        add_combination(rows, self.cone, self.mu)
        for leaf in m.tree.leaves_under[u]:
            for var, (i, j) in zip(self.lt, self.keys):
                rows.setdefault(leaf * d + j, {})[var] = rows.setdefault(leaf * d + j, {}).get(var, ZERO) + 1
                r = rows.setdefault(leaf * d + i, {})
                r[var] = r.get(var, ZERO) - pi[i][j]
        self.rows = rows
        for r in sorted(rows):
            p.add(rows[r], "=", 0)

    def program(self, c: Sequence[Fraction]) -> LinearProgram:
        p = LinearProgram(
            sense="min",
            constraints=self.base.constraints,
            lower=self.base.lower,
            upper=self.base.upper,
            names=self.base.names,
        )
        p.set_objective({v: ci for v, ci in zip(self.lt, c) if ci != 0})
        return p

    def minimize(self, x: Sequence[Fraction]):
        """argmin over q in Q of x.q; returns (q, mu, program, outcome)."""
        p = self.program(x)
        out = solve_checked(p)
        if not out.optimal:
            raise DecompositionError("reversible-order LP is not solvable; this should not happen")
        lt = [out.point[v] for v in self.lt]
        q = [a - self.lam[k] for a, k in zip(lt, self.keys)]
        return q, [out.point[v] for v in self.mu], p, out


def _affine_minimizer(points: list[list[Fraction]]) -> list[Fraction] | None:
    """Weights alpha (sum 1) minimizing |sum alpha_i s_i|; None if degenerate."""
    k = len(points)
    gram = [[dot(a, b) for b in points] + [Fraction(1)] for a in points]
    gram.append([Fraction(1)] * k + [Fraction(0)])
    rhs = [Fraction(0)] * k + [Fraction(1)]
    sol = solve_dense(gram, rhs)
    return None if sol is None else sol[:k]


def _combine(points, weights):
    n = len(points[0])
    return [sum((w * p[i] for w, p in zip(weights, points)), ZERO) for i in range(n)]


def decompose_order(m: MarketModel, u: str, lam: Mapping[tuple[int, int], object], max_iter: int = 10_000) -> Decomposition:
    """Exact projection of lam onto the reversible orders below it."""
    _check_node(m, u)
    lam = normalize_order(m, lam)
    t = m.tree.time(u)
    window = (t + 1, m.tree.horizon)
    if not lam:
        return Decomposition(u, {}, {}, {}, Strategy(window))
    oracle = _Oracle(m, u, lam)
    keys = oracle.keys
    zero_mu = [ZERO] * len(oracle.mu)
    pts = [[-lam[k] for k in keys]]
    mus = [zero_mu]
    wts = [Fraction(1)]
    x = list(pts[0])
    it = 0
    while True:
        it += 1
        if it > max_iter:
            raise DecompositionError("min-norm-point iteration limit reached")
        q, mu, prog, out = oracle.minimize(x)
        if dot(x, x) <= dot(x, q):
            final_prog, final_out = prog, out
            break
        if q in pts:
            raise DecompositionError("oracle returned a point already in the corral")
        pts.append(q)
        mus.append(mu)
        wts.append(ZERO)
        while True:
            alpha = _affine_minimizer(pts)
            if alpha is None:
                raise DecompositionError("corral lost affine independence")
            if all(a > 0 for a in alpha):
                wts = alpha
                x = _combine(pts, wts)
                break
            theta = min(w / (w - a) for w, a in zip(wts, alpha) if a <= 0 and w - a > 0)
            wts = [(1 - theta) * w + theta * a for w, a in zip(wts, alpha)]
            keep = [k for k, w in enumerate(wts) if w > 0]
            pts = [pts[k] for k in keep]
            mus = [mus[k] for k in keep]
            wts = [wts[k] for k in keep]
            x = _combine(pts, wts)
    rev = {k: xi + lam[k] for k, xi in zip(keys, x)}
    pure = {k: lam[k] - rev[k] for k in keys}
    mu_star = _combine(mus, wts) if oracle.mu else []
    liq = oracle.cone.strategy(mu_star)
    dec = Decomposition(
        u,
        dict(lam),
        {k: v for k, v in rev.items() if v != 0},
        {k: v for k, v in pure.items() if v != 0},
        liq,
        final_prog,
        final_out,
        it,
    )
    problems = verify_decomposition(m, dec)
    if problems:
        raise AssertionError("decomposition failed its own verification: " + problems[0])
    return dec


def verify_decomposition(m: MarketModel, dec: Decomposition) -> list[str]:
    """Recheck split, liquidation identity and the KKT certificate from scratch."""
    bad = []
    lam = dec.order
    keys = set(lam) | set(dec.reversible) | set(dec.pure)
    for k in keys:
        a, b, c = lam.get(k, ZERO), dec.reversible.get(k, ZERO), dec.pure.get(k, ZERO)
        if b + c != a:
            bad.append(f"reversible + pure != order at {k}")
        if b < 0 or c < 0:
            bad.append(f"negative part at {k}")
    if not lam:
        return bad
    u = dec.node
    t = m.tree.time(u)
    allowed = set(m.tree.subtree(u)) - {u}
    if dec.liquidation.problems(m, allowed) or dec.liquidation.window != (t + 1, m.tree.horizon):
        bad.append("liquidation strategy leaves its window or subtree")
    target = -lift(m, u, order_result(m, u, dec.reversible))
    if dec.liquidation.induced_claim(m) != target:
        bad.append("liquidation does not unwind the reversible part")
    # optimality: min over Q of x.q equals x.x, x = reversible - lam
    oracle = _Oracle(m, u, lam)
    x = [dec.reversible.get(k, ZERO) - lam[k] for k in oracle.keys]
    prog = oracle.program(x)
    if dec.kkt_outcome is None or not verify_certificate(prog, dec.kkt_outcome):
        bad.append("KKT certificate does not verify")
    else:
        shift = sum((xi * lam[k] for xi, k in zip(x, oracle.keys)), ZERO)
        if dec.kkt_outcome.value - shift != dot(x, x):
            bad.append("KKT value differs from the squared residual")
    return bad


def decomposition_parts(m: MarketModel, u: str, lam) -> tuple[Order, Order]:
    d = decompose_order(m, u, lam)
    return d.reversible, d.pure


def _scale(o: Order, c: Fraction) -> Order:
    return {k: c * v for k, v in o.items() if c * v != 0}


def _norm_sq_diff(a: Order, b: Order) -> Fraction:
    keys = set(a) | set(b)
    return sum(((a.get(k, ZERO) - b.get(k, ZERO)) ** 2 for k in keys), ZERO)


@dataclass
class LawReport:
    homogeneity: bool
    q_idempotent: bool
    p_idempotent: bool
    images_meet_at_zero: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.homogeneity and self.q_idempotent and self.p_idempotent and self.images_meet_at_zero

    def to_json(self) -> dict:
        return {
            "homogeneity": self.homogeneity,
            "q_idempotent": self.q_idempotent,
            "p_idempotent": self.p_idempotent,
            "images_meet_at_zero": self.images_meet_at_zero,
        }


def check_decomposition_laws(m: MarketModel, u: str, lam, mu) -> LawReport:
    """p(mu lam) = mu p(lam); q(q(lam)) = q(lam); p(p(lam)) = p(lam); q(lam) reversible only if 0."""
    lam = normalize_order(m, lam)
    mu = Fraction(mu)
    if mu < 0:
        raise DecompositionError("mu must be nonnegative")
    p1, q1 = decomposition_parts(m, u, lam)
    pm, _ = decomposition_parts(m, u, _scale(lam, mu))
    homog = pm == _scale(p1, mu)
    pq, qq = decomposition_parts(m, u, q1)
    pp, qp = decomposition_parts(m, u, p1)
    q_idem = pq == {} and qq == q1
    p_idem = pp == p1 and qp == {}
    meet = (not q1) or not reversible_cone_test(m, u, q1)
    return LawReport(homog, q_idem, p_idem, meet)


def continuity_errors(m: MarketModel, u: str, lam, delta, ns=(1, 10, 100, 1000)) -> list[Fraction]:
    """Squared distances |p(lam + delta/n) - p(lam)|^2 for each n."""
    lam = normalize_order(m, lam)
    base, _ = decomposition_parts(m, u, lam)
    out = []
    for n in ns:
        pert = dict(lam)
        for k, v in normalize_order(m, delta).items():
            pert[k] = pert.get(k, ZERO) + Fraction(v) / n
        pn, _ = decomposition_parts(m, u, pert)
        out.append(_norm_sq_diff(pn, base))
    return out
