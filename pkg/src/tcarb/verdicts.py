"""Decide the no-arbitrage conditions, each with a re-checkable certificate.

Containments of the form ``A ∩ (-B) ⊆ B`` are decided through the
lineality space of B: a claim v with -v in B lies in B exactly when
v ∈ B ∩ (-B), and -v = G_B nu lies there exactly when nu is supported on
the generators whose negation is in B. So a single LP maximizing the nu
weight off that support answers the whole containment for one t.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .claims import AttainableCone, Claim, add_combination, member_attainable
from .cones import max_support, node_generators, node_lineality
from .exactlp import LinearProgram, LpOutcome, solve_checked, verify_certificate
from .linalg import intersect_subspaces
from .rational import primitive
from .scenario import MarketModel, json_num
from . import pricing

ZERO = Fraction(0)

NA, NAS, NAPS, NAR, NAWPS, EF, PENNER, NULLSPACE, MIXED = (
    "NA",
    "NAs",
    "NAps",
    "NAr",
    "NAwps",
    "EF",
    "Penner",
    "nullspace",
    "mixed",
)
ALL_CONDITIONS = (NA, NAS, NAPS, NAR, NAWPS, EF, PENNER, NULLSPACE)


class InternalInconsistency(RuntimeError):
    """Two verdicts contradict a proven implication: a bug, never a market property."""


@dataclass
class Verdict:
    condition: str
    holds: bool | None
    certificate: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    ms: float | None = None
    # objects kept for re-verification; not serialized
    checks: list[Callable[[], bool]] = field(default_factory=list, repr=False)
    details: dict = field(default_factory=dict, repr=False)

    def verify(self) -> bool:
        return all(chk() for chk in self.checks)

    def to_json(self, timings: bool = False) -> dict:
        out: dict = {"holds": self.holds, "certificate": self.certificate}
        if self.notes:
            out["notes"] = list(self.notes)
        if timings and self.ms is not None:
            out["ms"] = round(self.ms, 3)
        return out


def _lp_check(p: LinearProgram, o: LpOutcome) -> Callable[[], bool]:
    return lambda: verify_certificate(p, o)


def _vec(v) -> list:
    return [json_num(x) for x in v]


def _claim_direction(m: MarketModel, v: Claim) -> dict:
    """Per-leaf primitive directions, plus the common one when v is constant."""
    per_leaf = {leaf: _vec(primitive(v.at(k))) for k, leaf in enumerate(m.tree.leaves)}
    dirs = {tuple(x) for x in per_leaf.values() if any(y != 0 for y in x)}
    out: dict = {"claim": v.to_json(m)}
    if len(dirs) == 1:
        out["direction"] = list(next(iter(dirs)))
    return out


# ---------------------------------------------------------------------------
# (NA)


def check_na(m: MarketModel) -> Verdict:
    """max sum(v) over v = G mu >= 0, sum mu <= 1; holds iff the optimum is 0."""
    cone = AttainableCone(m, 0, m.tree.horizon)
    p = LinearProgram(sense="max")
    mus = p.vars(len(cone.generators), prefix="mu")
    rows: dict[int, dict[int, Fraction]] = {}
    add_combination(rows, cone, mus)
    obj: dict[int, Fraction] = {}
    for r in sorted(rows):
        p.add(rows[r], ">=", 0)
        for j, x in rows[r].items():
            obj[j] = obj.get(j, ZERO) + x
    p.add({mu: 1 for mu in mus}, "<=", 1)
    p.set_objective(obj)
    out = solve_checked(p)
    v = Verdict(NA, out.value == 0, checks=[_lp_check(p, out)])
    v.certificate["lp_value"] = json_num(out.value)
    if out.value > 0:
        weights = [out.point[j] for j in mus]
        claim = cone.combine(weights)
        strat = cone.strategy(weights)
        v.certificate.update({"arbitrage": claim.to_json(m), "strategy": strat.to_json(m)})
        v.details.update(claim=claim, strategy=strat)
        v.checks.append(
            lambda: claim.is_nonnegative() and not claim.is_zero() and strat.induced_claim(m) == claim and not strat.problems(m)
        )
    else:
        v.certificate["dual"] = [json_num(y) for y in out.dual]
    return v


# ---------------------------------------------------------------------------
# containments through lineality


def _containment(m: MarketModel, left: AttainableCone, right: AttainableCone, label: str, t: int) -> dict:
    """Decide left ∩ (-right) ⊆ right. Returns a per-t record."""
    support = set(right.lineality_support)
    p = LinearProgram(sense="max")
    mus = p.vars(len(left.generators), prefix="mu")
    nus = p.vars(len(right.generators), prefix="nu")
    rows: dict[int, dict[int, Fraction]] = {}
    add_combination(rows, left, mus)
    add_combination(rows, right, nus)
    for r in sorted(rows):
        p.add(rows[r], "=", 0)
    p.add({x: 1 for x in mus + nus}, "<=", 1)
    p.set_objective({nus[k]: 1 for k in range(len(nus)) if k not in support})
    out = solve_checked(p)
    rec: dict = {"t": t, "holds": out.value == 0, "lp_value": out.value, "lp": p, "outcome": out}
    if out.value > 0:
        wl = [out.point[j] for j in mus]
        wr = [out.point[j] for j in nus]
        claim = left.combine(wl)
        ok, sep = member_attainable(right, claim)
        if ok:
            raise InternalInconsistency(f"{label} at t={t}: violating claim is a member of the right-hand cone")
        rec.update(
            claim=claim,
            build=left.strategy(wl),
            unwind=right.strategy(wr),
            separation=sep,
        )
    return rec


def _containment_checks(m: MarketModel, rec: dict, left: AttainableCone, right: AttainableCone) -> list:
    checks = [_lp_check(rec["lp"], rec["outcome"])]
    if not rec["holds"]:
        claim, build, unwind, sep = rec["claim"], rec["build"], rec["unwind"], rec["separation"]
        checks.append(
            lambda: build.induced_claim(m) == claim
            and unwind.induced_claim(right.model) == -claim
            and left.admits(build)
            and right.admits(unwind)
            and not claim.is_zero()
            and sep.verify(right, claim)
        )
    return checks


def _containment_json(m: MarketModel, rec: dict) -> dict:
    out: dict = {"t": rec["t"], "holds": rec["holds"], "lp_value": json_num(rec["lp_value"])}
    if not rec["holds"]:
        out.update(_claim_direction(m, rec["claim"]))
        out["build_strategy"] = rec["build"].to_json(m)
        out["unwind_strategy"] = rec["unwind"].to_json(m)
        out["separating_functional"] = rec["separation"].to_json(m)["functional"]
        times = sorted({m.tree.time(u) for u in rec["build"].nodes()})
        out["build_times"] = times
    return out


def _per_t(m: MarketModel, cond: str, right_of: Callable[[int], AttainableCone]) -> Verdict:
    T = m.tree.horizon
    v = Verdict(cond, True)
    recs = []
    for t in range(T + 1):
        left = AttainableCone(m, 0, t)
        right = right_of(t)
        rec = _containment(m, left, right, cond, t)
        recs.append(_containment_json(m, rec))
        v.checks.extend(_containment_checks(m, rec, left, right))
        if not rec["holds"]:
            v.holds = False
            v.details.setdefault("failures", []).append(rec)
    v.certificate["per_t"] = recs
    if v.holds is False:
        v.certificate["failed_t"] = [r["t"] for r in recs if not r["holds"]]
    return v


def check_naps(m: MarketModel) -> Verdict:
    """A_0^t ∩ (-A_t^T) ⊆ A_t^T for every t."""
    T = m.tree.horizon
    v = _per_t(m, NAPS, lambda t: AttainableCone(m, t, T))
    if v.holds is False:
        v.notes.append("failed_t uses the definition's index t; build_times gives when the violating position is traded")
    return v


def check_nas(m: MarketModel) -> Verdict:
    """A_0^t ∩ L^0(K_t) ⊆ L^0(K^0_t): the right cone is A_t^t, whose negation is L^0(K_t)."""
    return _per_t(m, NAS, lambda t: AttainableCone(m, t, t))


def check_mixed(m: MarketModel, witness: MarketModel) -> Verdict:
    """A_0^t ∩ (-Ã_t^T) ⊆ Ã_t^T with Ã from a dominating witness process."""
    if not (m.is_bid_ask and witness.is_bid_ask):
        raise pricing.UnsupportedModel("the mixed condition needs bid-ask form")
    if [n for n in m.tree.nodes] != [n for n in witness.tree.nodes]:
        raise ValueError("witness must live on the same tree")
    for u in m.tree.topological:
        a, b = witness.pi(u), m.pi(u)
        if any(a.pi[i][j] > b.pi[i][j] for i in range(m.d) for j in range(m.d)):
            raise ValueError(f"witness is not more favorable at node {u!r}")
    T = m.tree.horizon
    v = _per_t(m, MIXED, lambda t: AttainableCone(witness, t, T))
    v.notes.append("per-t outcomes at this truncation are computed, not assumed")
    return v


# ---------------------------------------------------------------------------
# null strategies


def check_nullspace(m: MarketModel) -> Verdict:
    """Every null strategy trades only inside the node-wise lineality spaces."""
    cone = AttainableCone(m, 0, m.tree.horizon)
    local: dict[str, set] = {}
    for u in m.tree.topological:
        gens = node_generators(m.cones[u])
        cols = [{i: x for i, x in enumerate(g) if x != 0} for _, g in gens]
        local[u] = {gens[k][0] for k in max_support(cols)}
    free = [k for k, g in enumerate(cone.generators) if g.kind not in local[g.node]]
    p = LinearProgram(sense="max")
    xs = p.vars(len(cone.generators), prefix="x")
    rows: dict[int, dict[int, Fraction]] = {}
    add_combination(rows, cone, xs)
    for r in sorted(rows):
        p.add(rows[r], "=", 0)
    p.add({x: 1 for x in xs}, "<=", 1)
    p.set_objective({xs[k]: 1 for k in free})
    out = solve_checked(p)
    v = Verdict(NULLSPACE, out.value == 0, checks=[_lp_check(p, out)])
    v.certificate["lp_value"] = json_num(out.value)
    if out.value > 0:
        weights = [out.point[j] for j in xs]
        strat = cone.strategy(weights)
        bad = next(u for u in m.tree.topological if any(weights[k] > 0 for k in free if cone.generators[k].node == u))
        xi = strat.increment(m, bad)
        v.certificate.update({"null_strategy": strat.to_json(m), "node": bad, "increment": _vec(xi)})
        k0 = node_lineality(m.cones[bad])
        v.checks.append(lambda: strat.induced_claim(m).is_zero() and not k0.contains(xi) and not strat.problems(m))
    return v


# ---------------------------------------------------------------------------
# price-system based conditions


def check_nar(m: MarketModel) -> Verdict:
    if not m.is_bid_ask:
        return Verdict(NAR, None, notes=["unsupported for generator-form models"])
    res = pricing.find_cps(m, strict=True)
    v = Verdict(NAR, res.found, checks=[lambda: res.verified(m)])
    v.certificate["scps"] = res.to_json(m)
    v.details["cps"] = res
    return v


def check_nawps(m: MarketModel, verify_witness: bool = True) -> Verdict:
    res = pricing.find_cps(m)
    v = Verdict(NAWPS, res.found, checks=[lambda: res.verified(m)])
    v.certificate["cps"] = res.to_json(m)
    v.details["cps"] = res
    if res.found and m.is_bid_ask:
        w = pricing.frictionless_witness(m, res.price_system)
        v.details["witness"] = w
        v.certificate["witness"] = {
            u: [[json_num(x) for x in row] for row in w.pi(u).pi] for u in m.tree.topological
        }
        if verify_witness:
            wv = check_naps(w)
            v.checks.extend(wv.checks)
            v.checks.append(lambda: wv.holds is True)
            v.certificate["witness_naps"] = wv.holds
    return v


def check_ef(m: MarketModel) -> Verdict:
    """pi^{ij} pi^{ji} > 1 for all pairs, cross-checked against K^0 = {0}."""
    v = Verdict(EF, True)
    first = None
    for u in m.tree.topological:
        c = m.cones[u]
        k0 = node_lineality(c)
        if c.bid_ask is None:
            ef_here = k0.rank == 0
            if not ef_here and first is None:
                first = {"node": u, "lineality": [_vec(b) for b in k0.basis]}
        else:
            pi = c.bid_ask.pi
            pair = next(
                ((i, j) for i in range(m.d) for j in range(i + 1, m.d) if pi[i][j] * pi[j][i] <= 1),
                None,
            )
            ef_here = pair is None
            if ef_here != (k0.rank == 0):
                raise InternalInconsistency(f"EF product test and lineality disagree at {u!r}")
            if pair is not None and first is None:
                i, j = pair
                first = {"node": u, "pair": [i + 1, j + 1], "product": json_num(pi[i][j] * pi[j][i])}
        if not ef_here:
            v.holds = False
    if first is not None:
        v.certificate["violation"] = first
    v.checks.append(lambda: _recheck_ef(m, v))
    return v


def _recheck_ef(m: MarketModel, v: Verdict) -> bool:
    if not m.is_bid_ask:
        return True
    holds = all(
        m.pi(u).pi[i][j] * m.pi(u).pi[j][i] > 1 for u in m.tree.topological for i in range(m.d) for j in range(m.d) if i != j
    )
    return holds == v.holds


def check_penner(m: MarketModel) -> Verdict:
    """∩_{children c} K^0(c) ⊆ K^0(u) at every interior node u."""
    v = Verdict(PENNER, True)
    d = m.d
    for u in m.tree.topological:
        kids = m.tree.children[u]
        if not kids:
            continue
        common = [list(b) for b in node_lineality(m.cones[kids[0]]).basis]
        for c in kids[1:]:
            if not common:
                break
            common = intersect_subspaces(common, [list(b) for b in node_lineality(m.cones[c]).basis], d)
        mine = node_lineality(m.cones[u])
        bad = next((b for b in common if not mine.contains(b)), None)
        if bad is not None:
            v.holds = False
            vec = list(primitive(bad))
            v.certificate = {"node": u, "vector": _vec(vec)}
            v.checks.append(
                lambda u=u, vec=vec, kids=kids: all(node_lineality(m.cones[c]).contains(vec) for c in kids)
                and not node_lineality(m.cones[u]).contains(vec)
            )
            break
    return v


# ---------------------------------------------------------------------------
# everything at once


@dataclass
class Report:
    model: str | None
    verdicts: dict[str, Verdict]
    consistency: list[dict]

    def holds(self, cond: str) -> bool | None:
        return self.verdicts[cond].holds

    def vector(self) -> dict[str, bool | None]:
        return {c: v.holds for c, v in self.verdicts.items()}

    def verify(self) -> bool:
        return all(v.verify() for v in self.verdicts.values())

    def to_json(self, timings: bool = False) -> dict:
        return {
            "model": self.model,
            "verdicts": {c: v.to_json(timings) for c, v in self.verdicts.items()},
            "consistency": self.consistency,
            "conventions": {
                "asset_indices": "1-based",
                "cps_normalization": pricing.NORM_NODE_SUM,
                "scps_normalization": pricing.NORM_ROOT_SUM,
            },
        }


CHECKS: dict[str, Callable[[MarketModel], Verdict]] = {
    NA: check_na,
    NAS: check_nas,
    NAPS: check_naps,
    NAR: check_nar,
    NAWPS: check_nawps,
    EF: check_ef,
    PENNER: check_penner,
    NULLSPACE: check_nullspace,
}


def _implies(a, b) -> bool | None:
    if a is None or b is None:
        return None
    return (not a) or b


def consistency(vec: dict[str, bool | None]) -> list[dict]:
    """Evaluate the proven relations on whatever verdicts are present."""
    rules = [
        ("NAr => NAps", NAR, NAPS, "=>"),
        ("NAps => NAwps", NAPS, NAWPS, "=>"),
        ("NAwps => NA", NAWPS, NA, "=>"),
        ("NAr <=> nullspace", NAR, NULLSPACE, "<=>"),
        ("NA <=> NAwps", NA, NAWPS, "<=>"),
    ]
    out = []
    for name, a, b, kind in rules:
        if a not in vec or b not in vec:
            continue
        x, y = vec[a], vec[b]
        ok = _implies(x, y) if kind == "=>" else (None if x is None or y is None else x == y)
        out.append({"rule": name, "ok": ok})
    if EF in vec and NAPS in vec and NAS in vec and vec[EF]:
        out.append({"rule": "EF => (NAps <=> NAs)", "ok": vec[NAPS] == vec[NAS]})
    return out


def run_all(m: MarketModel, conditions=None, verify_witness: bool = True) -> Report:
    conds = list(conditions or ALL_CONDITIONS)
    unknown = [c for c in conds if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown condition {unknown[0]!r}")
    verdicts = {}
    for c in ALL_CONDITIONS:
        if c not in conds:
            continue
        start = time.perf_counter()
        verdicts[c] = check_nawps(m, verify_witness) if c == NAWPS else CHECKS[c](m)
        verdicts[c].ms = (time.perf_counter() - start) * 1000
    cons = consistency({c: v.holds for c, v in verdicts.items()})
    bad = [r["rule"] for r in cons if r["ok"] is False]
    if bad:
        raise InternalInconsistency("verdicts contradict: " + ", ".join(bad))
    return Report(m.name, verdicts, cons)
