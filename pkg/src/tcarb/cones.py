"""Node-level polyhedral cones in R^d.

`ConeV` is a cone given by generating rays, `ConeH` one given by rows a
meaning ``a.w >= 0``. Only node dimension d ever goes through double
description; claim-space questions are answered by LPs elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exactlp import LinearProgram, solve_checked
from .linalg import in_span, nullspace, rank, span_basis
from .rational import dot, fmt, primitive
from .scenario import NodeCone

DD_DIM_LIMIT = 8

Vec = tuple[Fraction, ...]


class ConeDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class ConeV:
    dim: int
    rays: tuple[Vec, ...]

    def to_json(self) -> dict:
        return {"dim": self.dim, "rays": [[fmt(x) for x in r] for r in self.rays]}


@dataclass(frozen=True)
class ConeH:
    dim: int
    rows: tuple[Vec, ...]

    def contains(self, w: Sequence) -> bool:
        return all(dot(a, w) >= 0 for a in self.rows)

    def to_json(self) -> dict:
        return {"dim": self.dim, "rows": [[fmt(x) for x in r] for r in self.rows]}


@dataclass(frozen=True)
class SubspaceBasis:
    dim: int
    basis: tuple[Vec, ...]
    checked: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.checked and self.basis and rank(self.basis) != len(self.basis):
            raise ValueError("subspace basis vectors are linearly dependent")

    @property
    def rank(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        return in_span(self.basis, v)

    def complement(self) -> list[list[Fraction]]:
        return nullspace(list(self.basis), self.dim) if self.basis else [
            [Fraction(int(i == j)) for j in range(self.dim)] for i in range(self.dim)
        ]

    def to_json(self) -> dict:
        return {"dim": self.dim, "basis": [[fmt(x) for x in r] for r in self.basis]}


def _unit(d: int, i: int, s: int = 1) -> Vec:
    return tuple(Fraction(s if k == i else 0) for k in range(d))


# ---------------------------------------------------------------------------
# solvency cones and duals


@lru_cache(maxsize=None)
def node_generators(c: NodeCone) -> tuple[tuple[tuple, Vec], ...]:
    """Raw generators of -K with provenance.

    Bid-ask form yields ``(("transfer", i, j), e^j - pi^{ij} e^i)`` for i != j
    followed by ``(("disposal", i), -e^i)``; a unit multiplier of a transfer
    generator is one unit of the order lambda^{ij}. Generator form yields
    ``(("generator", k), X^k)``.
    """
    if c.bid_ask is not None:
        d = c.bid_ask.d
        out = []
        for i in range(d):
            for j in range(d):
                if i != j:
                    v = [Fraction(0)] * d
                    v[j] += 1
                    v[i] -= c.bid_ask.pi[i][j]
                    out.append((("transfer", i, j), tuple(v)))
        for i in range(d):
            out.append((("disposal", i), _unit(d, i, -1)))
        return tuple(out)
    return tuple((("generator", k), tuple(g)) for k, g in enumerate(c.generators) if any(x != 0 for x in g))


def solvency_cone(c: NodeCone) -> ConeV:
    """-K as a ConeV with primitive rays, in generator order."""
    return ConeV(c.d, tuple(primitive(v) for _, v in node_generators(c)))


@lru_cache(maxsize=None)
def dual_cone_h(c: NodeCone) -> ConeH:
    """K* as rows: e^i and pi^{ij} e^i - e^j for bid-ask form, -X^k for generators."""
    d = c.d
    if c.bid_ask is not None:
        rows = [_unit(d, i) for i in range(d)]
        for i in range(d):
            for j in range(d):
                if i != j:
                    v = [Fraction(0)] * d
                    v[i] += c.bid_ask.pi[i][j]
                    v[j] -= 1
                    rows.append(tuple(v))
        return ConeH(d, tuple(rows))
    return ConeH(d, tuple(tuple(-x for x in g) for _, g in node_generators(c)))


# ---------------------------------------------------------------------------
# double description


def dd_h_to_v(h: ConeH, limit: int = DD_DIM_LIMIT) -> ConeV:
    """Extreme rays of {w : a.w >= 0}, plus +-basis vectors of its lineality space."""
    if h.dim > limit:
        raise ConeDimensionError(f"dimension {h.dim} exceeds the double-description limit {limit}")
    d = h.dim
    lin: list[list[Fraction]] = [list(_unit(d, i)) for i in range(d)]
    rays: list[list[Fraction]] = []
    done: list[Vec] = []
    for a in h.rows:
        if all(x == 0 for x in a):
            continue
        k = next((k for k, b in enumerate(lin) if dot(a, b) != 0), None)
        if k is not None:
            pivot = lin.pop(k)
            ab = dot(a, pivot)
            if ab < 0:
                pivot = [-x for x in pivot]
                ab = -ab
            lin = [_reduce(b, pivot, dot(a, b) / ab) for b in lin]
            rays = [_reduce(r, pivot, dot(a, r) / ab) for r in rays] + [pivot]
            done.append(a)
            continue
        pos = [r for r in rays if dot(a, r) > 0]
        zero = [r for r in rays if dot(a, r) == 0]
        neg = [r for r in rays if dot(a, r) < 0]
        new = []
        target = d - len(lin) - 2
        for p in pos:
            zp = {k for k, b in enumerate(done) if dot(b, p) == 0}
            for q in neg:
                common = [done[k] for k in zp if dot(done[k], q) == 0]
                if target > 0 and (len(common) < target or rank(common) < target):
                    continue
                ap, aq = dot(a, p), dot(a, q)
                new.append([ap * y - aq * x for x, y in zip(p, q)])
        rays = pos + zero + new
        done.append(a)
        rays = _dedupe(rays)
    out = [primitive(r) for r in rays if any(x != 0 for x in r)]
    for b in lin:
        out.append(primitive(b))
        out.append(primitive([-x for x in b]))
    return ConeV(d, tuple(sorted(set(out), key=_ray_key)))


def _reduce(v, pivot, f):
    return [x - f * y for x, y in zip(v, pivot)]


def _dedupe(rays):
    seen, out = set(), []
    for r in rays:
        if all(x == 0 for x in r):
            continue
        key = primitive(r)
        if key not in seen:
            seen.add(key)
            out.append(list(key))
    return out


def _ray_key(r: Vec):
    return tuple((-x) for x in r)


def dd_v_to_h(v: ConeV, limit: int = DD_DIM_LIMIT) -> ConeH:
    """Rows a with cone(rays) = {w : a.w >= 0}; equalities appear as +-a pairs."""
    dual = dd_h_to_v(ConeH(v.dim, v.rays), limit)
    return ConeH(v.dim, dual.rays)


# ---------------------------------------------------------------------------
# LP-based questions


def max_support(columns: Sequence[dict[int, Fraction]]) -> list[int]:
    """Indices k for which some x >= 0 with sum_k x_k col_k = 0 has x_k > 0.

    One LP: maximize sum y subject to G x = 0, 0 <= y <= x, y <= 1. The
    optimum puts y_k = 1 exactly on the maximal support.
    """
    if not columns:
        return []
    p = LinearProgram(sense="max")
    xs = p.vars(len(columns), prefix="x")
    ys = p.vars(len(columns), lo=0, hi=1, prefix="y")
    rows: dict[int, dict[int, Fraction]] = {}
    for k, col in enumerate(columns):
        for r, val in col.items():
            if val != 0:
                rows.setdefault(r, {})[xs[k]] = val
    for r in sorted(rows):
        p.add(rows[r], "=", 0)
    for x, y in zip(xs, ys):
        p.add({y: 1, x: -1}, "<=", 0)
    p.set_objective({y: 1 for y in ys})
    out = solve_checked(p)
    return [k for k, y in enumerate(ys) if out.point[y] > 0]


def _sparse(v: Sequence) -> dict[int, Fraction]:
    return {i: Fraction(x) for i, x in enumerate(v) if x != 0}


def lineality(v: ConeV) -> SubspaceBasis:
    """Basis of cone(rays) ∩ -cone(rays), spanned by the rays whose negation is in the cone."""
    support = max_support([_sparse(r) for r in v.rays])
    return SubspaceBasis(v.dim, tuple(tuple(b) for b in span_basis([v.rays[k] for k in support])))


@lru_cache(maxsize=None)
def node_lineality(c: NodeCone) -> SubspaceBasis:
    """K^0 at a node (the lineality space of -K equals that of K)."""
    return lineality(solvency_cone(c))


def cone_contains(v: ConeV, x: Sequence) -> bool:
    """Membership of x in cone(rays) by one feasibility LP."""
    if all(t == 0 for t in x):
        return True
    if not v.rays:
        return False
    p = LinearProgram(sense="max")
    mus = p.vars(len(v.rays), prefix="mu")
    for i in range(v.dim):
        p.add({mus[k]: r[i] for k, r in enumerate(v.rays) if r[i] != 0}, "=", x[i])
    return solve_checked(p).optimal


def meets_orthant(v: ConeV) -> bool:
    """True when cone(rays) contains a nonzero nonnegative vector."""
    p = LinearProgram(sense="max")
    mus = p.vars(len(v.rays), prefix="mu")
    obj: dict[int, Fraction] = {}
    for i in range(v.dim):
        row = {mus[k]: r[i] for k, r in enumerate(v.rays) if r[i] != 0}
        p.add(row, ">=", 0)
        for j, val in row.items():
            obj[j] = obj.get(j, Fraction(0)) + val
    p.add({m: 1 for m in mus}, "<=", 1)
    p.set_objective(obj)
    out = solve_checked(p)
    return out.value > 0


def relint_point(h: ConeH) -> tuple[list[Fraction], list[int]] | None:
    """A relative-interior point and the indices of the implicit-equality rows.

    One LP maximizes sum s_k subject to a_k.w >= s_k, 0 <= s_k <= 1; rows
    with s_k = 0 at the optimum vanish on the whole cone. Returns None only
    when the cone is {0}.
    """
    d = h.dim
    p = LinearProgram(sense="max")
    ws = p.vars(d, lo=None, prefix="w")
    ss = p.vars(len(h.rows), lo=0, hi=1, prefix="s")
    for k, a in enumerate(h.rows):
        row = {ws[i]: a[i] for i in range(d) if a[i] != 0}
        row[ss[k]] = Fraction(-1)
        p.add(row, ">=", 0)
    p.set_objective({s: 1 for s in ss})
    out = solve_checked(p)
    implicit = [k for k, s in enumerate(ss) if out.point[s] == 0]
    point = [out.point[w] for w in ws]
    if len(implicit) == len(h.rows):
        # the cone is the subspace cut out by all rows; 0 is relative-interior
        if not nullspace([list(a) for a in h.rows], d):
            return None
        point = [Fraction(0)] * d
    return point, implicit
