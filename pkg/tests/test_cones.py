import itertools
import random
from fractions import Fraction as F

import pytest
import sympy
from scipy.optimize import linprog

from tcarb import examples as ex
from tcarb.cones import (
    ConeDimensionError,
    ConeH,
    ConeV,
    cone_contains,
    dd_h_to_v,
    dd_v_to_h,
    dual_cone_h,
    lineality,
    node_lineality,
    relint_point,
    solvency_cone,
)
from tcarb.randmodels import random_matrix
from tcarb.rational import dot, primitive
from tcarb.scenario import BidAskMatrix, NodeCone


def _ba(rows):
    return NodeCone(bid_ask=BidAskMatrix.of(rows))


def _float_member(rays, x):
    """Independent float oracle: x in cone(rays)."""
    if not rays:
        return all(v == 0 for v in x)
    a_eq = [[float(r[i]) for r in rays] for i in range(len(x))]
    res = linprog([0] * len(rays), A_eq=a_eq, b_eq=[float(v) for v in x], bounds=[(0, None)] * len(rays))
    return res.status == 0


def _brute_rays(rows, d):
    """Extreme rays of a pointed {w : Aw >= 0}: primitive solutions of d-1 independent active rows."""
    out = set()
    for combo in itertools.combinations(rows, d - 1):
        ns = sympy.Matrix([list(r) for r in combo]).nullspace() if combo else [sympy.eye(d)[:, k] for k in range(d)]
        if len(ns) != 1:
            continue
        v = [F(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in ns[0]]
        for s in (1, -1):
            w = [s * x for x in v]
            if all(dot(a, w) >= 0 for a in rows):
                out.add(primitive(w))
    return out


def test_ex41_solvency_rays():
    rays = solvency_cone(ex.ex41().cones["root"]).rays
    assert set(rays) == {(-1, 1), (1, -2), (-1, 0), (0, -1)}


def test_frictionless_rays():
    assert set(solvency_cone(_ba([[1, 1], [1, 1]])).rays) == {(-1, 1), (1, -1), (-1, 0), (0, -1)}


def test_generator_form_single_ray():
    c = NodeCone(generators=((F(1), F(-1)),))
    assert solvency_cone(c).rays == ((1, -1),)


def test_ex41_dual_rows_and_rays():
    h = dual_cone_h(ex.ex41().cones["root"])
    assert set(h.rows) == {(1, 0), (0, 1), (1, -1), (-1, 2)}
    rays = set(dd_h_to_v(h).rays)
    assert rays == {(1, 1), (2, 1)}
    assert rays == _brute_rays(h.rows, 2)


def test_dual_in_one_dimension():
    assert dual_cone_h(_ba([[1]])).rows == ((1,),)


def test_frictionless_dual_forces_equal_prices():
    v = dd_h_to_v(dual_cone_h(_ba([[1, 1], [1, 1]])))
    assert set(v.rays) == {(1, 1)}


def test_dd_empty_h_gives_whole_space():
    v = dd_h_to_v(ConeH(2, ()))
    for x in ([1, 0], [-1, 0], [0, 1], [0, -1], [3, -7]):
        assert cone_contains(v, x)


def test_dd_single_ray_to_h():
    h = dd_v_to_h(ConeV(2, ((F(1), F(1)),)))
    assert h.contains([1, 1]) and h.contains([5, 5])
    assert not h.contains([1, 0]) and not h.contains([0, 1]) and not h.contains([-1, -1])


def test_dd_matches_brute_force_on_random_duals():
    rng = random.Random(5)
    for _ in range(40):
        d = rng.randint(2, 3)
        h = dual_cone_h(NodeCone(bid_ask=random_matrix(rng, d, ef=True)))
        assert set(dd_h_to_v(h).rays) == _brute_rays(h.rows, d)


def test_dual_of_dual_readmits_solvency_rays():
    rng = random.Random(8)
    for _ in range(30):
        c = NodeCone(bid_ask=random_matrix(rng, rng.randint(1, 3), ef=rng.random() < 0.5))
        back = dd_v_to_h(dd_h_to_v(dual_cone_h(c)))
        # K* rays re-derived from K* rays give an H-rep of K* again; its dual contains -K
        for r in solvency_cone(c).rays:
            assert all(dot(a, r) <= 0 for a in dd_h_to_v(back).rays)


def test_dd_dimension_limit():
    with pytest.raises(ConeDimensionError):
        dd_h_to_v(ConeH(3, ((F(1), F(0), F(0)),)), limit=2)


def test_lineality_examples():
    m = ex.ex41()
    assert node_lineality(m.cones["w"]).rank == 1
    assert node_lineality(m.cones["w"]).contains([1, -1])
    assert node_lineality(m.cones["root"]).rank == 0
    orth = ConeV(2, ((F(1), F(0)), (F(0), F(1))))
    assert lineality(orth).rank == 0


def test_lineality_matches_per_generator_oracle():
    rng = random.Random(2)
    for _ in range(40):
        c = NodeCone(bid_ask=random_matrix(rng, rng.randint(1, 3)))
        rays = solvency_cone(c).rays
        two_sided = [r for r in rays if _float_member(rays, [-x for x in r])]
        lin = node_lineality(c)
        expected = sympy.Matrix([list(r) for r in two_sided]).rank() if two_sided else 0
        assert lin.rank == expected
        for r in two_sided:
            assert lin.contains(r)


def test_efficient_friction_means_trivial_lineality():
    rng = random.Random(4)
    for _ in range(30):
        c = NodeCone(bid_ask=random_matrix(rng, rng.randint(1, 3), ef=True))
        assert node_lineality(c).rank == 0


def test_relint_examples():
    h = dual_cone_h(ex.ex41().cones["root"])
    point, implicit = relint_point(h)
    assert implicit == []
    assert all(dot(a, point) > 0 for a in h.rows)
    h1 = dual_cone_h(_ba([[1, 1], [1, 1]]))
    point, implicit = relint_point(h1)
    assert sorted(h1.rows[k] for k in implicit) == [(-1, 1), (1, -1)]
    assert point[0] == point[1] > 0
    zero = ConeH(2, ((F(1), F(0)), (F(-1), F(0)), (F(0), F(1)), (F(0), F(-1))))
    assert relint_point(zero) is None


def test_relint_matches_per_row_oracle():
    rng = random.Random(6)
    for _ in range(40):
        d = rng.randint(1, 3)
        h = dual_cone_h(NodeCone(bid_ask=random_matrix(rng, d)))
        point, implicit = relint_point(h)
        a_ub = [[-float(x) for x in a] for a in h.rows]
        for k, a in enumerate(h.rows):
            res = linprog([-float(x) for x in a], A_ub=a_ub, b_ub=[0] * len(h.rows), bounds=[(-1, 1)] * d)
            assert (k in implicit) == (abs(res.fun) < 1e-9)
            assert (dot(a, point) == 0) if k in implicit else (dot(a, point) > 0)


def test_dual_vectors_are_positive():
    rng = random.Random(9)
    for _ in range(20):
        h = dual_cone_h(NodeCone(bid_ask=random_matrix(rng, 3)))
        for r in dd_h_to_v(h).rays:
            assert all(x > 0 for x in r)
