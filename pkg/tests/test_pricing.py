import random
from fractions import Fraction as F

import pytest
from scipy.optimize import linprog

from helpers import binomial, trinomial
from tcarb import examples as ex
from tcarb.claims import constant_claim, lift, zero_claim
from tcarb.pricing import (
    PriceSystem,
    cps_uniqueness_bounds,
    find_cps,
    frictionless_witness,
    superhedge,
    verify_price_system,
    verify_superhedge,
)
from tcarb.randmodels import random_model
from tcarb.scenario import ModelError, build_model, model_to_obj


def test_ex41_cps_and_strict():
    m = ex.ex41()
    res = find_cps(m)
    assert res.found and res.verified(m)
    for z in res.price_system.z.values():
        assert z[0] == z[1] > 0
    strict = find_cps(m, strict=True)
    assert not strict.found and strict.epsilon == 0
    assert strict.verified(m)


def test_one_asset_tree_has_unit_prices():
    nodes = [("r", None, 0, [[1]]), ("a", "r", 1, [[1]]), ("b", "r", 1, [[1]])]
    m = build_model(1, nodes, {"a": F(1, 3), "b": F(2, 3)})
    res = find_cps(m)
    assert all(z == (1,) for z in res.price_system.z.values())


def test_truncated_cascade_has_no_cps():
    m = ex.ex43(2)
    res = find_cps(m)
    assert not res.found
    assert res.outcome.farkas is not None
    assert res.verified(m)


def test_uniqueness_bounds_examples():
    assert cps_uniqueness_bounds(ex.ex41(), "root", 1) == (1, 1)
    assert cps_uniqueness_bounds(ex.ex42(), "root", 1) == (1, 1)
    lo, hi = cps_uniqueness_bounds(trinomial(), "a", 1)
    assert (lo, hi) == (0, 2)
    # float oracle over martingale measures q: Z^2(a) = 2 q_a / P(a)
    for sense in (1, -1):
        r = linprog([sense * 6, 0, 0], A_eq=[[2, 1, 0.5], [1, 1, 1]], b_eq=[1, 1], bounds=[(0, 1)] * 3)
        assert abs(sense * r.fun - float(lo if sense == 1 else hi)) < 1e-9


def test_bounds_need_a_cps():
    with pytest.raises(ModelError):
        cps_uniqueness_bounds(binomial(up=2, down=F(3, 2)), "r", 1)


def test_witness_of_frictionless_model_is_itself():
    m = binomial()
    # Z = (dQ/dP)(1, S) with q_up = 1/3
    ps = PriceSystem({"r": (F(1), F(1)), "u": (F(2, 3), F(4, 3)), "d": (F(4, 3), F(2, 3))})
    assert not verify_price_system(m, ps)
    w = frictionless_witness(m, ps)
    assert model_to_obj(w)["nodes"] == model_to_obj(m)["nodes"]


def test_ex41_witness_touches_the_spread():
    m = ex.ex41()
    w = frictionless_witness(m, find_cps(m).price_system)
    assert w.pi("root").pi[0][1] == m.pi("root").pi[0][1] == 1
    assert w.pi("root").pi[1][0] == 1 < m.pi("root").pi[1][0]


def test_verify_price_system_catches_problems():
    m = ex.ex41()
    bad = PriceSystem({"root": (F(1), F(3)), "w": (F(1), F(3))})
    assert any("dual-cone" in p for p in verify_price_system(m, bad))
    drift = PriceSystem({"root": (F(1), F(1)), "w": (F(2), F(2))})
    assert any("martingale" in p for p in verify_price_system(m, drift))


@pytest.mark.parametrize("make", [ex.ex41, ex.ex42])
def test_one_share_costs_one(make):
    m = make()
    v = constant_claim(m, [0, 1])
    res = superhedge(m, v, 0)
    assert res.price == 1 and res.gap == 0
    assert verify_superhedge(m, v, res)


def test_zero_claim_is_free():
    m = ex.ex42()
    res = superhedge(m, zero_claim(m), 0)
    assert res.price == 0 and verify_superhedge(m, zero_claim(m), res)


def test_superhedge_call_in_binomial_matches_replication():
    m = binomial()
    # call struck at 1 paid in the bank account: 1 at the up node, 0 down
    v = lift(m, "u", [1, 0])
    res = superhedge(m, v, 0)
    # risk-neutral q_up = (1 - 1/2) / (2 - 1/2) = 1/3
    assert res.price == F(1, 3)
    assert res.dual_is_cps and verify_superhedge(m, v, res)


def test_superhedge_under_arbitrage_is_unbounded():
    m = binomial(up=2, down=F(3, 2))
    v = constant_claim(m, [0, 1])
    res = superhedge(m, v, 0)
    assert res.price is None and verify_superhedge(m, v, res)


def test_superhedge_numeraire_range():
    with pytest.raises(ValueError):
        superhedge(ex.ex41(), constant_claim(ex.ex41(), [0, 1]), 2)


def test_random_superhedge_duality():
    rng = random.Random(12)
    for _ in range(15):
        m = random_model(rng, horizon=rng.randint(1, 2))
        if not find_cps(m).found:
            continue
        w = [F(rng.randint(-2, 2)) for _ in range(m.d)]
        v = lift(m, rng.choice(m.tree.leaves), w)
        res = superhedge(m, v, 0)
        assert res.gap == 0 and verify_superhedge(m, v, res)
