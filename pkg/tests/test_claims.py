import random
from fractions import Fraction as F

import pytest

from tcarb import examples as ex
from tcarb.claims import (
    AttainableCone,
    FarkasCertificate,
    Strategy,
    build_attainable,
    claim_from_obj,
    constant_claim,
    lift,
    lineality_attainable,
    member_attainable,
    strategy_from_obj,
    verify_strategy_claim,
    zero_claim,
)
from tcarb.randmodels import random_model
from tcarb.scenario import ModelError

QUARTER = F(1, 4)


def test_lift_examples():
    m = ex.ex41()
    assert constant_claim(m, [1, 2]).values == (1, 2)
    m43 = ex.ex43(3)
    v = lift(m43, "n1", [1, 0, 0, 0])
    hit = [k for k in range(len(m43.tree.leaves)) if v.at(k)[0] == 1]
    assert len(hit) == 12
    assert all(m43.tree.leaves[k].startswith("n1") for k in hit)
    leaf = lift(m43, "n2m1ipjm", [0, 1, 0, 0])
    assert sum(leaf.values) == 1


def test_a11_generators_ex41_and_ex42():
    a = build_attainable(ex.ex41(), 1, 1)
    assert {g.vec for g in a.generators} == {(-1, 1), (1, -1), (-1, 0), (0, -1)}
    b = build_attainable(ex.ex42(), 1, 1)
    assert (-2, 1) in {g.vec for g in b.generators}


def test_membership_examples():
    m = ex.ex41()
    a = build_attainable(m, 0, 1)
    ok, strat = member_attainable(a, constant_claim(m, [-1, 1]))
    assert ok and verify_strategy_claim(m, strat, constant_claim(m, [-1, 1]))
    ok, strat = member_attainable(a, zero_claim(m))
    assert ok and strat.nodes() == []
    v = constant_claim(m, [QUARTER, 0])
    ok, cert = member_attainable(a, v)
    assert not ok and isinstance(cert, FarkasCertificate)
    assert cert.verify(a, v)


def test_every_generator_is_a_member():
    rng = random.Random(1)
    for _ in range(10):
        m = random_model(rng, horizon=2)
        a = build_attainable(m, 0, m.tree.horizon)
        for k in range(0, len(a.generators), 3):
            ok, s = member_attainable(a, a.generator_claim(k))
            assert ok and s.induced_claim(m) == a.generator_claim(k)


def test_lineality_examples():
    m = ex.ex41()
    lin = lineality_attainable(build_attainable(m, 1, 1))
    assert lin.rank == 1 and lin.contains([1, -1])
    assert lineality_attainable(build_attainable(m, 0, 0)).rank == 0
    assert lineality_attainable(build_attainable(ex.ex42(), 1, 1)).rank == 0


def test_lineality_matches_negation_membership():
    rng = random.Random(7)
    for _ in range(8):
        m = random_model(rng, horizon=1)
        a = build_attainable(m, 0, 1)
        support = set(a.lineality_support)
        for k in range(len(a.generators)):
            ok, _ = member_attainable(a, -a.generator_claim(k))
            assert ok == (k in support)


def test_strategy_json_round_trip():
    m = ex.ex41()
    s = Strategy((0, 1), {"root": {(0, 1): F(1, 2)}}, {"w": [F(0), F(1)]})
    back = strategy_from_obj(m, s.to_json(m), (0, 1))
    assert back.induced_claim(m) == s.induced_claim(m)
    assert back.to_json(m) == {"root": {"orders": [[1, 2, "1/2"]]}, "w": {"disposal": [0, 1]}}


def test_strategy_problems():
    m = ex.ex41()
    s = Strategy((0, 0), {"w": {(0, 1): F(-1)}})
    probs = s.problems(m)
    assert any("outside the window" in p for p in probs)
    assert any("negative order" in p for p in probs)


def test_claim_from_obj_errors():
    m = ex.ex41()
    assert claim_from_obj(m, {"w": [1, "1/2"]}).values == (1, F(1, 2))
    with pytest.raises(ModelError):
        claim_from_obj(m, {"nope": [1, 1]})
    with pytest.raises(ModelError):
        claim_from_obj(m, {"w": [1]})


def _cascade(k, n_max=3):
    return Strategy((0, 3), ex.ex43_strategy_increments(n_max, k))


def test_cascade_strategy_k6_gives_quarter_e1_exactly():
    m = ex.ex43(3)
    s = _cascade(6)
    assert not s.problems(m)
    assert s.induced_claim(m) == constant_claim(m, [QUARTER, 0, 0, 0])


def test_cascade_strategy_k3_is_an_arbitrage_at_truncation():
    m = ex.ex43(3)
    s = _cascade(3)
    assert not s.problems(m)
    v = s.induced_claim(m)
    assert v.is_nonnegative() and not v.is_zero()
    # only asset 1 is left, at most 1/2 of it
    for k in range(len(m.tree.leaves)):
        x = v.at(k)
        assert x[1:] == (0, 0, 0) and 0 <= x[0] <= F(1, 2)
    a = build_attainable(m, 0, 3)
    ok, strat = member_attainable(a, v)
    assert ok and strat.induced_claim(m) == v


def test_quarter_e1_is_attainable_in_truncated_cascade():
    m = ex.ex43(3)
    a = AttainableCone(m, 0, 3)
    assert a.dim == 144
    v = constant_claim(m, [QUARTER, 0, 0, 0])
    ok, strat = member_attainable(a, v)
    assert ok
    assert verify_strategy_claim(m, strat, v)
