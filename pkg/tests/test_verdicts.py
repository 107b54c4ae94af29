from fractions import Fraction as F

import pytest

from helpers import binomial, frictionless, spread_model
from tcarb import examples as ex
from tcarb.claims import AttainableCone, member_attainable
from tcarb.pricing import UnsupportedModel
from tcarb.scenario import NodeCone, build_model
from tcarb.verdicts import (
    InternalInconsistency,
    check_ef,
    check_mixed,
    check_na,
    check_naps,
    check_nar,
    check_nas,
    check_nawps,
    check_nullspace,
    check_penner,
    consistency,
    run_all,
)

EX41 = {"NA": True, "NAs": True, "NAps": True, "NAr": False, "NAwps": True, "EF": False, "Penner": False, "nullspace": False}


def test_ex41_vector():
    rep = run_all(ex.ex41())
    assert rep.vector() == EX41
    assert rep.verify()
    assert all(r["ok"] for r in rep.consistency)


def test_ex42_vector():
    rep = run_all(ex.ex42())
    v = rep.vector()
    assert (v["NA"], v["NAps"], v["NAwps"], v["NAr"]) == (True, False, True, False)
    assert v["EF"] and not v["NAs"]
    assert rep.verify()


def test_ex42_naps_certificate():
    v = check_naps(ex.ex42())
    bad = [p for p in v.certificate["per_t"] if not p["holds"]]
    assert len(bad) == 1
    assert bad[0]["direction"] == [-1, 1]
    assert bad[0]["build_times"] == [0]
    assert v.verify()


def test_frictionless_binomial_passes_everything_but_ef():
    rep = run_all(binomial())
    v = rep.vector()
    assert v["NA"] and v["NAr"] and v["nullspace"] and v["NAps"] and v["NAs"]
    assert not v["EF"]
    # the children's K^0 only meet in 0, so Penner holds vacuously
    assert v["Penner"] is True


def test_frictionless_arbitrage_is_detected_with_a_claim():
    m = binomial(up=2, down=F(3, 2))
    v = check_na(m)
    assert not v.holds and v.verify()
    cone = AttainableCone(m, 0, 1)
    claim = v.details["claim"]
    assert claim.is_nonnegative() and not claim.is_zero()
    assert member_attainable(cone, claim)[0]


def test_ef_examples():
    assert check_ef(spread_model([[1, 2], [1, 1]], [[1, 2], [1, 1]])).holds
    assert not check_ef(ex.ex41()).holds


def test_nas_on_ef_model_without_trades():
    m = spread_model([[1, 2], [1, 1]], [[1, 2], [1, 1]])
    assert check_nas(m).holds and check_nullspace(m).holds


def test_penner_examples():
    assert not check_penner(ex.ex41()).holds
    m = spread_model(frictionless(2), frictionless(2))
    assert check_penner(m).holds
    ef = spread_model([[1, 2], [1, 1]], [[1, 3], [1, 1]])
    assert check_penner(ef).holds


def test_nullspace_ex41_null_strategy():
    v = check_nullspace(ex.ex41())
    assert not v.holds and v.verify()


def test_trivial_one_node_model():
    m = build_model(1, [("r", None, 0, [[1]])], {"r": 1})
    rep = run_all(m)
    assert rep.vector()["NA"] and rep.vector()["NAps"]


def test_nawps_witness_for_ex42():
    v = check_nawps(ex.ex42())
    assert v.holds and v.certificate["witness_naps"]
    w = v.certificate["witness"]
    assert w["root"] == [[1, 1], [1, 1]] and w["w"] == [[1, 1], [1, 1]]


def test_mixed_condition_examples():
    assert check_mixed(ex.ex41(), ex.ex41()).holds
    v = check_mixed(ex.ex42(), ex.ex42())
    assert not v.holds
    assert v.certificate["failed_t"] == check_naps(ex.ex42()).certificate["failed_t"]
    with pytest.raises(ValueError, match="more favorable"):
        check_mixed(ex.ex41(), ex.ex42())


def test_mixed_condition_on_truncated_cascade_is_reported():
    m = ex.ex43(2)
    v = check_mixed(m, ex.ex43(2, witness=True))
    assert [p["holds"] for p in v.certificate["per_t"]][0] is True
    assert v.verify()


def test_generator_form_models():
    gens = NodeCone(generators=((F(-1), F(1)), (F(1), F(-2)), (F(-1), F(0)), (F(0), F(-1))))
    m = build_model(2, [("r", None, 0, gens), ("w", "r", 1, gens)], {"w": 1})
    assert check_na(m).holds and check_naps(m).holds
    assert check_nar(m).holds is None
    with pytest.raises(UnsupportedModel):
        check_mixed(m, m)


def test_consistency_rules():
    assert all(r["ok"] for r in consistency(EX41))
    bad = dict(EX41, NAr=True)
    assert any(r["ok"] is False for r in consistency(bad))


def test_unknown_condition():
    with pytest.raises(ValueError):
        run_all(ex.ex41(), ["NAx"])


def test_inconsistency_is_raised(monkeypatch):
    from tcarb import verdicts

    real = verdicts.CHECKS["NAr"]

    def fake(m):
        v = real(m)
        v.holds = True
        return v

    monkeypatch.setitem(verdicts.CHECKS, "NAr", fake)
    with pytest.raises(InternalInconsistency):
        run_all(ex.ex42(), ["NAr", "NAps"])
