import random
from fractions import Fraction as F

import pytest
from scipy.optimize import linprog

from tcarb.exactlp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    DimensionError,
    LinearProgram,
    LpOutcome,
    from_dense,
    lp_solve,
    set_dump_dir,
    verify_certificate,
)


def test_trivial_max():
    p = from_dense([1], [([1], "<=", 1)])
    out = lp_solve(p)
    assert out.status == OPTIMAL
    assert out.value == 1 and out.point == [1]


def test_infeasible_has_farkas_certificate():
    # x >= 1 and x <= 0
    p = from_dense([0], [([1], ">=", 1), ([1], "<=", 0)])
    out = lp_solve(p)
    assert out.status == INFEASIBLE
    assert out.farkas is not None
    assert verify_certificate(p, out)


def test_unbounded_has_ray():
    p = from_dense([1, 1], [([1, -1], "<=", 1)])
    out = lp_solve(p)
    assert out.status == UNBOUNDED
    assert verify_certificate(p, out)
    assert sum(out.ray) > 0


def test_beale_cycling_instance_terminates():
    third = [F(1, 4), -60, F(-1, 25), 9]
    rows = [(third, "<=", 0), ([F(1, 2), -90, F(-1, 50), 3], "<=", 0), ([0, 0, 1, 0], "<=", 1)]
    p = from_dense([F(-3, 4), 150, F(-1, 50), 6], rows, sense="min")
    out = lp_solve(p, warm_start=False)
    assert out.status == OPTIMAL
    assert out.value == F(-1, 20)
    ref = linprog([-0.75, 150, -0.02, 6], A_ub=[[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]], b_ub=[0, 0, 1])
    assert abs(ref.fun - float(out.value)) < 1e-9


def test_tampered_certificate_is_rejected():
    p = from_dense([1, 2], [([1, 1], "<=", 4), ([1, 3], "<=", 6)])
    out = lp_solve(p)
    assert verify_certificate(p, out)
    bad = LpOutcome(out.status, list(out.point), out.value + F(1, 1000), dual=list(out.dual))
    assert not verify_certificate(p, bad)
    worse = LpOutcome(out.status, [x + 1 for x in out.point], out.value, dual=list(out.dual))
    assert not verify_certificate(p, worse)


def test_free_variables_and_equalities():
    p = LinearProgram(sense="min")
    x = p.var(None, None)
    y = p.var(None, 3)
    p.add({x: 1, y: 1}, "=", 2)
    p.add({x: 1, y: -1}, ">=", -10)
    p.set_objective({x: 1})
    out = lp_solve(p)
    assert out.status == OPTIMAL and out.value == -1
    assert verify_certificate(p, out)


def test_dimension_errors():
    p = LinearProgram()
    p.var()
    p.add({3: 1}, "<=", 1)
    with pytest.raises(DimensionError):
        lp_solve(p)
    with pytest.raises(ValueError):
        p.add({0: 1}, "<", 1)


def test_scale_covariance():
    rows = [([1, 2, 1], "<=", 7), ([3, 1, 0], "<=", 9), ([0, 1, 1], ">=", 1)]
    base = lp_solve(from_dense([2, 1, 3], rows)).value
    for c in (F(1, 3), F(7, 2), 5):
        assert lp_solve(from_dense([c * 2, c, c * 3], rows)).value == c * base


def _random_lp(rng):
    n, m = rng.randint(1, 5), rng.randint(1, 5)
    obj = [rng.randint(-4, 4) for _ in range(n)]
    rows = []
    for _ in range(m):
        rel = rng.choice(["<=", ">=", "="])
        rows.append(([rng.randint(-3, 3) for _ in range(n)], rel, rng.randint(-4, 6)))
    return obj, rows


@pytest.mark.parametrize("warm", [False, True])
def test_matches_scipy_on_random_programs(warm):
    rng = random.Random(11)
    for _ in range(300):
        obj, rows = _random_lp(rng)
        p = from_dense(obj, rows, upper=[10] * len(obj))
        out = lp_solve(p, warm_start=warm)
        assert verify_certificate(p, out)
        a_ub = [[-v for v in c] if r == ">=" else c for c, r, _ in rows if r != "="]
        b_ub = [-b if r == ">=" else b for _, r, b in rows if r != "="]
        a_eq = [c for c, r, _ in rows if r == "="]
        b_eq = [b for _, r, b in rows if r == "="]
        ref = linprog(
            [-c for c in obj],
            A_ub=a_ub or None,
            b_ub=b_ub or None,
            A_eq=a_eq or None,
            b_eq=b_eq or None,
            bounds=[(0, 10)] * len(obj),
        )
        if ref.status == 2:
            assert out.status == INFEASIBLE
        else:
            assert ref.status == 0
            assert out.status == OPTIMAL
            assert abs(float(out.value) + ref.fun) < 1e-7


def test_dump_writes_one_file_per_program(tmp_path):
    set_dump_dir(str(tmp_path))
    try:
        lp_solve(from_dense([1], [([1], "<=", F(3, 2))]))
    finally:
        set_dump_dir(None)
    files = sorted(tmp_path.iterdir())
    assert [f.name for f in files] == ["lp_0001.txt"]
    text = files[0].read_text()
    assert "r0: 1*x0 <= 3/2" in text
