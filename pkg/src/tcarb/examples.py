"""The three reference markets: the two deterministic one-period models and
the four-asset cascade market truncated to n, m <= n_max."""

from __future__ import annotations

from fractions import Fraction

from .scenario import BidAskMatrix, MarketModel, build_model, complete_matrix

HALF = Fraction(1, 2)
SIGNS = (-HALF, HALF)


def ex41() -> MarketModel:
    """Bid 1/2, ask 1 at t=0; frictionless price 1 at t=1."""
    return build_model(
        2,
        [("root", None, 0, [[1, 1], [2, 1]]), ("w", "root", 1, [[1, 1], [1, 1]])],
        {"w": 1},
        name="ex41",
    )


def ex42() -> MarketModel:
    """As ex41, but at t=1 the bid is 1 and the ask is 2."""
    return build_model(
        2,
        [("root", None, 0, [[1, 1], [2, 1]]), ("w", "root", 1, [[1, 2], [1, 1]])],
        {"w": 1},
        name="ex42",
    )


def _sign(x: Fraction) -> str:
    return "m" if x < 0 else "p"


def ex43_ids(n_max: int):
    """Node ids by level: n-nodes, (n,m,i)-nodes and leaves (n,m,i,j)."""
    t1 = [(n, f"n{n}") for n in range(1, n_max + 1)]
    t2 = [((n, m, i), f"n{n}m{m}i{_sign(i)}") for n in range(1, n_max + 1) for m in range(1, n_max + 1) for i in SIGNS]
    t3 = [((n, m, i, j), f"n{n}m{m}i{_sign(i)}j{_sign(j)}") for (n, m, i), _ in t2 for j in SIGNS]
    return t1, t2, t3


def _cascade_rows(a: Fraction, t: int, state=None) -> list[list]:
    """Rows of the partial matrices; holes (None) go through asset 1."""
    rows = [[None] * 4 for _ in range(4)]
    for k in range(4):
        rows[k][k] = 1
    if t == 0:
        rows[0][1:] = [1, 1, 1]
        col = [a, a, a]
    elif t == 1:
        rows[0][1:] = [a, a, a]
        col = [a, a, 1]
    elif t == 2:
        n, _, i = state[:3]
        rows[0][1:] = [a, a, a]
        col = [a, 1 / (1 + i), 1 / (1 - i / n)]
    else:
        _, m, i, j = state
        rows[0][1:] = [a, a, a]
        col = [1 / (1 + Fraction(1, 4) + j), (1 / (1 + i)) * (1 / (1 - j / m)), a]
    for k in range(3):
        rows[k + 1][0] = col[k]
    return rows


def ex43_matrix(t: int, state=None, a=5) -> BidAskMatrix:
    return complete_matrix(_cascade_rows(Fraction(a), t, state), 0)


def ex43(n_max: int = 3, a=5, witness: bool = False) -> MarketModel:
    """Cascade market with n, m in 1..n_max and uniform leaf probabilities.

    ``witness=True`` gives the more favorable process that only lowers
    pi^{13} and pi^{14} to 1 at t=1.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    a = Fraction(a)
    t1, t2, t3 = ex43_ids(n_max)
    m1 = ex43_matrix(1, a=a)
    if witness:
        rows = _cascade_rows(a, 1)
        rows[0][2] = rows[0][3] = 1
        m1 = complete_matrix(rows, 0)
    nodes = [("root", None, 0, ex43_matrix(0, a=a))]
    nodes += [(nid, "root", 1, m1) for _, nid in t1]
    nodes += [(nid, f"n{s[0]}", 2, ex43_matrix(2, s, a)) for s, nid in t2]
    nodes += [(nid, nid[:-2], 3, ex43_matrix(3, s, a)) for s, nid in t3]
    p = Fraction(1, len(t3))
    name = f"ex43-n{n_max}" + ("-witness" if witness else "")
    return build_model(4, nodes, {nid: p for _, nid in t3}, name=name)


def ex43_strategy_increments(n_max: int, k: int) -> dict[str, dict[tuple[int, int], Fraction]]:
    """Orders lambda^{ij} (0-based) of the cascade strategy xi_0^k .. xi_3^k.

    Each increment is written as a combination of transfers e^j - pi^{ij} e^i
    so that the coefficient is the order size itself.
    """
    t1, t2, t3 = ex43_ids(n_max)
    k = Fraction(k)
    orders: dict[str, dict[tuple[int, int], Fraction]] = {}
    # t=0: buy one unit of asset 2, k of asset 3 and k^2 of asset 4 at ask 1
    orders["root"] = {(0, 1): Fraction(1), (0, 2): k, (0, 3): k * k}
    for n, nid in t1:
        # sell k^2 - (k ^ n) k units of asset 4 at bid 1
        orders[nid] = {(3, 0): k * k - min(k, n) * k}
    for (n, m, i), nid in t2:
        first = min(k, n) * k * (1 - i / n)
        second = (k - min(m / (1 + i), k)) * (1 + i)
        orders[nid] = {(3, 0): first, (2, 0): second}
    for (n, m, i, j), nid in t3:
        orders[nid] = {
            (1, 0): 1 + Fraction(1, 4) + j,
            (2, 0): min(m / (1 + i), k) * (1 + i) * (1 - j / m),
        }
    for u in orders:
        orders[u] = {ij: q for ij, q in orders[u].items() if q != 0}
    return orders
