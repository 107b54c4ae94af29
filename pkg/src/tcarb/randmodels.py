"""Random small bid-ask models for the property suites.

Matrices come from frictionless prices S with multiplicative spreads
pi^{ij} = (S^j / S^i)(1 + s^{ij}), s >= 0, closed under the triangle axiom
by a min-product Floyd-Warshall pass. Some spreads are zero so that
frictionless exchanges (and hence nontrivial K^0) actually occur.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .scenario import BidAskMatrix, MarketModel, build_model

_PRICES = [Fraction(p, q) for p in (1, 2, 3, 4, 5) for q in (1, 2, 3)]
_SPREADS = [Fraction(0)] * 4 + [Fraction(1, 10), Fraction(1, 5), Fraction(1, 4), Fraction(1, 2), Fraction(1)]


def random_matrix(rng: random.Random, d: int, ef: bool = False, prices=None) -> BidAskMatrix:
    s = prices or [Fraction(1)] + [rng.choice(_PRICES) for _ in range(d - 1)]
    pi = [[Fraction(1)] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            if i != j:
                spread = rng.choice(_SPREADS[4:] if ef else _SPREADS)
                pi[i][j] = s[j] / s[i] * (1 + spread)
    for k in range(d):
        for i in range(d):
            for j in range(d):
                via = pi[i][k] * pi[k][j]
                if via < pi[i][j]:
                    pi[i][j] = via
    m = BidAskMatrix(tuple(tuple(r) for r in pi))
    assert not m.axiom_violations()
    return m


def random_model(
    rng: random.Random,
    d: int | None = None,
    horizon: int | None = None,
    branching: int = 2,
    ef: bool = False,
) -> MarketModel:
    """A random tree with d <= 3, T <= 3 and at most `branching` children per node.

    Child prices move around the parent price so that both arbitrage-free
    and arbitrage models are produced in useful proportions.
    """
    d = d or rng.randint(1, 3)
    horizon = rng.randint(1, 3) if horizon is None else horizon
    nodes = []
    prices: dict[str, list[Fraction]] = {}
    counter = [0]

    def add(nid, parent, t, s):
        prices[nid] = s
        nodes.append((nid, parent, t, random_matrix(rng, d, ef, s)))
        if t < horizon:
            for _ in range(rng.randint(1, branching)):
                counter[0] += 1
                child = [s[0]] + [x * rng.choice((Fraction(1, 2), Fraction(2, 3), Fraction(1), Fraction(3, 2), Fraction(2))) for x in s[1:]]
                add(f"u{counter[0]}", nid, t + 1, child)

    add("root", None, 0, [Fraction(1)] + [rng.choice(_PRICES) for _ in range(d - 1)])
    leaves = [nid for nid, _, t, _ in nodes if t == horizon]
    probs = random_probs(rng, leaves)
    return build_model(d, nodes, probs, name="random")


def random_probs(rng: random.Random, leaves) -> dict[str, Fraction]:
    w = [rng.randint(1, 9) for _ in leaves]
    total = sum(w)
    return {leaf: Fraction(x, total) for leaf, x in zip(leaves, w)}
