from fractions import Fraction as F

from tcarb.scenario import build_model


def frictionless(s):
    """Bid-ask matrix of a frictionless stock price s against the bank account."""
    s = F(s)
    return [[1, s], [1 / s, 1]]


def binomial(up=2, down=F(1, 2), s0=1, probs=(F(1, 2), F(1, 2))):
    nodes = [("r", None, 0, frictionless(s0)), ("u", "r", 1, frictionless(up)), ("d", "r", 1, frictionless(down))]
    return build_model(2, nodes, {"u": probs[0], "d": probs[1]}, name="binomial")


def trinomial(prices=(2, 1, F(1, 2)), s0=1):
    ids = ["a", "b", "c"]
    nodes = [("r", None, 0, frictionless(s0))] + [(k, "r", 1, frictionless(p)) for k, p in zip(ids, prices)]
    return build_model(2, nodes, {k: F(1, 3) for k in ids}, name="trinomial")


def spread_model(pi0, pi1):
    return build_model(2, [("r", None, 0, pi0), ("w", "r", 1, pi1)], {"w": 1})
