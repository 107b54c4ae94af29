"""Randomized property suites: implication chain, finite FTAP, strict
price systems, efficient friction and measure invariance."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .randmodels import random_model, random_probs
from .scenario import MarketModel
from .verdicts import EF, NA, NAPS, NAR, NAS, NAWPS, NULLSPACE, InternalInconsistency, run_all
from . import pricing

SUITES = ("chain", "ftap", "strict", "ef", "invariance", "certificates")


@dataclass
class SuiteResult:
    models: int = 0
    violations: dict[str, list[str]] = field(default_factory=lambda: {s: [] for s in SUITES})
    ef_models: int = 0
    arbitrage_models: int = 0

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def to_json(self) -> dict:
        return {
            "models": self.models,
            "models_with_ef": self.ef_models,
            "models_failing_na": self.arbitrage_models,
            "violations": {s: len(v) for s, v in self.violations.items()},
            "first_violations": {s: v[:3] for s, v in self.violations.items() if v},
        }


def model_violations(m: MarketModel, rng: random.Random) -> tuple[dict[str, list[str]], dict]:
    """Every property checked on one model, plus its verdict vector.

    Empty lists mean no violation.
    """
    out: dict[str, list[str]] = {s: [] for s in SUITES}
    try:
        rep = run_all(m)
    except InternalInconsistency as exc:
        out["chain"].append(str(exc))
        return out, {}
    v = rep.vector()
    if v[NAR] and not v[NAPS]:
        out["chain"].append("NAr holds but NAps fails")
    if v[NAPS] and not v[NAWPS]:
        out["chain"].append("NAps holds but NAwps fails")
    if v[NAWPS] and not v[NA]:
        out["chain"].append("NAwps holds but NA fails")

    cps = pricing.find_cps(m)
    if not (v[NA] == cps.found == v[NAWPS]):
        out["ftap"].append(f"NA={v[NA]} CPS={cps.found} NAwps={v[NAWPS]}")
    scps = pricing.find_cps(m, strict=True)
    if not (v[NAR] == scps.found == v[NULLSPACE]):
        out["strict"].append(f"NAr={v[NAR]} SCPS={scps.found} nullspace={v[NULLSPACE]}")
    if v[EF] and v[NAPS] != v[NAS]:
        out["ef"].append(f"EF holds, NAps={v[NAPS]} NAs={v[NAS]}")

    resampled = m.with_probabilities(random_probs(rng, m.tree.leaves))
    v2 = run_all(resampled).vector()
    if v2 != v:
        diff = sorted(c for c in v if v[c] != v2[c])
        out["invariance"].append("verdicts changed under resampling: " + ", ".join(diff))

    if not rep.verify():
        out["certificates"].append("a verdict certificate failed re-verification")
    if not (cps.verified(m) and scps.verified(m)):
        out["certificates"].append("a price-system certificate failed re-verification")
    return out, v


def run_suites(seed: int = 0, count: int = 200, ef_share: float = 0.3) -> SuiteResult:
    """`count` random models; a share of them is drawn with strictly positive spreads."""
    rng = random.Random(seed)
    res = SuiteResult()
    for k in range(count):
        m = random_model(rng, ef=rng.random() < ef_share)
        viol, vec = model_violations(m, rng)
        res.models += 1
        res.ef_models += bool(vec.get(EF))
        res.arbitrage_models += vec.get(NA) is False
        for s, items in viol.items():
            res.violations[s].extend(f"model {k}: {x}" for x in items)
    return res
