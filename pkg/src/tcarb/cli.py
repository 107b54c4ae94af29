"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 internal inconsistency.
All JSON output is canonical (sorted where order is not meaningful,
rationals as integers or "p/q" strings) so runs diff byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import examples as ex
from .claims import claim_from_obj, constant_claim
from .decompose import DecompositionError, decompose_order, verify_decomposition
from .exactlp import set_dump_dir
from .pricing import UnsupportedModel, cps_uniqueness_bounds, find_cps, superhedge, verify_superhedge
from .rational import RationalError, to_rational
from .scenario import ModelError, dumps, json_num, load_json, model_from_obj, parse_model, serialize_model, validate_model
from .verdicts import ALL_CONDITIONS, InternalInconsistency, run_all

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3

CONDITION_NAMES = {c.lower(): c for c in ALL_CONDITIONS}


class InputError(Exception):
    pass


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_model(path: str):
    return parse_model(_read(path))


def _emit(obj, out=None) -> None:
    (out or sys.stdout).write(dumps(obj))


def _parse_conditions(text: str | None) -> list[str]:
    if not text:
        return list(ALL_CONDITIONS)
    conds = []
    for name in text.split(","):
        key = name.strip().lower()
        if key not in CONDITION_NAMES:
            raise InputError(f"unknown condition {name.strip()!r}; choose from {', '.join(CONDITION_NAMES)}")
        conds.append(CONDITION_NAMES[key])
    return conds


def _parse_order(text: str) -> dict[tuple[int, int], Fraction]:
    """Order as a JSON list of [i, j, qty] triples with 1-based assets."""
    obj = load_json(text)
    if not isinstance(obj, list):
        raise InputError("--order must be a JSON list of [i, j, qty] triples")
    if obj and not isinstance(obj[0], list):
        obj = [obj]
    lam: dict[tuple[int, int], Fraction] = {}
    for trip in obj:
        if not (isinstance(trip, list) and len(trip) == 3):
            raise InputError(f"bad order entry {trip!r}; expected [i, j, qty]")
        i, j, q = trip
        if not (isinstance(i, int) and isinstance(j, int)):
            raise InputError(f"asset indices must be integers in {trip!r}")
        lam[(i - 1, j - 1)] = lam.get((i - 1, j - 1), Fraction(0)) + to_rational(q)
    return lam


def _parse_vector(text: str) -> list[Fraction]:
    return [to_rational(x.strip()) for x in text.split(",")]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    m = model_from_obj(load_json(_read(args.path)), validate=False)
    rep = validate_model(m)
    _emit(rep.to_json())
    return EXIT_OK if rep.ok else EXIT_INPUT


def _text_report(rep, timings: bool) -> str:
    lines = [f"model: {rep.model}"]
    for c, v in rep.verdicts.items():
        mark = "holds" if v.holds else "fails"
        extra = f"  ({v.ms:.1f} ms)" if timings and v.ms is not None else ""
        lines.append(f"{c:<10}{mark}{extra}")
        if v.holds is False:
            for rec in v.certificate.get("per_t", []):
                if not rec["holds"]:
                    where = f"t={rec['t']}, built at t in {rec['build_times']}"
                    lines.append(f"{'':<10}{where}: direction {rec.get('direction', 'per leaf')}")
    for r in rep.consistency:
        lines.append(f"check {r['rule']}: {'ok' if r['ok'] else 'VIOLATED'}")
    return "\n".join(lines)


def cmd_check(args) -> int:
    conds = _parse_conditions(args.conditions)
    m = _load_model(args.path)
    if args.dump_lp:
        os.makedirs(args.dump_lp, exist_ok=True)
        set_dump_dir(args.dump_lp)
    try:
        rep = run_all(m, conds)
    finally:
        set_dump_dir(None)
    if not rep.verify():
        raise InternalInconsistency("a certificate failed re-verification")
    if args.text:
        print(_text_report(rep, args.timings))
    else:
        _emit(rep.to_json(timings=args.timings))
    return EXIT_OK


def cmd_cps(args) -> int:
    m = _load_model(args.path)
    res = find_cps(m, strict=args.strict)
    if not res.verified(m):
        raise InternalInconsistency("price-system certificate failed re-verification")
    out = res.to_json(m)
    if args.bounds:
        node, asset = args.bounds
        if node not in m.tree.by_id:
            raise InputError(f"unknown node {node!r}")
        try:
            i = int(asset)
        except ValueError:
            raise InputError(f"asset must be an integer, got {asset!r}") from None
        if not 1 <= i <= m.d:
            raise InputError(f"asset {i} out of range 1..{m.d}")
        lo, hi = cps_uniqueness_bounds(m, node, i - 1)
        out["bounds"] = {"node": node, "asset": i, "normalization": "Z^1(root) = 1", "min": json_num(lo), "max": json_num(hi)}
    _emit(out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    m = _load_model(args.path)
    if args.node not in m.tree.by_id:
        raise InputError(f"unknown node {args.node!r}")
    dec = decompose_order(m, args.node, _parse_order(args.order))
    problems = verify_decomposition(m, dec)
    if problems:
        raise InternalInconsistency("decomposition failed verification: " + "; ".join(problems))
    _emit(dec.to_json(m))
    return EXIT_OK


def cmd_superhedge(args) -> int:
    m = _load_model(args.path)
    if args.claim:
        obj = load_json(_read(args.claim))
        if not isinstance(obj, dict):
            raise InputError("claim file must map leaf ids to vectors")
        v = claim_from_obj(m, obj)
    else:
        w = _parse_vector(args.constant)
        if len(w) != m.d:
            raise InputError(f"--constant needs {m.d} entries")
        v = constant_claim(m, w)
    if not 1 <= args.numeraire <= m.d:
        raise InputError(f"numeraire {args.numeraire} out of range 1..{m.d}")
    res = superhedge(m, v, args.numeraire - 1)
    if not verify_superhedge(m, v, res):
        raise InternalInconsistency("superhedging certificate failed re-verification")
    _emit(res.to_json(m))
    return EXIT_OK


def cmd_examples(args) -> int:
    if args.name == "ex41":
        m = ex.ex41()
    elif args.name == "ex42":
        m = ex.ex42()
    else:
        if args.n_max < 1:
            raise InputError("--n-max must be at least 1")
        m = ex.ex43(args.n_max, witness=args.witness)
    text = serialize_model(m)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_properties(args) -> int:
    from .properties import run_suites

    res = run_suites(seed=args.seed, count=args.count)
    _emit(res.to_json())
    return EXIT_OK if res.ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tcarb", description="Exact no-arbitrage checks for markets with proportional transaction costs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file against the axioms")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="decide no-arbitrage conditions")
    p.add_argument("path")
    p.add_argument("--conditions", help="comma list of " + ",".join(CONDITION_NAMES))
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (default)")
    fmt.add_argument("--text", action="store_true", help="one line per condition")
    p.add_argument("--timings", action="store_true", help="include wall-clock ms per verdict")
    p.add_argument("--dump-lp", metavar="DIR", help="write every LP solved to DIR")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("cps", help="find a consistent price system")
    p.add_argument("path")
    p.add_argument("--strict", action="store_true", help="require Z(u) in the relative interior")
    p.add_argument("--bounds", nargs=2, metavar=("NODE", "ASSET"), help="range of Z^ASSET(NODE) over CPSs with Z^1(root) = 1")
    p.set_defaults(func=cmd_cps)

    p = sub.add_parser("decompose", help="split an order into reversible and pure parts")
    p.add_argument("path")
    p.add_argument("--node", required=True)
    p.add_argument("--order", required=True, help='JSON triples, e.g. "[[1,2,1]]"')
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("superhedge", help="superhedging price of a claim")
    p.add_argument("path")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--claim", metavar="FILE", help="JSON {leaf: [d numbers]}")
    src.add_argument("--constant", metavar="VEC", help="same portfolio at every leaf, e.g. 0,1")
    p.add_argument("--numeraire", type=int, default=1)
    p.set_defaults(func=cmd_superhedge)

    p = sub.add_parser("examples", help="write a reference model")
    p.add_argument("name", choices=["ex41", "ex42", "ex43"])
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--witness", action="store_true", help="ex43 only: the friendlier process at t=1")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("properties", help="run the randomized property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=200)
    p.set_defaults(func=cmd_properties)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ModelError, RationalError, DecompositionError, UnsupportedModel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, ModelError) and getattr(exc, "violations", None):
            for v in exc.violations:
                print(f"  [{v.node}] {v.rule}: {v.detail}", file=sys.stderr)
        return EXIT_INPUT
    except InternalInconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
