"""Command-line front end.

Every command prints one JSON document on stdout (``--pretty`` for a
plain listing).  Classes and input indices are 1-based here.  Exit codes:
0 success, 1 self-check failure, 2 usage or input error, 3 empty class,
4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import List, Optional, Sequence

from . import analysis, oracle
from .bdd import BudgetExceeded
from .builder import BuildAborted, build, partition_violations
from .encoder import FixedIndices, HammingBall, Region, region_size
from .model import InputSample, ModelError, generate_random, load_input, load_model, save_model

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_EMPTY, EXIT_BUDGET = 0, 1, 2, 3, 4

SELFCHECK_LIMIT = 1 << 20


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE, payload: dict = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


def fmt_decimal(x: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 6
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def fmt_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_region(spec: str, width: int) -> Region:
    """``full``, ``hamming:<file>:<r>`` or ``fixed:<file>:<i,j,...>`` (1-based)."""
    if spec == "full":
        return HammingBall(InputSample((0,) * width), width)
    kind, _, rest = spec.partition(":")
    path, sep, arg = rest.rpartition(":")
    if kind not in ("hamming", "fixed") or not sep or not path:
        raise CliError(f"bad region {spec!r}; expected full, hamming:<file>:<r> "
                       f"or fixed:<file>:<indices>")
    center = load_input(path, width)
    if kind == "hamming":
        try:
            r = int(arg)
        except ValueError:
            raise CliError(f"bad radius {arg!r}") from None
        if not 0 <= r <= width:
            raise CliError(f"radius {r} outside [0, {width}]")
        return HammingBall(center, r)
    try:
        idx = [int(t) for t in arg.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"bad index list {arg!r}") from None
    bad = [i for i in idx if not 1 <= i <= width]
    if bad:
        raise CliError(f"indices {bad} outside [1, {width}]")
    return FixedIndices(center, frozenset(i - 1 for i in idx))


def parse_cube(text: str, width: int) -> List[tuple]:
    lits = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            v = int(tok)
        except ValueError:
            raise CliError(f"bad literal {tok!r}") from None
        if v == 0 or abs(v) > width:
            raise CliError(f"literal {tok} outside [1, {width}]")
        lits.append((abs(v) - 1, v > 0))
    return sorted(set(lits))


def budgets(args) -> dict:
    node = args.node_budget
    if node is None and os.environ.get("BNNBDD_NODE_BUDGET"):
        node = int(os.environ["BNNBDD_NODE_BUDGET"])
    secs = args.time_budget
    if secs is None and os.environ.get("BNNBDD_TIME_BUDGET_S"):
        secs = float(os.environ["BNNBDD_TIME_BUDGET_S"])
    return {"node_budget": node, "time_budget": secs}


def class_index(value: int, s: int, flag: str) -> int:
    if not 1 <= value <= s:
        raise CliError(f"{flag} {value} outside [1, {s}]")
    return value - 1


def _partition(args):
    model = load_model(args.model)
    region = parse_region(args.region, model.input_width)
    return model, region, build(model, region, **budgets(args))


# ----------------------------------------------------------------------
# commands


def cmd_build(args) -> dict:
    model, region, part = _partition(args)
    stats = part.stats.as_dict()
    return {
        "arch": model.arch,
        "region_size": str(part.region_size),
        "counts": [str(c) for c in part.counts()],
        "time_s": stats["time_s"],
        "nodes": stats["peak_nodes"],
        "output_nodes": stats["output_nodes"],
        "blocks": stats["blocks"],
    }


def cmd_robust(args) -> dict:
    model, region, part = _partition(args)
    g = class_index(args.label, model.num_classes, "--label")
    rep = analysis.class_distribution(part, g)
    pr = rep.proportion
    return {
        "label": args.label,
        "region_size": str(rep.region_size),
        "counts": [str(c) for c in rep.counts],
        "adv": str(rep.adversarial),
        "pr": fmt_fraction(pr),
        "pr_decimal": fmt_decimal(pr),
        "robust": rep.robust,
    }


def cmd_target(args) -> dict:
    model, region, part = _partition(args)
    t = class_index(args.target, model.num_classes, "--target")
    count = analysis.targeted_count(part, t)
    return {"target": args.target, "region_size": str(part.region_size),
            "count": str(count), "target_robust": count == 0}


def cmd_maxhd(args) -> dict:
    model = load_model(args.model)
    u = load_input(args.input, model.input_width)
    g = class_index(args.label, model.num_classes, "--label")
    if not 0 <= args.r0 <= model.input_width:
        raise CliError(f"--r0 {args.r0} outside [0, {model.input_width}]")
    try:
        eps = analysis.to_fraction(args.eps)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"bad threshold {args.eps!r}") from None
    res = analysis.max_safe_hamming(model, u, args.r0, eps, g, **budgets(args))
    doc = {
        "sd": res.radius,
        "complete": res.complete,
        "eps": fmt_fraction(eps),
        "trace": [{"r": r, "pr": fmt_fraction(p), "pr_decimal": fmt_decimal(p)}
                  for r, p in res.trace],
    }
    if not res.complete:
        raise CliError("resource budget exceeded; sd is the best certified bound",
                       EXIT_BUDGET, doc)
    return doc


def cmd_explain(args) -> dict:
    model, region, part = _partition(args)
    t = class_index(args.target, model.num_classes, "--target")
    try:
        if args.kind == "pi":
            exp = analysis.pi_explanation(part, t)
        else:
            exp = analysis.essential_features(part, t)
    except analysis.EmptyClassError:
        raise CliError("class unreachable in region", EXIT_EMPTY,
                       {"target": args.target, "count": "0"}) from None
    return {"kind": exp.kind, "target": args.target, "literals": exp.signed()}


def cmd_gen(args) -> dict:
    model = generate_random(args.arch, args.seed)
    save_model(model, args.out)
    return {"arch": model.arch, "seed": args.seed, "out": args.out}


def cmd_selfcheck(args) -> dict:
    if args.model:
        model = load_model(args.model)
    elif args.arch:
        try:
            model = generate_random(args.arch, args.seed)
        except ModelError as exc:
            raise CliError(str(exc)) from None
    else:
        raise CliError("selfcheck needs --model or --arch")
    region = parse_region(args.region, model.input_width)
    size = region_size(region)
    if size > SELFCHECK_LIMIT:
        raise CliError(f"region has {size} points, over the self-check limit of "
                       f"{SELFCHECK_LIMIT}", EXIT_BUDGET)
    part = build(model, region, **budgets(args))

    if args.verify_cube is not None:
        if args.target is None:
            raise CliError("--verify-cube needs --target")
        t = class_index(args.target, model.num_classes, "--target")
        cube = parse_cube(args.verify_cube, model.input_width)
        return _verify_cube(model, region, t, cube, size)

    problems = partition_violations(part)
    diverged = None
    for x in oracle.enumerate_region(region):
        want = oracle.evaluate(model, x)
        got = part.classify(x)
        if got != want:
            diverged = {"input": "".join(map(str, x)), "oracle": want + 1,
                        "bdd": None if got is None else got + 1}
            break
    status = "PASS" if diverged is None and not problems else "FAIL"
    return {"status": status, "arch": model.arch, "points": str(size),
            "counts": [str(c) for c in part.counts()],
            "first_divergence": diverged, "partition_problems": problems}


def _verify_cube(model, region, t, cube, size) -> dict:
    """Brute-force sufficiency and per-literal minimality of a cube."""
    points = [(x, oracle.evaluate(model, x)) for x in oracle.enumerate_region(region)]

    def sufficient(lits):
        return all(c == t for x, c in points
                   if all(bool(x[v]) == pos for v, pos in lits))

    suff = sufficient(cube)
    redundant = [(v + 1) if pos else -(v + 1) for i, (v, pos) in enumerate(cube)
                 if sufficient(cube[:i] + cube[i + 1:])]
    status = "PASS" if suff and not redundant else "FAIL"
    return {"status": status, "points": str(size), "sufficient": suff,
            "redundant_literals": redundant}


# ----------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bnnbdd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True, region=True):
        if model:
            sp.add_argument("--model", required=True, help="model JSON file")
        if region:
            sp.add_argument("--region", required=True,
                            help="full | hamming:<file>:<r> | fixed:<file>:<i,j,...>")
        sp.add_argument("--node-budget", type=int, default=None)
        sp.add_argument("--time-budget", type=float, default=None, help="seconds")
        sp.add_argument("--pretty", action="store_true", help="human-readable output")

    sp = sub.add_parser("build", help="build class BDDs and report counts")
    common(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("robust", help="adversarial count against a ground-truth label")
    common(sp)
    sp.add_argument("--label", type=int, required=True)
    sp.set_defaults(func=cmd_robust)

    sp = sub.add_parser("target", help="points classified as a target class")
    common(sp)
    sp.add_argument("--target", type=int, required=True)
    sp.set_defaults(func=cmd_target)

    sp = sub.add_parser("maxhd", help="maximal safe Hamming distance")
    common(sp, region=False)
    sp.add_argument("--input", required=True, help="0/1 input file")
    sp.add_argument("--r0", type=int, required=True, help="start radius")
    sp.add_argument("--eps", required=True, help="threshold, e.g. 0.05 or 1/20")
    sp.add_argument("--label", type=int, required=True)
    sp.set_defaults(func=cmd_maxhd)

    sp = sub.add_parser("explain", help="prime-implicant or essential-feature explanation")
    common(sp)
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("--kind", choices=("pi", "ef"), required=True)
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("gen", help="write a random model")
    sp.add_argument("--arch", required=True, help="e.g. 9:20:10")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("selfcheck", help="compare the BDDs with brute-force evaluation")
    common(sp, model=False, region=False)
    sp.add_argument("--model", help="model JSON file (instead of --arch)")
    sp.add_argument("--arch")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--region", default="full")
    sp.add_argument("--verify-cube", help="signed 1-based literals, e.g. --verify-cube=+1,-3")
    sp.add_argument("--target", type=int)
    sp.set_defaults(func=cmd_selfcheck)
    return p


def emit(doc: dict, pretty: bool, stream=None) -> None:
    stream = stream or sys.stdout
    if not pretty:
        stream.write(json.dumps(doc) + "\n")
        return
    width = max((len(k) for k in doc), default=0)
    for k, v in doc.items():
        if isinstance(v, list) and v and isinstance(v[0], dict):
            stream.write(f"{k}:\n")
            for row in v:
                stream.write("  " + "  ".join(f"{a}={b}" for a, b in row.items()) + "\n")
        else:
            if isinstance(v, list):
                v = " ".join(map(str, v))
            stream.write(f"{k.ljust(width)}  {v}\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    pretty = getattr(args, "pretty", False)
    try:
        doc = args.func(args)
    except CliError as exc:
        emit({"error": str(exc), **exc.payload}, pretty)
        print(f"bnnbdd: {exc}", file=sys.stderr)
        return exc.code
    except BuildAborted as exc:
        emit({"error": str(exc), "stats": exc.stats.as_dict()}, pretty)
        print(f"bnnbdd: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except BudgetExceeded as exc:
        emit({"error": str(exc), "nodes": exc.nodes}, pretty)
        print(f"bnnbdd: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ModelError, OSError, ValueError) as exc:
        emit({"error": str(exc)}, pretty)
        print(f"bnnbdd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(doc, pretty)
    if doc.get("status") == "FAIL":
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
