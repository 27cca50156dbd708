"""Command-line front end: ``gen``, ``run``, ``identify``, ``entanglement``, ``mc``.

Exit status is 0 on success, 1 when ``--expect-perfect`` is not met and 2 on
usage or validation errors.  Output files go to ``-o`` or, failing that, to
``$LOCDISC_OUTDIR`` (default: the working directory).  JSON is written with
sorted keys, so repeated runs differ only in the ``created`` field.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .builders import (
    attach_resource,
    build_assisted_tree,
    build_extended_tree,
    build_hadamard_tree,
    build_nonmax_tree,
    build_teleportation_tree,
)
from .engine import ProtocolError, classify_adaptivity, restrict_protocol, verify_perfect_discrimination
from .entanglement import mc_assisted_discrimination
from .families import (
    NonMaxParams,
    StateSet,
    extend_with_product,
    gen_canonical_set,
    gen_hadamard_set_4x4,
    gen_nonmax_set,
    subset,
)
from .identify import SearchConfig, WitnessProblem, certify_2x2, check_set, search_numeric
from .states import DimensionError, StateVector, epr

OUTDIR_ENV = "LOCDISC_OUTDIR"
PROTOCOLS = ("assisted", "hadamard", "nonmax", "teleportation", "extended")


class UsageError(ValueError):
    pass


def _out_path(arg, default_name: str) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get(OUTDIR_ENV, ".")) / default_name


def _stamp(payload: dict, args) -> dict:
    payload["command"] = args.command
    payload["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    if getattr(args, "seed", None) is not None:
        payload["seed"] = args.seed
    return payload


def _index_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "canonical":
        if args.d is None:
            raise UsageError("--d is required for the canonical family")
        s = gen_canonical_set(args.d)
    elif fam == "hadamard4":
        s = gen_hadamard_set_4x4()
    elif fam == "nonmax":
        if args.params:
            p = NonMaxParams(*args.params)
        elif args.angles:
            p = NonMaxParams.from_angles(*args.angles)
        else:
            p = NonMaxParams.symmetric()
        s = gen_nonmax_set(p)
    else:
        raise UsageError(f"unknown family {fam!r}")
    if args.extend:
        m, n = _index_list(args.extend)
        s = extend_with_product(s, (m, n))
    if args.subset:
        s = subset(s, [i - 1 for i in _index_list(args.subset)])
    out = _out_path(args.output, f"set-{fam}.json")
    jsonio.dump(jsonio.set_to_json(s), out)
    print(out)
    return 0


def _resource(text: str) -> StateVector | None:
    if text == "none":
        return None
    if text == "epr":
        return epr()
    if text.startswith("schmidt:"):
        lam = [float(t) for t in text[len("schmidt:"):].split(",")]
        return StateVector(len(lam), len(lam), np.diag(np.sqrt(lam)).ravel())
    return jsonio.state_from_json(jsonio.load(text))


def protocol_for(s: StateSet, name: str):
    """Build the named protocol for ``s`` (which is given without its resource)."""
    if name == "assisted":
        if s.family_tag == "custom" and s.params.get("parent_family") in ("canonical-d", "two-qubit"):
            d = int(s.params["parent_params"]["d"])
            return restrict_protocol(build_assisted_tree(d), s.params["indices"])
        return build_assisted_tree(s.dims[0])
    if name == "hadamard":
        return build_hadamard_tree()
    if name == "nonmax":
        return build_nonmax_tree(NonMaxParams(**{k: s.params[k] for k in "abcdefgh"}))
    if name == "teleportation":
        return build_teleportation_tree(s)
    if name == "extended":
        return build_extended_tree(s)
    raise UsageError(f"unknown protocol {name!r}; choose from {PROTOCOLS}")


def _load_protocol(args, s):
    if args.protocol_file:
        return jsonio.protocol_from_json(jsonio.load(args.protocol_file))
    if not args.protocol:
        raise UsageError("give --protocol or --protocol-file")
    return protocol_for(s, args.protocol)


def cmd_run(args) -> int:
    s = jsonio.set_from_json(jsonio.load(args.set))
    p = _load_protocol(args, s)
    if args.flat and not hasattr(p, "alice"):
        a = classify_adaptivity(p)
        if not a.flattenable:
            raise UsageError(f"protocol is not LO-flattenable: {a.reason}")
        p = a.flat
    res = _resource(args.resource)
    target = s if res is None else attach_resource(s, res)
    report = verify_perfect_discrimination(p, target)
    report.meta = {"resource": args.resource, "set": str(args.set)}
    out = _out_path(args.output, "report.json")
    jsonio.dump(_stamp(jsonio.report_to_json(report), args), out)
    out.with_suffix(".csv").write_text(jsonio.report_to_csv(report))
    print(f"perfect={report.perfect} error={report.error} -> {out}")
    if args.expect_perfect and not report.perfect:
        return 1
    return 0


def cmd_identify(args) -> int:
    s = jsonio.set_from_json(jsonio.load(args.set))
    cfg = SearchConfig(
        samples=args.samples, seed=args.seed, partitions=args.partitions, workers=args.workers,
        polish_starts=args.polish_starts,
    )
    if args.index is not None:
        if not 1 <= args.index <= len(s):
            raise UsageError(f"--index {args.index} out of range 1..{len(s)}")
        problem = WitnessProblem.from_set(s, args.index - 1)
        if s.dims == (2, 2) and len(s) <= 3:
            verdicts = [certify_2x2(problem)]
        else:
            verdicts = [search_numeric(problem, cfg)]
    else:
        verdicts = check_set(s, cfg)
    payload = {"verdicts": [jsonio.verdict_to_json(v) for v in verdicts], "samples": args.samples}
    out = _out_path(args.output, "verdicts.json")
    jsonio.dump(_stamp(payload, args), out)
    for v in verdicts:
        print(f"state {v.target + 1}: {v.status} (overlap {v.overlap:.3g}, max overlap {v.max_overlap:.3g})")
    return 0


def cmd_entanglement(args) -> int:
    s = jsonio.set_from_json(jsonio.load(args.set))
    rep = jsonio.entanglement_report(s)
    out = _out_path(args.output, "entanglement.json")
    jsonio.dump(_stamp(rep, args), out)
    out.with_suffix(".csv").write_text(jsonio.entanglement_report_to_csv(rep))
    print(f"average entropy {rep['average_entropy']:.6f} bits -> {out}")
    return 0


def cmd_mc(args) -> int:
    s = jsonio.set_from_json(jsonio.load(args.set))
    p = _load_protocol(args, s)
    res = _resource(args.resource)
    if res is None:
        raise UsageError("the Monte Carlo pipeline needs a resource")
    r = mc_assisted_discrimination(s, res, p, args.trials, args.seed)
    out = _out_path(args.output, "mc.json")
    jsonio.dump(_stamp(jsonio.mc_to_json(r), args), out)
    print(f"estimate {r.estimate:.6f} +- {r.standard_error:.2g} (errors {r.error_rate}) -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="locdisc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a state set as JSON")
    g.add_argument("--family", required=True, choices=("canonical", "hadamard4", "nonmax"))
    g.add_argument("--d", type=int)
    g.add_argument("--params", type=float, nargs=8, metavar="X", help="nonmax a b c d e f g h")
    g.add_argument("--angles", type=float, nargs=4, metavar="T", help="nonmax pairs as (cos t, sin t)")
    g.add_argument("--extend", help="add product state |m n>, given as m,n")
    g.add_argument("--subset", help="keep these members (1-based, comma separated)")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    def protocol_args(p):
        p.add_argument("--set", required=True)
        p.add_argument("--resource", default="epr", help="epr | none | schmidt:l1,l2,... | state JSON path")
        p.add_argument("--protocol", choices=PROTOCOLS)
        p.add_argument("--protocol-file")
        p.add_argument("-o", "--output")

    r = sub.add_parser("run", help="verify a protocol on a set")
    protocol_args(r)
    r.add_argument("--flat", action="store_true", help="run the LO-flattened protocol")
    r.add_argument("--expect-perfect", action="store_true")
    r.set_defaults(func=cmd_run)

    i = sub.add_parser("identify", help="conclusive local identifiability")
    i.add_argument("--set", required=True)
    i.add_argument("--index", type=int, help="member to test (1-based); all members if omitted")
    i.add_argument("--samples", type=int, default=100_000)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--partitions", type=int, default=1)
    i.add_argument("--workers", type=int, default=1)
    i.add_argument("--polish-starts", type=int, default=32)
    i.add_argument("-o", "--output")
    i.set_defaults(func=cmd_identify)

    e = sub.add_parser("entanglement", help="per-state entropy and Schmidt rank")
    e.add_argument("--set", required=True)
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_entanglement)

    m = sub.add_parser("mc", help="Monte Carlo of conversion followed by discrimination")
    protocol_args(m)
    m.add_argument("--trials", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_mc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, IndexError, OSError, TypeError) as exc:
        kind = type(exc).__name__
        if isinstance(exc, DimensionError):
            kind = "dimension error"
        elif isinstance(exc, ProtocolError):
            kind = "protocol error"
        print(f"locdisc: {kind}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
