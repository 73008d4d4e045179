"""Command-line entry point.

All structured objects travel as JSON, experiment matrices as CSV; every
randomized output embeds its seed and full configuration.  Exit codes:
0 success, 2 usage error, 3 budget exhausted, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .algebra import GroupSpec
from .consistency import WidthParams, width_decide
from .experiments import (advantage, full_read_tester, no_mean_value,
                          subinstance_compare, value_concentration_experiment)
from .gadgets import GadgetInstance, geiger_construct, verify_simulation
from .hypergraphs import (check_expander_property, local_sparsity_exact,
                          sample_hypergraph)
from .instances import (assignment_from_json, assignment_to_json, decode, encode,
                        instance_to_json, relation_from_json, structure_from_json,
                        var_from_json, var_to_json, value)
from .oracle import open_session
from .reduction import (audit, completeness_witness, hypergraph_from_json,
                        hypergraph_to_json, kit_from_json, kit_to_json,
                        pair_from_json, pair_to_json, sample_pair, self_kit,
                        transform, verify_kit)
from .solver import BudgetExceededError, solve


class VerificationFailure(RuntimeError):
    """A requested check did not hold; mapped to exit code 4."""


class UsageError(RuntimeError):
    """Bad arguments or I/O refusal; mapped to exit code 2."""


def _parse_group(text: str) -> GroupSpec:
    parts = text.lower().lstrip("z").split("x")
    try:
        return GroupSpec(tuple(int(p) for p in parts))
    except (ValueError, TypeError):
        raise UsageError(f"cannot parse group {text!r}; expected e.g. z2, z3, z2x2")


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse fraction {text!r}")


def _read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _write_text(path: str, text: str, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise UsageError(f"refusing to overwrite {path}; pass --force")
    with open(path, "w") as fh:
        fh.write(text)


def _emit(payload: dict, out, force: bool) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    if out:
        _write_text(out, text, force)
    else:
        sys.stdout.write(text)


def _meta(seed, **config) -> dict:
    return {"tool": "cspdesk", "version": __version__, "seed": seed, "config": config}


def _load_kit(args, group: GroupSpec, n: int, d: int):
    if getattr(args, "kit", None):
        kit = kit_from_json(_read_json(args.kit))
    else:
        if args.l is None or args.kit_seed is None:
            raise UsageError("need either --kit or both --l and --kit-seed")
        kit = self_kit(group, n, d, args.l, args.kit_seed)
    issues = verify_kit(kit)
    if issues:
        raise VerificationFailure("kit verification failed: " + "; ".join(issues))
    return kit


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_solve(args):
    inst = decode(open(args.instance).read())
    res = solve(inst, node_budget=args.budget)
    payload = {"meta": _meta(None, instance=args.instance, budget=args.budget),
               "status": res.status,
               "witness": assignment_to_json(res.witness) if res.witness else None}
    _emit(payload, args.out, args.force)
    return 0


def _cmd_width(args):
    inst = decode(open(args.instance).read())
    answer = width_decide(inst, WidthParams(args.k, args.l))
    _emit({"meta": _meta(None, instance=args.instance, k=args.k, l=args.l),
           "answer": answer}, args.out, args.force)
    return 0


def _cmd_geiger(args):
    struct = structure_from_json(_read_json(args.structure))
    target = relation_from_json(_read_json(args.target))
    gadget = geiger_construct(struct, target)
    failure = verify_simulation(gadget)
    payload = {"meta": _meta(None, structure=args.structure, target=args.target),
               "mode": gadget.mode,
               "primaries": [var_to_json(v) for v in gadget.primaries],
               "instance": instance_to_json(gadget.instance),
               "verified": failure is None}
    if failure is not None:
        payload["failure"] = {"tuple": list(failure.tuple_), "direction": failure.direction}
    _emit(payload, args.out, args.force)
    if failure is not None:
        raise VerificationFailure(f"simulation failed on tuple {failure.tuple_}")
    return 0


def _cmd_hypergraph(args):
    if args.action == "sample":
        graph = sample_hypergraph(args.parts, args.n, args.l, args.seed)
        _emit({"meta": _meta(args.seed, parts=args.parts, n=args.n, l=args.l),
               **hypergraph_to_json(graph)}, args.out, args.force)
        return 0
    graph = hypergraph_from_json(_read_json(args.graph))
    if args.action == "check-sparsity":
        bad = local_sparsity_exact(graph.matchings, _parse_fraction(args.delta))
        _emit({"meta": _meta(None, graph=args.graph, delta=args.delta),
               "holds": bad is None,
               "violating_subset": None if bad is None else [list(v) for v in bad]},
              args.out, args.force)
        if bad is not None:
            raise VerificationFailure(f"sparsity violated by subset {bad}")
        return 0
    rel = relation_from_json(_read_json(args.relation))
    counterexample = check_expander_property(graph, rel, _parse_fraction(args.eps))
    _emit({"meta": _meta(None, graph=args.graph, relation=args.relation, eps=args.eps),
           "holds": counterexample is None,
           "counterexample": None if counterexample is None else assignment_to_json(counterexample)},
          args.out, args.force)
    if counterexample is not None:
        raise VerificationFailure("expander property falsified")
    return 0


def _cmd_pair(args):
    group = _parse_group(args.group)
    sample = sample_pair(group, args.n, args.d, args.seed)
    _emit({"meta": _meta(args.seed, group=args.group, n=args.n, d=args.d),
           **pair_to_json(sample)}, args.out, args.force)
    return 0


def _cmd_reduce(args):
    sample = pair_from_json(_read_json(args.pair))
    kit = _load_kit(args, sample.group, sample.n, sample.d)
    inst = sample.i_no if args.no else sample.i_yes
    out = transform(inst, kit)
    meta = _meta(sample.seed, pair=args.pair, l=kit.l, which="no" if args.no else "yes")
    if args.action == "transform":
        _emit({"meta": meta, "kit": kit_to_json(kit),
               "instance": instance_to_json(out.instance),
               "blocks": [{"kind": b.kind, "source": b.source,
                           "start": b.start, "end": b.end} for b in out.blocks]},
              args.out, args.force)
        return 0
    if args.action == "witness":
        witness = completeness_witness(sample, kit, out)
        val = value(out.instance, witness)
        _emit({"meta": meta, "value": str(val),
               "witness": assignment_to_json(witness)}, args.out, args.force)
        if val != 1:
            raise VerificationFailure(f"witness value {val} != 1")
        return 0
    report = audit(out)
    _emit({"meta": meta, "ok": report.ok, "issues": list(report.issues),
           "variable_count": report.variable_count,
           "constraint_count": report.constraint_count,
           "constraint_bounds": list(report.constraint_bounds),
           "degree_max": [list(t) for t in report.degree_max],
           "beta": report.beta, "d_prime": report.d_prime,
           "alpha": str(report.alpha), "bd_n": report.bd_n}, args.out, args.force)
    if not report.ok:
        raise VerificationFailure("audit failed: " + "; ".join(report.issues))
    return 0


def _cmd_oracle(args):
    inst = decode(open(args.instance).read())
    queries = [var_from_json(q) for q in _read_json(args.queries)]
    session = open_session(inst, args.policy, args.seed)
    entries = []
    for v in queries:
        got = session.query(v)
        entries.append({"variable": var_to_json(v),
                        "index": None if got is None else got[0],
                        "constraint": None if got is None else
                        {"relation": got[1].relation,
                         "scope": [var_to_json(u) for u in got[1].scope]}})
    _emit({"meta": _meta(args.seed, instance=args.instance, policy=args.policy),
           "transcript": entries}, args.out, args.force)
    return 0


def _cmd_experiment(args):
    group = _parse_group(args.group)
    meta = _meta(args.seed, group=args.group, n=args.n, d=args.d)
    if args.action == "advantage":
        def yes_sampler(s):
            return sample_pair(group, args.n, args.d, s).i_yes

        def no_sampler(s):
            return sample_pair(group, args.n, args.d, s).i_no

        rep = advantage(full_read_tester, yes_sampler, no_sampler,
                        args.trials, args.budget, args.seed)
        lines = ["distribution,trials,accepts,rate,ci_low,ci_high",
                 f"yes,{rep.yes.trials},{rep.yes.accepts},{float(rep.yes.rate)},{rep.yes.ci_low},{rep.yes.ci_high}",
                 f"no,{rep.no.trials},{rep.no.accepts},{float(rep.no.rate)},{rep.no.ci_low},{rep.no.ci_high}"]
        _write_text(args.csv, "\n".join(lines) + "\n", args.force)
        _emit({"meta": {**meta, "config": {**meta["config"], "trials": args.trials,
                                           "budget": args.budget}},
               "gap": str(rep.gap), "radius": rep.radius, "csv": args.csv},
              args.out, args.force)
        if args.plot:
            from .report import rate_bars
            rate_bars(["yes", "no"], [rep.yes.rate, rep.no.rate],
                      [rep.yes.radius(), rep.no.radius()], args.plot,
                      title="tester acceptance")
        return 0
    if args.action == "subinstance":
        sample = sample_pair(group, args.n, args.d, args.seed)
        subset = [tuple(int(x) for x in item.split(",")) for item in args.subset.split(";")]
        tv = subinstance_compare(group, args.n, args.d, subset, sample.matchings)
        _emit({"meta": {**meta, "config": {**meta["config"], "subset": args.subset}},
               "tv_distance": str(tv)}, args.out, args.force)
        return 0
    rep = value_concentration_experiment(group, args.n, args.d, args.trials, args.seed)
    _write_text(args.csv, "\n".join(rep.csv_lines()) + "\n", args.force)
    _emit({"meta": {**meta, "config": {**meta["config"], "trials": args.trials}},
           "quantiles": [[label, str(v)] for label, v in rep.quantiles],
           "csv": args.csv}, args.out, args.force)
    if args.plot:
        from .report import value_histogram
        value_histogram([v for _, _, v in rep.rows], args.plot,
                        title=f"optimum value, group {args.group}, n={args.n}, d={args.d}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_output(p, csv=False):
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--force", action="store_true", help="allow overwriting outputs")
    if csv:
        p.add_argument("--csv", required=True, help="CSV output path")
        p.add_argument("--plot", help="also render a PNG figure here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cspdesk")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide satisfiability of an instance JSON")
    p.add_argument("instance")
    p.add_argument("--budget", type=int, default=1_000_000)
    _add_output(p)
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("width", help="run the width-(k,l) consistency decision")
    p.add_argument("instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    _add_output(p)
    p.set_defaults(handler=_cmd_width)

    p = sub.add_parser("geiger", help="build and verify a simulation gadget")
    p.add_argument("--structure", required=True)
    p.add_argument("--target", required=True)
    _add_output(p)
    p.set_defaults(handler=_cmd_geiger)

    p = sub.add_parser("hypergraph", help="sample and check regular hypergraphs")
    p.add_argument("action", choices=["sample", "check-sparsity", "check-expander"])
    p.add_argument("--parts", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--graph", help="hypergraph JSON (check actions)")
    p.add_argument("--delta", help="sparsity fraction (check-sparsity)")
    p.add_argument("--relation", help="relation JSON (check-expander)")
    p.add_argument("--eps", help="slack fraction (check-expander)")
    _add_output(p)
    p.set_defaults(handler=_cmd_hypergraph)

    p = sub.add_parser("pair", help="sample a paired YES/NO instance")
    p.add_argument("action", choices=["sample"])
    p.add_argument("--group", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_output(p)
    p.set_defaults(handler=_cmd_pair)

    p = sub.add_parser("reduce", help="transform, witness, or audit via a kit")
    p.add_argument("action", choices=["transform", "witness", "audit"])
    p.add_argument("--pair", required=True, help="pair-sample JSON")
    p.add_argument("--kit", help="kit JSON; omit to build the self-kit")
    p.add_argument("--l", type=int, help="self-kit regularity")
    p.add_argument("--kit-seed", type=int, help="self-kit hypergraph seed")
    p.add_argument("--no", action="store_true", help="transform the NO instance")
    _add_output(p)
    p.set_defaults(handler=_cmd_reduce)

    p = sub.add_parser("oracle", help="replay a query sequence")
    p.add_argument("action", choices=["replay"])
    p.add_argument("instance")
    p.add_argument("--queries", required=True, help="JSON list of variables")
    p.add_argument("--policy", default="fixed-index",
                   choices=["fixed-index", "seeded-random"])
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("experiment", help="run an experiment to CSV/JSON")
    p.add_argument("action", choices=["advantage", "subinstance", "concentration"])
    p.add_argument("--group", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--budget", type=int, default=10 ** 6)
    p.add_argument("--subset", help="subinstance subset, e.g. '0,0;0,1;1,2'")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--force", action="store_true")
    p.add_argument("--csv", help="CSV output path (advantage/concentration)")
    p.add_argument("--plot", help="also render a PNG figure here")
    p.set_defaults(handler=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "experiment" and args.action in ("advantage", "concentration") \
                and not args.csv:
            raise UsageError("--csv is required for this experiment")
        if args.command == "experiment" and args.action == "subinstance" and not args.subset:
            raise UsageError("--subset is required for subinstance")
        return args.handler(args)
    except UsageError as e:
        sys.stderr.write(json.dumps({"error": "usage", "detail": str(e)}) + "\n")
        return 2
    except BudgetExceededError as e:
        sys.stderr.write(json.dumps({"error": "budget", "detail": str(e)}) + "\n")
        return 3
    except VerificationFailure as e:
        sys.stderr.write(json.dumps({"error": "verification", "detail": str(e)}) + "\n")
        return 4
    except (ValueError, KeyError, OSError) as e:
        sys.stderr.write(json.dumps({"error": "usage", "detail": str(e)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
