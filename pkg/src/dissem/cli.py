"""Command-line front end.

Exit codes: 0 success, 1 input/validation error, 2 mathematically
unsolvable (no one-round scheme, not strongly connected, too few rounds,
requests not satisfied), 3 size cap exceeded.  `--seed` wins over the
DISSEM_SEED environment variable; the default seed is 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from dissem import bounds as bounds_mod
from dissem import experiment as experiment_mod
from dissem import files, multiround, one_round, protocol_sim
from dissem.errors import (
    DissemError,
    GenerationFailed,
    IllegalTransmission,
    NotOneRoundSolvable,
    NotSolvable,
    RoundsTooFew,
    SearchCapExceeded,
)
from dissem.generate import corpus_rng, random_instance
from dissem.network import is_feasible, solvability_index


def _seed_value(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DISSEM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            print(f"warning: ignoring non-integer DISSEM_SEED={env!r}",
                  file=sys.stderr)
    return 0


def _load_instance(path: str):
    try:
        return files.load_instance(path)
    except FileNotFoundError:
        print(f"error: {path}: no such file", file=sys.stderr)
    except json.JSONDecodeError as e:
        print(f"error: {path}:{e.lineno}:{e.colno}: {e.msg}", file=sys.stderr)
    except files.FileFormatError as e:
        print(f"error: {path}: {e}", file=sys.stderr)
    return None


def _warn_if_infeasible(inst) -> None:
    if not is_feasible(inst.net, inst.possess, inst.request):
        print("warning: some requested symbol is unreachable from every holder",
              file=sys.stderr)


def _vector_str(vec, q: int) -> str:
    terms = []
    for j, c in enumerate(vec):
        if c == 0:
            continue
        terms.append(f"x{j + 1}" if c == 1 or q == 2 else f"{c}*x{j + 1}")
    return " + ".join(terms) if terms else "0"


def _maybe_write_json(obj, path) -> None:
    if path:
        with open(path, "w") as f:
            json.dump(obj, f, indent=1)
            f.write("\n")


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    if inst is None:
        return 1
    _warn_if_infeasible(inst)
    try:
        if args.heuristic:
            result = one_round.solve_heuristic(inst, seed=_seed_value(args),
                                               iterations=args.iterations)
        else:
            try:
                result = one_round.solve_exact(inst)
            except SearchCapExceeded as e:
                if args.exact:
                    print(f"error: {e}", file=sys.stderr)
                    return 3
                print(f"warning: {e}; falling back to the heuristic",
                      file=sys.stderr)
                result = one_round.solve_heuristic(inst, seed=_seed_value(args),
                                                   iterations=args.iterations)
    except NotOneRoundSolvable as e:
        print(f"not one-round solvable: {e}", file=sys.stderr)
        return 2
    print(f"tau: {result.tau}")
    print(f"method: {result.method}")
    for node, rows in enumerate(result.scheme.rows_by_node):
        for vec in rows:
            print(f"v{node + 1} broadcasts {list(vec)}  ({_vector_str(vec, inst.q)})")
    print("decode:")
    for node in range(inst.k):
        for sym in sorted(inst.request[node]):
            alpha, beta = one_round.decode(inst, result.scheme, node, sym)
            print(f"  v{node + 1} <- x{sym + 1}: "
                  f"alpha={list(alpha)} beta={list(beta)}")
    _maybe_write_json(files.result_to_dict(result), args.json)
    return 0


def cmd_bounds(args) -> int:
    inst = _load_instance(args.instance)
    if inst is None:
        return 1
    report = bounds_mod.bounds_report(inst)
    doc = files.bounds_to_dict(report)
    if (report.lower_alpha is not None and report.lower_minrank2 is not None
            and report.upper_clique_cover is not None):
        print(f"alpha <= minrank2 <= clc: {report.lower_alpha} <= "
              f"{report.lower_minrank2} <= {report.upper_clique_cover}")
    print(json.dumps(doc, indent=1))
    _maybe_write_json(doc, args.json)
    return 0


def cmd_multiround(args) -> int:
    inst = _load_instance(args.instance)
    if inst is None:
        return 1
    _warn_if_infeasible(inst)
    try:
        if args.strategy == "random":
            sched = multiround.schedule_random(inst, args.rounds,
                                               seed=_seed_value(args),
                                               attempts=args.attempts)
        else:
            caps = multiround.DEFAULT_ROUND_CAPS
            if args.strategy == "greedy":
                caps = multiround.RoundSearchCaps(max_explored=0, max_product=0)
            sched = multiround.schedule(inst, args.rounds, caps)
    except RoundsTooFew as e:
        print(f"error: too few rounds, need at least {e.required}", file=sys.stderr)
        return 2
    except (NotSolvable, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2 if isinstance(e, NotSolvable) else 1
    print(f"tau_total: {sched.tau_total}")
    print(f"tau_rounds: {list(sched.tau_rounds)}")
    print(f"methods: {list(sched.methods)}")
    doc = files.scheme_to_dict(sched)
    print(json.dumps(doc, indent=1))
    _maybe_write_json(doc, args.json)
    return 0


def cmd_simulate(args) -> int:
    inst = _load_instance(args.instance)
    if inst is None:
        return 1
    try:
        with open(args.scheme) as f:
            rounds = files.rounds_from_dict(json.load(f), inst)
    except FileNotFoundError:
        print(f"error: {args.scheme}: no such file", file=sys.stderr)
        return 1
    except json.JSONDecodeError as e:
        print(f"error: {args.scheme}:{e.lineno}:{e.colno}: {e.msg}", file=sys.stderr)
        return 1
    except files.FileFormatError as e:
        print(f"error: {args.scheme}: {e}", file=sys.stderr)
        return 1
    try:
        transcript = protocol_sim.execute(inst, rounds)
    except IllegalTransmission as e:
        print(f"error: illegal transmission: {e}", file=sys.stderr)
        return 1
    doc = files.transcript_to_dict(transcript)
    print(json.dumps(doc, indent=1))
    _maybe_write_json(doc, args.json)
    if transcript.all_satisfied():
        print("all requests satisfied")
        return 0
    misses = ", ".join(f"v{v + 1}<-x{s + 1}" for v, s in transcript.unsatisfied())
    print(f"unsatisfied: {misses}")
    return 2


def cmd_gen(args) -> int:
    seed = _seed_value(args)
    os.makedirs(args.out, exist_ok=True)
    try:
        for i in range(args.count):
            rng = corpus_rng(seed, args.nodes, args.symbols, args.diameter, i)
            inst = random_instance(args.nodes, args.symbols, args.diameter, rng,
                                   q=args.field)
            files.save_instance(inst, os.path.join(args.out, f"inst_{i:03d}.json"))
    except GenerationFailed as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {args.count} instances to {args.out}")
    return 0


def cmd_experiment(args) -> int:
    seed = _seed_value(args)
    report = experiment_mod.run_experiment(
        args.nodes, args.symbols, args.diameter, args.count, seed,
        strategy=args.strategy,
    )
    print(f"nodes={report.nodes} symbols={report.symbols} "
          f"diameter={report.diameter} count={report.count} seed={report.seed} "
          f"strategy={report.strategy}")
    if report.failures:
        print(f"excluded {len(report.failures)} failed instances", file=sys.stderr)
    print(experiment_mod.format_table(report))
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(experiment_mod.to_csv(report))
    _maybe_write_json(files.experiment_to_dict(report), args.json)
    return 0


def cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    if inst is None:
        return 1
    _warn_if_infeasible(inst)
    r0 = solvability_index(inst.net)
    horizon = "not strongly connected" if r0 is None else str(r0)
    print(f"ok: {inst.k} nodes, {inst.n} symbols over GF({inst.q}), "
          f"flooding horizon: {horizon}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dissem",
        description="Coded-broadcast scheduling for data dissemination",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_seed(sp):
        sp.add_argument("--seed", type=int, default=None,
                        help="RNG seed (falls back to DISSEM_SEED, then 0)")

    sp = sub.add_parser("solve", help="optimal one-round scheme")
    sp.add_argument("instance")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true",
                       help="fail instead of falling back when over caps")
    group.add_argument("--heuristic", action="store_true")
    sp.add_argument("--iterations", type=int, default=32)
    sp.add_argument("--json", help="also write the result as JSON")
    add_seed(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bounds", help="lower/upper bounds report")
    sp.add_argument("instance")
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("multiround", help="build an r-round scheme")
    sp.add_argument("instance")
    sp.add_argument("--rounds", type=int, required=True)
    sp.add_argument("--strategy", choices=["exact", "greedy", "random"],
                    default="exact")
    sp.add_argument("--attempts", type=int, default=64,
                    help="samples per round for --strategy random")
    sp.add_argument("--json")
    add_seed(sp)
    sp.set_defaults(func=cmd_multiround)

    sp = sub.add_parser("simulate", help="run a scheme through the protocol")
    sp.add_argument("instance")
    sp.add_argument("scheme")
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("gen", help="write random instances")
    sp.add_argument("--nodes", type=int, required=True)
    sp.add_argument("--symbols", type=int, required=True)
    sp.add_argument("--diameter", type=int, required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--field", type=int, default=2)
    sp.add_argument("--out", required=True)
    add_seed(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("experiment", help="ratio histogram over a random corpus")
    sp.add_argument("--nodes", type=int, default=4)
    sp.add_argument("--symbols", type=int, default=4)
    sp.add_argument("--diameter", type=int, default=2)
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--strategy", choices=["exact", "random"], default="exact")
    sp.add_argument("--csv", help="write per-instance ratios as CSV")
    sp.add_argument("--json")
    add_seed(sp)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("check", help="validate an instance file")
    sp.add_argument("instance")
    sp.set_defaults(func=cmd_check)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DissemError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
