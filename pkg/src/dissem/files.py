"""JSON file formats: instances, schemes, transcripts, reports.

All files carry `"format": 1` and use 1-indexed node and symbol names;
indices are converted at this boundary only.  Validation is strict: unknown
keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from dissem.bounds import BoundsReport
from dissem.experiment import BIN_LABELS, ExperimentReport
from dissem.instance import DisseminationInstance, instance
from dissem.multiround import MultiRoundScheme
from dissem.network import network
from dissem.one_round import OneRoundResult, TransmissionScheme
from dissem.protocol_sim import Transcript

FORMAT = 1


class FileFormatError(ValueError):
    pass


def _require_keys(obj: dict, allowed: set[str], required: set[str], what: str):
    unknown = set(obj) - allowed
    if unknown:
        raise FileFormatError(f"{what}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise FileFormatError(f"{what}: missing keys {sorted(missing)}")


def _check_format(obj: dict, what: str):
    if obj.get("format") != FORMAT:
        raise FileFormatError(f"{what}: expected \"format\": {FORMAT}")


def _node_map(obj: Any, k: int, n: int, what: str) -> list[set[int]]:
    if not isinstance(obj, dict):
        raise FileFormatError(f"{what}: expected an object keyed by node")
    out: list[set[int]] = [set() for _ in range(k)]
    for key, symbols in obj.items():
        try:
            node = int(key)
        except ValueError:
            raise FileFormatError(f"{what}: node key {key!r} is not an integer")
        if not (1 <= node <= k):
            raise FileFormatError(f"{what}: node {node} outside 1..{k}")
        if not isinstance(symbols, list):
            raise FileFormatError(f"{what}: node {node} needs a list of symbols")
        seen = set()
        for s in symbols:
            if not isinstance(s, int) or not (1 <= s <= n):
                raise FileFormatError(f"{what}: symbol {s!r} outside 1..{n}")
            if s in seen:
                raise FileFormatError(f"{what}: node {node} repeats symbol {s}")
            seen.add(s)
        out[node - 1] = {s - 1 for s in seen}
    return out


# ---------------------------------------------------------------------------
# Instances

def instance_to_dict(inst: DisseminationInstance) -> dict:
    return {
        "format": FORMAT,
        "field": inst.q,
        "n": inst.n,
        "nodes": inst.k,
        "edges": sorted([u + 1, v + 1] for u, v in inst.net.edges),
        "possess": {str(v + 1): sorted(s + 1 for s in inst.possess[v])
                    for v in range(inst.k) if inst.possess[v]},
        "request": {str(v + 1): sorted(s + 1 for s in inst.request[v])
                    for v in range(inst.k) if inst.request[v]},
    }


def instance_from_dict(obj: dict) -> DisseminationInstance:
    _require_keys(obj, {"format", "field", "n", "nodes", "edges", "possess", "request"},
                  {"format", "field", "n", "nodes", "edges"}, "instance")
    _check_format(obj, "instance")
    q, n, k = obj["field"], obj["n"], obj["nodes"]
    for name, val in (("field", q), ("n", n), ("nodes", k)):
        if not isinstance(val, int) or val < 1:
            raise FileFormatError(f"instance: {name} must be a positive integer")
    edges = []
    seen = set()
    for e in obj["edges"]:
        if (not isinstance(e, list)) or len(e) != 2:
            raise FileFormatError(f"instance: edge {e!r} is not a pair")
        u, v = e
        if not all(isinstance(x, int) and 1 <= x <= k for x in (u, v)):
            raise FileFormatError(f"instance: edge {e!r} outside 1..{k}")
        if u == v:
            raise FileFormatError(f"instance: self-loop {e!r}")
        if (u, v) in seen:
            raise FileFormatError(f"instance: duplicate edge {e!r}")
        seen.add((u, v))
        edges.append((u - 1, v - 1))
    possess = _node_map(obj.get("possess", {}), k, n, "possess")
    request = _node_map(obj.get("request", {}), k, n, "request")
    try:
        return instance(q, n, network(k, edges), possess, request)
    except ValueError as e:
        raise FileFormatError(f"instance: {e}")


def load_instance(path: str) -> DisseminationInstance:
    with open(path) as f:
        return instance_from_dict(json.load(f))


def save_instance(inst: DisseminationInstance, path: str) -> None:
    with open(path, "w") as f:
        json.dump(instance_to_dict(inst), f, indent=1)
        f.write("\n")


# ---------------------------------------------------------------------------
# Schemes

def scheme_to_dict(scheme) -> dict:
    if isinstance(scheme, TransmissionScheme):
        rounds = scheme.as_rounds()
        extra = {}
    elif isinstance(scheme, MultiRoundScheme):
        rounds = scheme.rounds
        extra = {"tau_rounds": list(scheme.tau_rounds),
                 "methods": list(scheme.methods)}
    else:
        raise TypeError(f"cannot serialize {type(scheme).__name__}")
    k = len(rounds[0]) if rounds else 0
    return {
        "format": FORMAT,
        "field": scheme.q,
        "n": scheme.n,
        "nodes": k,
        "rounds": [
            {str(node + 1): [list(v) for v in per_node[node]]
             for node in range(k) if per_node[node]}
            for per_node in rounds
        ],
        **extra,
    }


def rounds_from_dict(obj: dict, inst: DisseminationInstance):
    """Scheme rounds as nested tuples, validated against the instance."""
    _require_keys(obj, {"format", "field", "n", "nodes", "rounds",
                        "tau_rounds", "methods"},
                  {"format", "field", "n", "nodes", "rounds"}, "scheme")
    _check_format(obj, "scheme")
    if obj["field"] != inst.q or obj["n"] != inst.n or obj["nodes"] != inst.k:
        raise FileFormatError(
            "scheme: field/n/nodes do not match the instance "
            f"(got {obj['field']}/{obj['n']}/{obj['nodes']}, "
            f"want {inst.q}/{inst.n}/{inst.k})"
        )
    rounds = []
    if not isinstance(obj["rounds"], list):
        raise FileFormatError("scheme: rounds must be a list")
    for r_idx, per_node in enumerate(obj["rounds"], start=1):
        if not isinstance(per_node, dict):
            raise FileFormatError(f"scheme: round {r_idx} must be an object")
        out = [() for _ in range(inst.k)]
        for key, vectors in per_node.items():
            try:
                node = int(key)
            except ValueError:
                raise FileFormatError(f"scheme: node key {key!r} is not an integer")
            if not (1 <= node <= inst.k):
                raise FileFormatError(f"scheme: node {node} outside 1..{inst.k}")
            rows = []
            for vec in vectors:
                if not isinstance(vec, list) or len(vec) != inst.n:
                    raise FileFormatError(
                        f"scheme: round {r_idx} node {node}: vector {vec!r} "
                        f"is not a length-{inst.n} list"
                    )
                if not all(isinstance(x, int) for x in vec):
                    raise FileFormatError(
                        f"scheme: round {r_idx} node {node}: non-integer entry"
                    )
                rows.append(tuple(x % inst.q for x in vec))
            out[node - 1] = tuple(rows)
        rounds.append(tuple(out))
    return tuple(rounds)


def load_scheme_rounds(path: str, inst: DisseminationInstance):
    with open(path) as f:
        return rounds_from_dict(json.load(f), inst)


# ---------------------------------------------------------------------------
# Results, transcripts, reports

def result_to_dict(res: OneRoundResult) -> dict:
    return {
        "format": FORMAT,
        "tau": res.tau,
        "method": res.method,
        "node_ranks": list(res.node_ranks),
        "scheme": scheme_to_dict(res.scheme),
    }


def transcript_to_dict(t: Transcript) -> dict:
    return {
        "format": FORMAT,
        "all_satisfied": t.all_satisfied(),
        "rounds": [
            {
                "broadcast": {str(v + 1): [list(x) for x in log.broadcast[v]]
                              for v in range(len(log.broadcast)) if log.broadcast[v]},
                "received": {str(v + 1): [{"from": s + 1, "vector": list(x)}
                                          for s, x in log.received[v]]
                             for v in range(len(log.received)) if log.received[v]},
            }
            for log in t.rounds
        ],
        "knowledge_dims": [list(d) for d in t.knowledge_dims],
        "recovery": [
            {
                "node": e.node + 1,
                "symbol": e.symbol + 1,
                "satisfied": e.satisfied,
                **({"alpha": list(e.received_coeffs), "beta": list(e.side_coeffs)}
                   if e.satisfied else {}),
            }
            for e in t.recovery
        ],
    }


def bounds_to_dict(rep: BoundsReport) -> dict:
    return {
        "format": FORMAT,
        "lower": {
            "dmax": rep.lower_dmax,
            "minrank2": rep.lower_minrank2,
            "alpha": rep.lower_alpha,
        },
        "upper": {
            "partition": rep.upper_partition,
            "clique_cover": rep.upper_clique_cover,
        },
        "witnesses": {
            "independent_set": (None if rep.witness_independent_set is None
                                else [v + 1 for v in rep.witness_independent_set]),
            "partition": (None if rep.witness_partition is None
                          else {str(s + 1): t + 1
                                for s, t in enumerate(rep.witness_partition)}),
            "clique_cover": (None if rep.witness_clique_cover is None
                             else [[v + 1 for v in blk]
                                   for blk in rep.witness_clique_cover]),
        },
        "notes": {name: reason for name, reason in rep.notes},
    }


def experiment_to_dict(rep: ExperimentReport) -> dict:
    return {
        "format": FORMAT,
        "nodes": rep.nodes,
        "symbols": rep.symbols,
        "diameter": rep.diameter,
        "count": rep.count,
        "seed": rep.seed,
        "strategy": rep.strategy,
        "bins": list(BIN_LABELS),
        "histogram": rep.histogram(),
        "percentages": rep.percentages(),
        "outcomes": [
            {"index": o.index, "tau": o.tau_total, "dmax": o.dmax,
             "ratio": str(Fraction(o.ratio))}
            for o in rep.outcomes
        ],
        "failures": [{"index": i, "reason": r} for i, r in rep.failures],
    }
