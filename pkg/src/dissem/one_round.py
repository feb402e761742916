"""Optimal single-round coded broadcast by constrained rank minimization.

Each node broadcasts a basis of a row space it may choose freely inside the
coordinate subspace of the symbols it holds; a choice works when every node
can express each requested unit vector from its in-neighbors' rows plus its
own symbols.  The exact solver enumerates per-node subspaces in canonical
reduced-echelon form, cheapest dimension first, with branch-and-bound on the
running total; ties break on the lexicographically smallest concatenated
basis so results are reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from dissem import field
from dissem.errors import (
    NoDecoding,
    NotOneRoundSolvable,
    SearchCapExceeded,
    SupportViolation,
)
from dissem.field import FieldMatrix, Row, SpanTracker
from dissem.instance import DisseminationInstance

NodeRows = Sequence[Sequence[Row]]


@dataclass(frozen=True)
class TransmissionScheme:
    q: int
    n: int
    rows_by_node: tuple[tuple[Row, ...], ...]
    round_index: int = 1

    def as_rounds(self) -> tuple[tuple[tuple[Row, ...], ...], ...]:
        return (self.rows_by_node,)

    @property
    def total_vectors(self) -> int:
        return sum(len(r) for r in self.rows_by_node)


@dataclass(frozen=True)
class OneRoundResult:
    tau: int
    scheme: TransmissionScheme
    method: str  # "exact" | "heuristic"
    node_ranks: tuple[int, ...]


@dataclass(frozen=True)
class SearchCaps:
    """Instance sizes the exact search accepts before refusing."""

    max_modulus: int = 2
    max_possession: int = 5
    max_nodes: int = 6


DEFAULT_CAPS = SearchCaps()


def _validate_support(inst: DisseminationInstance, choice: NodeRows) -> None:
    if len(choice) != inst.k:
        raise SupportViolation(f"{len(choice)} node choices for {inst.k} nodes")
    for node, rows in enumerate(choice):
        for row in rows:
            if len(row) != inst.n:
                raise SupportViolation(f"row length {len(row)} != n {inst.n}")
            bad = [j for j, x in enumerate(row) if x % inst.q and j not in inst.possess[node]]
            if bad:
                raise SupportViolation(
                    f"node {node + 1} row uses symbols {sorted(x + 1 for x in bad)} it lacks"
                )


def check_condition(inst: DisseminationInstance, choice: NodeRows) -> bool:
    """True iff every requested unit vector is reachable for its node.

    For node v the available rows are the choices of its in-neighbors plus
    unit vectors on its own symbols.
    """
    _validate_support(inst, choice)
    for node in range(inst.k):
        if not inst.request[node]:
            continue
        t = SpanTracker(inst.n, inst.q)
        for nb in inst.net.in_neighbors(node):
            for row in choice[nb]:
                t.add(row)
        for s in inst.possess[node]:
            t.add(field.unit_row(s, inst.n))
        for sym in inst.request[node]:
            if not t.contains(field.unit_row(sym, inst.n)):
                return False
    return True


def _flood_rows(inst: DisseminationInstance) -> list[tuple[Row, ...]]:
    """Every sender broadcasts a unit vector per held symbol."""
    rows: list[tuple[Row, ...]] = []
    for node in range(inst.k):
        if inst.net.out_neighbors(node) and inst.possess[node]:
            rows.append(tuple(field.unit_row(s, inst.n)
                              for s in sorted(inst.possess[node])))
        else:
            rows.append(())
    return rows


def _flood_failures(inst: DisseminationInstance) -> list[tuple[int, int]]:
    flood = _flood_rows(inst)
    failures = []
    for node in range(inst.k):
        if not inst.request[node]:
            continue
        t = SpanTracker(inst.n, inst.q)
        for nb in inst.net.in_neighbors(node):
            for row in flood[nb]:
                t.add(row)
        for s in inst.possess[node]:
            t.add(field.unit_row(s, inst.n))
        for sym in sorted(inst.request[node]):
            if not t.contains(field.unit_row(sym, inst.n)):
                failures.append((node, sym))
    return failures


def _scheme_key(rows_by_node: Sequence[tuple[Row, ...]]):
    return tuple(tuple(rows) for rows in rows_by_node)


def _as_scheme(inst, rows_by_node) -> TransmissionScheme:
    return TransmissionScheme(inst.q, inst.n, tuple(tuple(r) for r in rows_by_node))


def solve_exact(inst: DisseminationInstance,
                caps: SearchCaps = DEFAULT_CAPS,
                max_vectors_per_node: Optional[int] = None) -> OneRoundResult:
    """Minimize the total number of broadcasts over all admissible choices.

    Raises NotOneRoundSolvable when even full flooding cannot serve some
    request, and SearchCapExceeded when the instance is outside `caps`.
    `max_vectors_per_node` optionally limits each node's broadcast count
    (the natural limit is n).
    """
    if inst.q > caps.max_modulus:
        raise SearchCapExceeded(f"modulus {inst.q} > cap {caps.max_modulus}")
    if inst.k > caps.max_nodes:
        raise SearchCapExceeded(f"{inst.k} nodes > cap {caps.max_nodes}")
    worst = max((len(p) for p in inst.possess), default=0)
    if worst > caps.max_possession:
        raise SearchCapExceeded(f"possession size {worst} > cap {caps.max_possession}")

    failures = _flood_failures(inst)
    if failures:
        raise NotOneRoundSolvable(failures)

    requesters = [v for v in range(inst.k) if inst.request[v]]
    senders = [v for v in range(inst.k)
               if inst.net.out_neighbors(v) and inst.possess[v]]
    if not requesters:
        empty = [() for _ in range(inst.k)]
        return OneRoundResult(0, _as_scheme(inst, empty), "exact",
                              tuple(0 for _ in range(inst.k)))

    # Candidate row spaces per sender: canonical bases, cheapest first.
    pos = {s: i for i, s in enumerate(senders)}
    candidates: list[list[tuple[Row, ...]]] = []
    for s in senders:
        support = sorted(inst.possess[s])
        cap_dim = len(support) if max_vectors_per_node is None \
            else min(len(support), max_vectors_per_node)
        cands = [field.embed_rows(basis, support, inst.n)
                 for basis in field.subspace_bases(len(support), inst.q, cap_dim)]
        candidates.append(cands)

    # Requester v gets checked as soon as its last contributing sender is set.
    feeders = {v: [pos[u] for u in inst.net.in_neighbors(v) if u in pos]
               for v in requesters}
    trigger: dict[int, list[int]] = {d: [] for d in range(len(senders))}
    upfront: list[int] = []
    for v in requesters:
        if feeders[v]:
            trigger[max(feeders[v])].append(v)
        else:
            upfront.append(v)
    # Flooding already succeeded, so feeder-less requesters are self-served.

    trackers = {v: SpanTracker(inst.n, inst.q) for v in requesters}
    for v in requesters:
        for s in inst.possess[v]:
            trackers[v].add(field.unit_row(s, inst.n))
    listeners = [[v for v in requesters if d in feeders[v]]
                 for d in range(len(senders))]

    best_tau: Optional[int] = None
    best_rows: Optional[list[tuple[Row, ...]]] = None

    def leaf(partial_rows, tau):
        nonlocal best_tau, best_rows
        full = [() for _ in range(inst.k)]
        for s, rows in zip(senders, partial_rows):
            full[s] = rows
        if best_tau is None or tau < best_tau or (
            tau == best_tau and _scheme_key(full) < _scheme_key(best_rows)
        ):
            best_tau = tau
            best_rows = full

    def search(d: int, partial_rows: list, partial_tau: int):
        nonlocal best_tau
        if d == len(senders):
            leaf(partial_rows, partial_tau)
            return
        for cand in candidates[d]:
            tau = partial_tau + len(cand)
            if best_tau is not None and tau > best_tau:
                break  # dimensions ascend, nothing cheaper follows
            marks = [(v, trackers[v].mark()) for v in listeners[d]]
            for row in cand:
                for v in listeners[d]:
                    trackers[v].add(row)
            ok = True
            for v in trigger[d]:
                t = trackers[v]
                if not all(t.contains(field.unit_row(sym, inst.n))
                           for sym in inst.request[v]):
                    ok = False
                    break
            if ok:
                partial_rows.append(cand)
                search(d + 1, partial_rows, tau)
                partial_rows.pop()
            for v, m in marks:
                trackers[v].rollback(m)

    search(0, [], 0)
    if best_rows is None:
        # Only reachable when a per-node vector cap shrinks the search space;
        # uncapped flooding already passed above.
        raise NotOneRoundSolvable(
            (), f"no admissible choice with at most "
                f"{max_vectors_per_node} vectors per node")
    ranks = tuple(len(r) for r in best_rows)
    return OneRoundResult(best_tau, _as_scheme(inst, best_rows), "exact", ranks)


def solve_heuristic(inst: DisseminationInstance, seed: int = 0,
                    iterations: int = 32) -> OneRoundResult:
    """Greedy row deletion from flooding, restarted with shuffled orders.

    Always sound (the result satisfies the decodability condition) and never
    below the optimum; deterministic for a given seed.
    """
    failures = _flood_failures(inst)
    if failures:
        raise NotOneRoundSolvable(failures)
    rng = random.Random(seed)
    flood = _flood_rows(inst)
    positions = [(node, i) for node in range(inst.k)
                 for i in range(len(flood[node]))]

    best_rows = None
    best_tau = None
    for _ in range(max(1, iterations)):
        keep = {p: True for p in positions}
        order = positions[:]
        rng.shuffle(order)
        for p in order:
            keep[p] = False
            current = [
                tuple(flood[node][i] for i in range(len(flood[node]))
                      if keep[(node, i)])
                for node in range(inst.k)
            ]
            if not check_condition(inst, current):
                keep[p] = True
        rows = [
            field.rref(FieldMatrix(inst.q, inst.n,
                                   tuple(flood[node][i]
                                         for i in range(len(flood[node]))
                                         if keep[(node, i)])))[0].rows
            for node in range(inst.k)
        ]
        tau = sum(len(r) for r in rows)
        if best_tau is None or tau < best_tau or (
            tau == best_tau and _scheme_key(rows) < _scheme_key(best_rows)
        ):
            best_tau, best_rows = tau, rows
    ranks = tuple(len(r) for r in best_rows)
    return OneRoundResult(best_tau, _as_scheme(inst, best_rows), "heuristic", ranks)


def decode(inst: DisseminationInstance, scheme: TransmissionScheme,
           node: int, symbol: int) -> tuple[Row, Row]:
    """Coefficients recovering a symbol: (over received vectors, over own rows).

    Received vectors are the in-neighbors' scheme rows in ascending node
    order; own rows are the n rows of the possession diagonal.  The returned
    combination reproduces the unit vector exactly.
    """
    received: list[Row] = []
    for nb in inst.net.in_neighbors(node):
        received.extend(scheme.rows_by_node[nb])
    own = [field.unit_row(s, inst.n) if s in inst.possess[node] else (0,) * inst.n
           for s in range(inst.n)]
    basis = FieldMatrix(inst.q, inst.n, tuple(received) + tuple(own))
    coeffs = field.solve_in_row_space(basis, field.unit_row(symbol, inst.n))
    if coeffs is None:
        raise NoDecoding(f"node {node + 1} cannot recover symbol {symbol + 1}")
    cut = len(received)
    return coeffs[:cut], coeffs[cut:]
