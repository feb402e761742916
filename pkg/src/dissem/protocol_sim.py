"""Symbolic executor of the round-based broadcast protocol.

The simulator never instantiates symbol values: what a node can compute is
exactly the row space of the coding vectors it holds, so knowledge is kept
as an incrementally reduced basis in symbol coordinates.  This makes the
executor an exact decodability oracle for every scheme the solvers emit.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

from dissem import field
from dissem.errors import DimensionMismatch, IllegalTransmission
from dissem.field import FieldMatrix, Row, SpanTracker
from dissem.instance import DisseminationInstance

SchemeRounds = Sequence[Sequence[Sequence[Row]]]  # [round][node][vector]


@dataclass
class RoundLog:
    broadcast: list[list[Row]]                 # per node, vectors sent
    received: list[list[tuple[int, Row]]]      # per node, (sender, vector)


@dataclass
class RecoveryEntry:
    node: int
    symbol: int
    satisfied: bool
    # Coefficients over (all received vectors in arrival order, own unit rows).
    received_coeffs: Optional[Row] = None
    side_coeffs: Optional[Row] = None


@dataclass
class Transcript:
    rounds: list[RoundLog]
    recovery: list[RecoveryEntry]
    knowledge_dims: list[list[int]] = dc_field(default_factory=list)  # per round, per node

    def all_satisfied(self) -> bool:
        return all(e.satisfied for e in self.recovery)

    def unsatisfied(self) -> list[tuple[int, int]]:
        return [(e.node, e.symbol) for e in self.recovery if not e.satisfied]


def _initial_spans(inst: DisseminationInstance) -> list[SpanTracker]:
    spans = []
    for node in range(inst.k):
        t = SpanTracker(inst.n, inst.q)
        for s in sorted(inst.possess[node]):
            t.add(field.unit_row(s, inst.n))
        spans.append(t)
    return spans


def execute(inst: DisseminationInstance, rounds: SchemeRounds) -> Transcript:
    """Run the protocol on a scheme and report what every node could decode.

    Raises IllegalTransmission if a scheme asks a node to send a vector it
    cannot form from its knowledge at the start of that round.
    """
    spans = _initial_spans(inst)
    in_nbrs = [inst.net.in_neighbors(v) for v in range(inst.k)]
    logs: list[RoundLog] = []
    dims: list[list[int]] = []
    inbox: list[list[tuple[int, Row]]] = [[] for _ in range(inst.k)]

    for r_idx, per_node in enumerate(rounds, start=1):
        if len(per_node) != inst.k:
            raise DimensionMismatch(
                f"round {r_idx} lists {len(per_node)} nodes, expected {inst.k}"
            )
        sent: list[list[Row]] = []
        for node, vectors in enumerate(per_node):
            vecs = [tuple(x % inst.q for x in v) for v in vectors]
            for v in vecs:
                if len(v) != inst.n:
                    raise DimensionMismatch(f"vector length {len(v)} != n {inst.n}")
                if not spans[node].contains(v):
                    raise IllegalTransmission(r_idx, node, v)
            sent.append(vecs)
        received: list[list[tuple[int, Row]]] = [[] for _ in range(inst.k)]
        for node in range(inst.k):
            for sender in in_nbrs[node]:
                for v in sent[sender]:
                    received[node].append((sender, v))
        for node in range(inst.k):
            for _, v in received[node]:
                spans[node].add(v)
            inbox[node].extend(received[node])
        logs.append(RoundLog(broadcast=sent, received=received))
        dims.append([spans[node].rank for node in range(inst.k)])

    recovery = _recover(inst, spans, inbox)
    return Transcript(rounds=logs, recovery=recovery, knowledge_dims=dims)


def _recover(inst, spans, inbox) -> list[RecoveryEntry]:
    entries = []
    for node in range(inst.k):
        own_rows = [field.unit_row(s, inst.n) for s in sorted(inst.possess[node])]
        received_rows = [v for _, v in inbox[node]]
        basis = FieldMatrix(inst.q, inst.n,
                            tuple(received_rows) + tuple(own_rows))
        for sym in sorted(inst.request[node]):
            target = field.unit_row(sym, inst.n)
            coeffs = field.solve_in_row_space(basis, target)
            if coeffs is None:
                entries.append(RecoveryEntry(node, sym, False))
            else:
                cut = len(received_rows)
                entries.append(RecoveryEntry(
                    node, sym, True,
                    received_coeffs=coeffs[:cut],
                    side_coeffs=coeffs[cut:],
                ))
    return entries


def flood_execute(inst: DisseminationInstance, r: int) -> Transcript:
    """Every node rebroadcasts its whole basis each round, r rounds."""
    spans = _initial_spans(inst)
    rounds: list[list[list[Row]]] = []
    sim_spans = [list(t.pivots.values()) for t in spans]
    # Build the flooding scheme round by round from the simulated state, then
    # hand it to execute() so the transcript comes from the single code path.
    work = [SpanTracker(inst.n, inst.q) for _ in range(inst.k)]
    for node in range(inst.k):
        for row in sim_spans[node]:
            work[node].add(row)
    in_nbrs = [inst.net.in_neighbors(v) for v in range(inst.k)]
    for _ in range(r):
        sent = [sorted(work[node].pivots.values()) for node in range(inst.k)]
        rounds.append(sent)
        arrivals = [
            [v for sender in in_nbrs[node] for v in sent[sender]]
            for node in range(inst.k)
        ]
        for node in range(inst.k):
            for v in arrivals[node]:
                work[node].add(v)
    return execute(inst, rounds)
