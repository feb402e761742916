"""Problem instances: who holds what, who wants what, over which topology.

Symbols are 0-indexed internally (files are 1-indexed).  Requests are always
disjoint from possessions.  The bipartite shape (pure transmitters that hold
everything, one receiver per symbol requesting exactly its own) unlocks the
graph-theoretic bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from dissem import field
from dissem.errors import DimensionMismatch
from dissem.field import FieldMatrix
from dissem.network import DirectedNetwork
from dissem.star_algebra import STAR, StarMatrix


@dataclass(frozen=True)
class DisseminationInstance:
    q: int
    n: int
    net: DirectedNetwork
    possess: tuple[frozenset[int], ...]
    request: tuple[frozenset[int], ...]

    def __post_init__(self):
        if not field.is_prime(self.q):
            raise ValueError(f"modulus {self.q} is not prime")
        if len(self.possess) != self.net.k or len(self.request) != self.net.k:
            raise DimensionMismatch("possess/request need one set per node")
        for node in range(self.net.k):
            for s in self.possess[node] | self.request[node]:
                if not (0 <= s < self.n):
                    raise ValueError(f"symbol {s} outside 0..{self.n - 1}")
            overlap = self.possess[node] & self.request[node]
            if overlap:
                raise ValueError(
                    f"node {node} both holds and requests {sorted(overlap)}"
                )

    @property
    def k(self) -> int:
        return self.net.k

    def covers_all_symbols(self) -> bool:
        """True when possession plus request is the full symbol set everywhere."""
        full = frozenset(range(self.n))
        return all(p | t == full for p, t in zip(self.possess, self.request))


def instance(q: int, n: int, net: DirectedNetwork,
             possess: Iterable[Iterable[int]],
             request: Iterable[Iterable[int]]) -> DisseminationInstance:
    return DisseminationInstance(
        q, n, net,
        tuple(frozenset(p) for p in possess),
        tuple(frozenset(t) for t in request),
    )


def possession_family(inst: DisseminationInstance) -> StarMatrix:
    """Compact k x n star pattern: row per node, star exactly on held symbols.

    The full kn x n family is this pattern with every row repeated n times;
    the duplication carries no extra information, so the compact form is the
    working representation.
    """
    rows = tuple(
        tuple(STAR if j in inst.possess[node] else 0 for j in range(inst.n))
        for node in range(inst.k)
    )
    return StarMatrix(inst.q, inst.n, rows)


def expand_family(compact: StarMatrix) -> StarMatrix:
    """Blow a k x n pattern up to the kn x n block form (each row n times)."""
    rows = tuple(r for r in compact.rows for _ in range(compact.cols))
    return StarMatrix(compact.q, compact.cols, rows)


def possession_diag(inst: DisseminationInstance, node: int) -> FieldMatrix:
    rows = tuple(
        tuple(1 if i == j and i in inst.possess[node] else 0 for j in range(inst.n))
        for i in range(inst.n)
    )
    return FieldMatrix(inst.q, inst.n, rows)


def query_diag(inst: DisseminationInstance, node: int) -> FieldMatrix:
    rows = tuple(
        tuple(1 if i == j and i in inst.request[node] else 0 for j in range(inst.n))
        for i in range(inst.n)
    )
    return FieldMatrix(inst.q, inst.n, rows)


@dataclass(frozen=True)
class SideInfoGraph:
    """Directed graph on receivers: edge (i, j) when receiver i holds symbol j."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.n - 1}")
            if i == j:
                raise ValueError("receivers never hold their own demand")

    def is_symmetric(self) -> bool:
        return all((j, i) in self.edges for i, j in self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges

    def out_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(
            frozenset(j for i2, j in self.edges if i2 == i) for i in range(self.n)
        )

    def induced(self, vertices: Iterable[int]) -> "SideInfoGraph":
        """Subgraph on a vertex subset, relabeled 0..m-1 in sorted order."""
        order = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(order)}
        edges = frozenset(
            (pos[i], pos[j]) for i, j in self.edges if i in pos and j in pos
        )
        return SideInfoGraph(len(order), edges)


def side_info_graph_of(n: int, possess_by_receiver) -> SideInfoGraph:
    edges = frozenset(
        (i, j) for i in range(n) for j in possess_by_receiver[i] if j != i
    )
    return SideInfoGraph(n, edges)


def bipartite_split(inst: DisseminationInstance):
    """Return (transmitters, receiver-of-symbol map) or None if not bipartite.

    Transmitters hold every symbol and request nothing; the rest are exactly
    n receivers, one per symbol, requesting exactly their own.  Edges must
    run only from transmitters to receivers.
    """
    full = frozenset(range(inst.n))
    transmitters = [v for v in range(inst.k)
                    if inst.possess[v] == full and not inst.request[v]]
    tx = set(transmitters)
    receivers = [v for v in range(inst.k) if v not in tx]
    if len(receivers) != inst.n:
        return None
    by_symbol: dict[int, int] = {}
    for v in receivers:
        if len(inst.request[v]) != 1:
            return None
        (sym,) = inst.request[v]
        if sym in by_symbol:
            return None
        by_symbol[sym] = v
    if len(by_symbol) != inst.n:
        return None
    for u, v in inst.net.edges:
        if u not in tx or v in tx:
            return None
    return tuple(transmitters), by_symbol


def is_bipartite(inst: DisseminationInstance) -> bool:
    return bipartite_split(inst) is not None


def side_info_graph(inst: DisseminationInstance) -> SideInfoGraph:
    """Side-information graph of a bipartite instance (receiver i holds j)."""
    split = bipartite_split(inst)
    if split is None:
        raise ValueError("side-information graph needs a bipartite instance")
    _, by_symbol = split
    possess_by_receiver = [inst.possess[by_symbol[s]] for s in range(inst.n)]
    return side_info_graph_of(inst.n, possess_by_receiver)
