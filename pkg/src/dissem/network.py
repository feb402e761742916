"""Directed broadcast topologies and their reachability structure.

Nodes are 0-indexed internally; serialization converts to 1-indexed names.
The adjacency matrix convention is transposed: entry (i, j) is 1 when the
edge (j, i) exists, so row i lists the in-neighbors of i.  The self-loop
variant (forced diagonal ones) models that a node keeps what it already has
between rounds.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from dissem.star_algebra import IntMatrix, int_matmul_saturated, int_power_saturated


@dataclass(frozen=True)
class DirectedNetwork:
    k: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.k and 0 <= v < self.k):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.k - 1}")
            if u == v:
                raise ValueError(f"self-loop on node {u} is not stored")

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(u for u, w in self.edges if w == v))

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(w for u, w in self.edges if u == v))


def network(k: int, edges: Iterable[tuple[int, int]]) -> DirectedNetwork:
    return DirectedNetwork(k, frozenset((u, v) for u, v in edges))


def adjacency(net: DirectedNetwork, with_self_loops: bool = False) -> IntMatrix:
    """Transposed 0/1 adjacency: (i, j) = 1 iff (j, i) is an edge."""
    rows = []
    for i in range(net.k):
        row = [0] * net.k
        for j in net.in_neighbors(i):
            row[j] = 1
        if with_self_loops:
            row[i] = 1
        rows.append(tuple(row))
    return IntMatrix(net.k, tuple(rows))


def solvability_index(net: DirectedNetwork) -> Optional[int]:
    """Smallest r with (D + I)^r all-positive; None when not strongly connected.

    Equals the largest shortest-path length over ordered node pairs, i.e. the
    number of rounds after which flooding reaches everyone from everywhere.
    """
    d = adjacency(net, with_self_loops=True)
    power = int_power_saturated(d, 0)
    for r in range(net.k + 1):
        if power.all_positive():
            return r
        power = int_matmul_saturated(power, d)
    return None


def shortest_dist(net: DirectedNetwork, sources: Iterable[int], target: int) -> Optional[int]:
    """BFS distance from a source set; 0 when target is a source, None if unreachable."""
    srcs = set(sources)
    if not srcs:
        return None
    if target in srcs:
        return 0
    out = [[] for _ in range(net.k)]
    for u, v in net.edges:
        out[u].append(v)
    dist = {s: 0 for s in srcs}
    queue = deque(srcs)
    while queue:
        u = queue.popleft()
        for v in out[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                if v == target:
                    return dist[v]
                queue.append(v)
    return None


def is_feasible(net: DirectedNetwork, possess, request) -> bool:
    """Every requested symbol is held somewhere that can reach the requester."""
    for node in range(net.k):
        for sym in request[node]:
            holders = [v for v in range(net.k) if sym in possess[v]]
            if shortest_dist(net, holders, node) is None:
                return False
    return True
