"""Shared builders and independent oracles used across the suite.

The oracles here deliberately avoid the library's search paths: GF(2) ranks
are recomputed with bitmask elimination, graph quantities by exhaustion, so
agreement is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import random

import pytest

from dissem.instance import DisseminationInstance, instance
from dissem.network import network


@pytest.fixture
def fig1() -> DisseminationInstance:
    """Five nodes, three symbols; the worked two-transmission example."""
    net = network(5, [(0, 2), (0, 3), (1, 2), (1, 3), (1, 4)])
    return instance(
        2, 3, net,
        possess=[{0, 1}, {1, 2}, {0}, {1}, {0, 2}],
        request=[set(), set(), {1, 2}, {0, 2}, {1}],
    )


# ---------------------------------------------------------------------------
# Independent GF(2) helpers (bitmask rows)

def gf2_rank_bitmask(rows: list[int]) -> int:
    rank = 0
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
            rank += 1
    return rank


def rows_to_masks(rows, n: int) -> list[int]:
    return [sum((x % 2) << j for j, x in enumerate(r)) for r in rows]


def gf2_in_span(vec_mask: int, row_masks: list[int]) -> bool:
    return gf2_rank_bitmask(row_masks + [vec_mask]) == gf2_rank_bitmask(row_masks)


# ---------------------------------------------------------------------------
# Random graph/instance builders (test-local, seeded)

def random_digraph(k: int, rng: random.Random, p: float | None = None):
    p = rng.random() if p is None else p
    edges = [(u, v) for u in range(k) for v in range(k)
             if u != v and rng.random() < p]
    return network(k, edges)


def random_strongly_connected(k: int, rng: random.Random):
    while True:
        order = list(range(k))
        rng.shuffle(order)
        edges = {(order[i], order[(i + 1) % k]) for i in range(k)}
        p = rng.random()
        for u in range(k):
            for v in range(k):
                if u != v and rng.random() < p:
                    edges.add((u, v))
        return network(k, edges)


def bfs_ecc_max(net) -> int | None:
    """Independent max shortest-path oracle; None if some pair unreachable."""
    worst = 0
    out = {u: [] for u in range(net.k)}
    for u, v in net.edges:
        out[u].append(v)
    for src in range(net.k):
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in out[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if len(dist) < net.k:
            return None
        worst = max(worst, max(dist.values()))
    return worst


def random_tiny_instance(rng: random.Random, kmax: int = 4, nmax: int = 4,
                         q: int = 2) -> DisseminationInstance:
    """Small instance with nonempty requests somewhere; not always solvable."""
    k = rng.randint(2, kmax)
    n = rng.randint(1, nmax)
    net = random_digraph(k, rng)
    possess = []
    request = []
    for _ in range(k):
        p = {s for s in range(n) if rng.random() < 0.5}
        t = {s for s in set(range(n)) - p if rng.random() < 0.5}
        possess.append(p)
        request.append(t)
    return instance(q, n, net, possess, request)


def random_star_instance(rng: random.Random, n: int,
                         q: int = 2) -> DisseminationInstance:
    """One transmitter holding everything, n receivers with random side info."""
    k = n + 1
    net = network(k, [(0, r) for r in range(1, k)])
    possess = [set(range(n))]
    request = [set()]
    for r in range(n):
        side = {s for s in range(n) if s != r and rng.random() < 0.5}
        possess.append(side)
        request.append({r})
    return instance(q, n, net, possess, request)


# ---------------------------------------------------------------------------
# Exhaustive graph oracles (tiny n only)

def exhaustive_minrank2(n: int, edges: set[tuple[int, int]]) -> int:
    """Min GF(2) rank over every fitting matrix, by full enumeration."""
    free = sorted(edges)
    best = n
    for bits in itertools.product((0, 1), repeat=len(free)):
        masks = [1 << i for i in range(n)]
        for (i, j), b in zip(free, bits):
            if b:
                masks[i] |= 1 << j
        best = min(best, gf2_rank_bitmask(masks))
        if best == 1:
            break
    return best


def exhaustive_alpha(n: int, und_edges: set[frozenset[int]]) -> int:
    best = 0
    for size in range(n, 0, -1):
        for sub in itertools.combinations(range(n), size):
            if all(frozenset((a, b)) not in und_edges
                   for a, b in itertools.combinations(sub, 2)):
                return size
    return best


def exhaustive_clique_cover(n: int, und_edges: set[frozenset[int]]) -> int:
    def is_clique(group) -> bool:
        return all(frozenset((a, b)) in und_edges
                   for a, b in itertools.combinations(group, 2))

    def partitions(items):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for part in partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [[first] + part[i]] + part[i + 1:]
            yield [[first]] + part

    best = n
    for part in partitions(list(range(n))):
        if len(part) < best and all(is_clique(g) for g in part):
            best = len(part)
    return best
