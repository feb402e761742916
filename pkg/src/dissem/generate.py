"""Seeded random instances with a prescribed flooding horizon.

Graphs are sampled as a random spanning cycle plus random extra edges and
accepted only when the matrix-power horizon equals the requested diameter.
Possession assigns every symbol to a uniformly random nonempty node subset;
requests are the per-node complements, so possession plus request always
covers the symbol set and every assignment is feasible.
"""

from __future__ import annotations

import random

from dissem.errors import GenerationFailed
from dissem.instance import DisseminationInstance, instance
from dissem.network import DirectedNetwork, network, solvability_index

RETRY_BUDGET = 10_000


def corpus_rng(seed: int, k: int, n: int, diameter: int, index: int) -> random.Random:
    """Independent, platform-stable stream per corpus slot."""
    return random.Random(f"{seed}:{k}:{n}:{diameter}:{index}")


def random_strong_digraph(k: int, rng: random.Random) -> DirectedNetwork:
    order = list(range(k))
    rng.shuffle(order)
    edges = {(order[i], order[(i + 1) % k]) for i in range(k)}
    p = rng.random()
    for u in range(k):
        for v in range(k):
            if u != v and (u, v) not in edges and rng.random() < p:
                edges.add((u, v))
    return network(k, edges)


def random_instance(k: int, n: int, diameter: int, rng: random.Random,
                    q: int = 2, retries: int = RETRY_BUDGET) -> DisseminationInstance:
    """One instance with the exact horizon; every node requests what it lacks."""
    if k < 2 or not (1 <= diameter <= k - 1):
        raise GenerationFailed(f"diameter {diameter} unreachable with {k} nodes")
    for _ in range(retries):
        net = random_strong_digraph(k, rng)
        if solvability_index(net) != diameter:
            continue
        holders = [rng.randrange(1, 1 << k) for _ in range(n)]
        if all(h == (1 << k) - 1 for h in holders):
            continue  # everyone holds everything: nothing would be requested
        possess = [
            {j for j in range(n) if (holders[j] >> v) & 1} for v in range(k)
        ]
        request = [set(range(n)) - p for p in possess]
        return instance(q, n, net, possess, request)
    raise GenerationFailed(
        f"no instance with k={k}, diameter={diameter} in {retries} tries"
    )


def generate_corpus(k: int, n: int, diameter: int, count: int, seed: int,
                    q: int = 2) -> list[DisseminationInstance]:
    return [
        random_instance(k, n, diameter, corpus_rng(seed, k, n, diameter, i), q=q)
        for i in range(count)
    ]
