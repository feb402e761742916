"""Graph-theoretic bounds on the optimal number of transmissions.

For transmitter/receiver instances the side-information graph drives
everything: min-rank over GF(2) of fitting matrices is the exact linear
optimum of the one-transmitter case and a lower bound here; independence
number bounds it from below, clique cover from above.  For arbitrary
instances the summed shortest-distance bound applies.

All three graph quantities are computed exactly with branch-and-bound on
bitmask adjacency.  min-rank branches over the fitting row chosen for each
vertex while carrying the reduced span, with memoization on (vertex, span);
this is equivalent to enumerating low-rank factorizations but prunes to a
tractable tree at the supported sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from dissem.errors import CapExceeded, InfeasibleRequest, ReceiverUncovered
from dissem.instance import (
    DisseminationInstance,
    SideInfoGraph,
    bipartite_split,
    is_bipartite,
    side_info_graph,
)
from dissem.network import shortest_dist

MINRANK_CAP = 10
GRAPH_CAP = 20
PARTITION_CAP = 100_000


# ---------------------------------------------------------------------------
# Graph views (bitmask adjacency)

def _or_adjacency(h: SideInfoGraph) -> list[int]:
    adj = [0] * h.n
    for i, j in h.edges:
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    return adj


def _and_adjacency(h: SideInfoGraph) -> list[int]:
    adj = [0] * h.n
    for i, j in h.edges:
        if (j, i) in h.edges:
            adj[i] |= 1 << j
    return adj


# ---------------------------------------------------------------------------
# min-rank over GF(2)

def minrank2(h: SideInfoGraph, cap: int = MINRANK_CAP) -> int:
    """Minimum GF(2) rank over matrices with unit diagonal fitting h.

    Row i must be supported on {i} plus the out-neighborhood of i.  The rank
    of such a matrix is the dimension of the span of its rows, so the search
    picks one admissible row per vertex and minimizes the final span.
    """
    if h.n > cap:
        raise CapExceeded(f"{h.n} vertices > min-rank cap {cap}")
    n = h.n
    if n == 0:
        return 0
    out_sets = h.out_sets()
    choices: list[list[int]] = []
    for i in range(n):
        free = sorted(out_sets[i])
        base = 1 << i
        opts = []
        for sub in range(1 << len(free)):
            m = base
            for b, j in enumerate(free):
                if (sub >> b) & 1:
                    m |= 1 << j
            opts.append(m)
        choices.append(opts)
    order = sorted(range(n), key=lambda i: (len(choices[i]), i))

    best = _greedy_cover_size(_and_adjacency(h), n)
    floor = _greedy_independent_size(_or_adjacency(h), n)
    if best <= floor:
        return best

    visited: set[tuple[int, frozenset[int]]] = set()

    def reduce_add(pivots: dict[int, int], mask: int) -> Optional[dict[int, int]]:
        m = mask
        for b, row in pivots.items():
            if m & b:
                m ^= row
        if m == 0:
            return pivots
        lead = m & -m
        new = {b: (row ^ m if row & lead else row) for b, row in pivots.items()}
        new[lead] = m
        return new

    def dfs(idx: int, pivots: dict[int, int]):
        nonlocal best
        r = len(pivots)
        if r >= best:
            return
        if idx == n:
            best = r
            return
        key = (idx, frozenset(pivots.values()))
        if key in visited:
            return
        visited.add(key)
        v = order[idx]
        for mask in choices[v]:
            dfs(idx + 1, reduce_add(pivots, mask))
            if best <= floor:
                return

    dfs(0, {})
    return best


def _greedy_cover_size(and_adj: list[int], n: int) -> int:
    uncovered = (1 << n) - 1
    count = 0
    while uncovered:
        v = (uncovered & -uncovered).bit_length() - 1
        clique = 1 << v
        cand = and_adj[v] & uncovered
        while cand:
            u = (cand & -cand).bit_length() - 1
            clique |= 1 << u
            cand &= and_adj[u]
        uncovered &= ~clique
        count += 1
    return count


def _greedy_independent_size(or_adj: list[int], n: int) -> int:
    cand = (1 << n) - 1
    size = 0
    while cand:
        v = min((u for u in range(n) if (cand >> u) & 1),
                key=lambda u: bin(or_adj[u] & cand).count("1"))
        size += 1
        cand &= ~((1 << v) | or_adj[v])
    return size


# ---------------------------------------------------------------------------
# Independence number and clique cover (exact)

def _max_independent_set(or_adj: list[int], n: int) -> int:
    best_mask = 0

    def popcount(x: int) -> int:
        return bin(x).count("1")

    def expand(cand: int, cur: int):
        nonlocal best_mask
        if popcount(cur) + popcount(cand) <= popcount(best_mask):
            return
        if cand == 0:
            if popcount(cur) > popcount(best_mask):
                best_mask = cur
            return
        # Branch on the candidate with most candidate-internal conflicts.
        v = max((u for u in range(n) if (cand >> u) & 1),
                key=lambda u: (popcount(or_adj[u] & cand), -u))
        expand(cand & ~((1 << v) | or_adj[v]), cur | (1 << v))
        expand(cand & ~(1 << v), cur)

    expand((1 << n) - 1, 0)
    return best_mask


def _exact_coloring(adj: list[int], n: int) -> list[int]:
    """Exact graph coloring (colors 0..chi-1) via iterated k-feasibility."""
    if n == 0:
        return []
    # Greedy DSATUR upper bound.
    colors = [-1] * n
    for _ in range(n):
        best_v, best_sat, best_deg = -1, -1, -1
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in range(n)
                       if (adj[v] >> u) & 1 and colors[u] >= 0})
            deg = bin(adj[v]).count("1")
            if (sat, deg) > (best_sat, best_deg):
                best_v, best_sat, best_deg = v, sat, deg
        used = {colors[u] for u in range(n) if (adj[best_v] >> u) & 1}
        c = 0
        while c in used:
            c += 1
        colors[best_v] = c
    ub = max(colors) + 1
    lb_mask = _max_independent_set([(~adj[v]) & ((1 << n) - 1) & ~(1 << v)
                                    for v in range(n)], n)
    lb = bin(lb_mask).count("1")  # clique in adj = independent set in complement

    best = colors[:]
    for k in range(lb, ub):
        attempt = _try_coloring(adj, n, k)
        if attempt is not None:
            best = attempt
            break
    return best


def _try_coloring(adj: list[int], n: int, k: int) -> Optional[list[int]]:
    colors = [-1] * n

    def pick() -> int:
        best_v, key = -1, (-1, -1)
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in range(n)
                       if (adj[v] >> u) & 1 and colors[u] >= 0})
            deg = bin(adj[v]).count("1")
            if (sat, deg) > key:
                best_v, key = v, (sat, deg)
        return best_v

    def dfs(done: int) -> bool:
        if done == n:
            return True
        v = pick()
        used = {colors[u] for u in range(n) if (adj[v] >> u) & 1 and colors[u] >= 0}
        top = min(k - 1, max([colors[u] for u in range(n) if colors[u] >= 0],
                             default=-1) + 1)
        for c in range(top + 1):
            if c in used:
                continue
            colors[v] = c
            if dfs(done + 1):
                return True
            colors[v] = -1
        return False

    return colors if dfs(0) else None


def independence_number(h: SideInfoGraph, cap: int = GRAPH_CAP) -> int:
    """Largest set of receivers pairwise unaware of each other's demands."""
    if h.n > cap:
        raise CapExceeded(f"{h.n} vertices > graph cap {cap}")
    return bin(_max_independent_set(_or_adjacency(h), h.n)).count("1")


def independent_set_witness(h: SideInfoGraph, cap: int = GRAPH_CAP) -> tuple[int, ...]:
    if h.n > cap:
        raise CapExceeded(f"{h.n} vertices > graph cap {cap}")
    mask = _max_independent_set(_or_adjacency(h), h.n)
    return tuple(v for v in range(h.n) if (mask >> v) & 1)


def clique_cover_number(h: SideInfoGraph, cap: int = GRAPH_CAP) -> int:
    """Minimum number of mutually-aware groups covering all receivers."""
    return len(clique_cover_witness(h, cap))


def clique_cover_witness(h: SideInfoGraph, cap: int = GRAPH_CAP) -> tuple[tuple[int, ...], ...]:
    if h.n > cap:
        raise CapExceeded(f"{h.n} vertices > graph cap {cap}")
    if h.n == 0:
        return ()
    and_adj = _and_adjacency(h)
    comp = [(~and_adj[v]) & ((1 << h.n) - 1) & ~(1 << v) for v in range(h.n)]
    coloring = _exact_coloring(comp, h.n)
    classes: dict[int, list[int]] = {}
    for v, c in enumerate(coloring):
        classes.setdefault(c, []).append(v)
    return tuple(tuple(sorted(vs)) for _, vs in sorted(classes.items()))


# ---------------------------------------------------------------------------
# Instance-level bounds

def dmax_lower_bound(inst: DisseminationInstance) -> int:
    """Max over nodes of summed shortest distances to their requested symbols."""
    worst = 0
    for node in range(inst.k):
        total = 0
        for sym in inst.request[node]:
            holders = [v for v in range(inst.k) if sym in inst.possess[v]]
            d = shortest_dist(inst.net, holders, node)
            if d is None:
                raise InfeasibleRequest(
                    f"symbol {sym + 1} cannot reach node {node + 1}"
                )
            total += d
        worst = max(worst, total)
    return worst


def lower_bound(inst: DisseminationInstance) -> int:
    """Best available lower bound on total transmissions for the instance."""
    if is_bipartite(inst):
        h = side_info_graph(inst)
        try:
            return minrank2(h)
        except CapExceeded:
            try:
                alpha = independence_number(h)
            except CapExceeded:
                alpha = 0
            return max(alpha, dmax_lower_bound(inst))
    return dmax_lower_bound(inst)


@dataclass(frozen=True)
class PartitionBound:
    minrank_total: int
    clique_cover_total: int
    assignment: tuple[int, ...]          # receiver symbol -> transmitter node
    clc_assignment: tuple[int, ...]
    clique_cover: tuple[tuple[int, ...], ...]
    heuristic: bool


def partition_upper_bound(inst: DisseminationInstance,
                          partition_cap: int = PARTITION_CAP,
                          minrank_cap: int = MINRANK_CAP) -> PartitionBound:
    """Best split of receivers among their transmitters, solved per block.

    Each receiver is assigned to exactly one transmitter in-neighbor; blocks
    become independent one-transmitter instances whose min-ranks add up.  The
    weaker per-block clique-cover sum is reported alongside.  When there are
    more assignments than `partition_cap`, a single greedy assignment is
    scored instead and flagged.
    """
    split = bipartite_split(inst)
    if split is None:
        raise ValueError("partition bound needs a bipartite instance")
    _, by_symbol = split
    h = side_info_graph(inst)
    feeders: list[tuple[int, ...]] = []
    for s in range(inst.n):
        nbrs = inst.net.in_neighbors(by_symbol[s])
        if not nbrs:
            raise ReceiverUncovered(
                f"receiver of symbol {s + 1} has no transmitter in-neighbor"
            )
        feeders.append(nbrs)

    total = 1
    for f in feeders:
        total *= len(f)
        if total > partition_cap:
            break
    heuristic = total > partition_cap
    if heuristic:
        assignments = [tuple(f[0] for f in feeders)]
    else:
        assignments = [()]
        for f in feeders:
            assignments = [a + (t,) for a in assignments for t in f]

    mr_memo: dict[frozenset[int], int] = {}
    clc_memo: dict[frozenset[int], tuple[tuple[int, ...], ...]] = {}

    def block_minrank(symbols: frozenset[int]) -> int:
        if symbols not in mr_memo:
            mr_memo[symbols] = minrank2(h.induced(symbols), cap=minrank_cap)
        return mr_memo[symbols]

    def block_cover(symbols: frozenset[int]) -> tuple[tuple[int, ...], ...]:
        if symbols not in clc_memo:
            local = clique_cover_witness(h.induced(symbols))
            order = sorted(symbols)
            clc_memo[symbols] = tuple(
                tuple(order[v] for v in blk) for blk in local
            )
        return clc_memo[symbols]

    best_mr: Optional[tuple[int, tuple[int, ...]]] = None
    best_clc: Optional[tuple[int, tuple[int, ...], tuple]] = None
    for a in assignments:
        blocks: dict[int, set[int]] = {}
        for s, t in enumerate(a):
            blocks.setdefault(t, set()).add(s)
        mr = sum(block_minrank(frozenset(ss)) for ss in blocks.values())
        covers = [block_cover(frozenset(ss)) for ss in blocks.values()]
        clc = sum(len(c) for c in covers)
        if best_mr is None or (mr, a) < best_mr:
            best_mr = (mr, a)
        flat_cover = tuple(blk for c in covers for blk in c)
        if best_clc is None or (clc, a) < best_clc[:2]:
            best_clc = (clc, a, flat_cover)
    return PartitionBound(
        minrank_total=best_mr[0],
        clique_cover_total=best_clc[0],
        assignment=best_mr[1],
        clc_assignment=best_clc[1],
        clique_cover=best_clc[2],
        heuristic=heuristic,
    )


@dataclass(frozen=True)
class BoundsReport:
    """Lower/upper bounds with provenance; None entries carry a note."""

    lower_dmax: Optional[int] = None
    lower_minrank2: Optional[int] = None
    lower_alpha: Optional[int] = None
    upper_partition: Optional[int] = None
    upper_clique_cover: Optional[int] = None
    witness_independent_set: Optional[tuple[int, ...]] = None
    witness_partition: Optional[tuple[int, ...]] = None
    witness_clique_cover: Optional[tuple[tuple[int, ...], ...]] = None
    notes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        lows = [x for x in (self.lower_dmax, self.lower_minrank2, self.lower_alpha)
                if x is not None]
        ups = [x for x in (self.upper_partition, self.upper_clique_cover)
               if x is not None]
        for lo in lows:
            for up in ups:
                if lo > up:
                    raise AssertionError(f"lower bound {lo} exceeds upper bound {up}")


def bounds_report(inst: DisseminationInstance) -> BoundsReport:
    notes: list[tuple[str, str]] = []
    vals: dict = {}
    try:
        vals["lower_dmax"] = dmax_lower_bound(inst)
    except InfeasibleRequest as e:
        notes.append(("dmax", f"n/a: {e}"))
    if not is_bipartite(inst):
        for name in ("minrank2", "alpha", "partition", "clique_cover"):
            notes.append((name, "n/a: not bipartite"))
        return BoundsReport(notes=tuple(notes), **vals)
    h = side_info_graph(inst)
    try:
        vals["lower_minrank2"] = minrank2(h)
    except CapExceeded as e:
        notes.append(("minrank2", f"n/a: {e}"))
    try:
        vals["lower_alpha"] = independence_number(h)
        vals["witness_independent_set"] = independent_set_witness(h)
    except CapExceeded as e:
        notes.append(("alpha", f"n/a: {e}"))
    try:
        pb = partition_upper_bound(inst)
        vals["upper_partition"] = pb.minrank_total
        vals["upper_clique_cover"] = pb.clique_cover_total
        vals["witness_partition"] = pb.assignment
        vals["witness_clique_cover"] = pb.clique_cover
        if pb.heuristic:
            notes.append(("partition", "greedy assignment (partition count over cap)"))
    except (ReceiverUncovered, CapExceeded) as e:
        notes.append(("partition", f"n/a: {e}"))
    return BoundsReport(notes=tuple(notes), **vals)
