import random

import pytest

from dissem.bounds import (
    BoundsReport,
    bounds_report,
    clique_cover_number,
    clique_cover_witness,
    dmax_lower_bound,
    independence_number,
    independent_set_witness,
    lower_bound,
    minrank2,
    partition_upper_bound,
)
from dissem.errors import CapExceeded, InfeasibleRequest, ReceiverUncovered
from dissem.instance import SideInfoGraph, instance, side_info_graph, side_info_graph_of
from dissem.network import network
from tests.conftest import (
    exhaustive_alpha,
    exhaustive_clique_cover,
    exhaustive_minrank2,
)


def sym_graph(n, pairs):
    edges = set()
    for a, b in pairs:
        edges.add((a, b))
        edges.add((b, a))
    return SideInfoGraph(n, frozenset(edges))


def random_sym_graph(rng, n, p=0.5):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)
             if rng.random() < p]
    return sym_graph(n, pairs)


CYCLE5 = sym_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])


def complete(n):
    return sym_graph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def empty(n):
    return SideInfoGraph(n, frozenset())


# ---------------------------------------------------------------------------
# minrank2

def test_minrank_complete():
    assert minrank2(complete(4)) == 1


def test_minrank_empty():
    assert minrank2(empty(4)) == 4


def test_minrank_five_cycle_exhaustive():
    und = {frozenset(e) for e in CYCLE5.edges}
    oracle = exhaustive_minrank2(5, set(CYCLE5.edges))
    assert oracle == 3
    assert minrank2(CYCLE5) == 3
    assert exhaustive_alpha(5, und) == 2
    assert exhaustive_clique_cover(5, und) == 3


def test_minrank_matches_exhaustive_on_random_graphs():
    rng = random.Random(101)
    for _ in range(60):
        n = rng.randint(1, 5)
        h = random_sym_graph(rng, n, rng.random())
        assert minrank2(h) == exhaustive_minrank2(n, set(h.edges))


def test_minrank_matches_exhaustive_on_directed_graphs():
    rng = random.Random(103)
    for _ in range(40):
        n = rng.randint(2, 5)
        edges = {(a, b) for a in range(n) for b in range(n)
                 if a != b and rng.random() < 0.4}
        h = SideInfoGraph(n, frozenset(edges))
        assert minrank2(h) == exhaustive_minrank2(n, edges)


def test_minrank_monotone_under_edge_addition():
    rng = random.Random(107)
    for _ in range(40):
        n = rng.randint(2, 6)
        h = random_sym_graph(rng, n, 0.3)
        missing = [(a, b) for a in range(n) for b in range(n)
                   if a != b and (a, b) not in h.edges]
        if not missing:
            continue
        a, b = rng.choice(missing)
        richer = SideInfoGraph(n, h.edges | {(a, b)})
        assert minrank2(richer) <= minrank2(h)


def test_minrank_cap():
    with pytest.raises(CapExceeded):
        minrank2(empty(11))


# ---------------------------------------------------------------------------
# independence number / clique cover

def test_alpha_clc_basics():
    assert independence_number(complete(5)) == 1
    assert clique_cover_number(complete(5)) == 1
    assert independence_number(empty(5)) == 5
    assert clique_cover_number(empty(5)) == 5
    assert independence_number(CYCLE5) == 2
    assert clique_cover_number(CYCLE5) == 3


def test_witnesses_are_valid():
    rng = random.Random(109)
    for _ in range(40):
        n = rng.randint(1, 7)
        h = random_sym_graph(rng, n, rng.random())
        ind = independent_set_witness(h)
        assert len(ind) == independence_number(h)
        for i, a in enumerate(ind):
            for b in ind[i + 1:]:
                assert not h.has_edge(a, b) and not h.has_edge(b, a)
        cover = clique_cover_witness(h)
        assert len(cover) == clique_cover_number(h)
        covered = sorted(v for blk in cover for v in blk)
        assert covered == list(range(n))
        for blk in cover:
            for i, a in enumerate(blk):
                for b in blk[i + 1:]:
                    assert h.has_edge(a, b) and h.has_edge(b, a)


def test_alpha_clc_match_exhaustive():
    rng = random.Random(113)
    for _ in range(40):
        n = rng.randint(1, 6)
        h = random_sym_graph(rng, n, rng.random())
        und = {frozenset(e) for e in h.edges}
        assert independence_number(h) == exhaustive_alpha(n, und)
        assert clique_cover_number(h) == exhaustive_clique_cover(n, und)


def test_sandwich_on_random_graphs():
    rng = random.Random(127)
    for _ in range(100):
        h = random_sym_graph(rng, rng.randint(1, 8), rng.random())
        a = independence_number(h)
        m = minrank2(h)
        c = clique_cover_number(h)
        assert a <= m <= c


# ---------------------------------------------------------------------------
# instance-level bounds

def star_instance(n, side_info, transmitters=1, edges=None):
    k = n + transmitters
    if edges is None:
        edges = [(t, transmitters + r) for t in range(transmitters)
                 for r in range(n)]
    possess = [set(range(n))] * transmitters + [set(side_info[r]) for r in range(n)]
    request = [set()] * transmitters + [{r} for r in range(n)]
    return instance(2, n, network(k, edges), possess, request)


def test_dmax_fig1(fig1):
    assert dmax_lower_bound(fig1) == 2


def test_dmax_no_requests():
    inst = instance(2, 2, network(1, []), [{0, 1}], [set()])
    assert dmax_lower_bound(inst) == 0


def test_dmax_infeasible():
    inst = instance(2, 1, network(2, [(1, 0)]), [{0}, set()], [set(), {0}])
    with pytest.raises(InfeasibleRequest):
        dmax_lower_bound(inst)


def test_lower_bound_bipartite_empty_side_info():
    inst = star_instance(4, {r: set() for r in range(4)})
    assert lower_bound(inst) == 4


def test_lower_bound_general_is_dmax(fig1):
    assert lower_bound(fig1) == 2


def test_partition_single_transmitter_collapses():
    inst = star_instance(4, {0: {1}, 1: {0}, 2: {3}, 3: {2}})
    pb = partition_upper_bound(inst)
    h = side_info_graph(inst)
    assert pb.minrank_total == minrank2(h)
    assert pb.assignment == (0, 0, 0, 0)
    assert not pb.heuristic


def test_partition_forced_disjoint_groups():
    # two transmitters, each exclusively wired to two receivers
    edges = [(0, 2), (0, 3), (1, 4), (1, 5)]
    inst = star_instance(4, {0: {1}, 1: {0}, 2: {3}, 3: {2}},
                         transmitters=2, edges=edges)
    pb = partition_upper_bound(inst)
    # each pair knows each other: one coded transmission per group
    assert pb.minrank_total == 2
    assert pb.assignment == (0, 0, 1, 1)


def test_partition_uncovered_receiver():
    edges = [(0, 2), (0, 3), (0, 4)]  # receiver of symbol 3 unreachable
    inst = star_instance(4, {r: set() for r in range(4)},
                         transmitters=1, edges=edges)
    with pytest.raises(ReceiverUncovered):
        partition_upper_bound(inst)


def test_partition_beats_nothing_below_lower_bound():
    rng = random.Random(131)
    done = 0
    while done < 50:
        n = 4
        side = {r: {s for s in range(n) if s != r and rng.random() < 0.5}
                for r in range(n)}
        edges = [(t, 2 + r) for t in range(2) for r in range(n)
                 if rng.random() < 0.8]
        covered = {r for _, r in edges}
        if covered != set(range(2, 2 + n)):
            continue
        inst = star_instance(n, side, transmitters=2, edges=edges)
        pb = partition_upper_bound(inst)
        assert pb.minrank_total >= lower_bound(inst)
        assert pb.clique_cover_total >= pb.minrank_total
        done += 1


def test_bounds_report_fig1(fig1):
    rep = bounds_report(fig1)
    assert rep.lower_dmax == 2
    assert rep.lower_minrank2 is None
    assert dict(rep.notes)["minrank2"] == "n/a: not bipartite"


def test_bounds_report_bipartite_sandwich():
    inst = star_instance(5, {0: {1}, 1: {2}, 2: {3}, 3: {4}, 4: {0}})
    rep = bounds_report(inst)
    assert rep.lower_alpha <= rep.lower_minrank2 <= rep.upper_clique_cover
    assert rep.upper_partition == rep.lower_minrank2  # single transmitter


def test_bounds_report_rejects_inversion():
    with pytest.raises(AssertionError):
        BoundsReport(lower_minrank2=3, upper_partition=2)
