import itertools
import random
from fractions import Fraction

import pytest

from dissem import field, multiround
from dissem.bounds import dmax_lower_bound
from dissem.errors import NotSolvable, RoundsTooFew, SupportViolation, ZeroLowerBound
from dissem.instance import expand_family, instance, possession_family
from dissem.network import adjacency, network, solvability_index
from dissem.one_round import solve_exact
from dissem.protocol_sim import execute
from dissem.star_algebra import (
    STAR,
    int_diag,
    int_identity,
    int_matrix,
    int_mul_star,
    int_ones,
    int_power_saturated,
    maxrank,
    star_matrix,
    tensor,
)
from tests.conftest import gf2_rank_bitmask, random_strongly_connected


def cycle3_instance():
    net = network(3, [(0, 1), (1, 2), (2, 0)])
    return instance(2, 3, net, [{0}, {1}, {2}], [{1, 2}, {0, 2}, {0, 1}])


def random_covering_instance(rng, k, n):
    net = random_strongly_connected(k, rng)
    while True:
        holders = [rng.randrange(1, 1 << k) for _ in range(n)]
        if not all(h == (1 << k) - 1 for h in holders):
            break
    possess = [{j for j in range(n) if (holders[j] >> v) & 1} for v in range(k)]
    request = [set(range(n)) - p for p in possess]
    return instance(2, n, net, possess, request)


# ---------------------------------------------------------------------------
# evolve

def test_evolve_identity_keeps_pattern():
    pat = star_matrix([[STAR, 0], [0, STAR]], 2)
    assert multiround.evolve(pat, int_identity(2), 5).rows == pat.rows


def test_evolve_one_step_matches_worked_product():
    d = int_matrix([[1, 1, 0], [1, 1, 1], [0, 1, 1]])
    pat = star_matrix([[STAR, 0, 0], [0, 0, STAR], [0, STAR, 0]], 2)
    assert multiround.evolve(pat, d, 1).rows == (
        (STAR, 0, STAR), (STAR, STAR, STAR), (0, STAR, STAR))


def test_evolve_cycle_saturates_in_two():
    inst = cycle3_instance()
    d = adjacency(inst.net, with_self_loops=True)
    pat = possession_family(inst)
    one = multiround.evolve(pat, d, 1)
    # each node gains exactly its in-neighbor's symbol after one round
    assert one.rows == (
        (STAR, 0, STAR), (STAR, STAR, 0), (0, STAR, STAR))
    two = multiround.evolve(pat, d, 2)
    assert all(x is STAR for row in two.rows for x in row)
    # fixpoint: further evolution changes nothing
    assert multiround.evolve(pat, d, 3).rows == two.rows


def test_evolve_requires_diagonal():
    pat = star_matrix([[STAR, 0], [0, STAR]], 2)
    with pytest.raises(ValueError):
        multiround.evolve(pat, int_matrix([[0, 1], [1, 0]]), 1)


# ---------------------------------------------------------------------------
# per-round targets

def test_round_rhs_rank_examples():
    d = int_identity(4)
    pre = star_matrix([[STAR] * 4, [STAR, 0, STAR, STAR],
                       [0, 0, 0, 0], [STAR, 0, 0, 0]], 2)
    ctx = multiround.make_context(d, pre, 1)
    assert multiround.round_rhs_rank(ctx, 0) == 4
    assert multiround.round_rhs_rank(ctx, 1) == 3
    assert multiround.round_rhs_rank(ctx, 2) == 0


def test_round_rhs_rank_agrees_with_family_maxrank():
    # the star count of one evolved row equals the max rank of the full
    # selected family (diag(e_j) (x) I) . (D^i (x) E) . A
    rng = random.Random(17)
    for _ in range(25):
        k, n = rng.randint(2, 4), rng.randint(1, 4)
        net = random_strongly_connected(k, rng)
        inst = random_covering_instance(rng, k, n)
        net = inst.net
        k = net.k
        d = adjacency(net, with_self_loops=True)
        i = rng.randint(1, 2)
        pre = multiround.evolve(possession_family(inst), d, i - 1)
        ctx = multiround.make_context(d, pre, i)
        full = expand_family(possession_family(inst))
        evo = tensor(int_power_saturated(d, i), int_ones(n, n))
        evolved_family = int_mul_star(evo, full)
        for j in range(k):
            e_j = tuple(1 if x == j else 0 for x in range(k))
            sel = tensor(int_diag(e_j), int_identity(n))
            selected = int_mul_star(sel, evolved_family)
            assert maxrank(selected) == multiround.round_rhs_rank(ctx, j)


# ---------------------------------------------------------------------------
# check_round / flood construction

def make_ctx(inst, i=1):
    d = adjacency(inst.net, with_self_loops=True)
    pre = multiround.evolve(possession_family(inst), d, i - 1)
    return multiround.make_context(d, pre, i)


def test_flood_round_passes_everywhere():
    rng = random.Random(19)
    for _ in range(60):
        inst = random_covering_instance(rng, rng.randint(2, 5), rng.randint(1, 5))
        for i in (1, 2):
            ctx = make_ctx(inst, i)
            flood = multiround.construct_flood_round(ctx)
            assert all(multiround.check_round(ctx, flood, j)
                       for j in range(inst.k))


def test_empty_round_fails_when_something_to_gain():
    inst = cycle3_instance()
    ctx = make_ctx(inst)
    empty = tuple(() for _ in range(inst.k))
    assert not multiround.check_round(ctx, empty, 0)


def test_empty_round_passes_at_fixpoint():
    inst = cycle3_instance()
    d = adjacency(inst.net, with_self_loops=True)
    full = multiround.evolve(possession_family(inst), d, 2)
    ctx = multiround.make_context(d, full, 3)
    empty = tuple(() for _ in range(inst.k))
    assert all(multiround.check_round(ctx, empty, j) for j in range(inst.k))


def test_check_round_rejects_unheld_symbols():
    inst = cycle3_instance()
    ctx = make_ctx(inst)
    bad = (((0, 1, 0),), (), ())  # node 1 does not hold x2 yet
    with pytest.raises(SupportViolation):
        multiround.check_round(ctx, bad, 0)


def test_gamma_flood_rows_are_canonical():
    inst = cycle3_instance()
    ctx = make_ctx(inst)
    flood = multiround.construct_flood_round(ctx)
    assert flood[0] == ((1, 0, 0),)
    assert flood[1] == ((0, 1, 0),)


# ---------------------------------------------------------------------------
# minimize_round

def test_minimize_never_beats_flood_and_passes():
    rng = random.Random(23)
    for _ in range(40):
        inst = random_covering_instance(rng, rng.randint(2, 4), rng.randint(1, 4))
        ctx = make_ctx(inst)
        flood = multiround.construct_flood_round(ctx)
        choice, method = multiround.minimize_round(ctx)
        assert method == "exact"
        assert sum(len(c) for c in choice) <= sum(len(f) for f in flood)
        assert all(multiround.check_round(ctx, choice, j) for j in range(inst.k))


def test_minimize_complete_graph_matches_one_round_solver():
    rng = random.Random(29)
    for _ in range(25):
        k, n = rng.randint(2, 4), rng.randint(1, 4)
        net = network(k, [(u, v) for u in range(k) for v in range(k) if u != v])
        while True:
            holders = [rng.randrange(1, 1 << k) for _ in range(n)]
            if not all(h == (1 << k) - 1 for h in holders):
                break
        possess = [{j for j in range(n) if (holders[j] >> v) & 1}
                   for v in range(k)]
        request = [set(range(n)) - p for p in possess]
        inst = instance(2, n, net, possess, request)
        ctx = make_ctx(inst)
        choice, _ = multiround.minimize_round(ctx)
        tau_round = sum(len(c) for c in choice)
        assert tau_round == solve_exact(inst).tau


def test_minimize_fixpoint_round_is_free():
    inst = cycle3_instance()
    d = adjacency(inst.net, with_self_loops=True)
    full = multiround.evolve(possession_family(inst), d, 2)
    ctx = multiround.make_context(d, full, 3)
    choice, method = multiround.minimize_round(ctx)
    assert sum(len(c) for c in choice) == 0
    assert method == "exact"


def test_greedy_fallback_when_capped():
    inst = cycle3_instance()
    ctx = make_ctx(inst)
    tight = multiround.RoundSearchCaps(max_explored=0, max_product=0)
    choice, method = multiround.minimize_round(ctx, tight)
    assert method == "greedy"
    assert all(multiround.check_round(ctx, choice, j) for j in range(inst.k))


# ---------------------------------------------------------------------------
# schedule

def test_schedule_cycle():
    inst = cycle3_instance()
    s = multiround.schedule(inst, 2)
    assert s.tau_total == 6 and s.tau_rounds == (3, 3)
    assert execute(inst, s.rounds).all_satisfied()
    assert s.tau_total >= dmax_lower_bound(inst) == 3


def test_schedule_rounds_too_few():
    inst = cycle3_instance()
    with pytest.raises(RoundsTooFew) as err:
        multiround.schedule(inst, 1)
    assert err.value.required == 2


def test_schedule_not_strongly_connected():
    net = network(2, [(0, 1)])
    inst = instance(2, 2, net, [{0}, {1}], [{1}, {0}])
    with pytest.raises(NotSolvable):
        multiround.schedule(inst, 3)


def test_schedule_requires_covering():
    inst = instance(2, 2, network(2, [(0, 1), (1, 0)]), [{0}, {1}], [set(), {0}])
    with pytest.raises(ValueError):
        multiround.schedule(inst, 1)


def test_schedule_extra_rounds_cost_nothing():
    inst = cycle3_instance()
    s2 = multiround.schedule(inst, 2)
    s4 = multiround.schedule(inst, 4)
    assert s4.tau_total == s2.tau_total
    assert s4.tau_rounds == (3, 3, 0, 0)
    assert execute(inst, s4.rounds).all_satisfied()


def test_schedule_knowledge_matches_targets_each_round():
    # after each round, simulated knowledge dimension equals the star count
    rng = random.Random(37)
    for _ in range(20):
        inst = random_covering_instance(rng, 4, rng.randint(1, 4))
        r0 = solvability_index(inst.net)
        s = multiround.schedule(inst, r0)
        t = execute(inst, s.rounds)
        d = adjacency(inst.net, with_self_loops=True)
        pat = possession_family(inst)
        for i in range(1, r0 + 1):
            evolved = multiround.evolve(pat, d, i)
            for node in range(inst.k):
                assert t.knowledge_dims[i - 1][node] == len(evolved.row_stars(node))


def test_complete_graph_one_round_schedule_matches_solver():
    rng = random.Random(41)
    for _ in range(10):
        k, n = 3, 3
        net = network(k, [(u, v) for u in range(k) for v in range(k) if u != v])
        while True:
            holders = [rng.randrange(1, 1 << k) for _ in range(n)]
            if not all(h == (1 << k) - 1 for h in holders):
                break
        possess = [{j for j in range(n) if (holders[j] >> v) & 1}
                   for v in range(k)]
        request = [set(range(n)) - p for p in possess]
        inst = instance(2, n, net, possess, request)
        s = multiround.schedule(inst, 1)
        assert s.tau_total == solve_exact(inst).tau


# ---------------------------------------------------------------------------
# global optimum sanity (tiny exhaustive protocol search)

def span_key(masks):
    closure = {0}
    for m in masks:
        closure |= {x ^ m for x in closure}
    return frozenset(closure)


def subspaces_of(span: frozenset[int]):
    vectors = sorted(span - {0})
    seen = {frozenset([0]): []}
    for r in range(1, len(vectors) + 1):
        for gen in itertools.combinations(vectors, r):
            key = span_key(gen)
            if key not in seen:
                seen[key] = list(gen)
    return sorted(seen.values(), key=len)


def brute_force_protocol_opt(inst, rounds: int) -> int | None:
    """True minimum cost over every linear protocol with this many rounds."""
    n = inst.n
    in_nbrs = [inst.net.in_neighbors(v) for v in range(inst.k)]
    senders = [v for v in range(inst.k) if inst.net.out_neighbors(v)]
    targets = [(v, 1 << s) for v in range(inst.k) for s in inst.request[v]]
    start = tuple(span_key([1 << s for s in inst.possess[v]])
                  for v in range(inst.k))
    best: list[int | None] = [None]
    memo: dict = {}

    def rec(depth, state, cost):
        if best[0] is not None and cost >= best[0]:
            return
        if depth == rounds:
            if all(m in state[v] for v, m in targets):
                best[0] = cost
            return
        seen = memo.setdefault(depth, {})
        if state in seen and seen[state] <= cost:
            return
        seen[state] = cost
        options = [subspaces_of(state[v]) if v in senders else [[]]
                   for v in range(inst.k)]
        for joint in itertools.product(*options):
            extra = sum(gf2_rank_bitmask(list(g)) for g in joint)
            if best[0] is not None and cost + extra >= best[0]:
                continue
            nxt = tuple(
                span_key(list(state[v]) +
                         [m for u in in_nbrs[v] for m in joint[u]])
                for v in range(inst.k)
            )
            rec(depth + 1, nxt, cost + extra)

    rec(0, start, 0)
    return best[0]


def test_schedule_upper_bounds_true_optimum():
    rng = random.Random(43)
    done = 0
    while done < 6:
        inst = random_covering_instance(rng, 3, rng.randint(1, 3))
        r0 = solvability_index(inst.net)
        if r0 is None or r0 > 2:
            continue
        s = multiround.schedule(inst, r0)
        opt = brute_force_protocol_opt(inst, r0)
        assert opt is not None
        assert s.tau_total >= opt
        done += 1


# ---------------------------------------------------------------------------
# ratio / random strategy

def test_ratio_cycle():
    assert multiround.ratio(cycle3_instance(), 2) == Fraction(2, 1)


def test_ratio_forced_forwarding_is_one():
    # single requester, single missing symbol one hop away: cost 1, bound 1
    net = network(2, [(0, 1), (1, 0)])
    inst = instance(2, 2, net, [{0, 1}, {0}], [set(), {1}])
    assert multiround.ratio(inst, 1) == Fraction(1, 1)


def test_ratio_zero_bound_raises():
    net = network(2, [(0, 1), (1, 0)])
    inst = instance(2, 2, net, [{0, 1}, {0, 1}], [set(), set()])
    with pytest.raises(ZeroLowerBound):
        multiround.ratio(inst, 1)


def test_random_strategy_sound_and_deterministic():
    rng = random.Random(47)
    for i in range(10):
        inst = random_covering_instance(rng, 4, 3)
        r0 = solvability_index(inst.net)
        a = multiround.schedule_random(inst, r0, seed=5)
        b = multiround.schedule_random(inst, r0, seed=5)
        assert a == b
        assert execute(inst, a.rounds).all_satisfied()
        exact = multiround.schedule(inst, r0)
        assert a.tau_total >= exact.tau_total
