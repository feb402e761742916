"""Multi-round coded broadcast built round by round from possession patterns.

After round i, under the schemes built here, every node can decode exactly
the symbols held within distance i of it; the star pattern of held symbols
evolves by one application of the (self-looped, transposed) adjacency matrix
per round.  A round choice assigns every node a row space inside the
coordinate subspace of its currently held symbols; the round is valid when
each node ends it at full flood-equivalent knowledge, i.e. the rank of what
it received stacked on what it knew equals the star count of its evolved
pattern row.  Each round's total rank is minimized independently; the total
is an upper bound on the true optimum, not an optimality claim.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from dissem import field
from dissem.bounds import dmax_lower_bound
from dissem.errors import (
    CapExceeded,
    DimensionMismatch,
    NotSolvable,
    RoundsTooFew,
    SupportViolation,
    ZeroLowerBound,
)
from dissem.field import Row, SpanTracker
from dissem.instance import DisseminationInstance, possession_family
from dissem.network import adjacency, solvability_index
from dissem.star_algebra import IntMatrix, StarMatrix, int_mul_star, int_power_saturated

NodeRows = tuple[tuple[Row, ...], ...]


@dataclass(frozen=True)
class RoundContext:
    """One round's before/after possession patterns (compact k x n form)."""

    index: int
    d: IntMatrix
    pre: StarMatrix
    post: StarMatrix

    def __post_init__(self):
        k = self.d.row_count
        if self.d.cols != k:
            raise DimensionMismatch("adjacency must be square")
        if any(self.d.rows[i][i] == 0 for i in range(k)):
            raise ValueError("adjacency needs diagonal ones (rounds keep knowledge)")
        if self.pre.row_count != k or self.post.row_count != k:
            raise DimensionMismatch("patterns need one row per node")
        for node in range(k):
            if not set(self.pre.row_stars(node)) <= set(self.post.row_stars(node)):
                raise ValueError("possession can never shrink across a round")

    @property
    def k(self) -> int:
        return self.d.row_count

    @property
    def n(self) -> int:
        return self.pre.cols

    def known(self, node: int) -> tuple[int, ...]:
        return self.pre.row_stars(node)

    def gained(self, node: int) -> tuple[int, ...]:
        pre = set(self.pre.row_stars(node))
        return tuple(j for j in self.post.row_stars(node) if j not in pre)


def make_context(d: IntMatrix, pre: StarMatrix, index: int) -> RoundContext:
    return RoundContext(index=index, d=d, pre=pre, post=int_mul_star(d, pre))


def evolve(ahat: StarMatrix, d: IntMatrix, i: int) -> StarMatrix:
    """Possession pattern after i rounds of full flooding."""
    if d.cols != ahat.row_count:
        raise DimensionMismatch(f"{d.cols} cols vs {ahat.row_count} pattern rows")
    if any(d.rows[j][j] == 0 for j in range(d.row_count)):
        raise ValueError("adjacency needs diagonal ones")
    return int_mul_star(int_power_saturated(d, i), ahat)


def round_rhs_rank(ctx: RoundContext, node: int) -> int:
    """Knowledge dimension the node must reach by the end of the round."""
    return len(ctx.post.row_stars(node))


def _validate_choice(ctx: RoundContext, choice: Sequence[Sequence[Row]]) -> None:
    if len(choice) != ctx.k:
        raise SupportViolation(f"{len(choice)} node choices for {ctx.k} nodes")
    for node, rows in enumerate(choice):
        known = set(ctx.known(node))
        for row in rows:
            if len(row) != ctx.n:
                raise SupportViolation(f"row length {len(row)} != n {ctx.n}")
            bad = [j for j, x in enumerate(row) if x % ctx.pre.q and j not in known]
            if bad:
                raise SupportViolation(
                    f"node {node + 1} row uses symbols {[x + 1 for x in bad]} "
                    "it does not yet hold"
                )


def check_round(ctx: RoundContext, choice: Sequence[Sequence[Row]], node: int) -> bool:
    """Does `node` end the round knowing everything it could flood-learn?

    Stacks the rows it receives (in-neighbors per the self-looped adjacency)
    on the canonical basis of what it already knew and compares the rank to
    the evolved pattern's star count.
    """
    _validate_choice(ctx, choice)
    t = SpanTracker(ctx.n, ctx.pre.q)
    for s in ctx.known(node):
        t.add(field.unit_row(s, ctx.n))
    for sender in range(ctx.k):
        if ctx.d.rows[node][sender]:
            for row in choice[sender]:
                t.add(row)
    return t.rank == round_rhs_rank(ctx, node)


def construct_flood_round(ctx: RoundContext) -> NodeRows:
    """Every node broadcasts one unit vector per held symbol (always valid)."""
    return tuple(
        tuple(field.unit_row(s, ctx.n) for s in ctx.known(node))
        for node in range(ctx.k)
    )


@dataclass(frozen=True)
class RoundSearchCaps:
    max_explored: int = 200_000      # DFS nodes before giving up on exactness
    max_product: int = 10 ** 9       # static candidate-product precheck


DEFAULT_ROUND_CAPS = RoundSearchCaps()


def _greedy_round(ctx: RoundContext) -> NodeRows:
    """Drop flood rows one by one while every node still reaches its target."""
    rows = [list(r) for r in construct_flood_round(ctx)]
    receivers_of = [
        [j for j in range(ctx.k) if ctx.d.rows[j][s] and j != s]
        for s in range(ctx.k)
    ]
    changed = True
    while changed:
        changed = False
        for node in range(ctx.k):
            i = 0
            while i < len(rows[node]):
                cand = rows[node][:i] + rows[node][i + 1:]
                trial = [tuple(r) for r in rows]
                trial[node] = tuple(cand)
                if all(check_round(ctx, trial, j) for j in receivers_of[node]):
                    rows[node] = cand
                    changed = True
                else:
                    i += 1
    return tuple(tuple(r) for r in rows)


def minimize_round(ctx: RoundContext,
                   caps: RoundSearchCaps = DEFAULT_ROUND_CAPS) -> tuple[NodeRows, str]:
    """Smallest total rank for one round; falls back to greedy when capped.

    Returns (per-node rows, method) where method is "exact" or "greedy".
    The exact search enumerates per-node subspaces of the held-symbol
    coordinate space, cheapest first, pruning on the incumbent total and on
    receivers that can no longer reach their targets.
    """
    q = ctx.pre.q
    n = ctx.n
    targets = {j: round_rhs_rank(ctx, j) for j in range(ctx.k)}
    needed = [j for j in range(ctx.k) if targets[j] > len(ctx.known(j))]
    if not needed:
        return tuple(() for _ in range(ctx.k)), "exact"

    greedy = _greedy_round(ctx)
    senders = [
        s for s in range(ctx.k)
        if ctx.known(s) and any(ctx.d.rows[j][s] and j != s for j in needed)
    ]

    product = 1
    for s in senders:
        product *= field.count_subspaces(len(ctx.known(s)), q)
        if product > caps.max_product:
            return greedy, "greedy"

    candidates: list[list[tuple[Row, ...]]] = []
    for s in senders:
        support = sorted(ctx.known(s))
        candidates.append([
            field.embed_rows(basis, support, n)
            for basis in field.subspace_bases(len(support), q)
        ])

    pos = {s: i for i, s in enumerate(senders)}
    feeders = {
        j: sorted(pos[s] for s in senders if ctx.d.rows[j][s] and j != s)
        for j in needed
    }
    listeners = [[j for j in needed if d in feeders[j]] for d in range(len(senders))]
    trigger: list[list[int]] = [[] for _ in range(len(senders))]
    for j in needed:
        trigger[feeders[j][-1]].append(j)
    # suffix[j][d]: most rank senders at positions >= d could still add for j.
    suffix = {}
    for j in needed:
        caps_by_pos = [0] * (len(senders) + 1)
        for d in feeders[j]:
            caps_by_pos[d] = len(ctx.known(senders[d]))
        acc = [0] * (len(senders) + 2)
        for d in range(len(senders) - 1, -1, -1):
            acc[d] = acc[d + 1] + caps_by_pos[d]
        suffix[j] = acc

    trackers = {j: SpanTracker(n, q) for j in needed}
    for j in needed:
        for s in ctx.known(j):
            trackers[j].add(field.unit_row(s, n))

    best_tau = sum(len(r) for r in greedy)
    best_rows: NodeRows = greedy
    explored = 0

    def key_of(partial_rows):
        full = [() for _ in range(ctx.k)]
        for s, rows in zip(senders, partial_rows):
            full[s] = rows
        return tuple(full)

    def search(d: int, partial_rows: list, partial_tau: int):
        nonlocal best_tau, best_rows, explored
        if d == len(senders):
            full = key_of(partial_rows)
            if partial_tau < best_tau or (
                partial_tau == best_tau and full < tuple(best_rows)
            ):
                best_tau, best_rows = partial_tau, full
            return
        for cand in candidates[d]:
            explored += 1
            if explored > caps.max_explored:
                raise CapExceeded("round search budget exhausted")
            tau = partial_tau + len(cand)
            if tau > best_tau:
                break  # ascending dimension: nothing cheaper follows
            marks = [(j, trackers[j].mark()) for j in listeners[d]]
            for row in cand:
                for j in listeners[d]:
                    trackers[j].add(row)
            ok = True
            for j in trigger[d]:
                if trackers[j].rank != targets[j]:
                    ok = False
                    break
            if ok:
                for j in listeners[d]:
                    if trackers[j].rank + suffix[j][d + 1] < targets[j]:
                        ok = False
                        break
            if ok:
                partial_rows.append(cand)
                search(d + 1, partial_rows, tau)
                partial_rows.pop()
            for j, m in marks:
                trackers[j].rollback(m)

    try:
        search(0, [], 0)
    except CapExceeded:
        return greedy, "greedy"
    return best_rows, "exact"


@dataclass(frozen=True)
class MultiRoundScheme:
    q: int
    n: int
    rounds: tuple[NodeRows, ...]
    tau_rounds: tuple[int, ...]
    tau_total: int
    methods: tuple[str, ...]

    def as_rounds(self) -> tuple[NodeRows, ...]:
        return self.rounds


def schedule(inst: DisseminationInstance, r: int,
             caps: RoundSearchCaps = DEFAULT_ROUND_CAPS) -> MultiRoundScheme:
    """Build an r-round scheme delivering every symbol everyone is owed.

    Needs possession+request to cover all symbols at every node, a strongly
    connected graph, and r at least the graph's flooding horizon.  Rounds
    past the horizon cost nothing.
    """
    if not inst.covers_all_symbols():
        raise ValueError("multi-round scheduling needs possess + request = all symbols")
    r0 = solvability_index(inst.net)
    if r0 is None:
        raise NotSolvable("graph is not strongly connected")
    if r < r0:
        raise RoundsTooFew(r0)
    d = adjacency(inst.net, with_self_loops=True)
    pattern = possession_family(inst)
    rounds: list[NodeRows] = []
    methods: list[str] = []
    taus: list[int] = []
    for i in range(1, r + 1):
        ctx = make_context(d, pattern, i)
        if ctx.post.rows == ctx.pre.rows:
            choice: NodeRows = tuple(() for _ in range(inst.k))
            method = "exact"
        else:
            choice, method = minimize_round(ctx, caps)
        rounds.append(choice)
        methods.append(method)
        taus.append(sum(len(rows) for rows in choice))
        pattern = ctx.post
    return MultiRoundScheme(
        q=inst.q, n=inst.n, rounds=tuple(rounds),
        tau_rounds=tuple(taus), tau_total=sum(taus), methods=tuple(methods),
    )


def random_round(ctx: RoundContext, rng: random.Random,
                 attempts: int = 64) -> tuple[NodeRows, str]:
    """Sample family members and keep the cheapest one passing all checks.

    Mirrors picking random matrices from the round's family; falls back to
    flooding when no sample works.
    """
    needed = [j for j in range(ctx.k) if round_rhs_rank(ctx, j) > len(ctx.known(j))]
    if not needed:
        return tuple(() for _ in range(ctx.k)), "random"
    best: Optional[tuple[int, NodeRows]] = None
    for _ in range(attempts):
        choice = []
        for node in range(ctx.k):
            support = sorted(ctx.known(node))
            block = [
                tuple(rng.randrange(ctx.pre.q) if j in ctx.known(node) else 0
                      for j in range(ctx.n))
                for _ in range(ctx.n)
            ] if support else []
            reduced = field.rref(field.matrix(block, ctx.pre.q, ctx.n))[0]
            choice.append(tuple(reduced.rows))
        choice = tuple(choice)
        if all(check_round(ctx, choice, j) for j in needed):
            tau = sum(len(rows) for rows in choice)
            if best is None or tau < best[0]:
                best = (tau, choice)
    if best is None:
        return construct_flood_round(ctx), "flood"
    return best[1], "random"


def schedule_random(inst: DisseminationInstance, r: int, seed: int,
                    attempts: int = 64) -> MultiRoundScheme:
    """Like schedule(), but each round uses random family sampling."""
    if not inst.covers_all_symbols():
        raise ValueError("multi-round scheduling needs possess + request = all symbols")
    r0 = solvability_index(inst.net)
    if r0 is None:
        raise NotSolvable("graph is not strongly connected")
    if r < r0:
        raise RoundsTooFew(r0)
    rng = random.Random(seed)
    d = adjacency(inst.net, with_self_loops=True)
    pattern = possession_family(inst)
    rounds, methods, taus = [], [], []
    for i in range(1, r + 1):
        ctx = make_context(d, pattern, i)
        if ctx.post.rows == ctx.pre.rows:
            choice, method = tuple(() for _ in range(inst.k)), "random"
        else:
            choice, method = random_round(ctx, rng, attempts)
        rounds.append(choice)
        methods.append(method)
        taus.append(sum(len(rows) for rows in choice))
        pattern = ctx.post
    return MultiRoundScheme(
        q=inst.q, n=inst.n, rounds=tuple(rounds),
        tau_rounds=tuple(taus), tau_total=sum(taus), methods=tuple(methods),
    )


def ratio(inst: DisseminationInstance, r: int,
          caps: RoundSearchCaps = DEFAULT_ROUND_CAPS) -> Fraction:
    """Scheduled cost over the distance lower bound, as an exact rational."""
    sched = schedule(inst, r, caps)
    lo = dmax_lower_bound(inst)
    if lo == 0:
        raise ZeroLowerBound("nothing is requested; the scheme costs "
                             f"{sched.tau_total} and the bound is 0")
    return Fraction(sched.tau_total, lo)
