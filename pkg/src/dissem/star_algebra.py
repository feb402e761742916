"""Matrix families over GF(q) written as matrices over GF(q) plus a '*' symbol.

A '*' entry stands for a coefficient the owning node may choose freely, so a
star matrix denotes the whole family of field matrices obtained by
substituting field values for the stars.  The arithmetic is the natural one:
anything plus '*' is '*', zero times anything (star included) is zero,
nonzero times '*' is '*'.  Integer matrices multiply families after their
nonzero entries collapse to 1; only zero/nonzero structure matters.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from dissem import field
from dissem.errors import DimensionMismatch
from dissem.field import FieldMatrix, Row


class _Star:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "*"


STAR = _Star()
Entry = Union[int, _Star]


def star_add(a: Entry, b: Entry, q: int) -> Entry:
    if a is STAR or b is STAR:
        return STAR
    return (a + b) % q


def star_mul(a: Entry, b: Entry, q: int) -> Entry:
    """Zero annihilates even a star; a star survives any nonzero factor."""
    if a is STAR:
        return 0 if b == 0 else STAR
    if b is STAR:
        return 0 if a == 0 else STAR
    return (a * b) % q


@dataclass(frozen=True)
class StarMatrix:
    q: int
    cols: int
    rows: tuple[tuple[Entry, ...], ...]

    def __post_init__(self):
        for r in self.rows:
            if len(r) != self.cols:
                raise DimensionMismatch(f"row length {len(r)} != cols {self.cols}")
            for x in r:
                if x is not STAR and not (0 <= x < self.q):
                    raise ValueError(f"entry {x!r} not in GF({self.q}) and not *")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def star_positions(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (i, j)
            for i, r in enumerate(self.rows)
            for j, x in enumerate(r)
            if x is STAR
        )

    def row_stars(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, x in enumerate(self.rows[i]) if x is STAR)

    def is_zero_fixed(self) -> bool:
        return all(x is STAR or x == 0 for r in self.rows for x in r)

    def __str__(self) -> str:
        return "\n".join(" ".join(repr(x) if x is STAR else str(x) for x in r)
                         for r in self.rows)


def star_matrix(rows: Iterable[Iterable[Entry]], q: int, cols: int | None = None) -> StarMatrix:
    rs = tuple(tuple(x if x is STAR else x % q for x in r) for r in rows)
    if cols is None:
        if not rs:
            raise DimensionMismatch("empty star matrix needs an explicit column count")
        cols = len(rs[0])
    return StarMatrix(q, cols, rs)


@dataclass(frozen=True)
class IntMatrix:
    """Matrix of nonnegative integers (adjacency structure, selectors, ones)."""

    cols: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for r in self.rows:
            if len(r) != self.cols:
                raise DimensionMismatch(f"row length {len(r)} != cols {self.cols}")
            if any(x < 0 for x in r):
                raise ValueError("entries must be nonnegative")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def all_positive(self) -> bool:
        return all(x > 0 for r in self.rows for x in r)


def int_matrix(rows: Iterable[Iterable[int]], cols: int | None = None) -> IntMatrix:
    rs = tuple(tuple(r) for r in rows)
    if cols is None:
        if not rs:
            raise DimensionMismatch("empty integer matrix needs an explicit column count")
        cols = len(rs[0])
    return IntMatrix(cols, rs)


def int_identity(n: int) -> IntMatrix:
    return IntMatrix(n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


def int_ones(r: int, c: int) -> IntMatrix:
    return IntMatrix(c, tuple((1,) * c for _ in range(r)))


def int_diag(vec: Sequence[int]) -> IntMatrix:
    n = len(vec)
    return IntMatrix(n, tuple(tuple(vec[i] if i == j else 0 for j in range(n)) for i in range(n)))


def int_matmul_saturated(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """0/1 product: only zero/nonzero structure is kept (no overflow)."""
    if a.cols != b.row_count:
        raise DimensionMismatch(f"{a.cols} cols vs {b.row_count} rows")
    bt = list(zip(*b.rows)) if b.rows else [()] * b.cols
    rows = tuple(
        tuple(1 if any(x and y for x, y in zip(ar, bc)) else 0 for bc in bt)
        for ar in a.rows
    )
    return IntMatrix(b.cols, rows)


def int_power_saturated(m: IntMatrix, e: int) -> IntMatrix:
    if m.cols != m.row_count:
        raise DimensionMismatch("powers need a square matrix")
    out = int_identity(m.cols)
    for _ in range(e):
        out = int_matmul_saturated(out, m)
    return out


def star_matmul(b: StarMatrix, a: StarMatrix) -> StarMatrix:
    if b.q != a.q:
        raise DimensionMismatch("modulus mismatch")
    if b.cols != a.row_count:
        raise DimensionMismatch(f"{b.cols} cols vs {a.row_count} rows")
    q = a.q
    rows = []
    for br in b.rows:
        out_row = []
        for j in range(a.cols):
            acc: Entry = 0
            for x, ar in zip(br, a.rows):
                acc = star_add(acc, star_mul(x, ar[j], q), q)
            out_row.append(acc)
        rows.append(tuple(out_row))
    return StarMatrix(q, a.cols, tuple(rows))


def int_mul_star(b: IntMatrix, a: StarMatrix) -> StarMatrix:
    """Multiply an integer matrix into a family; nonzero integers act as 1."""
    collapsed = star_matrix(
        (tuple(1 if x else 0 for x in r) for r in b.rows), a.q, b.cols
    )
    return star_matmul(collapsed, a)


def tensor(a, b):
    """Kronecker product for two star matrices or two integer matrices."""
    if isinstance(a, StarMatrix) and isinstance(b, StarMatrix):
        if a.q != b.q:
            raise DimensionMismatch("modulus mismatch")
        q = a.q
        rows = tuple(
            tuple(star_mul(x, y, q) for x in ar for y in br)
            for ar in a.rows
            for br in b.rows
        )
        return StarMatrix(q, a.cols * b.cols, rows)
    if isinstance(a, IntMatrix) and isinstance(b, IntMatrix):
        rows = tuple(
            tuple(x * y for x in ar for y in br)
            for ar in a.rows
            for br in b.rows
        )
        return IntMatrix(a.cols * b.cols, rows)
    raise TypeError("tensor needs two star matrices or two integer matrices")


def gamma(block: StarMatrix) -> FieldMatrix:
    """Canonical completion: greedy distinct unit vectors on the star columns.

    Rows are processed top to bottom; each row becomes the unit vector of its
    smallest not-yet-used star column, rows with no fresh star column become
    zero, and every star-free position is zero.
    """
    used: set[int] = set()
    rows: list[Row] = []
    for r in block.rows:
        pick = next((j for j, x in enumerate(r) if x is STAR and j not in used), None)
        if pick is None:
            rows.append((0,) * block.cols)
        else:
            used.add(pick)
            rows.append(field.unit_row(pick, block.cols))
    return FieldMatrix(block.q, block.cols, tuple(rows))


def maxrank(a: StarMatrix) -> int:
    """Largest rank attained over the family, for all-zero fixed entries.

    For such families the maximum is the term rank of the star pattern: a
    maximum matching of star positions gives a permutation submatrix of
    ones (rank = matching size), and no substitution can beat the matching
    number over any field.
    """
    if not a.is_zero_fixed():
        raise ValueError("maxrank is only supported for zero-fixed families")
    star_cols = [a.row_stars(i) for i in range(a.row_count)]
    match_of_col: dict[int, int] = {}

    def try_assign(row: int, seen: set[int]) -> bool:
        for c in star_cols[row]:
            if c in seen:
                continue
            seen.add(c)
            if c not in match_of_col or try_assign(match_of_col[c], seen):
                match_of_col[c] = row
                return True
        return False

    size = 0
    for i in range(a.row_count):
        if try_assign(i, set()):
            size += 1
    return size


def member(a: StarMatrix, m: FieldMatrix) -> bool:
    """True iff m agrees with a at every fixed position (stars are free)."""
    if a.q != m.q or a.cols != m.cols or a.row_count != m.row_count:
        raise DimensionMismatch("shape or modulus mismatch")
    return all(
        x is STAR or x == y
        for ar, mr in zip(a.rows, m.rows)
        for x, y in zip(ar, mr)
    )


def sample(a: StarMatrix, seed: int) -> FieldMatrix:
    """Substitute every star uniformly at random; deterministic per seed."""
    rng = random.Random(seed)
    rows = tuple(
        tuple(rng.randrange(a.q) if x is STAR else x for x in r) for r in a.rows
    )
    return FieldMatrix(a.q, a.cols, rows)


def enumerate_members(a: StarMatrix):
    """All field matrices in the family; exponential, oracle-scale only."""
    spots = a.star_positions()
    base = [list(0 if x is STAR else x for x in r) for r in a.rows]
    for values in itertools.product(range(a.q), repeat=len(spots)):
        for (i, j), v in zip(spots, values):
            base[i][j] = v
        yield FieldMatrix(a.q, a.cols, tuple(tuple(r) for r in base))
