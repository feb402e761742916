"""Exact dense linear algebra over prime fields GF(q).

Matrices are immutable (tuples of row tuples, entries reduced mod q) so they
can be shared freely between search workers.  Elimination is deterministic:
columns are scanned left to right and the first usable row becomes the pivot,
which makes reduced row-echelon form the canonical representative of a row
space everywhere downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from dissem.errors import DimensionMismatch

Row = tuple[int, ...]


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldMatrix:
    """Dense matrix over GF(q); `rows` may be empty, `cols` is always known."""

    q: int
    cols: int
    rows: tuple[Row, ...]

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"modulus {self.q} is not prime")
        for r in self.rows:
            if len(r) != self.cols:
                raise DimensionMismatch(f"row length {len(r)} != cols {self.cols}")
            if any(not (0 <= x < self.q) for x in r):
                raise ValueError("entries must already be reduced mod q")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def transpose(self) -> "FieldMatrix":
        cols = tuple(tuple(r[j] for r in self.rows) for j in range(self.cols))
        return FieldMatrix(self.q, len(self.rows), cols)

    def is_zero(self) -> bool:
        return all(all(x == 0 for x in r) for r in self.rows)

    def __str__(self) -> str:
        if not self.rows:
            return f"<0x{self.cols} over GF({self.q})>"
        return "\n".join(" ".join(str(x) for x in r) for r in self.rows)


def matrix(rows: Iterable[Iterable[int]], q: int, cols: Optional[int] = None) -> FieldMatrix:
    """Build a FieldMatrix, reducing entries mod q; `cols` required when empty."""
    rs = tuple(tuple(x % q for x in r) for r in rows)
    if cols is None:
        if not rs:
            raise DimensionMismatch("empty matrix needs an explicit column count")
        cols = len(rs[0])
    return FieldMatrix(q, cols, rs)


def zeros(n_rows: int, n_cols: int, q: int) -> FieldMatrix:
    return FieldMatrix(q, n_cols, tuple((0,) * n_cols for _ in range(n_rows)))


def identity(n: int, q: int) -> FieldMatrix:
    return FieldMatrix(q, n, tuple(unit_row(j, n) for j in range(n)))


def unit_row(j: int, n: int) -> Row:
    return tuple(1 if c == j else 0 for c in range(n))


def stack(blocks: Sequence[FieldMatrix], *, cols: Optional[int] = None,
          q: Optional[int] = None) -> FieldMatrix:
    """Vertical concatenation; an empty block list needs `cols` and `q` declared."""
    if not blocks:
        if cols is None or q is None:
            raise DimensionMismatch("stacking nothing needs explicit cols and q")
        return FieldMatrix(q, cols, ())
    c, m = blocks[0].cols, blocks[0].q
    if cols is not None and cols != c:
        raise DimensionMismatch(f"declared cols {cols} != block cols {c}")
    if q is not None and q != m:
        raise DimensionMismatch(f"declared modulus {q} != block modulus {m}")
    rows: list[Row] = []
    for b in blocks:
        if b.cols != c or b.q != m:
            raise DimensionMismatch("stacked blocks must share cols and modulus")
        rows.extend(b.rows)
    return FieldMatrix(m, c, tuple(rows))


def row_times_matrix(coeffs: Sequence[int], m: FieldMatrix) -> Row:
    """Compute coeffs . m as a length-cols row over GF(q)."""
    if len(coeffs) != m.row_count:
        raise DimensionMismatch(f"{len(coeffs)} coefficients for {m.row_count} rows")
    out = [0] * m.cols
    for c, r in zip(coeffs, m.rows):
        if c % m.q == 0:
            continue
        for j, x in enumerate(r):
            out[j] = (out[j] + c * x) % m.q
    return tuple(out)


class SpanTracker:
    """Incremental row-space membership with cheap mark/rollback.

    Pivot rows are kept normalized (leading entry 1) in a col->row dict; a
    journal of inserted pivot columns supports backtracking searches.
    """

    __slots__ = ("q", "n", "pivots", "_journal")

    def __init__(self, n: int, q: int):
        self.q = q
        self.n = n
        self.pivots: dict[int, Row] = {}
        self._journal: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, row: Sequence[int]) -> list[int]:
        q = self.q
        r = [x % q for x in row]
        for c, prow in self.pivots.items():
            f = r[c]
            if f:
                for j in range(c, self.n):
                    r[j] = (r[j] - f * prow[j]) % q
        return r

    def contains(self, row: Sequence[int]) -> bool:
        return not any(self._reduce(row))

    def add(self, row: Sequence[int]) -> bool:
        """Insert a row; returns True iff it enlarged the span."""
        r = self._reduce(row)
        lead = next((j for j, x in enumerate(r) if x), None)
        if lead is None:
            return False
        inv = pow(r[lead], -1, self.q)
        self.pivots[lead] = tuple((x * inv) % self.q for x in r)
        self._journal.append(lead)
        return True

    def mark(self) -> int:
        return len(self._journal)

    def rollback(self, mark: int) -> None:
        while len(self._journal) > mark:
            del self.pivots[self._journal.pop()]


def rank(m: FieldMatrix) -> int:
    """Row rank over GF(q)."""
    t = SpanTracker(m.cols, m.q)
    for r in m.rows:
        t.add(r)
    return t.rank


def rref(m: FieldMatrix) -> tuple[FieldMatrix, tuple[int, ...]]:
    """Reduced row-echelon form with zero rows dropped, plus pivot columns.

    The result is the canonical representative of rowspace(m): pivot entries
    are 1, pivot columns are cleared above and below, rows are ordered by
    pivot column.
    """
    q = m.q
    work = [list(r) for r in m.rows]
    pivots: list[int] = []
    pr = 0
    for col in range(m.cols):
        hit = next((i for i in range(pr, len(work)) if work[i][col]), None)
        if hit is None:
            continue
        work[pr], work[hit] = work[hit], work[pr]
        inv = pow(work[pr][col], -1, q)
        work[pr] = [(x * inv) % q for x in work[pr]]
        for i in range(len(work)):
            if i != pr and work[i][col]:
                f = work[i][col]
                work[i] = [(a - f * b) % q for a, b in zip(work[i], work[pr])]
        pivots.append(col)
        pr += 1
    reduced = tuple(tuple(r) for r in work[:pr])
    return FieldMatrix(q, m.cols, reduced), tuple(pivots)


def solve_in_row_space(m: FieldMatrix, v: Sequence[int]) -> Optional[Row]:
    """Coefficients c with c . m = v, or None when v is outside rowspace(m).

    The returned combination always re-multiplies to v exactly (checked).
    """
    if len(v) != m.cols:
        raise DimensionMismatch(f"vector length {len(v)} != cols {m.cols}")
    q = m.q
    nr = len(m.rows)
    # Eliminate while tracking how each pivot row combines the original rows.
    pivots: list[tuple[int, list[int], list[int]]] = []  # (col, row, combo)
    for i, orig in enumerate(m.rows):
        row = [x % q for x in orig]
        combo = [1 if j == i else 0 for j in range(nr)]
        for col, prow, pcombo in pivots:
            f = row[col]
            if f:
                row = [(a - f * b) % q for a, b in zip(row, prow)]
                combo = [(a - f * b) % q for a, b in zip(combo, pcombo)]
        lead = next((j for j, x in enumerate(row) if x), None)
        if lead is None:
            continue
        inv = pow(row[lead], -1, q)
        row = [(x * inv) % q for x in row]
        combo = [(x * inv) % q for x in combo]
        pivots.append((lead, row, combo))
    residual = [x % q for x in v]
    coeffs = [0] * nr
    for col, prow, pcombo in pivots:
        f = residual[col]
        if f:
            residual = [(a - f * b) % q for a, b in zip(residual, prow)]
            coeffs = [(a + f * b) % q for a, b in zip(coeffs, pcombo)]
    if any(residual):
        return None
    out = tuple(coeffs)
    assert row_times_matrix(out, m) == tuple(x % q for x in v)
    return out


def in_row_space(m: FieldMatrix, v: Sequence[int]) -> bool:
    return solve_in_row_space(m, v) is not None


# ---------------------------------------------------------------------------
# Subspace enumeration (canonical RREF representatives)

def count_subspaces(m: int, q: int, max_dim: Optional[int] = None) -> int:
    """Number of subspaces of GF(q)^m with dimension <= max_dim (all by default)."""
    top = m if max_dim is None else min(m, max_dim)
    return sum(gaussian_binomial(m, d, q) for d in range(top + 1))


def gaussian_binomial(m: int, d: int, q: int) -> int:
    if d < 0 or d > m:
        return 0
    num = den = 1
    for i in range(d):
        num *= q ** (m - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def subspace_bases(m: int, q: int, max_dim: Optional[int] = None) -> Iterator[tuple[Row, ...]]:
    """Yield canonical RREF bases for every subspace of GF(q)^m.

    Order is deterministic: dimension ascending, then pivot-column set in
    lexicographic order, then free entries row-major in base-q counting
    order.  Dimension 0 yields the empty basis.
    """
    top = m if max_dim is None else min(m, max_dim)
    for d in range(top + 1):
        if d == 0:
            yield ()
            continue
        for pivots in itertools.combinations(range(m), d):
            pset = set(pivots)
            free = [
                (i, c)
                for i, p in enumerate(pivots)
                for c in range(p + 1, m)
                if c not in pset
            ]
            for values in itertools.product(range(q), repeat=len(free)):
                rows = [[0] * m for _ in range(d)]
                for i, p in enumerate(pivots):
                    rows[i][p] = 1
                for (i, c), val in zip(free, values):
                    rows[i][c] = val
                yield tuple(tuple(r) for r in rows)


def embed_rows(rows: Iterable[Row], support: Sequence[int], n: int) -> tuple[Row, ...]:
    """Spread compact rows onto columns `support` of a width-n row."""
    out = []
    for r in rows:
        full = [0] * n
        for c, x in zip(support, r):
            full[c] = x
        out.append(tuple(full))
    return tuple(out)
