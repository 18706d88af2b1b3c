"""Exact integer linear algebra: Smith normal form, abelian invariants of a
presentation, rank of the second boundary map, and integer linear solving.

All arithmetic is arbitrary-precision; pivots are chosen with minimal absolute
value to limit entry growth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from .presentations import FinitePresentation

__all__ = [
    "IntMatrix",
    "SmithDecomposition",
    "AbelianInvariants",
    "smith_normal_form",
    "rank",
    "abelianization_invariants",
    "h2_rank_2complex",
    "solve_integer_system",
]


class IntMatrix:
    """A dense integer matrix stored as a tuple of row tuples."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[int]], cols: int | None = None):
        rows = tuple(tuple(int(x) for x in row) for row in entries)
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise ValueError("ragged rows in integer matrix")
        else:
            width = 0 if cols is None else cols
        if cols is not None and rows and width != cols:
            raise ValueError(f"expected {cols} columns, found {width}")
        self.rows = len(rows)
        self.cols = width
        self.entries = rows

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)], cols=cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.entries == other.entries \
            and self.cols == other.cols

    def __hash__(self) -> int:
        return hash((self.entries, self.cols))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        out = []
        for i in range(self.rows):
            row = self.entries[i]
            out.append(
                [
                    sum(row[k] * other.entries[k][j] for k in range(self.cols))
                    for j in range(other.cols)
                ]
            )
        return IntMatrix(out, cols=other.cols)

    def apply(self, vec: Sequence[int]) -> list[int]:
        if len(vec) != self.cols:
            raise ValueError("dimension mismatch in matrix-vector product")
        return [sum(row[j] * vec[j] for j in range(self.cols)) for row in self.entries]

    def diagonal(self) -> list[int]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def __repr__(self) -> str:
        return f"IntMatrix({self.to_lists()!r})"


@dataclass(frozen=True)
class SmithDecomposition:
    """U * M * V = D with U, V unimodular and D diagonal, d1 | d2 | ... >= 0."""

    u: IntMatrix
    d: IntMatrix
    v: IntMatrix

    def diagonal(self) -> list[int]:
        return self.d.diagonal()

    def rank(self) -> int:
        return sum(1 for x in self.diagonal() if x != 0)


@dataclass(frozen=True)
class AbelianInvariants:
    """Invariant factors of a finitely generated abelian group: torsion
    entries > 1 in divisibility order, plus the free rank."""

    torsion: tuple[int, ...]
    free_rank: int

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a != 0:
                raise ValueError("torsion coefficients must form a divisibility chain")
        if any(t <= 1 for t in self.torsion):
            raise ValueError("torsion coefficients must exceed 1")
        if self.free_rank < 0:
            raise ValueError("free rank must be nonnegative")

    def is_trivial(self) -> bool:
        return not self.torsion and self.free_rank == 0

    def describe(self) -> str:
        parts = [f"Z/{t}" for t in self.torsion]
        if self.free_rank:
            parts.append(f"Z^{self.free_rank}" if self.free_rank > 1 else "Z")
        return " + ".join(parts) if parts else "0"


def _pivot(rows: list[list[int]], k: int, nrows: int, ncols: int) -> tuple[int, int] | None:
    """Nonzero entry of minimal absolute value in the trailing submatrix."""
    best = None
    best_val = None
    for i in range(k, nrows):
        row = rows[i]
        for j in range(k, ncols):
            x = row[j]
            if x != 0:
                a = abs(x)
                if best_val is None or a < best_val:
                    best, best_val = (i, j), a
                    if a == 1:
                        return best
    return best


def smith_normal_form(matrix: IntMatrix) -> SmithDecomposition:
    """Deterministic Smith normal form over the integers."""
    nrows, ncols = matrix.rows, matrix.cols
    a = matrix.to_lists()
    u = IntMatrix.identity(nrows).to_lists()
    v = IntMatrix.identity(ncols).to_lists()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        arow, urow = a[src], u[src]
        adst, udst = a[dst], u[dst]
        for j in range(ncols):
            adst[j] += c * arow[j]
        for j in range(nrows):
            udst[j] += c * urow[j]

    def add_col(src, dst, c):
        for row in a:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    k = 0
    limit = min(nrows, ncols)
    while k < limit:
        loc = _pivot(a, k, nrows, ncols)
        if loc is None:
            break
        i, j = loc
        if i != k:
            swap_rows(i, k)
        if j != k:
            swap_cols(j, k)
        while True:
            # clear column k below the pivot
            dirty = False
            for i in range(k + 1, nrows):
                if a[i][k] != 0:
                    q = a[i][k] // a[k][k]
                    if q:
                        add_row(k, i, -q)
                    if a[i][k] != 0:
                        swap_rows(i, k)
                        dirty = True
            if dirty:
                continue
            # clear row k right of the pivot
            for j in range(k + 1, ncols):
                if a[k][j] != 0:
                    q = a[k][j] // a[k][k]
                    if q:
                        add_col(k, j, -q)
                    if a[k][j] != 0:
                        swap_cols(j, k)
                        dirty = True
            if dirty:
                continue
            # pivot must divide the trailing submatrix
            p = a[k][k]
            offender = None
            for i in range(k + 1, nrows):
                row = a[i]
                for j in range(k + 1, ncols):
                    if row[j] % p != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(offender, k, 1)
        if a[k][k] < 0:
            negate_row(k)
        k += 1

    d = IntMatrix(a, cols=ncols)
    return SmithDecomposition(IntMatrix(u, cols=nrows), d, IntMatrix(v, cols=ncols))


def rank(matrix: IntMatrix) -> int:
    return smith_normal_form(matrix).rank()


def _coker_invariants(matrix: IntMatrix, ambient_rank: int) -> AbelianInvariants:
    """Invariants of Z^ambient_rank / column space of ``matrix``."""
    diag = smith_normal_form(matrix).diagonal()
    nonzero = [d for d in diag if d != 0]
    return AbelianInvariants(
        torsion=tuple(d for d in nonzero if d > 1),
        free_rank=ambient_rank - len(nonzero),
    )


def abelianization_invariants(presentation: "FinitePresentation") -> AbelianInvariants:
    """H1 of the presented group: cokernel of the transposed exponent matrix."""
    m = presentation.exponent_matrix()
    return _coker_invariants(m.transpose(), len(presentation.generators))


def h2_rank_2complex(presentation: "FinitePresentation") -> int:
    """Rank of the kernel of the second boundary map of the presentation
    2-complex: |R| - rank(exponent matrix).  Equals the rank of H2 of the
    group only when the 2-complex is aspherical."""
    m = presentation.exponent_matrix()
    return m.rows - smith_normal_form(m).rank()


def solve_integer_system(matrix: IntMatrix, b: Sequence[int]) -> list[int] | None:
    """Solve matrix^T * x = b over the integers via the Smith decomposition.
    Returns a solution vector of length matrix.rows, or None when no integer
    solution exists."""
    at = matrix.transpose()
    if len(b) != at.rows:
        raise ValueError("right-hand side has wrong length")
    snf = smith_normal_form(at)
    c = snf.u.apply(list(b))
    diag = snf.d.diagonal()
    y = [0] * at.cols
    for i in range(at.rows):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d != 0:
                return None
            y[i] = c[i] // d
    x = snf.v.apply(y)
    assert at.apply(x) == list(b)
    return x
