"""Exact linear algebra over F_2 with int-bitset vectors.

A vector in F_2^n is a Python int whose bit i is coordinate i. The same
convention indexes statevector amplitudes, so a vector *is* its basis-state
index. Subspaces are kept in reduced row echelon form, which makes the
representation canonical: two `Subspace` values are equal iff they span the
same set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from . import config


def dot(x: int, y: int) -> int:
    """F_2 dot product (parity of the AND)."""
    return bin(x & y).count("1") & 1


def vec_to_str(x: int, n: int) -> str:
    """Render coordinates 0..n-1 left to right."""
    return "".join("1" if (x >> i) & 1 else "0" for i in range(n))


def str_to_vec(s: str) -> int:
    x = 0
    for i, ch in enumerate(s):
        if ch == "1":
            x |= 1 << i
        elif ch != "0":
            raise ValueError(f"bad bit character {ch!r}")
    return x


def _check_dim(n: int) -> None:
    if not 0 < n <= config.F2_DIM_CAP:
        raise ValueError(f"ambient dimension {n} outside (0, {config.F2_DIM_CAP}]")


def _check_vec(x: int, n: int) -> None:
    if x < 0 or x >> n:
        raise ValueError(f"vector {x:#x} does not fit in {n} bits")


def rref(rows: Sequence[int], n: int) -> Tuple[int, ...]:
    """Reduced row echelon form over F_2; pivots taken from bit 0 upward.

    Returns the nonzero rows sorted by pivot position.
    """
    work: List[int] = [r for r in rows if r]
    out: List[int] = []
    for col in range(n):
        pivot = None
        for idx, r in enumerate(work):
            if (r >> col) & 1:
                pivot = idx
                break
        if pivot is None:
            continue
        row = work.pop(pivot)
        work = [w ^ row if (w >> col) & 1 else w for w in work]
        out = [o ^ row if (o >> col) & 1 else o for o in out]
        out.append(row)
        if not work:
            break
    return tuple(out)


def rank(rows: Sequence[int], n: int) -> int:
    return len(rref(rows, n))


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_2^n held as a reduced, canonical basis."""

    n: int
    basis: Tuple[int, ...]

    def __post_init__(self) -> None:
        _check_dim(self.n)
        for r in self.basis:
            _check_vec(r, self.n)
        if self.basis != rref(self.basis, self.n):
            raise ValueError("basis is not in reduced row echelon form")

    @classmethod
    def from_rows(cls, rows: Sequence[int], n: int) -> "Subspace":
        return cls(n, rref(rows, n))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(1 << i for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, x: int) -> bool:
        """Membership test by reducing x against the canonical basis."""
        _check_vec(x, self.n)
        for row in self.basis:
            pivot = row & -row
            if x & pivot:
                x ^= row
        return x == 0

    def members(self) -> Iterator[int]:
        """All 2^dim elements (insertion order, not sorted)."""
        span = [0]
        for row in self.basis:
            span += [v ^ row for v in span]
        return iter(span)

    def member_array(self) -> np.ndarray:
        """All elements as a sorted int64 array."""
        span = np.zeros(1, dtype=np.int64)
        for row in self.basis:
            span = np.concatenate([span, span ^ row])
        span.sort()
        return span

    def dual(self) -> "Subspace":
        """Orthogonal complement {y : x . y = 0 for all x in span}."""
        pivots = [((r & -r).bit_length() - 1) for r in self.basis]
        pivot_set = set(pivots)
        rows = []
        for free in range(self.n):
            if free in pivot_set:
                continue
            y = 1 << free
            for j, r in enumerate(self.basis):
                if (r >> free) & 1:
                    y |= 1 << pivots[j]
            rows.append(y)
        return Subspace.from_rows(rows, self.n)

    def serialize(self) -> str:
        lines = [f"n={self.n} dim={self.dim}"]
        lines += [vec_to_str(r, self.n) for r in self.basis]
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str) -> "Subspace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split()
        if len(header) != 2 or not header[0].startswith("n=") or not header[1].startswith("dim="):
            raise ValueError(f"bad subspace header {lines[0]!r}")
        n = int(header[0][2:])
        dim = int(header[1][4:])
        rows = [str_to_vec(ln.strip()) for ln in lines[1:]]
        if len(rows) != dim:
            raise ValueError(f"header claims dim={dim} but {len(rows)} rows follow")
        sub = cls.from_rows(rows, n)
        if sub.dim != dim:
            raise ValueError("serialized rows are not linearly independent")
        return sub


def dual(a: Subspace) -> Subspace:
    return a.dual()


def contains(a: Subspace, x: int) -> bool:
    return a.contains(x)


def random_subspace(n: int, dim: int, rng: np.random.Generator) -> Subspace:
    """Uniformly random dim-dimensional subspace of F_2^n.

    Rejection-samples random dim x n matrices until full rank; every subspace
    has the same number of ordered full-rank generating matrices, so the
    row space is exactly uniform.
    """
    _check_dim(n)
    if not 0 <= dim <= n:
        raise ValueError(f"dim {dim} outside [0, {n}]")
    if dim == 0:
        return Subspace.zero(n)
    while True:
        rows = [int(rng.integers(0, 1 << n)) for _ in range(dim)]
        reduced = rref(rows, n)
        if len(reduced) == dim:
            return Subspace(n, reduced)


def intersection_dim(a: Subspace, b: Subspace) -> int:
    """dim(A intersect B) via dim A + dim B - dim(A + B)."""
    if a.n != b.n:
        raise ValueError(f"ambient dims differ: {a.n} vs {b.n}")
    return a.dim + b.dim - rank(a.basis + b.basis, a.n)


def sum_subspace(a: Subspace, b: Subspace) -> Subspace:
    if a.n != b.n:
        raise ValueError(f"ambient dims differ: {a.n} vs {b.n}")
    return Subspace.from_rows(a.basis + b.basis, a.n)


@dataclass(frozen=True)
class LinMap:
    """Linear map on F_2^n; row i of `rows` holds the i-th output bit mask.

    apply(x) has bit i equal to parity(rows[i] & x), i.e. matrix-vector
    product with x as a column vector.
    """

    n: int
    rows: Tuple[int, ...]

    def __post_init__(self) -> None:
        _check_dim(self.n)
        if len(self.rows) != self.n:
            raise ValueError("row count must equal ambient dimension")
        for r in self.rows:
            _check_vec(r, self.n)

    @classmethod
    def identity(cls, n: int) -> "LinMap":
        return cls(n, tuple(1 << i for i in range(n)))

    def apply(self, x: int) -> int:
        _check_vec(x, self.n)
        y = 0
        for i, row in enumerate(self.rows):
            y |= (bin(row & x).count("1") & 1) << i
        return y

    def transpose(self) -> "LinMap":
        cols = []
        for j in range(self.n):
            c = 0
            for i, row in enumerate(self.rows):
                c |= ((row >> j) & 1) << i
            cols.append(c)
        return LinMap(self.n, tuple(cols))

    def is_invertible(self) -> bool:
        return rank(self.rows, self.n) == self.n

    def inverse(self) -> "LinMap":
        """Gauss-Jordan on [M | I]; raises on singular input."""
        n = self.n
        aug = [self.rows[i] | (1 << (n + i)) for i in range(n)]
        for col in range(n):
            pivot = None
            for r in range(col, n):
                if (aug[r] >> col) & 1:
                    pivot = r
                    break
            if pivot is None:
                raise ValueError("matrix is singular")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            for r in range(n):
                if r != col and (aug[r] >> col) & 1:
                    aug[r] ^= aug[col]
        mask = (1 << n) - 1
        return LinMap(n, tuple((row >> n) & mask for row in aug))

    def inverse_transpose(self) -> "LinMap":
        return self.inverse().transpose()

    def compose(self, other: "LinMap") -> "LinMap":
        """self after other: (self.compose(other)).apply(x) = self(other(x))."""
        if self.n != other.n:
            raise ValueError("ambient dims differ")
        return LinMap(self.n, tuple(other.transpose_apply_rows(self.rows)))

    def transpose_apply_rows(self, rows: Sequence[int]) -> List[int]:
        # row r of (R @ M) equals the vector with bit j = parity(r & column_j(M)),
        # computed here by accumulating rows of M for each set bit of r.
        out = []
        for r in rows:
            acc = 0
            rr = r
            while rr:
                i = (rr & -rr).bit_length() - 1
                acc ^= self.rows[i]
                rr &= rr - 1
            out.append(acc)
        return out

    def permutation_table(self) -> np.ndarray:
        """apply(x) for every x in 0..2^n-1, built by XOR doubling."""
        table = np.zeros(1 << self.n, dtype=np.int64)
        for j in range(self.n):
            img = self._column_image(j)
            half = 1 << j
            table[half : 2 * half] = table[:half] ^ img
        return table

    def _column_image(self, j: int) -> int:
        y = 0
        for i, row in enumerate(self.rows):
            y |= ((row >> j) & 1) << i
        return y


def random_invertible(n: int, rng: np.random.Generator) -> LinMap:
    while True:
        rows = tuple(int(rng.integers(0, 1 << n)) for _ in range(n))
        if rank(rows, n) == n:
            return LinMap(n, rows)


def apply_map(f: LinMap, x: int) -> int:
    return f.apply(x)


def image(f: LinMap, a: Subspace) -> Subspace:
    """{f(x) : x in A}; requires f invertible so dimensions are preserved."""
    if f.n != a.n:
        raise ValueError("ambient dims differ")
    if not f.is_invertible():
        raise ValueError("matrix is singular")
    return Subspace.from_rows([f.apply(r) for r in a.basis], a.n)


def inverse_transpose(f: LinMap) -> LinMap:
    return f.inverse_transpose()


def complete_to_invertible(a: Subspace, rng: np.random.Generator) -> LinMap:
    """An invertible map whose first dim(A) columns are a basis of A.

    The returned map sends span(e_0..e_{dim-1}) onto A; its inverse sends
    A onto the coordinate subspace.
    """
    rows: List[int] = list(a.basis)
    while len(rows) < a.n:
        cand = int(rng.integers(0, 1 << a.n))
        if len(rref(rows + [cand], a.n)) > len(rows):
            rows.append(cand)
    # rows[j] becomes column j
    cols = rows
    mat_rows = []
    for i in range(a.n):
        r = 0
        for j, c in enumerate(cols):
            r |= ((c >> i) & 1) << j
        mat_rows.append(r)
    return LinMap(a.n, tuple(mat_rows))
