"""Exact rational scalars and sparse linear algebra.

Scalars are :class:`fractions.Fraction` (always in lowest terms with a positive
denominator).  Vectors are plain ``dict`` objects mapping an index to a nonzero
``Fraction``; matrices are :class:`SparseMatrix`.

Row reduction is fraction-free: every working row is scaled to a primitive
integer vector, eliminations are integer cross-multiplications followed by
content removal, and the pivot is always the smallest column of the lowest
numbered row that is still independent.  Results are therefore reproducible
bit for bit.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

Vector = Dict[int, Fraction]

__all__ = [
    "Fraction",
    "rat",
    "rat_add",
    "rat_mul",
    "rat_neg",
    "rat_inv",
    "SparseMatrix",
    "SubspaceBasis",
    "RowReducer",
    "rank",
    "nullspace",
    "solve",
    "in_column_space",
    "vec_add",
    "vec_scale",
    "vec_sub",
    "vec_is_zero",
    "dump_matrix",
    "load_matrix",
    "dense_inverse",
]


def rat(x) -> Fraction:
    """Coerce ints, strings like ``"3/4"`` and Fractions to a Fraction."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def rat_add(a, b) -> Fraction:
    return rat(a) + rat(b)


def rat_mul(a, b) -> Fraction:
    return rat(a) * rat(b)


def rat_neg(a) -> Fraction:
    return -rat(a)


def rat_inv(a) -> Fraction:
    a = rat(a)
    if a == 0:
        raise ZeroDivisionError("rat_inv(0)")
    return 1 / a


# ---------------------------------------------------------------------------
# sparse vectors


def vec_add(u: Mapping[int, Fraction], v: Mapping[int, Fraction], c=1) -> Vector:
    """Return ``u + c*v`` without explicit zeros."""
    out = dict(u)
    if c == 0:
        return out
    for i, x in v.items():
        y = out.get(i, 0) + c * x
        if y:
            out[i] = y
        else:
            out.pop(i, None)
    return out


def vec_sub(u, v) -> Vector:
    return vec_add(u, v, -1)


def vec_scale(v: Mapping[int, Fraction], c) -> Vector:
    if c == 0:
        return {}
    return {i: c * x for i, x in v.items()}


def vec_is_zero(v: Mapping[int, Fraction]) -> bool:
    return not any(v.values())


# ---------------------------------------------------------------------------
# matrices


class SparseMatrix:
    """Immutable sparse rational matrix stored as a dict of nonzero rows."""

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows: int, ncols: int, entries: Optional[Mapping[Tuple[int, int], object]] = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative shape")
        self.nrows = nrows
        self.ncols = ncols
        rows: Dict[int, Vector] = {}
        for (r, c), x in (entries or {}).items():
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise IndexError(f"entry ({r}, {c}) outside {nrows}x{ncols}")
            x = rat(x)
            if x:
                rows.setdefault(r, {})[c] = x
        self._rows = rows

    @classmethod
    def from_rows(cls, nrows: int, ncols: int, rows: Mapping[int, Mapping[int, object]]) -> "SparseMatrix":
        m = cls(nrows, ncols)
        for r, row in rows.items():
            if not 0 <= r < nrows:
                raise IndexError(r)
            clean = {}
            for c, x in row.items():
                if not 0 <= c < ncols:
                    raise IndexError(c)
                x = rat(x)
                if x:
                    clean[c] = x
            if clean:
                m._rows[r] = clean
        return m

    @classmethod
    def from_columns(cls, nrows: int, columns: List[Mapping[int, object]]) -> "SparseMatrix":
        rows: Dict[int, Dict[int, object]] = {}
        for c, col in enumerate(columns):
            for r, x in col.items():
                rows.setdefault(r, {})[c] = x
        return cls.from_rows(nrows, len(columns), rows)

    @classmethod
    def identity(cls, d: int) -> "SparseMatrix":
        return cls(d, d, {(i, i): 1 for i in range(d)})

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls(nrows, ncols)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self._rows.values())

    def __getitem__(self, rc: Tuple[int, int]) -> Fraction:
        r, c = rc
        return self._rows.get(r, {}).get(c, Fraction(0))

    def row(self, r: int) -> Vector:
        return dict(self._rows.get(r, {}))

    def rows(self) -> Iterator[Tuple[int, Vector]]:
        for r in sorted(self._rows):
            yield r, self._rows[r]

    def entries(self) -> Iterator[Tuple[int, int, Fraction]]:
        for r in sorted(self._rows):
            row = self._rows[r]
            for c in sorted(row):
                yield r, c, row[c]

    def columns(self) -> List[Vector]:
        cols: List[Vector] = [dict() for _ in range(self.ncols)]
        for r, c, x in self.entries():
            cols[c][r] = x
        return cols

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, {(c, r): x for r, c, x in self.entries()})

    def apply(self, v: Mapping[int, Fraction]) -> Vector:
        """Matrix-vector product on a sparse vector."""
        out: Vector = {}
        if not v:
            return out
        for r, row in self._rows.items():
            s = 0
            if len(row) < len(v):
                for c, x in row.items():
                    y = v.get(c)
                    if y:
                        s += x * y
            else:
                for c, y in v.items():
                    x = row.get(c)
                    if x:
                        s += x * y
            if s:
                out[r] = Fraction(s)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out: Dict[int, Vector] = {}
        for r, row in self._rows.items():
            acc: Vector = {}
            for k, x in row.items():
                orow = other._rows.get(k)
                if orow:
                    for c, y in orow.items():
                        acc[c] = acc.get(c, 0) + x * y
            acc = {c: z for c, z in acc.items() if z}
            if acc:
                out[r] = acc
        m = SparseMatrix(self.nrows, other.ncols)
        m._rows = out
        return m

    def _combine(self, other: "SparseMatrix", c) -> "SparseMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        m = SparseMatrix(self.nrows, self.ncols)
        rows = {r: dict(row) for r, row in self._rows.items()}
        for r, row in other._rows.items():
            rows[r] = vec_add(rows.get(r, {}), row, c)
            if not rows[r]:
                del rows[r]
        m._rows = rows
        return m

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "SparseMatrix":
        m = SparseMatrix(self.nrows, self.ncols)
        if c:
            m._rows = {r: vec_scale(row, c) for r, row in self._rows.items()}
        return m

    def is_zero(self) -> bool:
        return not self._rows

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        return hash((self.shape, tuple(self.entries())))

    def to_dense(self) -> List[List[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for r, c, x in self.entries():
            out[r][c] = x
        return out

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


# ---------------------------------------------------------------------------
# fraction-free row reduction


def _primitive(row: Mapping[int, object]) -> Dict[int, int]:
    """Scale a rational row to a primitive integer row with positive leading entry."""
    if not row:
        return {}
    den = 1
    for x in row.values():
        x = rat(x)
        den = lcm(den, x.denominator)
    ints = {c: int(rat(x) * den) for c, x in row.items() if x}
    g = 0
    for x in ints.values():
        g = gcd(g, x)
    lead = ints[min(ints)]
    if lead < 0:
        g = -g
    return {c: x // g for c, x in ints.items()}


def _normalize(row: Dict[int, int]) -> Dict[int, int]:
    g = 0
    for x in row.values():
        g = gcd(g, x)
        if g == 1:
            break
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g == 1:
        return row
    return {c: x // g for c, x in row.items()}


class RowReducer:
    """Incrementally maintained reduced row echelon form over the integers.

    Each stored row is primitive, has a positive pivot, and is zero in every
    other pivot column.  ``add`` returns the pivot column of a new independent
    row or ``None`` if the row was already in the span.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: Dict[int, Dict[int, int]] = {}
        # column -> pivot columns whose rows have a nonzero entry there
        self._occ: Dict[int, set] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, object]) -> Dict[int, int]:
        """Reduce a row against the stored pivots (result is primitive up to sign)."""
        r = _primitive(row)
        if not r:
            return r
        hits = [c for c in r if c in self.pivots]
        for c in sorted(hits):
            a = r.get(c)
            if not a:
                continue
            prow = self.pivots[c]
            p = prow[c]
            g = gcd(p, a)
            mp, ma = p // g, a // g
            if mp != 1:
                r = {k: mp * x for k, x in r.items()}
            for k, y in prow.items():
                z = r.get(k, 0) - ma * y
                if z:
                    r[k] = z
                else:
                    r.pop(k, None)
            if not r:
                return r
        return _normalize(r) if r else r

    def add(self, row: Mapping[int, object]) -> Optional[int]:
        r = self.reduce(row)
        if not r:
            return None
        c = min(r)
        # clear column c from the existing pivot rows
        for pc in sorted(self._occ.get(c, ())):
            prow = self.pivots[pc]
            a = prow[c]
            p = r[c]
            g = gcd(p, a)
            mp, ma = p // g, a // g
            old = set(prow)
            new = {k: mp * x for k, x in prow.items()} if mp != 1 else dict(prow)
            for k, y in r.items():
                z = new.get(k, 0) - ma * y
                if z:
                    new[k] = z
                else:
                    new.pop(k, None)
            new = _normalize(new)
            self.pivots[pc] = new
            for k in old - set(new):
                self._occ[k].discard(pc)
            for k in set(new) - old:
                self._occ.setdefault(k, set()).add(pc)
        self.pivots[c] = r
        for k in r:
            if k != c:
                self._occ.setdefault(k, set()).add(c)
        return c

    def contains(self, row: Mapping[int, object]) -> bool:
        return not self.reduce(row)

    def nullspace(self) -> List[Vector]:
        """Basis of the solutions x of R x = 0, one vector per free column."""
        out = []
        for f in range(self.ncols):
            if f in self.pivots:
                continue
            v: Vector = {f: Fraction(1)}
            for pc in sorted(self._occ.get(f, ())):
                prow = self.pivots[pc]
                v[pc] = Fraction(-prow[f], prow[pc])
            out.append(v)
        return out


def _reducer_for(m: SparseMatrix) -> RowReducer:
    red = RowReducer(m.ncols)
    for _, row in m.rows():
        red.add(row)
    return red


class SubspaceBasis:
    """A list of linearly independent sparse vectors in a space of given dimension."""

    def __init__(self, ambient_dim: int, vectors: Iterable[Mapping[int, object]], verify: bool = True):
        self.ambient_dim = ambient_dim
        self.vectors: List[Vector] = [{i: rat(x) for i, x in v.items() if x} for v in vectors]
        for v in self.vectors:
            if any(not 0 <= i < ambient_dim for i in v):
                raise IndexError("vector index outside ambient space")
        if verify and self.vectors:
            red = RowReducer(ambient_dim)
            for v in self.vectors:
                if red.add(v) is None:
                    raise ValueError("basis vectors are linearly dependent")
        self._red: Optional[RowReducer] = None

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def contains(self, v: Mapping[int, object]) -> bool:
        if self._red is None:
            self._red = RowReducer(self.ambient_dim)
            for w in self.vectors:
                self._red.add(w)
        return self._red.contains(v)

    def as_columns(self) -> SparseMatrix:
        return SparseMatrix.from_columns(self.ambient_dim, self.vectors)


def rank(m: SparseMatrix) -> int:
    """Exact rank over the rationals."""
    return _reducer_for(m).rank


def nullspace(m: SparseMatrix) -> SubspaceBasis:
    """Basis of ``{v : m v = 0}``, one vector per non-pivot column."""
    return SubspaceBasis(m.ncols, _reducer_for(m).nullspace(), verify=False)


def solve(m: SparseMatrix, b: Mapping[int, object]) -> Optional[Vector]:
    """A particular solution of ``m x = b`` (free variables zero), or ``None``."""
    if any(not 0 <= i < m.nrows for i in b):
        raise ValueError("right-hand side does not match the row count")
    aug = m.ncols
    red = RowReducer(m.ncols + 1)
    rows = {r: dict(row) for r, row in m.rows()}
    for r, x in b.items():
        if x:
            rows.setdefault(r, {})[aug] = rat(x)
    for r in sorted(rows):
        red.add(rows[r])
    if aug in red.pivots:
        return None
    x: Vector = {}
    for pc, prow in red.pivots.items():
        y = prow.get(aug)
        if y:
            x[pc] = Fraction(y, prow[pc])
    return x


def in_column_space(m: SparseMatrix, v: Mapping[int, object]) -> bool:
    """True iff ``m x = v`` has a rational solution."""
    if any(not 0 <= i < m.nrows for i in v):
        raise ValueError("vector length does not match the row count")
    if not any(v.values()):
        return True
    return solve(m, v) is not None


# ---------------------------------------------------------------------------
# text format


def dump_matrix(m: SparseMatrix) -> str:
    """Serialize as ``rows cols nnz`` followed by ``row col num/den`` lines."""
    lines = [f"{m.nrows} {m.ncols} {m.nnz}"]
    for r, c, x in m.entries():
        lines.append(f"{r} {c} {x.numerator}/{x.denominator}")
    return "\n".join(lines) + "\n"


def load_matrix(text: str) -> SparseMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        nrows, ncols, nnz = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad header line {lines[0]!r}") from exc
    if len(lines) - 1 != nnz:
        raise ValueError(f"header announces {nnz} entries, found {len(lines) - 1}")
    entries = {}
    for ln in lines[1:]:
        r, c, x = ln.split()
        entries[(int(r), int(c))] = Fraction(x)
    m = SparseMatrix(nrows, ncols, entries)
    if m.nnz != nnz:
        raise ValueError("explicit zero entries are not allowed")
    return m


def dense_inverse(a: List[List[object]]) -> List[List[Fraction]]:
    """Gauss-Jordan inverse of a small dense rational matrix."""
    d = len(a)
    m = [[rat(x) for x in row] + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(a)]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(d):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[d:] for row in m]
