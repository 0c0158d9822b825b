"""Exact scalar and dense matrix arithmetic over GF(p) and the rationals.

Scalars are plain Python values: residues 0..p-1 (int) for a prime field,
``fractions.Fraction`` for the rationals.  Everything is exact; there is no
floating point anywhere.  Matrices are immutable, row-major, and 0-row or
0-column matrices are legal (they are the maps to/from the zero space).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import FieldMismatch, InputFormatError, ShapeMismatch, Singular


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    # deterministic Miller-Rabin, valid far beyond 2^31
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Ground field: either GF(p) for a prime p, or the rationals."""

    kind: str  # "prime" | "rational"
    p: int | None = None

    def __post_init__(self):
        if self.kind == "prime":
            if self.p is None or not (2 <= self.p < 2**31) or not is_prime(self.p):
                raise InputFormatError(f"not a usable prime: {self.p!r}")
        elif self.kind == "rational":
            if self.p is not None:
                raise InputFormatError("rational field takes no modulus")
        else:
            raise InputFormatError(f"unknown field kind {self.kind!r}")

    @staticmethod
    def prime(p: int) -> "FieldSpec":
        return FieldSpec("prime", p)

    @staticmethod
    def rational() -> "FieldSpec":
        return FieldSpec("rational")

    # -- scalar arithmetic ------------------------------------------------

    def coerce(self, x):
        """Canonicalize x as a field element."""
        if self.kind == "prime":
            return int(x) % self.p
        if isinstance(x, float):
            raise InputFormatError("floating point entries are not allowed")
        return Fraction(x)

    @property
    def zero(self):
        return 0 if self.kind == "prime" else Fraction(0)

    @property
    def one(self):
        return 1 if self.kind == "prime" else Fraction(1)

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "prime" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "prime" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "prime" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "prime" else -a

    def inv(self, a):
        if a == 0:
            raise Singular("division by zero")
        return pow(a, -1, self.p) if self.kind == "prime" else 1 / Fraction(a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    # -- JSON entry encoding ---------------------------------------------

    def entry_to_json(self, x):
        if self.kind == "prime":
            return int(x)
        f = Fraction(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

    def entry_from_json(self, v):
        if self.kind == "prime":
            if not isinstance(v, int):
                raise InputFormatError(f"prime-field entry must be int, got {v!r}")
            if not 0 <= v < self.p:
                raise InputFormatError(f"entry {v} out of range for GF({self.p})")
            return v
        if not isinstance(v, str):
            raise InputFormatError(f"rational entry must be a string, got {v!r}")
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as e:
            raise InputFormatError(f"bad rational entry {v!r}") from e

    def to_json(self) -> dict:
        return {"kind": "prime", "p": self.p} if self.kind == "prime" else {"kind": "rational"}

    @staticmethod
    def from_json(obj) -> "FieldSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise InputFormatError("field spec must be an object with 'kind'")
        if obj["kind"] == "prime":
            return FieldSpec.prime(obj.get("p"))
        if obj["kind"] == "rational":
            return FieldSpec.rational()
        raise InputFormatError(f"unknown field kind {obj['kind']!r}")


@dataclass(frozen=True)
class Matrix:
    """Immutable dense matrix; ``data`` is row-major of length rows*cols."""

    field: FieldSpec
    rows: int
    cols: int
    data: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ShapeMismatch("negative matrix dimension")
        if len(self.data) != self.rows * self.cols:
            raise ShapeMismatch(
                f"data length {len(self.data)} != {self.rows}x{self.cols}"
            )

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_rows(field: FieldSpec, rows: Sequence[Sequence]) -> "Matrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        data = []
        for row in rows:
            if len(row) != c:
                raise ShapeMismatch("ragged rows")
            data.extend(field.coerce(x) for x in row)
        return Matrix(field, r, c, tuple(data))

    @staticmethod
    def zeros(field: FieldSpec, rows: int, cols: int) -> "Matrix":
        return Matrix(field, rows, cols, (field.zero,) * (rows * cols))

    @staticmethod
    def identity(field: FieldSpec, n: int) -> "Matrix":
        z, o = field.zero, field.one
        return Matrix(field, n, n, tuple(o if i == j else z for i in range(n) for j in range(n)))

    @staticmethod
    def scalar(field: FieldSpec, value) -> "Matrix":
        return Matrix(field, 1, 1, (field.coerce(value),))

    # -- access -----------------------------------------------------------

    def at(self, i: int, j: int):
        return self.data[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def tolists(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def is_zero(self) -> bool:
        z = self.field.zero
        return all(x == z for x in self.data)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == Matrix.identity(self.field, self.rows)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def transpose(self) -> "Matrix":
        return Matrix(
            self.field,
            self.cols,
            self.rows,
            tuple(self.at(i, j) for j in range(self.cols) for i in range(self.rows)),
        )

    # -- arithmetic -------------------------------------------------------

    def add(self, other: "Matrix") -> "Matrix":
        _same_field(self, other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("matrix addition shape mismatch")
        f = self.field
        return Matrix(f, self.rows, self.cols,
                      tuple(f.add(a, b) for a, b in zip(self.data, other.data)))

    def sub(self, other: "Matrix") -> "Matrix":
        _same_field(self, other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("matrix subtraction shape mismatch")
        f = self.field
        return Matrix(f, self.rows, self.cols,
                      tuple(f.sub(a, b) for a, b in zip(self.data, other.data)))

    def scale(self, s) -> "Matrix":
        f = self.field
        s = f.coerce(s)
        return Matrix(f, self.rows, self.cols, tuple(f.mul(s, x) for x in self.data))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    # -- JSON -------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "data": [self.field.entry_to_json(x) for x in self.data],
        }

    @staticmethod
    def from_json(field: FieldSpec, obj) -> "Matrix":
        if not isinstance(obj, dict) or not {"rows", "cols", "data"} <= set(obj):
            raise InputFormatError("matrix must be {rows, cols, data}")
        r, c, data = obj["rows"], obj["cols"], obj["data"]
        if not isinstance(r, int) or not isinstance(c, int) or not isinstance(data, list):
            raise InputFormatError("bad matrix field types")
        if len(data) != r * c:
            raise InputFormatError("matrix data length mismatch")
        return Matrix(field, r, c, tuple(field.entry_from_json(v) for v in data))


def _same_field(a: Matrix, b: Matrix):
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    """Exact product; (r x 0)*(0 x c) is the r x c zero matrix."""
    _same_field(a, b)
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    f = a.field
    n, k, m = a.rows, a.cols, b.cols
    if n == 0 or m == 0 or k == 0:
        return Matrix.zeros(f, n, m)
    ad, bd = a.data, b.data
    out = []
    if f.kind == "prime":
        p = f.p
        for i in range(n):
            ai = i * k
            for j in range(m):
                s = 0
                for l in range(k):
                    s += ad[ai + l] * bd[l * m + j]
                out.append(s % p)
    else:
        for i in range(n):
            ai = i * k
            for j in range(m):
                s = Fraction(0)
                for l in range(k):
                    s += ad[ai + l] * bd[l * m + j]
                out.append(s)
    return Matrix(f, n, m, tuple(out))


# ---------------------------------------------------------------------------
# elimination


def _rref_prime(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    if not rows or not rows[0]:
        return rows, []
    a = np.array(rows, dtype=np.int64) % p
    nr, nc = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        other = np.nonzero(a[:, c])[0]
        other = other[other != r]
        if other.size:
            a[other] = (a[other] - np.outer(a[other, c], a[r])) % p
        pivots.append(c)
        r += 1
    return a.tolist(), pivots


def _rref_rational(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    if not rows or not rows[0]:
        return rows, []
    a = [list(row) for row in rows]
    nr, nc = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        piv = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nr):
            if i != r and a[i][c] != 0:
                fct = a[i][c]
                a[i] = [x - fct * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rref(a: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form (leading coefficient 1) and pivot columns."""
    rows = a.tolists()
    if a.field.kind == "prime":
        red, piv = _rref_prime(rows, a.field.p)
        data = tuple(int(x) for row in red for x in row)
    else:
        red, piv = _rref_rational(rows)
        data = tuple(x for row in red for x in row)
    return Matrix(a.field, a.rows, a.cols, data), tuple(piv)


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def kernel_basis(a: Matrix) -> Matrix:
    """Basis of the null space as columns, in RREF-derived canonical form.

    Column count is cols - rank.  For each free column f (ascending) the basis
    vector has 1 at f and -R[k, f] at the pivot column of row k.
    """
    f = a.field
    red, pivots = rref(a)
    free = [c for c in range(a.cols) if c not in set(pivots)]
    nb = len(free)
    z = f.zero
    cols = []
    for fc in free:
        v = [z] * a.cols
        v[fc] = f.one
        for k, pc in enumerate(pivots):
            v[pc] = f.neg(red.at(k, fc))
        cols.append(v)
    data = tuple(cols[j][i] for i in range(a.cols) for j in range(nb))
    return Matrix(f, a.cols, nb, data)


def invert(a: Matrix) -> Matrix:
    """Exact inverse; raises Singular when rank deficient."""
    if not a.is_square():
        raise ShapeMismatch("only square matrices can be inverted")
    n = a.rows
    if n == 0:
        return a
    f = a.field
    ident = Matrix.identity(f, n)
    aug = [list(a.row(i)) + list(ident.row(i)) for i in range(n)]
    if f.kind == "prime":
        red, piv = _rref_prime(aug, f.p)
    else:
        red, piv = _rref_rational(aug)
    if list(piv) != list(range(n)):
        raise Singular(f"matrix of rank {len([p for p in piv if p < n])} < {n}")
    data = tuple(f.coerce(red[i][n + j]) for i in range(n) for j in range(n))
    return Matrix(f, n, n, data)


def is_invertible(a: Matrix) -> bool:
    return a.is_square() and rank(a) == a.rows


def solve_right(a: Matrix, b: Matrix) -> Matrix | None:
    """One solution X of A X = B, or None when inconsistent."""
    _same_field(a, b)
    if a.rows != b.rows:
        raise ShapeMismatch("solve_right row mismatch")
    f = a.field
    aug = [list(a.row(i)) + list(b.row(i)) for i in range(a.rows)]
    if f.kind == "prime":
        red, piv = _rref_prime(aug, f.p) if aug and aug[0] else (aug, [])
    else:
        red, piv = _rref_rational(aug) if aug and aug[0] else (aug, [])
    if any(p >= a.cols for p in piv):
        return None
    z = f.zero
    out = [[z] * b.cols for _ in range(a.cols)]
    for k, pc in enumerate(piv):
        for j in range(b.cols):
            out[pc][j] = f.coerce(red[k][a.cols + j])
    return Matrix.from_rows(f, out) if a.cols else Matrix.zeros(f, 0, b.cols)
