"""Persistence modules on finite grid posets.

A module assigns a dimension to every cell of an n-dimensional grid (n <= 3)
and a matrix to every elementary arrow c -> c + e_k, subject to commutativity
of every unit square.  The grid carries the product order; maps between
arbitrary comparable cells are compositions along the canonical staircase
(axis 0 first, then axis 1, ...).
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Mapping, Sequence

from .errors import (
    BudgetExceeded,
    FieldMismatch,
    InputFormatError,
    NonMonotoneQuantization,
    NotComparable,
    NotInterval,
    ShapeMismatch,
)
from .fields import FieldSpec, Matrix, mat_mul

Cell = tuple[int, ...]

DEFAULT_BUDGET = 10**8


def scalar_budget() -> int:
    raw = os.environ.get("PMOD_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class GridShape:
    """Finite grid [0, s_0) x ... x [0, s_{n-1}), 1 <= n <= 3."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.sizes) <= 3:
            raise InputFormatError("grid must have 1 to 3 axes")
        if any(s < 1 for s in self.sizes):
            raise InputFormatError("axis sizes must be positive")
        n = 1
        for s in self.sizes:
            n *= s
        if n > 10**6:
            raise BudgetExceeded(f"{n} cells exceeds the 10^6 cell cap")

    @property
    def naxes(self) -> int:
        return len(self.sizes)

    @property
    def ncells(self) -> int:
        n = 1
        for s in self.sizes:
            n *= s
        return n

    def contains(self, c: Cell) -> bool:
        return len(c) == self.naxes and all(0 <= x < s for x, s in zip(c, self.sizes))

    def index(self, c: Cell) -> int:
        # axis 0 varies fastest
        idx, stride = 0, 1
        for x, s in zip(c, self.sizes):
            idx += x * stride
            stride *= s
        return idx

    def cell(self, idx: int) -> Cell:
        coords = []
        for s in self.sizes:
            coords.append(idx % s)
            idx //= s
        return tuple(coords)

    def cells(self) -> Iterable[Cell]:
        """Canonical cell order: axis-0 fastest."""
        for i in range(self.ncells):
            yield self.cell(i)

    def step(self, c: Cell, axis: int) -> Cell | None:
        """c + e_axis, or None when out of range."""
        if c[axis] + 1 >= self.sizes[axis]:
            return None
        return c[:axis] + (c[axis] + 1,) + c[axis + 1 :]

    def arrow_cells(self, axis: int) -> Iterable[Cell]:
        """Cells c (canonical order) with c + e_axis in range."""
        for c in self.cells():
            if c[axis] + 1 < self.sizes[axis]:
                yield c


def leq(a: Cell, b: Cell) -> bool:
    return all(x <= y for x, y in zip(a, b))


def comparable(a: Cell, b: Cell) -> bool:
    return leq(a, b) or leq(b, a)


def box(a: Cell, b: Cell) -> Iterable[Cell]:
    """All cells between the componentwise meet and join of a and b."""
    lo = tuple(min(x, y) for x, y in zip(a, b))
    hi = tuple(max(x, y) for x, y in zip(a, b))

    def rec(prefix, k):
        if k == len(lo):
            yield tuple(prefix)
            return
        for v in range(lo[k], hi[k] + 1):
            yield from rec(prefix + [v], k + 1)

    yield from rec([], 0)


def is_order_convex(shape: GridShape, cells: set[Cell]) -> tuple[bool, tuple | None]:
    """Order-convexity of a cell set; on failure returns a witness a <= c <= b."""
    below: dict[Cell, Cell | None] = {}
    above: dict[Cell, Cell | None] = {}
    order = list(shape.cells())
    for c in order:
        w = c if c in cells else None
        if w is None:
            for k in range(shape.naxes):
                if c[k] > 0:
                    prev = c[:k] + (c[k] - 1,) + c[k + 1 :]
                    if below.get(prev) is not None:
                        w = below[prev]
                        break
        below[c] = w
    for c in reversed(order):
        w = c if c in cells else None
        if w is None:
            for k in range(shape.naxes):
                nxt = shape.step(c, k)
                if nxt is not None and above.get(nxt) is not None:
                    w = above[nxt]
                    break
        above[c] = w
    for c in order:
        if c not in cells and below[c] is not None and above[c] is not None:
            return False, (below[c], c, above[c])
    return True, None


def is_zigzag_connected(cells: set[Cell]) -> bool:
    """Connectivity under the comparability relation."""
    if not cells:
        return True
    todo = [next(iter(sorted(cells)))]
    seen = set(todo)
    while todo:
        x = todo.pop()
        for y in cells:
            if y not in seen and comparable(x, y):
                seen.add(y)
                todo.append(y)
    return len(seen) == len(cells)


def is_interval(shape: GridShape, cells: set[Cell]) -> bool:
    return bool(cells) and is_order_convex(shape, cells)[0] and is_zigzag_connected(cells)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [list(map(str, v)) for v in self.violations]}


class PersistenceModule:
    """Functor from a finite grid poset to vector spaces, in fixed bases.

    ``dims`` is indexed in canonical cell order; ``maps`` holds one matrix per
    elementary arrow, keyed by (axis, source cell).
    """

    __slots__ = ("field", "shape", "dims", "maps")

    def __init__(self, field: FieldSpec, shape: GridShape, dims: Sequence[int],
                 maps: Mapping[tuple[int, Cell], Matrix]):
        dims = tuple(int(d) for d in dims)
        if len(dims) != shape.ncells:
            raise ShapeMismatch(f"dims length {len(dims)} != {shape.ncells} cells")
        if any(d < 0 for d in dims):
            raise ShapeMismatch("negative dimension")
        maxdim = max(dims) if dims else 0
        if shape.ncells * maxdim * maxdim > scalar_budget():
            raise BudgetExceeded("cell count x max dim^2 exceeds PMOD_BUDGET")
        expected = {(k, c) for k in range(shape.naxes) for c in shape.arrow_cells(k)}
        if set(maps) != expected:
            missing = expected - set(maps)
            extra = set(maps) - expected
            raise ShapeMismatch(f"arrow key mismatch: missing {sorted(missing)[:3]}, "
                                f"extra {sorted(extra)[:3]}")
        for m in maps.values():
            if m.field != field:
                raise FieldMismatch("arrow matrix over the wrong field")
        self.field = field
        self.shape = shape
        self.dims = dims
        self.maps = dict(maps)

    def dim(self, c: Cell) -> int:
        return self.dims[self.shape.index(c)]

    def arrow(self, axis: int, c: Cell) -> Matrix:
        return self.maps[(axis, c)]

    def points(self) -> list[Cell]:
        return list(self.shape.cells())

    def point_dim(self, p) -> int:
        return self.dim(p)

    def arrow_keys(self) -> list[tuple[int, Cell]]:
        return sorted(self.maps)

    def arrow_ends(self, key) -> tuple[Cell, Cell]:
        axis, c = key
        return c, self.shape.step(c, axis)

    def arrow_mat(self, key) -> Matrix:
        return self.maps[key]

    def __eq__(self, other):
        return (isinstance(other, PersistenceModule)
                and self.field == other.field and self.shape == other.shape
                and self.dims == other.dims and self.maps == other.maps)

    def __repr__(self):
        return f"PersistenceModule(shape={self.shape.sizes}, dims={self.dims})"


def build_module(field: FieldSpec, shape: GridShape, dim_of, arrow_of) -> PersistenceModule:
    """Construct a module from callables cell -> dim and (axis, cell) -> Matrix.

    ``arrow_of`` may return None to request the zero matrix of the right shape.
    """
    dims = [dim_of(c) for c in shape.cells()]
    maps = {}
    for k in range(shape.naxes):
        for c in shape.arrow_cells(k):
            d = shape.step(c, k)
            m = arrow_of(k, c)
            if m is None:
                m = Matrix.zeros(field, dim_of(d), dim_of(c))
            maps[(k, c)] = m
    return PersistenceModule(field, shape, dims, maps)


def validate(m: PersistenceModule) -> ValidationReport:
    """Shape constraints plus commutativity of every elementary square."""
    violations = []

    def note(*v):
        if len(violations) < 10:
            violations.append(tuple(v))
        return len(violations) >= 10

    for (k, c), mat in sorted(m.maps.items()):
        d = m.shape.step(c, k)
        if (mat.rows, mat.cols) != (m.dim(d), m.dim(c)):
            if note("shape", c, k, f"{mat.rows}x{mat.cols}", f"want {m.dim(d)}x{m.dim(c)}"):
                return ValidationReport(False, tuple(violations))
    if violations:
        return ValidationReport(False, tuple(violations))

    n = m.shape.naxes
    for c in m.shape.cells():
        for k in range(n):
            ck = m.shape.step(c, k)
            if ck is None:
                continue
            for l in range(k + 1, n):
                cl = m.shape.step(c, l)
                if cl is None:
                    continue
                via_k = mat_mul(m.arrow(l, ck), m.arrow(k, c))
                via_l = mat_mul(m.arrow(k, cl), m.arrow(l, c))
                if via_k != via_l:
                    if note("square", c, k, l):
                        return ValidationReport(False, tuple(violations))
    return ValidationReport(not violations, tuple(violations))


def map_between(m: PersistenceModule, a: Cell, b: Cell) -> Matrix:
    """M(a <= b) along the canonical staircase (axis 0 first)."""
    if not leq(a, b):
        raise NotComparable(f"{a} is not <= {b}")
    acc = Matrix.identity(m.field, m.dim(a))
    cur = a
    for k in range(m.shape.naxes):
        while cur[k] < b[k]:
            acc = mat_mul(m.arrow(k, cur), acc)
            cur = cur[:k] + (cur[k] + 1,) + cur[k + 1 :]
    return acc


def interval_module(field: FieldSpec, shape: GridShape, support: Iterable[Cell]) -> PersistenceModule:
    """The thin module that is F with identity maps exactly on an interval."""
    sup = set(support)
    for c in sup:
        if not shape.contains(c):
            raise NotInterval(f"support cell {c} outside the grid")
    if not sup:
        raise NotInterval("empty support")
    convex, witness = is_order_convex(shape, sup)
    if not convex:
        raise NotInterval(f"support not order-convex, witness {witness}")
    if not is_zigzag_connected(sup):
        raise NotInterval("support not connected")
    one = Matrix.identity(field, 1)

    def arrow(k, c):
        d = shape.step(c, k)
        return one if (c in sup and d in sup) else None

    return build_module(field, shape, lambda c: 1 if c in sup else 0, arrow)


def direct_sum(m: PersistenceModule, n: PersistenceModule) -> PersistenceModule:
    if m.field != n.field:
        raise FieldMismatch("direct sum over different fields")
    if m.shape != n.shape:
        raise ShapeMismatch("direct sum over different grids")
    f = m.field

    def block_diag(a: Matrix, b: Matrix) -> Matrix:
        rows = a.rows + b.rows
        cols = a.cols + b.cols
        z = f.zero
        data = []
        for i in range(a.rows):
            data.extend(a.row(i))
            data.extend([z] * b.cols)
        for i in range(b.rows):
            data.extend([z] * a.cols)
            data.extend(b.row(i))
        return Matrix(f, rows, cols, tuple(data))

    return build_module(
        f, m.shape,
        lambda c: m.dim(c) + n.dim(c),
        lambda k, c: block_diag(m.arrow(k, c), n.arrow(k, c)),
    )


def is_thin(m: PersistenceModule) -> bool:
    return all(d in (0, 1) for d in m.dims)


def support(m: PersistenceModule) -> set[Cell]:
    return {c for c in m.shape.cells() if m.dim(c) > 0}


def inflate(h, shape: GridShape, quantization: Mapping[Cell, object]) -> PersistenceModule:
    """Pull a poset module back along a monotone surjective quantization."""
    for c in shape.cells():
        if c not in quantization:
            raise NonMonotoneQuantization(f"cell {c} not quantized")
    if set(quantization[c] for c in shape.cells()) != set(h.poset.elements):
        raise NonMonotoneQuantization("quantization is not surjective onto the poset")
    for k in range(shape.naxes):
        for c in shape.arrow_cells(k):
            d = shape.step(c, k)
            if not h.poset.leq(quantization[c], quantization[d]):
                raise NonMonotoneQuantization(f"arrow {c} -> {d} maps to a non-relation")

    field = h.field

    def arrow(k, c):
        d = shape.step(c, k)
        p, q = quantization[c], quantization[d]
        if p == q:
            return Matrix.identity(field, h.dim(p))
        return h.rel_matrix(p, q)

    return build_module(field, shape, lambda c: h.dim(quantization[c]), arrow)


# ---------------------------------------------------------------------------
# natural transformations


class ModuleMap:
    """Natural transformation between two modules over the same index set.

    ``mats`` holds one matrix per point (cell or poset element), of shape
    target.dim x source.dim.
    """

    __slots__ = ("source", "target", "mats")

    def __init__(self, source, target, mats: Mapping):
        if source.field != target.field:
            raise FieldMismatch("module map across different fields")
        self.source = source
        self.target = target
        self.mats = dict(mats)

    def at(self, p) -> Matrix:
        return self.mats[p]

    def naturality_witness(self):
        """First arrow where naturality fails, or None."""
        for key in self.source.arrow_keys():
            s, d = self.source.arrow_ends(key)
            lhs = mat_mul(self.target.arrow_mat(key), self.mats[s])
            rhs = mat_mul(self.mats[d], self.source.arrow_mat(key))
            if lhs != rhs:
                return key
        return None

    def is_natural(self) -> bool:
        for p in self.source.points():
            m = self.mats[p]
            if (m.rows, m.cols) != (self.target.point_dim(p), self.source.point_dim(p)):
                return False
        return self.naturality_witness() is None

    def is_isomorphism(self) -> bool:
        from .fields import is_invertible

        return self.is_natural() and all(is_invertible(self.mats[p]) for p in self.source.points())

    def to_json(self) -> dict:
        return {"mats": [self.mats[p].to_json() for p in self.source.points()]}


# ---------------------------------------------------------------------------
# random generator


class _Retry(Exception):
    pass


def random_thin_module(field: FieldSpec, shape: GridShape, density: float,
                       seed) -> PersistenceModule:
    """Random valid thin module, deterministic per seed.

    Dims are sampled in {0, 1} with the given density; arrow scalars are swept
    in lexicographic cell order and each square whose other arrows are already
    fixed forces the remaining one to the unique commuting value.  Dead ends
    (a square demanding s*0 = nonzero) restart the sweep with a derived seed.
    """
    if not 0 <= density <= 1:
        raise InputFormatError("density must be in [0, 1]")
    for attempt in range(1000):
        rng = random.Random(f"thin:{seed}:{attempt}")
        try:
            return _random_thin_once(field, shape, density, rng)
        except _Retry:
            continue
    raise AssertionError("thin-module sweep failed to converge")


def _sample_nonzero(field: FieldSpec, rng: random.Random):
    if field.kind == "prime":
        return rng.randrange(1, field.p)
    from fractions import Fraction

    num = rng.choice([-3, -2, -1, 1, 2, 3])
    return Fraction(num, rng.randint(1, 3))


def _random_thin_once(field: FieldSpec, shape: GridShape, density: float,
                      rng: random.Random) -> PersistenceModule:
    cells = sorted(shape.cells())  # lexicographic sweep order
    dims = {c: (1 if rng.random() < density else 0) for c in cells}
    assigned: dict[tuple[Cell, int], object] = {}

    def in_range(c):
        return shape.contains(c)

    def e(c, k, delta=1):
        return c[:k] + (c[k] + delta,) + c[k + 1 :]

    def side_value(b, mid, arr1, arr2):
        # composite b -> opposite corner through mid; None if an arrow unassigned
        if dims[mid] == 0:
            return field.zero
        if arr1 not in assigned or arr2 not in assigned:
            return None
        return field.mul(assigned[arr2], assigned[arr1])

    for c in cells:
        for k in range(shape.naxes):
            tgt = shape.step(c, k)
            if tgt is None or dims[c] == 0 or dims[tgt] == 0:
                continue
            forced = None
            for l in range(shape.naxes):
                if l == k:
                    continue
                for b in (c, e(c, l, -1)):
                    if min(b) < 0 or not in_range(b):
                        continue
                    kk, ll = min(k, l), max(k, l)
                    top = e(e(b, kk), ll)
                    if not in_range(top) or dims[b] == 0 or dims[top] == 0:
                        continue
                    mk, ml = e(b, kk), e(b, ll)
                    side_k = (b, kk), (mk, ll)  # arrows of the composite via e_kk
                    side_l = (b, ll), (ml, kk)
                    cur = (c, k)
                    if cur in side_k:
                        mine, partner_key, mid = side_k, (side_k[0] if cur == side_k[1] else side_k[1]), mk
                        other_mid, other = ml, side_l
                    elif cur in side_l:
                        mine, partner_key, mid = side_l, (side_l[0] if cur == side_l[1] else side_l[1]), ml
                        other_mid, other = mk, side_k
                    else:
                        continue
                    if dims[mid] == 0:
                        continue  # our side is forced zero regardless of the scalar
                    if partner_key != cur and partner_key not in assigned:
                        continue  # the partner arrow will carry this constraint later
                    rhs = side_value(b, other_mid, *other)
                    if rhs is None:
                        continue
                    partner = assigned[partner_key] if partner_key != cur else None
                    if partner is None:
                        continue
                    if partner == field.zero:
                        if rhs != field.zero:
                            raise _Retry
                        continue
                    val = field.div(rhs, partner)
                    if forced is not None and forced != val:
                        raise _Retry
                    forced = val
            assigned[(c, k)] = forced if forced is not None else _sample_nonzero(field, rng)

    def arrow(k, c):
        d = shape.step(c, k)
        if dims[c] == 1 and dims[d] == 1:
            return Matrix.scalar(field, assigned[(c, k)])
        return None

    return build_module(field, shape, lambda c: dims[c], arrow)
