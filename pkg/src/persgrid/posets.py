"""Finite posets with Hasse diagrams, and modules over them."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    AntisymmetryViolation,
    FieldMismatch,
    FunctorialityFailure,
    InputFormatError,
    ShapeMismatch,
)
from .fields import FieldSpec, Matrix, invert, mat_mul


@dataclass(frozen=True)
class FinitePoset:
    """Finite poset given by its full relation and cover (Hasse) edges."""

    elements: tuple
    relation: frozenset  # pairs (p, q) with p <= q, reflexive and transitive
    hasse: tuple  # cover edges (p, q), sorted

    @staticmethod
    def from_generators(elements: Sequence, pairs: Iterable[tuple]) -> "FinitePoset":
        """Reflexive-transitive closure of the generating relation.

        Raises AntisymmetryViolation when the closure contains a 2-cycle.
        """
        elems = tuple(sorted(set(elements)))
        rel = {(p, p) for p in elems}
        rel.update((p, q) for p, q in pairs)
        for m in elems:  # Warshall
            for p in elems:
                if (p, m) in rel:
                    for q in elems:
                        if (m, q) in rel:
                            rel.add((p, q))
        for p, q in rel:
            if p != q and (q, p) in rel:
                raise AntisymmetryViolation(f"{p} <= {q} and {q} <= {p}")
        hasse = []
        for p, q in sorted(rel):
            if p == q:
                continue
            if not any(r not in (p, q) and (p, r) in rel and (r, q) in rel for r in elems):
                hasse.append((p, q))
        return FinitePoset(elems, frozenset(rel), tuple(hasse))

    def leq(self, p, q) -> bool:
        return (p, q) in self.relation

    def up_covers(self, p) -> list:
        return [q for (r, q) in self.hasse if r == p]

    def strict_pairs(self) -> list[tuple]:
        return sorted((p, q) for p, q in self.relation if p != q)

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "hasse": [list(e) for e in self.hasse]}


class PosetModule:
    """Module over a finite poset: one space per element, one matrix per cover.

    Functoriality (all Hasse-path composites between comparable elements agree)
    is a validity condition checked by :func:`check_functorial`.
    """

    __slots__ = ("field", "poset", "dims", "mats")

    def __init__(self, field: FieldSpec, poset: FinitePoset, dims: Mapping,
                 mats: Mapping[tuple, Matrix]):
        if set(dims) != set(poset.elements):
            raise ShapeMismatch("dims must cover exactly the poset elements")
        if set(mats) != set(poset.hasse):
            raise ShapeMismatch("mats must cover exactly the Hasse edges")
        for (p, q), m in mats.items():
            if m.field != field:
                raise FieldMismatch("edge matrix over the wrong field")
            if (m.rows, m.cols) != (dims[q], dims[p]):
                raise ShapeMismatch(f"edge {p}->{q} matrix is {m.rows}x{m.cols}, "
                                    f"want {dims[q]}x{dims[p]}")
        self.field = field
        self.poset = poset
        self.dims = dict(dims)
        self.mats = dict(mats)

    def dim(self, p) -> int:
        return self.dims[p]

    def rel_matrix(self, p, q) -> Matrix:
        """Matrix of p <= q, composed along any Hasse path (functoriality)."""
        if p == q:
            return Matrix.identity(self.field, self.dims[p])
        if not self.poset.leq(p, q):
            raise ShapeMismatch(f"{p} is not <= {q}")
        reached = {p: Matrix.identity(self.field, self.dims[p])}
        frontier = [p]
        while frontier:
            nxt = []
            for r in frontier:
                for s in self.poset.up_covers(r):
                    if s in reached or not self.poset.leq(s, q):
                        continue
                    reached[s] = mat_mul(self.mats[(r, s)], reached[r])
                    nxt.append(s)
            frontier = nxt
        return reached[q]

    def check_functorial(self):
        """First (p, q, m1, m2) with two disagreeing Hasse-path composites."""
        for p in self.poset.elements:
            reached = {p: Matrix.identity(self.field, self.dims[p])}
            frontier = [p]
            while frontier:
                nxt = []
                for r in frontier:
                    for s in self.poset.up_covers(r):
                        m = mat_mul(self.mats[(r, s)], reached[r])
                        if s in reached:
                            if reached[s] != m:
                                return (p, s, reached[s], m)
                        else:
                            reached[s] = m
                            nxt.append(s)
                frontier = nxt
        return None

    # interface shared with PersistenceModule (used by hom and ModuleMap)

    def points(self) -> list:
        return list(self.poset.elements)

    def point_dim(self, p) -> int:
        return self.dims[p]

    def arrow_keys(self) -> list[tuple]:
        return list(self.poset.hasse)

    def arrow_ends(self, key):
        return key

    def arrow_mat(self, key) -> Matrix:
        return self.mats[key]

    def __eq__(self, other):
        return (isinstance(other, PosetModule) and self.field == other.field
                and self.poset == other.poset and self.dims == other.dims
                and self.mats == other.mats)

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "elements": list(self.poset.elements),
            "hasse": [list(e) for e in self.poset.hasse],
            "dims": {str(p): d for p, d in self.dims.items()},
            "mats": {f"{p}->{q}": m.to_json() for (p, q), m in self.mats.items()},
        }


# ---------------------------------------------------------------------------
# generators


def random_invertible(field: FieldSpec, n: int, rng: random.Random) -> Matrix:
    """Product of random elementary row operations applied to the identity."""
    m = [list(Matrix.identity(field, n).row(i)) for i in range(n)]
    for _ in range(2 * n):
        op = rng.random()
        i, j = rng.randrange(n), rng.randrange(n)
        if op < 0.5 and i != j:
            s = _nonzero(field, rng)
            m[j] = [field.add(a, field.mul(s, b)) for a, b in zip(m[j], m[i])]
        elif op < 0.8:
            s = _nonzero(field, rng)
            m[i] = [field.mul(s, a) for a in m[i]]
        else:
            m[i], m[j] = m[j], m[i]
    return Matrix.from_rows(field, m) if n else Matrix.zeros(field, 0, 0)


def _nonzero(field: FieldSpec, rng: random.Random):
    if field.kind == "prime":
        return rng.randrange(1, field.p)
    from fractions import Fraction

    return Fraction(rng.choice([-2, -1, 1, 2, 3]), rng.randint(1, 2))


def _random_interval(poset: FinitePoset, rng: random.Random) -> frozenset:
    """A random convex connected subset: singleton, closed interval or upset."""
    choice = rng.random()
    p = rng.choice(poset.elements)
    if choice < 0.3:
        return frozenset([p])
    if choice < 0.65:
        return frozenset(q for q in poset.elements if poset.leq(p, q))
    ups = [q for q in poset.elements if poset.leq(p, q)]
    q = rng.choice(ups)
    return frozenset(r for r in poset.elements if poset.leq(p, r) and poset.leq(r, q))


def random_poset_module(field: FieldSpec, poset: FinitePoset, seed,
                        n_intervals: int = 2, include_singletons: bool = False,
                        base_change: bool = True) -> PosetModule:
    """Direct sum of random interval modules, conjugated by random base changes.

    With ``include_singletons`` every element carries a private summand, which
    forces every cover matrix to be non-injective (never an isomorphism).
    """
    rng = random.Random(f"pmod:{seed}")
    summands: list[frozenset] = []
    if include_singletons:
        summands.extend(frozenset([p]) for p in poset.elements)
    summands.extend(_random_interval(poset, rng) for _ in range(n_intervals))

    dims = {p: sum(1 for s in summands if p in s) for p in poset.elements}
    per_elem = {p: [i for i, s in enumerate(summands) if p in s] for p in poset.elements}
    mats = {}
    for (p, q) in poset.hasse:
        z, o = field.zero, field.one
        rows_idx, cols_idx = per_elem[q], per_elem[p]
        data = [o if rows_idx[i] == cols_idx[j] else z
                for i in range(len(rows_idx)) for j in range(len(cols_idx))]
        mats[(p, q)] = Matrix(field, dims[q], dims[p], tuple(data))
    if base_change:
        change = {p: random_invertible(field, dims[p], rng) for p in poset.elements}
        inv = {p: invert(change[p]) for p in poset.elements}
        mats = {(p, q): mat_mul(change[q], mat_mul(m, inv[p])) for (p, q), m in mats.items()}
    return PosetModule(field, poset, dims, mats)
