"""Finite relational and algebraic structures.

Relations and operations are stored as explicit tables under one canonical
tuple indexing, used everywhere in this package: the tuple (x1, ..., xk) over
a domain of size D maps to index sum(x_i * D**(k-i)), i.e. x1 is the most
significant digit.  Domain elements are the integers 0..D-1.  All values here
are immutable and all functions are pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence


def tuple_to_index(tup: Sequence[int], domain_size: int) -> int:
    idx = 0
    for x in tup:
        idx = idx * domain_size + x
    return idx


def index_to_tuple(idx: int, domain_size: int, arity: int) -> tuple:
    out = []
    for _ in range(arity):
        out.append(idx % domain_size)
        idx //= domain_size
    return tuple(reversed(out))


def all_tuples(domain_size: int, arity: int) -> Iterator[tuple]:
    """All tuples in canonical index order."""
    return itertools.product(range(domain_size), repeat=arity)


@dataclass(frozen=True)
class Domain:
    size: int
    labels: tuple = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("domain size must be >= 1")
        if self.labels is not None:
            if len(self.labels) != self.size or len(set(self.labels)) != self.size:
                raise ValueError("labels must be distinct and match domain size")

    def elements(self):
        return range(self.size)


@dataclass(frozen=True)
class Relation:
    """A k-ary relation on {0..domain_size-1} as a bit table."""

    domain_size: int
    arity: int
    table: tuple  # bits, length domain_size**arity, canonical order

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if len(self.table) != self.domain_size ** self.arity:
            raise ValueError("table length must be domain_size**arity")
        if any(b not in (0, 1) for b in self.table):
            raise ValueError("table entries must be bits")

    def eval(self, tup: Sequence[int]) -> int:
        if len(tup) != self.arity:
            raise ValueError(f"expected arity {self.arity}, got tuple of length {len(tup)}")
        if any(not (0 <= x < self.domain_size) for x in tup):
            raise ValueError("tuple entry out of domain")
        return self.table[tuple_to_index(tup, self.domain_size)]

    def satisfying(self) -> list:
        """Satisfying tuples in canonical index order."""
        return [t for t in all_tuples(self.domain_size, self.arity) if self.table[tuple_to_index(t, self.domain_size)]]

    def weight(self) -> int:
        return sum(self.table)

    @staticmethod
    def from_tuples(domain_size: int, arity: int, tuples) -> "Relation":
        table = [0] * domain_size ** arity
        for t in tuples:
            table[tuple_to_index(t, domain_size)] = 1
        return Relation(domain_size, arity, tuple(table))


def relation_eval(rel: Relation, tup: Sequence[int]) -> int:
    return rel.eval(tup)


@dataclass(frozen=True)
class Operation:
    """A k-ary operation on {0..domain_size-1} as a value table."""

    domain_size: int
    arity: int
    table: tuple  # values < domain_size, length domain_size**arity

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if len(self.table) != self.domain_size ** self.arity:
            raise ValueError("table length must be domain_size**arity")
        if any(not (0 <= v < self.domain_size) for v in self.table):
            raise ValueError("table entry out of domain")

    def apply(self, tup: Sequence[int]) -> int:
        if len(tup) != self.arity:
            raise ValueError(f"expected arity {self.arity}, got tuple of length {len(tup)}")
        return self.table[tuple_to_index(tup, self.domain_size)]

    def is_permutation(self) -> bool:
        return self.arity == 1 and sorted(self.table) == list(range(self.domain_size))

    @staticmethod
    def projection(domain_size: int, arity: int, coord: int) -> "Operation":
        table = tuple(t[coord] for t in all_tuples(domain_size, arity))
        return Operation(domain_size, arity, table)

    @staticmethod
    def identity(domain_size: int) -> "Operation":
        return Operation(domain_size, 1, tuple(range(domain_size)))


@dataclass(frozen=True)
class Structure:
    """A domain with an ordered list of named relations."""

    domain: Domain
    relations: tuple  # of (name, Relation) pairs

    def __post_init__(self):
        names = [name for name, _ in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be distinct")
        for name, rel in self.relations:
            if rel.domain_size != self.domain.size:
                raise ValueError(f"relation {name} has mismatched domain size")

    def relation(self, name: str) -> Relation:
        for n, rel in self.relations:
            if n == name:
                return rel
        raise KeyError(name)

    def relation_names(self) -> list:
        return [name for name, _ in self.relations]

    @staticmethod
    def make(domain_size: int, named_relations) -> "Structure":
        return Structure(Domain(domain_size), tuple(named_relations))


# ---------------------------------------------------------------------------
# Groups


@dataclass(frozen=True)
class GroupSpec:
    """Finite abelian group as a product of cyclic groups Z_m1 x ... x Z_mt.

    Elements are residue vectors; the bijection with relation-domain integers
    0..|G|-1 is lexicographic residue order (first modulus most significant).
    """

    moduli: tuple

    def __post_init__(self):
        if not self.moduli or any(m < 2 for m in self.moduli):
            raise ValueError("need at least one modulus, all >= 2")

    @property
    def order(self) -> int:
        n = 1
        for m in self.moduli:
            n *= m
        return n

    def elements(self) -> list:
        return list(itertools.product(*(range(m) for m in self.moduli)))

    def element_index(self, g: Sequence[int]) -> int:
        self.check(g)
        idx = 0
        for r, m in zip(g, self.moduli):
            idx = idx * m + r
        return idx

    def element_at(self, idx: int) -> tuple:
        out = []
        for m in reversed(self.moduli):
            out.append(idx % m)
            idx //= m
        return tuple(reversed(out))

    def check(self, g: Sequence[int]) -> None:
        if len(g) != len(self.moduli) or any(not (0 <= r < m) for r, m in zip(g, self.moduli)):
            raise ValueError(f"invalid group element {g} for moduli {self.moduli}")

    def add(self, *gs) -> tuple:
        for g in gs:
            self.check(g)
        return tuple(sum(g[i] for g in gs) % m for i, m in enumerate(self.moduli))

    def zero(self) -> tuple:
        return (0,) * len(self.moduli)

    @staticmethod
    def cyclic(m: int) -> "GroupSpec":
        return GroupSpec((m,))


def three_sum_relation(group: GroupSpec, b: Sequence[int]) -> Relation:
    """Ternary relation over the group's element enumeration: x1+x2+x3 = b."""
    group.check(tuple(b))
    n = group.order
    elems = group.elements()
    table = [0] * n ** 3
    for t in all_tuples(n, 3):
        s = group.add(elems[t[0]], elems[t[1]], elems[t[2]])
        if s == tuple(b):
            table[tuple_to_index(t, n)] = 1
    return Relation(n, 3, tuple(table))


def three_sum_structure(group: GroupSpec) -> Structure:
    """The linear-equation template: one ternary sum relation per group element."""
    rels = [(f"sum{group.element_index(b)}", three_sum_relation(group, b)) for b in group.elements()]
    return Structure.make(group.order, rels)


# ---------------------------------------------------------------------------
# Preservation, polymorphisms, endomorphisms


def preserves(f: Operation, rel: Relation) -> bool:
    """Does applying f row-wise to any matrix of satisfying columns stay in rel?"""
    if f.domain_size != rel.domain_size:
        raise ValueError("operation/relation domain mismatch")
    sat = rel.satisfying()
    for cols in itertools.product(sat, repeat=f.arity):
        row_out = tuple(f.apply(tuple(col[i] for col in cols)) for i in range(rel.arity))
        if not rel.eval(row_out):
            return False
    return True


def is_polymorphism(f: Operation, struct: Structure) -> bool:
    if f.domain_size != struct.domain.size:
        raise ValueError("operation/structure domain mismatch")
    return all(preserves(f, rel) for _, rel in struct.relations)


def all_operations(domain_size: int, arity: int) -> Iterator[Operation]:
    """All operations of the given arity, in canonical table order."""
    for table in itertools.product(range(domain_size), repeat=domain_size ** arity):
        yield Operation(domain_size, arity, table)


def endomorphisms(struct: Structure) -> list:
    """All unary polymorphisms, in canonical table order."""
    return [f for f in all_operations(struct.domain.size, 1) if is_polymorphism(f, struct)]


def is_core(struct: Structure) -> bool:
    return all(e.is_permutation() for e in endomorphisms(struct))


def is_irredundant(rel: Relation) -> bool:
    """Every coordinate pair is separated by some satisfying tuple."""
    sat = rel.satisfying()
    for i, j in itertools.combinations(range(rel.arity), 2):
        if not any(t[i] != t[j] for t in sat):
            return False
    return True


END_RELATION_DOMAIN_LIMIT = 5


def end_relation(struct: Structure) -> Relation:
    """Arity-|D| relation holding exactly on tuples (y_x)_x whose induced map
    x -> y_x is an endomorphism.  Coordinates follow domain element order."""
    d = struct.domain.size
    if d > END_RELATION_DOMAIN_LIMIT:
        raise ValueError(f"end_relation limited to domains of size <= {END_RELATION_DOMAIN_LIMIT}")
    table = []
    for y in all_tuples(d, d):
        f = Operation(d, 1, y)
        table.append(1 if is_polymorphism(f, struct) else 0)
    return Relation(d, d, tuple(table))


def perm_relation(domain_size: int) -> Relation:
    """Arity-|D| relation holding exactly on tuples that permute the domain."""
    table = []
    for y in all_tuples(domain_size, domain_size):
        table.append(1 if sorted(y) == list(range(domain_size)) else 0)
    return Relation(domain_size, domain_size, tuple(table))


def is_sub_unique(rel: Relation) -> bool:
    """Every satisfying tuple has pairwise distinct entries."""
    if rel.arity != rel.domain_size:
        raise ValueError("sub-uniqueness is defined for arity-|D| relations over D")
    return all(len(set(t)) == len(t) for t in rel.satisfying())


def compose(f: Operation, g: Operation) -> Operation:
    """(f o g)(x_{1,1..m}, ..., x_{k,1..m}) = f(g(x_{1,*}), ..., g(x_{k,*}))."""
    if f.domain_size != g.domain_size:
        raise ValueError("domain mismatch")
    k, m = f.arity, g.arity
    d = f.domain_size
    table = []
    for xs in all_tuples(d, k * m):
        inner = tuple(g.apply(xs[i * m:(i + 1) * m]) for i in range(k))
        table.append(f.apply(inner))
    return Operation(d, k * m, tuple(table))


# ---------------------------------------------------------------------------
# Common fixtures


def neq_relation(domain_size: int = 2) -> Relation:
    return Relation.from_tuples(domain_size, 2, [(a, b) for a in range(domain_size) for b in range(domain_size) if a != b])


def coloring_structure(colors: int) -> Structure:
    """k-coloring template: one binary disequality relation."""
    return Structure.make(colors, [("neq", neq_relation(colors))])


def constant_relations(domain_size: int) -> list:
    """Unary single-point relations, one per domain element, named const<x>."""
    out = []
    for x in range(domain_size):
        table = tuple(1 if v == x else 0 for v in range(domain_size))
        out.append((f"const{x}", Relation(domain_size, 1, table)))
    return out


def with_constants(struct: Structure) -> Structure:
    """The structure extended by all constant relations."""
    return Structure(struct.domain, struct.relations + tuple(constant_relations(struct.domain.size)))


def is_constant_relation(rel: Relation) -> bool:
    return rel.arity == 1 and rel.weight() == 1
