"""Constructive clone machinery: gadget instances that simulate relations.

The central construction builds, for an irredundant target relation R with m
satisfying tuples, an instance over a pool of |D|^m variables u_y (y in D^m)
whose satisfying assignments are exactly the m-ary polymorphisms of the source
structure, read off as f(y) = tau(u_y).  Designated primary variables then
project those assignments onto R's satisfying set iff R is generated by the
structure's relations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .algebra import (Operation, Relation, Structure, all_tuples, end_relation,
                      endomorphisms, index_to_tuple, is_constant_relation, is_core,
                      is_irredundant, is_polymorphism, is_sub_unique, preserves,
                      tuple_to_index)
from .instances import Constraint, Instance, Var, plain
from .solver import enumerate_projections, solve

POOL_BUDGET = 10 ** 5
CONSTRAINT_BUDGET = 10 ** 6


@dataclass(frozen=True)
class GadgetInstance:
    instance: Instance
    primaries: tuple          # of Var, length = target arity
    target: Relation
    mode: str                 # "strict" | "extended" (scope repetition occurred)

    def secondary_count(self) -> int:
        return len(self.instance.variables) - len(set(self.primaries))


def geiger_construct(struct: Structure, target: Relation) -> GadgetInstance:
    """Build the polymorphism-encoding instance for the target relation."""
    d = struct.domain.size
    if target.domain_size != d:
        raise ValueError("target relation domain mismatch")
    sat = target.satisfying()  # canonical enumeration w^(1), ..., w^(m)
    m = len(sat)
    if m == 0:
        raise ValueError("target relation has empty satisfying set")
    if not is_irredundant(target):
        raise ValueError("target relation is redundant; construction needs irredundance")
    pool_size = d ** m
    if pool_size > POOL_BUDGET:
        raise ValueError(f"variable pool {pool_size} exceeds budget {POOL_BUDGET}")
    test_count = sum(rel.weight() ** m for _, rel in struct.relations)
    if test_count > CONSTRAINT_BUDGET:
        raise ValueError(f"{test_count} tests exceed constraint budget {CONSTRAINT_BUDGET}")

    variables = [plain(i) for i in range(pool_size)]

    def u(y: tuple) -> Var:
        return plain(tuple_to_index(y, d))

    constraints: List[Constraint] = []
    seen = set()
    extended = False
    for name, rel in struct.relations:
        # One test per choice of m satisfying columns; row i of the resulting
        # matrix indexes the i-th scope variable.
        for cols in itertools.product(rel.satisfying(), repeat=m):
            scope = []
            for i in range(rel.arity):
                y = tuple(cols[j][i] for j in range(m))
                scope.append(u(y))
            scope = tuple(scope)
            if len(set(scope)) != len(scope):
                extended = True
            key = (name, scope)
            if key not in seen:
                seen.add(key)
                constraints.append(Constraint(name, scope))

    # Primary variables: z^(i)_j = w^(j)_i.
    primaries = []
    for i in range(target.arity):
        z = tuple(sat[j][i] for j in range(m))
        primaries.append(u(z))
    if len(set(primaries)) != len(primaries):
        # Irredundance guarantees distinctness; reaching here means a bug.
        raise AssertionError("primaries coincide despite irredundant target")

    inst = Instance.make(struct, variables, constraints, strict=not extended)
    return GadgetInstance(inst, tuple(primaries), target, "extended" if extended else "strict")


@dataclass(frozen=True)
class SimulationFailure:
    tuple_: tuple                 # a tuple in the symmetric difference
    direction: str                # "excess" | "missing"
    witness: Optional[Dict] = None  # satisfying assignment realizing an excess tuple


def verify_simulation(gadget: GadgetInstance, node_budget: int = 1_000_000):
    """Check the gadget's primary projections equal the target's satisfying
    set exactly.  Returns None on pass, else a SimulationFailure."""
    projected = enumerate_projections(gadget.instance, gadget.primaries, node_budget=node_budget)
    expected = set(gadget.target.satisfying())
    excess = projected - expected
    if excess:
        t = min(excess)
        res = solve(gadget.instance, dict(zip(gadget.primaries, t)), node_budget=node_budget)
        return SimulationFailure(t, "excess", res.witness)
    missing = expected - projected
    if missing:
        return SimulationFailure(min(missing), "missing")
    return None


@dataclass(frozen=True)
class CloneAnswer:
    in_clone: bool
    gadget: Optional[GadgetInstance] = None
    counterexample: Optional[Operation] = None


def clone_membership(struct: Structure, target: Relation,
                     node_budget: int = 1_000_000) -> CloneAnswer:
    """Decide whether the target relation is generated by the structure.  On a
    negative answer, extract a polymorphism of the structure that fails to
    preserve the target."""
    gadget = geiger_construct(struct, target)
    failure = verify_simulation(gadget, node_budget=node_budget)
    if failure is None:
        return CloneAnswer(True, gadget=gadget)
    if failure.direction == "missing":
        # Projection assignments realize every satisfying tuple, so a missing
        # tuple cannot occur for a well-formed construction.
        raise AssertionError(f"gadget misses tuple {failure.tuple_}")
    d = struct.domain.size
    m = len(gadget.target.satisfying())
    table = tuple(failure.witness[plain(i)] for i in range(d ** m))
    f = Operation(d, m, table)
    assert is_polymorphism(f, struct) and not preserves(f, target)
    return CloneAnswer(False, gadget=gadget, counterexample=f)


def brute_force_clone_check(struct: Structure, target: Relation) -> bool:
    """Independent oracle: every m-ary operation preserving all relations of
    the structure also preserves the target (m = target's satisfying count).
    Exhaustive over all d**(d**m) operations; small inputs only."""
    from .algebra import all_operations
    m = len(target.satisfying())
    if m == 0:
        raise ValueError("target relation has empty satisfying set")
    for f in all_operations(struct.domain.size, m):
        if is_polymorphism(f, struct) and not preserves(f, target):
            return False
    return True


def end_gadget(struct: Structure) -> Tuple[GadgetInstance, int]:
    """Gadget simulating the endomorphism relation, plus the size bound r2 =
    max(secondary variables, constraints) used by the reduction kit."""
    gadget = geiger_construct(struct, end_relation(struct))
    r2 = max(gadget.secondary_count(), gadget.instance.num_constraints())
    return gadget, r2


# ---------------------------------------------------------------------------
# Homomorphic equivalence and core reduction


@dataclass(frozen=True)
class HomEquivPair:
    """Signature-matched structures with homomorphisms both ways, as tables."""

    s1: Structure
    s2: Structure
    to2: tuple  # phi1: element of s1 -> element of s2
    to1: tuple  # phi2: element of s2 -> element of s1


def is_homomorphism(table, s1: Structure, s2: Structure) -> bool:
    """Check a unary table maps satisfying tuples of each s1 relation into the
    s2 relation paired with it (pairing = list position)."""
    if len(s1.relations) != len(s2.relations):
        return False
    if len(table) != s1.domain.size:
        return False
    for (_, r1), (_, r2) in zip(s1.relations, s2.relations):
        if r1.arity != r2.arity:
            return False
        for t in r1.satisfying():
            if not r2.eval(tuple(table[x] for x in t)):
                return False
    return True


def check_hom_equiv(pair: HomEquivPair) -> bool:
    return (is_homomorphism(pair.to2, pair.s1, pair.s2)
            and is_homomorphism(pair.to1, pair.s2, pair.s1))


def _restrict_structure(struct: Structure, image: list) -> Structure:
    """Restrict domain to the given elements (renumbered 0..len-1)."""
    index = {x: i for i, x in enumerate(image)}
    rels = []
    for name, rel in struct.relations:
        kept = [tuple(index[x] for x in t) for t in rel.satisfying()
                if all(x in index for x in t)]
        rels.append((name, Relation.from_tuples(len(image), rel.arity, kept)))
    return Structure.make(len(image), rels)


def core_reduce(struct: Structure) -> Tuple[Structure, HomEquivPair]:
    """Shrink to a core by repeatedly collapsing through the first
    non-bijective endomorphism (canonical table order).  Returns the core and
    the homomorphism pair between the original structure and the core."""
    current = struct
    # Composite maps between the original domain and the current one.
    down = list(range(struct.domain.size))   # original -> current
    up = list(range(struct.domain.size))     # current -> original (embedding)
    while True:
        bad = next((e for e in endomorphisms(current) if not e.is_permutation()), None)
        if bad is None:
            break
        image = sorted(set(bad.table))
        index = {x: i for i, x in enumerate(image)}
        current = _restrict_structure(current, image)
        down = [index[bad.table[x]] for x in down]
        up = [up[image[i]] for i in range(len(image))]
    pair = HomEquivPair(struct, current, tuple(down), tuple(up))
    assert is_core(current) and check_hom_equiv(pair)
    return current, pair


def strip_constants(inst: Instance) -> Tuple[Instance, list]:
    """Remove the unary single-point (constant) constraints; return the
    stripped instance and the (variable, pinned value) list they encoded."""
    kept = []
    pins = []
    for c in inst.constraints:
        rel = inst.relation_of(c)
        if is_constant_relation(rel):
            pins.append((c.scope[0], rel.satisfying()[0][0]))
        else:
            kept.append(c)
    stripped = Instance(inst.structure, inst.variables, tuple(kept), inst.strict)
    return stripped, pins


def translate(inst: Instance, pair: HomEquivPair) -> Instance:
    """Re-read an instance over pair.s1 as one over pair.s2 (same variables
    and scopes; relations matched by list position / name)."""
    if inst.structure is not pair.s1 and inst.structure.relations != pair.s1.relations:
        raise ValueError("instance is not over the pair's first structure")
    return Instance(pair.s2, inst.variables, inst.constraints, inst.strict)


def pullback(assignment: Dict, pair: HomEquivPair) -> Dict:
    """Compose an s2-assignment with the homomorphism back into s1."""
    return {v: pair.to1[x] for v, x in assignment.items()}


def pushforward(assignment: Dict, pair: HomEquivPair) -> Dict:
    return {v: pair.to2[x] for v, x in assignment.items()}
