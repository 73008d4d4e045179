"""CSP instances: variables, constraints, assignments, value, serialization.

Variable identifiers are tagged tuples so the transformed instances of the
hardness pipeline can name their four variable classes without collision.
Constraints form a multiset (an ordered list; duplicates retained).  The value
of an assignment is an exact fraction of satisfied constraints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Sequence, Tuple

from .algebra import Relation, Structure

_TAG_ORDER = {"plain": 0, "orig": 1, "const": 2, "aux1": 3, "aux2": 4}
_TAG_ARITY = {"plain": 1, "orig": 2, "const": 3, "aux1": 3, "aux2": 4}


@dataclass(frozen=True, order=False)
class Var:
    """Tagged variable id: plain(i) | orig(j,p) | const(j,t,x) | aux1(i,j,t) | aux2(i,j,t,s)."""

    tag: str
    parts: tuple

    def __post_init__(self):
        if self.tag not in _TAG_ORDER:
            raise ValueError(f"unknown variable tag {self.tag!r}")
        if len(self.parts) != _TAG_ARITY[self.tag]:
            raise ValueError(f"tag {self.tag!r} needs {_TAG_ARITY[self.tag]} components")

    def key(self):
        return (_TAG_ORDER[self.tag], self.parts)

    def __lt__(self, other):
        return self.key() < other.key()

    def __repr__(self):
        return f"{self.tag}{self.parts}"


def plain(i: int) -> Var:
    return Var("plain", (i,))


def orig(j: int, p: int) -> Var:
    return Var("orig", (j, p))


def const(j: int, t: int, x: int) -> Var:
    return Var("const", (j, t, x))


def aux1(i: int, j: int, t: int) -> Var:
    return Var("aux1", (i, j, t))


def aux2(i: int, j: int, t: int, s: int) -> Var:
    return Var("aux2", (i, j, t, s))


@dataclass(frozen=True)
class Constraint:
    relation: str  # name in the owning structure
    scope: tuple   # of Var


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    structure: Structure
    variables: tuple        # of Var, in total order
    constraints: tuple      # of Constraint, order significant
    strict: bool = True     # forbid repeated variables in a scope

    def variable_set(self) -> frozenset:
        return frozenset(self.variables)

    def num_constraints(self) -> int:
        return len(self.constraints)

    def relation_of(self, c: Constraint) -> Relation:
        return self.structure.relation(c.relation)

    @staticmethod
    def make(structure: Structure, variables: Iterable[Var], constraints: Iterable[Constraint],
             strict: bool = True) -> "Instance":
        inst = Instance(structure, tuple(sorted(set(variables))), tuple(constraints), strict)
        problems = validate(inst)
        if problems:
            raise ValidationError("; ".join(problems))
        return inst


def validate(inst: Instance) -> list:
    """Return a list of violation descriptions (empty when well formed)."""
    problems = []
    varset = set(inst.variables)
    for i, c in enumerate(inst.constraints):
        try:
            rel = inst.structure.relation(c.relation)
        except KeyError:
            problems.append(f"constraint {i}: unknown relation {c.relation!r}")
            continue
        if len(c.scope) != rel.arity:
            problems.append(f"constraint {i}: scope length {len(c.scope)} != arity {rel.arity}")
        for v in c.scope:
            if v not in varset:
                problems.append(f"constraint {i}: scope variable {v} not in variable set")
        if inst.strict and len(set(c.scope)) != len(c.scope):
            problems.append(f"constraint {i}: repeated scope variable in strict mode")
    return problems


def constraint_satisfied(inst: Instance, c: Constraint, assignment: Dict[Var, int]) -> bool:
    rel = inst.relation_of(c)
    return bool(rel.eval(tuple(assignment[v] for v in c.scope)))


def value(inst: Instance, assignment: Dict[Var, int]) -> Fraction:
    """Exact fraction of constraints satisfied by a total assignment."""
    if not inst.constraints:
        raise ValueError("value is undefined for an instance with no constraints")
    missing = [v for v in inst.variables if v not in assignment]
    if missing:
        raise ValueError(f"assignment is not total; missing {missing[:3]}")
    d = inst.structure.domain.size
    if any(not (0 <= assignment[v] < d) for v in inst.variables):
        raise ValueError("assignment value out of domain")
    sat = sum(1 for c in inst.constraints if constraint_satisfied(inst, c, assignment))
    return Fraction(sat, len(inst.constraints))


def degree(inst: Instance, v: Var) -> int:
    """Number of constraints whose scope contains v (multiset count)."""
    return sum(1 for c in inst.constraints if v in c.scope)


def degrees(inst: Instance) -> Dict[Var, int]:
    out = {v: 0 for v in inst.variables}
    for c in inst.constraints:
        for v in set(c.scope):
            out[v] += 1
    return out


def max_degree(inst: Instance) -> int:
    if not inst.variables:
        return 0
    return max(degrees(inst).values())


def sub_instance(inst: Instance, subset) -> Instance:
    """Keep only constraints whose scopes lie inside the given variable subset."""
    subset = frozenset(subset)
    kept = tuple(c for c in inst.constraints if all(v in subset for v in c.scope))
    return Instance(inst.structure, tuple(sorted(subset)), kept, inst.strict)


# ---------------------------------------------------------------------------
# JSON serialization.  Canonical form: sorted keys, explicit variable tags.


def var_to_json(v: Var) -> dict:
    return {"tag": v.tag, "parts": list(v.parts)}


def var_from_json(obj: dict) -> Var:
    return Var(obj["tag"], tuple(obj["parts"]))


def relation_to_json(rel: Relation) -> dict:
    return {"domain_size": rel.domain_size, "arity": rel.arity,
            "table": "".join(str(b) for b in rel.table)}


def relation_from_json(obj: dict) -> Relation:
    return Relation(obj["domain_size"], obj["arity"], tuple(int(ch) for ch in obj["table"]))


def structure_to_json(struct: Structure) -> dict:
    return {"domain_size": struct.domain.size,
            "relations": [{"name": name, **relation_to_json(rel)} for name, rel in struct.relations]}


def structure_from_json(obj: dict) -> Structure:
    rels = [(r["name"], relation_from_json(r)) for r in obj["relations"]]
    return Structure.make(obj["domain_size"], rels)


def instance_to_json(inst: Instance) -> dict:
    return {
        "structure": structure_to_json(inst.structure),
        "variables": [var_to_json(v) for v in inst.variables],
        "constraints": [{"relation": c.relation, "scope": [var_to_json(v) for v in c.scope]}
                        for c in inst.constraints],
        "strict": inst.strict,
    }


def instance_from_json(obj: dict) -> Instance:
    struct = structure_from_json(obj["structure"])
    variables = [var_from_json(v) for v in obj["variables"]]
    constraints = [Constraint(c["relation"], tuple(var_from_json(v) for v in c["scope"]))
                   for c in obj["constraints"]]
    return Instance.make(struct, variables, constraints, strict=obj.get("strict", True))


def encode(inst: Instance) -> str:
    return json.dumps(instance_to_json(inst), sort_keys=True, indent=2)


def decode(text: str) -> Instance:
    return instance_from_json(json.loads(text))


def assignment_to_json(assignment: Dict[Var, int]) -> list:
    return [{"var": var_to_json(v), "value": x} for v, x in sorted(assignment.items())]


def assignment_from_json(items: list) -> Dict[Var, int]:
    return {var_from_json(e["var"]): e["value"] for e in items}
