"""Exact decision, optimum value, and projection enumeration for small instances.

This is the trusted oracle behind all construction checks, so it stays simple:
backtracking in the static variable order (ascending values) with generalized
arc consistency over the truth-table relations.  Determinism is guaranteed:
the returned witness is the lexicographically smallest satisfying assignment
under the variable total order.  Budgets are explicit arguments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional

from .instances import Instance, Var, value


class BudgetExceededError(RuntimeError):
    """Search exceeded its explicit node budget; distinct from UNSAT."""


@dataclass(frozen=True)
class SolveResult:
    status: str  # "SAT" | "UNSAT"
    witness: Optional[Dict[Var, int]] = None

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


def _scope_consistent(tup, scope) -> bool:
    # With repeated scope variables, a relation tuple is only realizable if it
    # agrees on the repeats.
    seen = {}
    for v, x in zip(scope, tup):
        if seen.setdefault(v, x) != x:
            return False
    return True


def _revise(inst: Instance, domains, c) -> bool:
    """Prune unsupported values for every variable of constraint c.  Returns
    True if anything changed; empties a domain on wipeout."""
    rel = inst.relation_of(c)
    sat = rel.satisfying()
    changed = False
    for pos, v in enumerate(c.scope):
        support = set()
        for tup in sat:
            if not _scope_consistent(tup, c.scope):
                continue
            if all(tup[q] in domains[c.scope[q]] for q in range(len(c.scope))):
                support.add(tup[pos])
        new = domains[v] & support
        if new != domains[v]:
            domains[v] = new
            changed = True
    return changed


def _propagate(inst: Instance, domains) -> bool:
    """Run GAC to fixpoint.  Returns False on domain wipeout."""
    changed = True
    while changed:
        changed = False
        for c in inst.constraints:
            if _revise(inst, domains, c):
                changed = True
                if any(not domains[v] for v in c.scope):
                    return False
    return all(domains[v] for v in inst.variables)


def solve(inst: Instance, pinned: Optional[Dict[Var, int]] = None,
          node_budget: int = 1_000_000) -> SolveResult:
    """Complete backtracking search.  `pinned` fixes some variables up front."""
    d = inst.structure.domain.size
    pinned = pinned or {}
    for v, x in pinned.items():
        if v not in set(inst.variables):
            raise ValueError(f"pinned variable {v} not in instance")
        if not (0 <= x < d):
            raise ValueError(f"pinned value {x} out of domain")

    domains = {v: ({pinned[v]} if v in pinned else set(range(d))) for v in inst.variables}
    order = list(inst.variables)  # already in total order
    nodes = [0]

    def search(i: int, domains) -> Optional[Dict[Var, int]]:
        if i == len(order):
            return {v: next(iter(domains[v])) for v in order}
        v = order[i]
        for x in sorted(domains[v]):
            nodes[0] += 1
            if nodes[0] > node_budget:
                raise BudgetExceededError(f"solve exceeded node budget {node_budget}")
            child = {u: set(dom) for u, dom in domains.items()}
            child[v] = {x}
            if _propagate(inst, child):
                found = search(i + 1, child)
                if found is not None:
                    return found
        return None

    if not _propagate(inst, domains):
        return SolveResult("UNSAT")
    witness = search(0, domains)
    if witness is None:
        return SolveResult("UNSAT")
    assert all(witness[v] == pinned[v] for v in pinned)
    return SolveResult("SAT", witness)


def max_value(inst: Instance, node_budget: int = 5_000_000):
    """Exact optimum of value(inst, .) with an optimal assignment, by
    branch and bound over the static variable order."""
    if not inst.constraints:
        raise ValueError("max_value is undefined for an instance with no constraints")
    order = list(inst.variables)
    m = len(inst.constraints)
    pos_of = {v: i for i, v in enumerate(order)}
    # A constraint is decided once its last-ordered scope variable is assigned.
    last_pos = [max(pos_of[v] for v in c.scope) for c in inst.constraints]
    by_last = {}
    for ci, lp in enumerate(last_pos):
        by_last.setdefault(lp, []).append(ci)

    best = {"violated": m + 1, "assignment": None}
    nodes = [0]
    assignment: Dict[Var, int] = {}

    def recurse(i: int, violated: int):
        if violated >= best["violated"]:
            return
        if i == len(order):
            best["violated"] = violated
            best["assignment"] = dict(assignment)
            return
        v = order[i]
        for x in range(inst.structure.domain.size):
            nodes[0] += 1
            if nodes[0] > node_budget:
                raise BudgetExceededError(f"max_value exceeded node budget {node_budget}")
            assignment[v] = x
            add = 0
            for ci in by_last.get(i, ()):
                c = inst.constraints[ci]
                rel = inst.relation_of(c)
                if not rel.eval(tuple(assignment[u] for u in c.scope)):
                    add += 1
            recurse(i + 1, violated + add)
            del assignment[v]

    recurse(0, 0)
    return Fraction(m - best["violated"], m), best["assignment"]


def enumerate_projections(inst: Instance, primaries, node_budget: int = 1_000_000) -> set:
    """All tuples x over the primaries for which some satisfying assignment
    pins primaries to x, by iterating every pinning."""
    d = inst.structure.domain.size
    primaries = tuple(primaries)
    out = set()
    for x in itertools.product(range(d), repeat=len(primaries)):
        pin = {}
        ok = True
        for v, xv in zip(primaries, x):
            if pin.setdefault(v, xv) != xv:
                ok = False
                break
        if not ok:
            continue
        if solve(inst, pin, node_budget=node_budget).sat:
            out.add(x)
    return out
