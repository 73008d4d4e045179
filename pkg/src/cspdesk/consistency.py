"""The width-(k,l) local-consistency decision procedure and an empirical
width-failure hunter.

The procedure keeps, for every l-subset U of the variables, the set S_U of
partial assignments on U that survive pruning: initialization removes
assignments violating a constraint whose scope lies inside U, then pairs of
subsets repeatedly prune assignments that cannot be matched on a common
k-subset, until nothing changes.  Unsatisfiable is reported iff some S_U
empties; that answer is always correct, while "satisfiable" can be wrong
(which is exactly what the hunter looks for).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Optional

from . import rng as rngmod
from .algebra import Structure
from .instances import Constraint, Instance, Var, plain
from .solver import solve

SUBSET_BUDGET = 10 ** 6
ASSIGNMENT_BUDGET = 10 ** 4


@dataclass(frozen=True)
class WidthParams:
    k: int
    l: int

    def __post_init__(self):
        if not (1 <= self.k <= self.l):
            raise ValueError("need l >= k >= 1")


def _binom(n, k):
    from math import comb
    return comb(n, k)


def width_decide(inst: Instance, params: WidthParams, return_state: bool = False,
                 on_sweep=None):
    """Returns "satisfiable" or "unsatisfiable"; optionally also the final
    per-subset assignment sets (keyed by the sorted variable tuple).
    `on_sweep`, if given, receives a snapshot of the state after every
    fixpoint sweep."""
    variables = list(inst.variables)
    n, k, l = len(variables), params.k, params.l
    d = inst.structure.domain.size
    if n < l:
        raise ValueError(f"instance has {n} variables; need at least l={l}")
    if _binom(n, l) > SUBSET_BUDGET:
        raise ValueError("too many l-subsets; raise in smaller pieces")
    if d ** l > ASSIGNMENT_BUDGET:
        raise ValueError("assignment sets too large for explicit storage")

    subsets = list(itertools.combinations(variables, l))  # lexicographic

    # Initialization: all assignments on U, minus those violating a constraint
    # whose scope is contained in U.
    state: Dict[tuple, set] = {}
    for U in subsets:
        pos = {v: i for i, v in enumerate(U)}
        inside = [c for c in inst.constraints if all(v in pos for v in c.scope)]
        keep = set()
        for tau in itertools.product(range(d), repeat=l):
            ok = True
            for c in inside:
                rel = inst.relation_of(c)
                if not rel.eval(tuple(tau[pos[v]] for v in c.scope)):
                    ok = False
                    break
            if ok:
                keep.add(tau)
        state[U] = keep

    # Fixpoint: prune assignments of U1 with no match in U2 on a common
    # k-subset W.  Sweep order is lexicographic over (U1, U2, W); the fixpoint
    # itself is order-independent.
    changed = True
    while changed:
        changed = False
        for U1 in subsets:
            set1 = set(U1)
            for U2 in subsets:
                if U1 == U2:
                    continue
                common = sorted(set1 & set(U2), key=lambda v: v.key())
                if len(common) < k:
                    continue
                pos1 = {v: i for i, v in enumerate(U1)}
                pos2 = {v: i for i, v in enumerate(U2)}
                for W in itertools.combinations(common, k):
                    idx1 = [pos1[v] for v in W]
                    idx2 = [pos2[v] for v in W]
                    shadow2 = {tuple(sigma[i] for i in idx2) for sigma in state[U2]}
                    doomed = [tau for tau in state[U1]
                              if tuple(tau[i] for i in idx1) not in shadow2]
                    if doomed:
                        state[U1].difference_update(doomed)
                        changed = True
        if on_sweep is not None:
            on_sweep({U: set(s) for U, s in state.items()})

    answer = "unsatisfiable" if any(not s for s in state.values()) else "satisfiable"
    if return_state:
        return answer, state
    return answer


def random_instance(struct: Structure, n: int, m: int, rng: rngmod.SplitMix64) -> Instance:
    """Random instance on n plain variables with m constraints of random
    relations over distinct random scopes."""
    variables = [plain(i) for i in range(n)]
    constraints = []
    rels = [(name, rel) for name, rel in struct.relations]
    for _ in range(m):
        name, rel = rels[rng.randrange(len(rels))]
        if rel.arity > n:
            continue
        scope = []
        pool = list(range(n))
        for _ in range(rel.arity):
            scope.append(pool.pop(rng.randrange(len(pool))))
        constraints.append(Constraint(name, tuple(plain(i) for i in scope)))
    return Instance.make(struct, variables, constraints)


def width_error_hunt(struct: Structure, params: WidthParams, n_max: int, trials: int,
                     seed: int, max_report: int = 10) -> list:
    """Search random instances for width errors: declared satisfiable by the
    width procedure but UNSAT by the exact solver.  Every reported instance is
    solver-verified.  An empty report is a valid outcome."""
    rng = rngmod.SplitMix64(seed)
    report = []
    for _ in range(trials):
        n = params.l + rng.randrange(max(1, n_max - params.l + 1))
        m = 1 + rng.randrange(2 * n)
        inst = random_instance(struct, n, m, rng)
        if not inst.constraints:
            continue
        if width_decide(inst, params) == "satisfiable" and not solve(inst).sat:
            report.append(inst)
            if len(report) >= max_report:
                break
    return report
