"""Perfect matchings, regular partite hypergraphs, and the expander-gadget
property checks.

Vertices live on [n] x D (parts indexed by domain element).  A matching is one
permutation per part; hyperedge i joins ((pi_x(i), x)) across parts.  A
hypergraph is an ordered union of such matchings, so every vertex has degree
exactly the number of matchings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .rng import SplitMix64
from .algebra import Relation
from .instances import Constraint, Instance, Var, orig

EXACT_SPARSITY_VERTEX_LIMIT = 24
EXACT_EXPANDER_SPACE_LIMIT = 2 ** 24


@dataclass(frozen=True)
class Matching:
    """One permutation of [n] per part; hyperedge i = ((perm_x[i], x))_x."""

    parts: int
    n: int
    perms: tuple  # of tuples, one per part

    def __post_init__(self):
        if len(self.perms) != self.parts:
            raise ValueError("need one permutation per part")
        for p in self.perms:
            if sorted(p) != list(range(self.n)):
                raise ValueError("each part needs a permutation of range(n)")

    def edges(self) -> list:
        """Hyperedges in index order; each is a tuple of (row, part) vertices."""
        return [tuple((self.perms[x][i], x) for x in range(self.parts))
                for i in range(self.n)]


@dataclass(frozen=True)
class Hypergraph:
    matchings: tuple  # of Matching over the same (parts, n)

    def __post_init__(self):
        if not self.matchings:
            raise ValueError("need at least one matching")
        m0 = self.matchings[0]
        for m in self.matchings:
            if (m.parts, m.n) != (m0.parts, m0.n):
                raise ValueError("matchings disagree on (parts, n)")

    @property
    def parts(self) -> int:
        return self.matchings[0].parts

    @property
    def n(self) -> int:
        return self.matchings[0].n

    @property
    def regularity(self) -> int:
        return len(self.matchings)

    def edges(self) -> list:
        """All hyperedges, ordered by (matching index, edge index)."""
        out = []
        for m in self.matchings:
            out.extend(m.edges())
        return out


def sample_matching(parts: int, n: int, seed: int) -> Matching:
    rng = SplitMix64(seed)
    return sample_matching_from(parts, n, rng)


def sample_matching_from(parts: int, n: int, rng: SplitMix64) -> Matching:
    return Matching(parts, n, tuple(rng.permutation(n) for _ in range(parts)))


def sample_hypergraph(parts: int, n: int, l: int, seed: int) -> Hypergraph:
    rng = SplitMix64(seed)
    return Hypergraph(tuple(sample_matching_from(parts, n, rng) for _ in range(l)))


def instance_from_hypergraph(rel: Relation, graph: Hypergraph) -> Instance:
    """One constraint per hyperedge, scope ordered by part label."""
    if rel.arity != graph.parts:
        raise ValueError("relation arity must equal the number of parts")
    from .algebra import Structure
    struct = Structure.make(rel.domain_size, [("edge", rel)])
    variables = [orig(i, x) for i in range(graph.n) for x in range(graph.parts)]
    constraints = [Constraint("edge", tuple(orig(i, x) for (i, x) in e))
                   for e in graph.edges()]
    return Instance.make(struct, variables, constraints)


# ---------------------------------------------------------------------------
# Local sparsity and peeling


def induced_count(matchings, subset) -> int:
    """Total number of hyperedges (across matchings) fully inside the subset."""
    subset = frozenset(subset)
    total = 0
    for m in matchings:
        for e in m.edges():
            if all(v in subset for v in e):
                total += 1
    return total


def local_sparsity_exact(matchings, delta: Fraction):
    """Exhaustively check: every vertex subset U with |U| <= delta*n induces
    fewer than (2/3)|U| hyperedges.  Returns None if it holds, else a
    violating subset."""
    m0 = matchings[0]
    vertices = [(i, x) for i in range(m0.n) for x in range(m0.parts)]
    if len(vertices) > EXACT_SPARSITY_VERTEX_LIMIT:
        raise ValueError("vertex set too large for exact sparsity check; use the peel certifier")
    cap = int(Fraction(delta) * m0.n)
    for size in range(1, cap + 1):
        for U in itertools.combinations(vertices, size):
            if induced_count(matchings, U) >= Fraction(2, 3) * size:
                return U
    return None


def peel_order(edges_or_matchings):
    """Try to order the hyperedges so each owns a vertex unseen earlier.

    Works by reverse construction: repeatedly delete the lowest-indexed edge
    containing a currently-degree-1 vertex.  Returns (order, None) on success
    where `order` lists edge indices (into the input edge list) in the final
    order, or (None, stuck) with the indices of the un-peelable core.
    """
    if isinstance(edges_or_matchings, Hypergraph):
        edges = edges_or_matchings.edges()
    elif edges_or_matchings and isinstance(edges_or_matchings[0], Matching):
        edges = [e for m in edges_or_matchings for e in m.edges()]
    else:
        edges = list(edges_or_matchings)
    alive = set(range(len(edges)))
    removal = []
    while alive:
        deg: Dict[tuple, int] = {}
        for i in alive:
            for v in edges[i]:
                deg[v] = deg.get(v, 0) + 1
        pick = None
        for i in sorted(alive):
            if any(deg[v] == 1 for v in edges[i]):
                pick = i
                break
        if pick is None:
            return None, sorted(alive)
        alive.remove(pick)
        removal.append(pick)
    return list(reversed(removal)), None


# ---------------------------------------------------------------------------
# Permutation value and alignment


def _frequencies(assignment: Dict, n: int, parts: int, domain_size: int):
    """F[x][z] = fraction of rows i with assignment[(i, x)] = z."""
    F = [[Fraction(0)] * domain_size for _ in range(parts)]
    for x in range(parts):
        for i in range(n):
            F[x][assignment[orig(i, x)]] += Fraction(1, n)
    return F


def perm_value(assignment: Dict, n: int, domain_size: int) -> Fraction:
    """Probability that a uniformly random cross-part hyperedge reads off a
    permutation of the domain, via the |D|!-term product expansion."""
    F = _frequencies(assignment, n, domain_size, domain_size)
    total = Fraction(0)
    for pi in itertools.permutations(range(domain_size)):
        prod = Fraction(1)
        for x in range(domain_size):
            prod *= F[x][pi[x]]
        total += prod
    return total


@dataclass(frozen=True)
class PermAlignment:
    mapping: tuple            # argmax row map, one entry per part
    is_permutation: bool
    guaranteed: bool          # perm_value met the 1 - 1/(5|D|) threshold
    row_fractions: tuple      # F(t, mapping[t]) per part


def perm_align(assignment: Dict, n: int, domain_size: int) -> PermAlignment:
    """Row-wise argmax map (ties to the smallest element).  Above the
    1 - 1/(5|D|) Perm-value threshold the map is a permutation and every row
    fraction is at least the Perm-value."""
    F = _frequencies(assignment, n, domain_size, domain_size)
    pv = perm_value(assignment, n, domain_size)
    mapping = []
    rows = []
    for t in range(domain_size):
        best = max(range(domain_size), key=lambda z: (F[t][z], -z))
        mapping.append(best)
        rows.append(F[t][best])
    is_perm = sorted(mapping) == list(range(domain_size))
    guaranteed = pv >= 1 - Fraction(1, 5 * domain_size)
    if guaranteed:
        assert is_perm and all(r >= pv for r in rows)
    return PermAlignment(tuple(mapping), is_perm, guaranteed, tuple(rows))


# ---------------------------------------------------------------------------
# Expander-gadget property


def check_expander_property(graph: Hypergraph, rel: Relation, eps: Fraction,
                            trials: int = 2000, seed: int = 0):
    """Check: every assignment with value >= 1-eps on the edge instance agrees
    with some satisfying tuple of the relation except on at most a 2*eps
    fraction of vertices.  Exact (exhaustive over assignments) when the space
    is small; otherwise randomized falsification by local search.  Returns
    None when the property holds (or survives falsification), else a
    counterexample assignment."""
    from .algebra import is_sub_unique
    d = graph.parts
    if rel.domain_size != d or rel.arity != d:
        raise ValueError("relation must have arity |D| over the part domain")
    if not is_sub_unique(rel):
        raise ValueError("expander property applies to sub-unique relations")
    eps = Fraction(eps)
    if not (0 < eps <= Fraction(1, 10 * d)):
        raise ValueError(f"eps must lie in (0, 1/(10*{d})]")
    inst = instance_from_hypergraph(rel, graph)
    n = graph.n
    variables = [orig(i, x) for i in range(n) for x in range(d)]
    sat = rel.satisfying()
    from .instances import value as inst_value

    def close_to_some_tuple(assignment) -> bool:
        for y in sat:
            wrong = sum(1 for i in range(n) for x in range(d)
                        if assignment[orig(i, x)] != y[x])
            if Fraction(wrong, n * d) <= 2 * eps:
                return True
        return False

    def is_counterexample(assignment) -> bool:
        return inst_value(inst, assignment) >= 1 - eps and not close_to_some_tuple(assignment)

    if d ** (n * d) <= EXACT_EXPANDER_SPACE_LIMIT:
        for values in itertools.product(range(d), repeat=n * d):
            assignment = dict(zip(variables, values))
            if is_counterexample(assignment):
                return assignment
        return None

    # Randomized falsification: hill-climb assignments toward high value and
    # report any that land above 1-eps while staying far from every tuple.
    rng = SplitMix64(seed)
    for _ in range(trials):
        assignment = {v: rng.randrange(d) for v in variables}
        for _ in range(4 * n * d):
            v = variables[rng.randrange(len(variables))]
            old = assignment[v]
            best_val = inst_value(inst, assignment)
            for cand in range(d):
                assignment[v] = cand
                if inst_value(inst, assignment) > best_val:
                    best_val = inst_value(inst, assignment)
                    old = cand
            assignment[v] = old
        if is_counterexample(assignment):
            return assignment
    return None
