"""The hardness pipeline: paired YES/NO samplers over group equations, the
reduction kit, the gadget-composition transform, completeness witnesses,
structural audits, and the soundness pullback.

The transform rewrites an instance of ternary group equations (each variable
in one of three parts, part-0 variables of degree exactly d) into an instance
over a target template: each source constraint becomes a copy of a gadget
simulating the corresponding sum relation, with constant-pinned variables
rerouted to shared Const variables, and each hyperedge of an l-regular
expander over the Const variables becomes a copy of the endomorphism gadget.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import (GroupSpec, Operation, Relation, Structure, end_relation,
                      is_core, three_sum_structure)
from .gadgets import GadgetInstance, end_gadget, strip_constants, verify_simulation
from .hypergraphs import Hypergraph, Matching, sample_hypergraph, sample_matching_from, perm_align
from .instances import (Constraint, Instance, Var, aux1, aux2, const, orig,
                        instance_to_json, instance_from_json, value)
from .rng import SplitMix64
from .solver import solve


# ---------------------------------------------------------------------------
# Paired YES/NO sampler


@dataclass(frozen=True)
class PairSample:
    group: GroupSpec
    n: int
    d: int
    seed: int
    matchings: tuple          # d Matchings over (3 parts, n)
    planted: dict             # orig var -> group element index
    i_yes: Instance
    i_no: Instance


def sample_pair(group: GroupSpec, n: int, d: int, seed: int,
                structure: Optional[Structure] = None) -> PairSample:
    """Plant a uniform assignment, then for d rounds sample a 3-partite
    perfect matching; each hyperedge becomes one equation whose right-hand
    side is the planted sum (YES) or uniform (NO).  Constraint order is
    (round, edge index)."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    struct = structure if structure is not None else three_sum_structure(group)
    rng = SplitMix64(seed)
    g = group.order
    variables = [orig(j, p) for j in range(n) for p in range(3)]
    planted = {v: rng.randrange(g) for v in sorted(variables)}
    elems = group.elements()
    matchings = []
    cons_yes: List[Constraint] = []
    cons_no: List[Constraint] = []
    for _ in range(d):
        m = sample_matching_from(3, n, rng)
        matchings.append(m)
        for e in m.edges():
            scope = tuple(orig(row, part) for (row, part) in e)
            b = group.add(*(elems[planted[v]] for v in scope))
            cons_yes.append(Constraint(f"sum{group.element_index(b)}", scope))
            cons_no.append(Constraint(f"sum{rng.randrange(g)}", scope))
    i_yes = Instance.make(struct, variables, cons_yes)
    i_no = Instance.make(struct, variables, cons_no)
    return PairSample(group, n, d, seed, tuple(matchings), planted, i_yes, i_no)


def dpair_shape_check(inst: Instance, d: int):
    """Check the three-part equation shape the transform requires: every
    constraint scope is (orig(.,0), orig(.,1), orig(.,2)) and every part-0
    variable occurs in exactly d constraints.  Returns (issues, incident)
    where incident[j] lists, in order, the constraint indices at orig(j,0)."""
    issues = []
    rows = sorted({v.parts[0] for v in inst.variables if v.tag == "orig"})
    incident: Dict[int, list] = {j: [] for j in rows}
    for ci, c in enumerate(inst.constraints):
        if len(c.scope) != 3 or any(v.tag != "orig" or v.parts[1] != p
                                    for p, v in enumerate(c.scope)):
            issues.append(f"constraint {ci}: scope is not one variable per part")
            continue
        incident[c.scope[0].parts[0]].append(ci)
    for j in rows:
        if len(incident[j]) != d:
            issues.append(f"part-0 variable row {j} has degree {len(incident[j])}, want {d}")
    return issues, incident


# ---------------------------------------------------------------------------
# Reduction kit


@dataclass(frozen=True)
class ReductionKit:
    """Everything the transform composes: the target core template, the group,
    the partial encoding map phi: D' -> G, one gadget per group element
    simulating the encoded sum relation, the endomorphism gadget, the size
    bounds r1/r2, the multiplicities d/l, and the l-regular hypergraph over
    the Const variables ([r1*n] rows per part, parts = domain elements)."""

    structure: Structure
    group: GroupSpec
    dprime: tuple             # encodable domain elements, sorted
    phi: tuple                # per domain element: group element index or None
    gadgets: tuple            # per group element index: (Instance, primaries)
    end: GadgetInstance
    r1: int
    r2: int
    d: int
    l: int
    graph: Hypergraph
    n: int
    z: int = 0                # special element anchoring the Aux2 indexing

    @property
    def domain_size(self) -> int:
        return self.structure.domain.size

    def beta(self) -> int:
        return 3 + self.domain_size * self.r1 + self.d * self.r1 + self.l * self.r1 * self.r2

    def alpha(self) -> Fraction:
        return Fraction(self.d + self.l * self.r1, self.beta())

    def d_prime(self) -> int:
        return self.d * self.r1 + self.l * self.r2


def encoded_sum_relation(kit: ReductionKit, b_idx: int) -> Relation:
    """The ternary relation each gadget must simulate: all entries encodable
    and their group images summing to the given element."""
    d = kit.domain_size
    elems = kit.group.elements()
    b = elems[b_idx]
    tuples = []
    for x1 in kit.dprime:
        for x2 in kit.dprime:
            for x3 in kit.dprime:
                s = kit.group.add(elems[kit.phi[x1]], elems[kit.phi[x2]], elems[kit.phi[x3]])
                if s == b:
                    tuples.append((x1, x2, x3))
    return Relation.from_tuples(d, 3, tuples)


def classify_gadget_vars(inst: Instance, primaries):
    """Split a sum-gadget's variables into (primaries, pins, secondaries);
    pins lists (variable, pinned value) in the instance's variable order."""
    _, pin_list = strip_constants(inst)
    pinned = dict(pin_list)
    prim = set(primaries)
    pins = [(v, pinned[v]) for v in inst.variables if v in pinned and v not in prim]
    secondaries = [v for v in inst.variables if v not in prim and v not in pinned]
    return tuple(primaries), tuple(pins), tuple(secondaries)


def verify_kit(kit: ReductionKit, node_budget: int = 200_000) -> list:
    """All preparatory checks; returns a list of diagnostics (empty = pass)."""
    issues = []
    d = kit.domain_size
    covered = {kit.phi[x] for x in kit.dprime}
    if covered != set(range(kit.group.order)):
        missing = sorted(set(range(kit.group.order)) - covered)
        issues.append(f"phi not surjective; uncovered group element index {missing[0]}")
    if any(kit.phi[x] is None for x in kit.dprime) or \
            any(kit.phi[x] is not None for x in range(d) if x not in kit.dprime):
        issues.append("phi support disagrees with dprime")
    if not is_core(kit.structure):
        issues.append("target structure is not a core")
    if len(kit.gadgets) != kit.group.order:
        issues.append("need one sum gadget per group element")
    for b_idx, (inst, primaries) in enumerate(kit.gadgets):
        target = encoded_sum_relation(kit, b_idx)
        gadget = GadgetInstance(inst, tuple(primaries), target,
                                "strict" if inst.strict else "extended")
        failure = verify_simulation(gadget, node_budget=node_budget)
        if failure is not None:
            issues.append(f"sum gadget {b_idx}: {failure.direction} tuple {failure.tuple_}")
        _, pins, secondaries = classify_gadget_vars(inst, primaries)
        if len(secondaries) > kit.r1:
            issues.append(f"sum gadget {b_idx}: {len(secondaries)} secondaries exceed r1={kit.r1}")
        stripped, _ = strip_constants(inst)
        if len(stripped.constraints) > kit.r1:
            issues.append(f"sum gadget {b_idx}: {len(stripped.constraints)} constraints exceed r1={kit.r1}")
        for x in {p[1] for p in pins}:
            if sum(1 for _, xv in pins if xv == x) > kit.r1:
                issues.append(f"sum gadget {b_idx}: pins of value {x} exceed r1={kit.r1}")
    expected_end = end_relation(kit.structure)
    if kit.end.target != expected_end:
        issues.append("endomorphism gadget targets the wrong relation")
    else:
        failure = verify_simulation(kit.end, node_budget=node_budget)
        if failure is not None:
            issues.append(f"endomorphism gadget: {failure.direction} tuple {failure.tuple_}")
    if kit.end.secondary_count() > kit.r2:
        issues.append("endomorphism gadget secondaries exceed r2")
    if kit.end.instance.num_constraints() > kit.r2:
        issues.append("endomorphism gadget constraints exceed r2")
    if kit.graph.parts != d:
        issues.append("hypergraph parts must be the domain elements")
    if kit.graph.n != kit.r1 * kit.n:
        issues.append(f"hypergraph part size {kit.graph.n} != r1*n = {kit.r1 * kit.n}")
    if kit.graph.regularity != kit.l:
        issues.append(f"hypergraph regularity {kit.graph.regularity} != l = {kit.l}")
    if not (0 <= kit.z < d):
        issues.append("special element out of domain")
    return issues


def self_kit(group: GroupSpec, n: int, d: int, l: int, seed: int) -> ReductionKit:
    """The kit reducing the group-equation template to itself: the encoding
    map is the identity and each sum gadget is the single bare constraint."""
    struct = three_sum_structure(group)
    g = group.order
    gadgets = []
    from .instances import plain
    for b_idx in range(g):
        scope = (plain(0), plain(1), plain(2))
        inst = Instance.make(struct, scope, [Constraint(f"sum{b_idx}", scope)])
        gadgets.append((inst, scope))
    end, r2 = end_gadget(struct)
    r1 = 1
    graph = sample_hypergraph(g, r1 * n, l, seed)
    return ReductionKit(struct, group, tuple(range(g)), tuple(range(g)),
                        tuple(gadgets), end, r1, r2, d, l, graph, n, z=0)


# ---------------------------------------------------------------------------
# Transform


@dataclass(frozen=True)
class Block:
    kind: str        # "constraint" | "vertex"
    source: int      # source constraint index, or hyperedge global index
    start: int       # first constraint index in the transformed instance
    end: int         # one past the last
    var_map: tuple   # ((gadget variable, transformed variable), ...)


@dataclass(frozen=True)
class TransformOutput:
    instance: Instance
    blocks: tuple
    kit: ReductionKit


def _row_to_jt(row: int, r1: int) -> Tuple[int, int]:
    return row // r1, row % r1


def qc_block(kit: ReductionKit, b_idx: int, scope, j: int, i: int):
    """Constraints (and variable map) for one sum-gadget copy: primaries onto
    the source scope, pins of value x onto Const(j,t,x) in variable order,
    secondaries onto Aux1(i,j,t)."""
    inst, primaries = kit.gadgets[b_idx]
    prim, pins, secondaries = classify_gadget_vars(inst, primaries)
    mapping = dict(zip(prim, scope))
    t_next: Dict[int, int] = {}
    for v, x in pins:
        t = t_next.get(x, 0)
        t_next[x] = t + 1
        mapping[v] = const(j, t, x)
    for t, v in enumerate(secondaries):
        mapping[v] = aux1(i, j, t)
    stripped, _ = strip_constants(inst)
    cons = [Constraint(c.relation, tuple(mapping[v] for v in c.scope))
            for c in stripped.constraints]
    return cons, tuple(sorted(mapping.items()))


def qv_block(kit: ReductionKit, edge, i: int, j: int, t: int):
    """Constraints (and variable map) for one endomorphism-gadget copy on a
    hyperedge: primary of part x onto the edge's Const variable of value x,
    secondaries onto Aux2(i,j,t,s)."""
    gadget = kit.end
    mapping = {}
    for row, x in edge:
        jj, tt = _row_to_jt(row, kit.r1)
        mapping[gadget.primaries[x]] = const(jj, tt, x)
    secondaries = [v for v in gadget.instance.variables if v not in mapping]
    for s, v in enumerate(secondaries):
        mapping[v] = aux2(i, j, t, s)
    cons = [Constraint(c.relation, tuple(mapping[v] for v in c.scope))
            for c in gadget.instance.constraints]
    return cons, tuple(sorted(mapping.items()))


def transform(inst: Instance, kit: ReductionKit) -> TransformOutput:
    issues, incident = dpair_shape_check(inst, kit.d)
    if issues:
        raise ValueError("input shape: " + "; ".join(issues))
    n = kit.n
    if sorted(incident) != list(range(n)):
        raise ValueError(f"instance rows do not match kit n={n}")
    if inst.structure.domain.size != kit.group.order:
        raise ValueError("instance is not over the kit's group template")
    d_size = kit.domain_size
    r1, r2, d, l = kit.r1, kit.r2, kit.d, kit.l

    variables = ([orig(j, p) for j in range(n) for p in range(3)]
                 + [const(j, t, x) for j in range(n) for t in range(r1) for x in range(d_size)]
                 + [aux1(i, j, t) for i in range(d) for j in range(n) for t in range(r1)]
                 + [aux2(i, j, t, s) for i in range(l) for j in range(n)
                    for t in range(r1) for s in range(r2)])

    rank = {}  # constraint index -> its position among those at its part-0 row
    for j, cis in incident.items():
        for i, ci in enumerate(cis):
            rank[ci] = (j, i)

    constraints: List[Constraint] = []
    blocks: List[Block] = []
    for ci, c in enumerate(inst.constraints):
        b_idx = int(c.relation.removeprefix("sum"))
        j, i = rank[ci]
        cons, var_map = qc_block(kit, b_idx, c.scope, j, i)
        blocks.append(Block("constraint", ci, len(constraints), len(constraints) + len(cons), var_map))
        constraints.extend(cons)

    edge_rank: Dict[Tuple[int, int], int] = {}  # (j,t) -> edges seen at the part-z vertex
    for g_idx, edge in enumerate(kit.graph.edges()):
        row_z = next(row for row, x in edge if x == kit.z)
        j, t = _row_to_jt(row_z, r1)
        i = edge_rank.get((j, t), 0)
        edge_rank[(j, t)] = i + 1
        cons, var_map = qv_block(kit, edge, i, j, t)
        blocks.append(Block("vertex", g_idx, len(constraints), len(constraints) + len(cons), var_map))
        constraints.extend(cons)

    out = Instance.make(kit.structure, variables, constraints, strict=False)
    return TransformOutput(out, tuple(blocks), kit)


# ---------------------------------------------------------------------------
# Completeness witness and soundness pullback


def completeness_witness(sample: PairSample, kit: ReductionKit,
                         out: Optional[TransformOutput] = None) -> Dict[Var, int]:
    """A value-1 assignment of the transformed YES instance: originals get the
    smallest encoding of their planted value, Const(j,t,x) gets x, gadget
    secondaries get the lexicographically smallest extensions, unused
    auxiliaries get 0."""
    if out is None:
        out = transform(sample.i_yes, kit)
    inv: Dict[int, int] = {}
    for x in kit.dprime:
        inv.setdefault(kit.phi[x], x)
    assignment = {v: 0 for v in out.instance.variables}
    for v in sample.i_yes.variables:
        assignment[v] = inv[sample.planted[v]]
    for v in out.instance.variables:
        if v.tag == "const":
            assignment[v] = v.parts[2]
    cache: Dict[tuple, Dict[Var, int]] = {}
    for block in out.blocks:
        var_map = dict(block.var_map)
        if block.kind == "constraint":
            ci = block.source
            b_idx = int(sample.i_yes.constraints[ci].relation.removeprefix("sum"))
            g_inst, primaries = kit.gadgets[b_idx]
            pin = {p: assignment[var_map[p]] for p in primaries}
            key = ("sum", b_idx, tuple(sorted(pin.items())))
        else:
            g_inst = kit.end.instance
            primaries = kit.end.primaries
            pin = {p: assignment[var_map[p]] for p in primaries}
            key = ("end", tuple(sorted(pin.items())))
        if key not in cache:
            res = solve(g_inst, pin)
            if not res.sat:
                raise ValueError(f"gadget lacks the needed extension for {key}; kit is broken")
            cache[key] = res.witness
        witness = cache[key]
        for gv, tv in var_map.items():
            if gv not in pin:
                assignment[tv] = witness[gv]
    return assignment


def pullback_assignment(tilde: Dict[Var, int], kit: ReductionKit,
                        psi: Operation) -> Dict[Var, int]:
    """Decode an assignment of the transformed instance back to group values
    on the original variables: undo the endomorphism, apply the encoding map
    where defined, and default to the group identity elsewhere."""
    if not psi.is_permutation():
        raise ValueError("pullback needs a bijective endomorphism")
    inv = [0] * psi.domain_size
    for x, y in enumerate(psi.table):
        inv[y] = x
    out = {}
    for v, val in tilde.items():
        if v.tag != "orig":
            continue
        y = inv[val]
        out[v] = kit.phi[y] if kit.phi[y] is not None else 0
    return out


def recover_endomorphism(tilde: Dict[Var, int], kit: ReductionKit) -> Operation:
    """Read the likely endomorphism off the Const block: per domain element x,
    the majority value of the Const(.,.,x) variables (permutation-alignment
    argmax)."""
    rows = kit.r1 * kit.n
    d = kit.domain_size
    proxy = {orig(j * kit.r1 + t, x): tilde[const(j, t, x)]
             for j in range(kit.n) for t in range(kit.r1) for x in range(d)}
    alignment = perm_align(proxy, rows, d)
    return Operation(d, 1, alignment.mapping)


# ---------------------------------------------------------------------------
# Audit


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    issues: tuple
    variable_count: int
    constraint_count: int
    constraint_bounds: tuple   # (lower, upper)
    degree_max: tuple          # ((tag, observed max, bound), ...)
    beta: int
    d_prime: int
    alpha: Fraction
    bd_n: int


def audit(out: TransformOutput) -> AuditReport:
    """Check every structural invariant of a transform output and report the
    bounded-degree model parameters it certifies."""
    from .instances import degrees
    from .oracle import bdstar_check
    kit = out.kit
    n, r1, r2, d, l = kit.n, kit.r1, kit.r2, kit.d, kit.l
    beta = kit.beta()
    d_prime = kit.d_prime()
    alpha = kit.alpha()
    issues = []
    nvars = len(out.instance.variables)
    if nvars != beta * n:
        issues.append(f"variable count {nvars} != beta*n = {beta * n}")
    m = out.instance.num_constraints()
    lower, upper = d * n + l * r1 * n, (d + l * r2) * r1 * n
    if not (lower <= m <= upper):
        issues.append(f"constraint count {m} outside [{lower}, {upper}]")
    cursor = 0
    for block in out.blocks:
        if block.start != cursor or block.end < block.start:
            issues.append(f"block over source {block.source} breaks the partition")
            break
        cursor = block.end
    else:
        if cursor != m:
            issues.append("blocks do not cover the constraint list")
    degs = degrees(out.instance)
    bounds = {"orig": d * r1, "const": d * r1 + l * r2, "aux1": r1, "aux2": r2}
    observed = {tag: 0 for tag in bounds}
    for v, deg in degs.items():
        observed[v.tag] = max(observed[v.tag], deg)
        if deg > bounds[v.tag]:
            issues.append(f"{v} has degree {deg} > {bounds[v.tag]}")
    ok_bd, bd_issues = bdstar_check(out.instance, d_prime, alpha, beta * n)
    issues.extend(bd_issues)
    degree_max = tuple((tag, observed[tag], bounds[tag]) for tag in sorted(bounds))
    return AuditReport(not issues, tuple(issues), nvars, m, (lower, upper),
                       degree_max, beta, d_prime, alpha, beta * n)


# ---------------------------------------------------------------------------
# JSON


def matching_to_json(m: Matching) -> dict:
    return {"parts": m.parts, "n": m.n, "perms": [list(p) for p in m.perms]}


def matching_from_json(obj: dict) -> Matching:
    return Matching(obj["parts"], obj["n"], tuple(tuple(p) for p in obj["perms"]))


def hypergraph_to_json(h: Hypergraph) -> dict:
    return {"domain_size": h.parts, "n": h.n,
            "matchings": [[list(p) for p in m.perms] for m in h.matchings]}


def hypergraph_from_json(obj: dict) -> Hypergraph:
    return Hypergraph(tuple(Matching(obj["domain_size"], obj["n"], tuple(tuple(p) for p in perms))
                            for perms in obj["matchings"]))


def pair_to_json(sample: PairSample) -> dict:
    from .instances import assignment_to_json
    return {
        "group": list(sample.group.moduli),
        "n": sample.n, "d": sample.d, "seed": sample.seed,
        "matchings": [matching_to_json(m) for m in sample.matchings],
        "planted": assignment_to_json(sample.planted),
        "i_yes": instance_to_json(sample.i_yes),
        "i_no": instance_to_json(sample.i_no),
    }


def pair_from_json(obj: dict) -> PairSample:
    from .instances import assignment_from_json
    return PairSample(GroupSpec(tuple(obj["group"])), obj["n"], obj["d"], obj["seed"],
                      tuple(matching_from_json(m) for m in obj["matchings"]),
                      assignment_from_json(obj["planted"]),
                      instance_from_json(obj["i_yes"]),
                      instance_from_json(obj["i_no"]))


def kit_to_json(kit: ReductionKit) -> dict:
    from .instances import structure_to_json, var_to_json
    return {
        "structure": structure_to_json(kit.structure),
        "group": list(kit.group.moduli),
        "dprime": list(kit.dprime),
        "phi": list(kit.phi),
        "gadgets": [{"instance": instance_to_json(inst),
                     "primaries": [var_to_json(v) for v in primaries]}
                    for inst, primaries in kit.gadgets],
        "end": {"instance": instance_to_json(kit.end.instance),
                "primaries": [var_to_json(v) for v in kit.end.primaries],
                "target": {"domain_size": kit.end.target.domain_size,
                           "arity": kit.end.target.arity,
                           "table": "".join(str(b) for b in kit.end.target.table)},
                "mode": kit.end.mode},
        "r1": kit.r1, "r2": kit.r2, "d": kit.d, "l": kit.l,
        "graph": hypergraph_to_json(kit.graph), "n": kit.n, "z": kit.z,
    }


def kit_from_json(obj: dict) -> ReductionKit:
    from .instances import structure_from_json, var_from_json
    e = obj["end"]
    end = GadgetInstance(instance_from_json(e["instance"]),
                         tuple(var_from_json(v) for v in e["primaries"]),
                         Relation(e["target"]["domain_size"], e["target"]["arity"],
                                  tuple(int(ch) for ch in e["target"]["table"])),
                         e["mode"])
    gadgets = tuple((instance_from_json(g["instance"]),
                     tuple(var_from_json(v) for v in g["primaries"]))
                    for g in obj["gadgets"])
    return ReductionKit(structure_from_json(obj["structure"]), GroupSpec(tuple(obj["group"])),
                        tuple(obj["dprime"]), tuple(obj["phi"]), gadgets, end,
                        obj["r1"], obj["r2"], obj["d"], obj["l"],
                        hypergraph_from_json(obj["graph"]), obj["n"], obj["z"])
