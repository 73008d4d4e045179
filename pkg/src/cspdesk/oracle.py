"""Bounded-degree query oracle, model checks, and the query-forwarding adapter.

A session answers queries "give me a constraint involving v": each answer is a
previously unrevealed constraint (a reveal exposes the whole constraint, so it
counts as seen at every endpoint), and an exhausted endpoint answers bottom
(None).  The adapter serves such queries about a transformed instance while
issuing at most one query to the source instance per incoming query, without
ever materializing the parts of the source it was not asked about.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from .instances import Constraint, Instance, Var, orig
from .reduction import ReductionKit, TransformOutput, qc_block, qv_block, _row_to_jt
from .rng import SplitMix64

POLICIES = ("fixed-index", "seeded-random")


@dataclass(frozen=True)
class TranscriptEntry:
    variable: Var
    index: Optional[int]              # global constraint index, None for bottom
    constraint: Optional[Constraint]


class OracleSession:
    """Mutable query session over a fixed instance."""

    def __init__(self, instance: Instance, policy="fixed-index", seed: int = 0):
        if not (policy in POLICIES or callable(policy)):
            raise ValueError(f"unknown policy {policy!r}")
        self.instance = instance
        self.policy = policy
        self.seed = seed
        self._rng = SplitMix64(seed)
        self._incident: Dict[Var, list] = {v: [] for v in instance.variables}
        for ci, c in enumerate(instance.constraints):
            for v in set(c.scope):
                self._incident[v].append(ci)
        self.seen: set = set()
        self.transcript: List[TranscriptEntry] = []

    def query(self, v: Var):
        """Returns (index, Constraint) or None when v is exhausted."""
        if v not in self._incident:
            raise KeyError(f"unknown variable {v}")
        candidates = [ci for ci in self._incident[v] if ci not in self.seen]
        if not candidates:
            self.transcript.append(TranscriptEntry(v, None, None))
            return None
        if self.policy == "fixed-index":
            ci = candidates[0]
        elif self.policy == "seeded-random":
            ci = candidates[self._rng.randrange(len(candidates))]
        else:
            ci = self.policy(self, v, candidates)
            if ci not in candidates:
                raise ValueError("caller-supplied policy returned a non-candidate")
        self.seen.add(ci)
        c = self.instance.constraints[ci]
        self.transcript.append(TranscriptEntry(v, ci, c))
        return ci, c

    def fork(self) -> "OracleSession":
        """Independent copy sharing no mutable state (for search over query
        sequences)."""
        twin = OracleSession.__new__(OracleSession)
        twin.instance = self.instance
        twin.policy = self.policy
        twin.seed = self.seed
        twin._rng = SplitMix64(0)
        twin._rng._state = self._rng._state
        twin._incident = self._incident  # immutable after construction
        twin.seen = set(self.seen)
        twin.transcript = list(self.transcript)
        return twin


def open_session(instance: Instance, policy="fixed-index", seed: int = 0) -> OracleSession:
    return OracleSession(instance, policy, seed)


def bdstar_check(inst: Instance, d: int, alpha, n: int) -> Tuple[bool, list]:
    """Model membership: max degree <= d, exactly n variables, and at least
    alpha*n constraints."""
    from .instances import max_degree
    issues = []
    md = max_degree(inst)
    if md > d:
        issues.append(f"max degree {md} > {d}")
    if len(inst.variables) != n:
        issues.append(f"{len(inst.variables)} variables, want {n}")
    if inst.num_constraints() < Fraction(alpha) * n:
        issues.append(f"{inst.num_constraints()} constraints < alpha*n = {Fraction(alpha) * n}")
    return not issues, issues


class AdapterSession:
    """Answers fixed-index queries about the transform of a source instance,
    holding only a query session on the source.

    Endomorphism-gadget blocks depend on the kit alone, so auxiliary variables
    of that layer cost nothing.  A query anywhere else forwards at most one
    source query to the variable's proxy (the block owner's part-0 variable,
    or the original variable itself), which is exactly enough to materialize
    the earliest still-unknown gadget block there.

    Requires the source to have the paired-sampler shape (one variable per
    part per constraint, one constraint per round per variable, round-major
    constraint order) and all sum gadgets to share one stripped constraint
    count; both hold for every self-kit on paired samples.
    """

    def __init__(self, underlying: OracleSession, kit: ReductionKit):
        if underlying.policy != "fixed-index":
            raise ValueError("adapter supports the fixed-index policy only")
        self.underlying = underlying
        self.kit = kit
        self.n, self.d = kit.n, kit.d
        lens = set()
        from .gadgets import strip_constants
        for inst, _ in kit.gadgets:
            stripped, _ = strip_constants(inst)
            lens.add(len(stripped.constraints))
        if len(lens) != 1:
            raise ValueError("adapter needs a uniform sum-gadget constraint count")
        self.q_c_len = lens.pop()
        self.q_c_total = self.d * self.n * self.q_c_len

        # The endomorphism layer is known in full up front.
        self._qv_constraints: List[Constraint] = []
        edge_rank: Dict[Tuple[int, int], int] = {}
        for edge in kit.graph.edges():
            row_z = next(row for row, x in edge if x == kit.z)
            j, t = _row_to_jt(row_z, kit.r1)
            i = edge_rank.get((j, t), 0)
            edge_rank[(j, t)] = i + 1
            cons, _ = qv_block(kit, edge, i, j, t)
            self._qv_constraints.extend(cons)
        self._qv_slots: Dict[Var, list] = {}
        for k, c in enumerate(self._qv_constraints):
            gi = self.q_c_total + k
            for v in set(c.scope):
                self._qv_slots.setdefault(v, []).append((gi, c))

        # ci -> list of (global index, Constraint) for that sum-gadget block.
        self.materialized: Dict[int, list] = {}
        self.seen: set = set()
        self.transcript: List[TranscriptEntry] = []
        self.underlying_queries = 0

    def fork(self) -> "AdapterSession":
        twin = AdapterSession.__new__(AdapterSession)
        twin.underlying = self.underlying.fork()
        twin.kit = self.kit
        twin.n, twin.d = self.n, self.d
        twin.q_c_len = self.q_c_len
        twin.q_c_total = self.q_c_total
        twin._qv_constraints = self._qv_constraints
        twin._qv_slots = self._qv_slots
        twin.materialized = dict(self.materialized)
        twin.seen = set(self.seen)
        twin.transcript = list(self.transcript)
        twin.underlying_queries = self.underlying_queries
        return twin

    def _materialize(self, ci: int, c: Constraint) -> None:
        if ci in self.materialized:
            return
        b_idx = int(c.relation.removeprefix("sum"))
        j = c.scope[0].parts[0]
        i = ci // self.n  # round-major constraint order
        cons, _ = qc_block(self.kit, b_idx, c.scope, j, i)
        start = ci * self.q_c_len
        self.materialized[ci] = [(start + k, cc) for k, cc in enumerate(cons)]

    def _known_count_at(self, proxy: Var) -> int:
        if proxy.parts[1] == 0:
            j = proxy.parts[0]
            return sum(1 for ci in self.materialized
                       if self.underlying.instance.constraints[ci].scope[0].parts[0] == j)
        return sum(1 for ci in self.materialized
                   if proxy in self.underlying.instance.constraints[ci].scope)

    def query(self, v: Var):
        if v.tag == "orig":
            proxy = v
        elif v.tag in ("const", "aux1"):
            proxy = orig(v.parts[1] if v.tag == "aux1" else v.parts[0], 0)
        else:
            proxy = None  # aux2: the endomorphism layer only
        if proxy is not None and self._known_count_at(proxy) < self.d:
            got = self.underlying.query(proxy)
            self.underlying_queries += 1
            if got is not None:
                self._materialize(*got)
        slots = []
        for block in self.materialized.values():
            slots.extend(s for s in block if v in s[1].scope)
        slots.extend(self._qv_slots.get(v, ()))
        slots.sort(key=lambda s: s[0])
        for gi, c in slots:
            if gi not in self.seen:
                self.seen.add(gi)
                self.transcript.append(TranscriptEntry(v, gi, c))
                return gi, c
        self.transcript.append(TranscriptEntry(v, None, None))
        return None


def adapter_session(underlying: OracleSession, kit: ReductionKit) -> AdapterSession:
    return AdapterSession(underlying, kit)
