"""Experiment harness: tester acceptance rates, YES/NO advantage, the exact
sub-instance indistinguishability comparison, and value concentration.

Probabilities that admit exhaustive enumeration are computed exactly as
fractions; sampled rates carry two-sided exact (Clopper-Pearson) 95%
confidence bounds, reported but never silently applied.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from scipy.stats import beta as beta_dist

from .algebra import GroupSpec, three_sum_structure
from .instances import Instance, Var, orig, value
from .oracle import OracleSession, open_session
from .reduction import sample_pair
from .rng import SplitMix64
from .solver import BudgetExceededError, max_value

SUBINSTANCE_WORLD_BUDGET = 10 ** 6


def clopper_pearson(k: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Two-sided exact binomial confidence interval for k successes in n."""
    if not (0 <= k <= n) or n < 1:
        raise ValueError("need 0 <= k <= n, n >= 1")
    tail = (1 - confidence) / 2
    low = 0.0 if k == 0 else float(beta_dist.ppf(tail, k, n - k + 1))
    high = 1.0 if k == n else float(beta_dist.ppf(1 - tail, k + 1, n - k))
    return low, high


class BudgetedSession:
    """Hard-stops a session at a query budget."""

    def __init__(self, session: OracleSession, budget: int):
        self.session = session
        self.budget = budget
        self.used = 0

    def query(self, v: Var):
        if self.used >= self.budget:
            raise BudgetExceededError(f"query budget {self.budget} exhausted")
        self.used += 1
        return self.session.query(v)

    @property
    def instance(self) -> Instance:
        return self.session.instance


@dataclass(frozen=True)
class ExperimentReport:
    trials: int
    accepts: int
    rate: Fraction
    ci_low: float
    ci_high: float
    budget: int
    queries: tuple      # queries used per trial
    seed: int

    def radius(self) -> float:
        return max(float(self.rate) - self.ci_low, self.ci_high - float(self.rate))


def run_tester(tester: Callable, sampler: Callable, trials: int, budget: int,
               seed: int) -> ExperimentReport:
    """tester(BudgetedSession) -> accept?; sampler(seed) -> Instance.  Each
    trial gets its own derived seed for sampling and oracle ordering."""
    rng = SplitMix64(seed)
    accepts = 0
    queries = []
    for _ in range(trials):
        trial_seed = rng.next_u64()
        inst = sampler(trial_seed)
        session = BudgetedSession(open_session(inst, "fixed-index", trial_seed), budget)
        if tester(session):
            accepts += 1
        queries.append(session.used)
    low, high = clopper_pearson(accepts, trials)
    return ExperimentReport(trials, accepts, Fraction(accepts, trials), low, high,
                            budget, tuple(queries), seed)


@dataclass(frozen=True)
class AdvantageReport:
    yes: ExperimentReport
    no: ExperimentReport
    gap: Fraction
    radius: float


def advantage(tester: Callable, yes_sampler: Callable, no_sampler: Callable,
              trials: int, budget: int, seed: int) -> AdvantageReport:
    rng = SplitMix64(seed)
    yes = run_tester(tester, yes_sampler, trials, budget, rng.next_u64())
    no = run_tester(tester, no_sampler, trials, budget, rng.next_u64())
    return AdvantageReport(yes, no, yes.rate - no.rate, yes.radius() + no.radius())


def full_read_tester(session: BudgetedSession) -> bool:
    """Reference tester: reveal as much as the budget allows (round-robin over
    variables), then accept iff the revealed constraints are satisfiable."""
    from .solver import solve
    inst = session.instance
    revealed = {}
    exhausted = set()
    try:
        while len(exhausted) < len(inst.variables):
            for v in inst.variables:
                if v in exhausted:
                    continue
                got = session.query(v)
                if got is None:
                    exhausted.add(v)
                else:
                    revealed[got[0]] = got[1]
    except BudgetExceededError:
        pass
    partial = Instance(inst.structure, inst.variables,
                       tuple(revealed[ci] for ci in sorted(revealed)), inst.strict)
    return solve(partial).sat


# ---------------------------------------------------------------------------
# Exact sub-instance comparison


def subinstance_compare(group: GroupSpec, n: int, d: int, subset, matchings) -> Fraction:
    """Exact total-variation distance between the subset-induced sub-instances
    of the YES and NO samplers, conditioned on the given matchings.  Both
    distributions live on right-hand-side vectors of the induced edges: YES
    integrates out the planted assignment, NO is uniform."""
    subset = {v if isinstance(v, Var) else orig(*v) for v in subset}
    g = group.order
    elems = group.elements()
    induced = []
    for m in matchings:
        for e in m.edges():
            scope = tuple(orig(row, part) for (row, part) in e)
            if all(v in subset for v in scope):
                induced.append(scope)
    e_count = len(induced)
    if e_count == 0:
        return Fraction(0)
    covered = sorted({v for scope in induced for v in scope})
    if g ** len(covered) > SUBINSTANCE_WORLD_BUDGET or g ** e_count > SUBINSTANCE_WORLD_BUDGET:
        raise ValueError("enumeration budget exceeded")
    counts: Dict[tuple, int] = {}
    for values in itertools.product(range(g), repeat=len(covered)):
        tau = dict(zip(covered, values))
        w = tuple(group.element_index(group.add(*(elems[tau[v]] for v in scope)))
                  for scope in induced)
        counts[w] = counts.get(w, 0) + 1
    yes_total = g ** len(covered)
    no_prob = Fraction(1, g ** e_count)
    tv = Fraction(0)
    for w in itertools.product(range(g), repeat=e_count):
        tv += abs(Fraction(counts.get(w, 0), yes_total) - no_prob)
    return tv / 2


# ---------------------------------------------------------------------------
# Value statistics of the NO distribution


def no_mean_value(group: GroupSpec, n: int, d: int, seed: int,
                  sigma: Optional[Dict[Var, int]] = None) -> Fraction:
    """Exact mean of value(I_no, sigma) over all right-hand-side worlds, for
    the matchings drawn by the given seed.  Default sigma is all-zero."""
    g = group.order
    if g ** (d * n) > SUBINSTANCE_WORLD_BUDGET:
        raise ValueError("enumeration budget exceeded")
    sample = sample_pair(group, n, d, seed)
    if sigma is None:
        sigma = {v: 0 for v in sample.i_no.variables}
    struct = sample.i_no.structure
    scopes = [c.scope for c in sample.i_no.constraints]
    total = Fraction(0)
    for bs in itertools.product(range(g), repeat=len(scopes)):
        sat = sum(1 for b, scope in zip(bs, scopes)
                  if struct.relation(f"sum{b}").eval(tuple(sigma[v] for v in scope)))
        total += Fraction(sat, len(scopes))
    return total / g ** len(scopes)


@dataclass(frozen=True)
class ConcentrationReport:
    group: tuple
    n: int
    d: int
    seed: int
    rows: tuple        # (trial, trial seed, exact optimum value)
    quantiles: tuple   # ((label, value), ...) for min/q25/median/q75/max

    def csv_lines(self) -> List[str]:
        lines = ["trial,seed,value"]
        lines += [f"{t},{s},{v}" for t, s, v in self.rows]
        return lines


def value_concentration_experiment(group: GroupSpec, n: int, d: int, trials: int,
                                   seed: int) -> ConcentrationReport:
    """Exact optimum value of each of `trials` NO samples (small n only)."""
    rng = SplitMix64(seed)
    rows = []
    struct = three_sum_structure(group)
    for t in range(trials):
        trial_seed = rng.next_u64()
        sample = sample_pair(group, n, d, trial_seed, structure=struct)
        opt, _ = max_value(sample.i_no)
        rows.append((t, trial_seed, opt))
    ordered = sorted(v for _, _, v in rows)
    def q(p: Fraction):
        return ordered[min(len(ordered) - 1, int(p * (len(ordered) - 1)))]
    quantiles = (("min", ordered[0]), ("q25", q(Fraction(1, 4))),
                 ("median", q(Fraction(1, 2))), ("q75", q(Fraction(3, 4))),
                 ("max", ordered[-1]))
    return ConcentrationReport(tuple(group.moduli), n, d, seed, tuple(rows), quantiles)
