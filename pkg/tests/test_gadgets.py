import itertools

import pytest

from cspdesk.algebra import (GroupSpec, Operation, Relation, Structure,
                             coloring_structure, constant_relations,
                             end_relation, is_core, is_polymorphism, neq_relation,
                             preserves, three_sum_structure, with_constants)
from cspdesk.gadgets import (HomEquivPair, brute_force_clone_check,
                             check_hom_equiv, clone_membership, core_reduce,
                             end_gadget, geiger_construct, is_homomorphism,
                             pullback, pushforward, strip_constants, translate,
                             verify_simulation)
from cspdesk.instances import Constraint, Instance, plain
from cspdesk.solver import enumerate_projections

TWO_COL = coloring_structure(2)


def test_geiger_simulates_generated_relation():
    # Disequality generates itself.
    gadget = geiger_construct(TWO_COL, neq_relation(2))
    assert verify_simulation(gadget) is None
    assert len(gadget.primaries) == 2


def test_geiger_rejects_redundant_target():
    with pytest.raises(ValueError):
        geiger_construct(TWO_COL, Relation.from_tuples(2, 2, [(0, 0)]))
    with pytest.raises(ValueError):
        geiger_construct(TWO_COL, Relation.from_tuples(2, 2, []))


def test_geiger_detects_ungenerated_relation():
    # The singleton {0} is not generated: negation preserves disequality
    # but moves 0.
    target = Relation.from_tuples(2, 1, [(0,)])
    answer = clone_membership(TWO_COL, target)
    assert not answer.in_clone
    f = answer.counterexample
    assert is_polymorphism(f, TWO_COL) and not preserves(f, target)


def test_clone_membership_positive():
    answer = clone_membership(TWO_COL, neq_relation(2))
    assert answer.in_clone and answer.counterexample is None


def test_clone_membership_agrees_with_brute_force_sample():
    rels = [Relation(2, 2, t) for t in itertools.product((0, 1), repeat=4)]
    targets = [r for r in rels if 1 <= r.weight() <= 3
               and any(t[0] != t[1] for t in r.satisfying())]
    for gamma in rels[:8]:
        struct = Structure.make(2, [("g", gamma)])
        for target in targets[:4]:
            assert clone_membership(struct, target).in_clone == \
                brute_force_clone_check(struct, target)


def test_end_gadget_two_coloring():
    gadget, r2 = end_gadget(TWO_COL)
    assert verify_simulation(gadget) is None
    projected = enumerate_projections(gadget.instance, gadget.primaries)
    assert projected == {(0, 1), (1, 0)}
    assert r2 >= gadget.instance.num_constraints()


def test_end_gadget_group_template_extended_mode():
    struct = three_sum_structure(GroupSpec.cyclic(2))
    gadget, r2 = end_gadget(struct)
    assert gadget.mode == "extended"
    assert verify_simulation(gadget) is None
    assert enumerate_projections(gadget.instance, gadget.primaries) == {(0, 1)}
    assert r2 == max(gadget.secondary_count(), gadget.instance.num_constraints())


def test_strip_constants():
    struct = with_constants(TWO_COL)
    vs = [plain(0), plain(1)]
    cons = [Constraint("neq", (plain(0), plain(1))), Constraint("const1", (plain(1),))]
    inst = Instance.make(struct, vs, cons)
    stripped, pins = strip_constants(inst)
    assert stripped.num_constraints() == 1
    assert pins == [(plain(1), 1)]


def test_is_homomorphism():
    assert is_homomorphism((1, 0), TWO_COL, TWO_COL)
    assert not is_homomorphism((0, 0), TWO_COL, TWO_COL)


def test_core_reduce_collapses_reflexive_edge():
    # A structure with a full binary relation retracts to a point.
    full = Structure.make(2, [("r", Relation(2, 2, (1, 1, 1, 1)))])
    core, pair = core_reduce(full)
    assert core.domain.size == 1
    assert is_core(core)
    assert check_hom_equiv(pair)


def test_core_reduce_fixes_cores():
    core, pair = core_reduce(TWO_COL)
    assert core.domain.size == 2
    assert pair.to2 == (0, 1) and pair.to1 == (0, 1)


def test_translate_and_pullback_roundtrip():
    full = Structure.make(2, [("neq", Relation(2, 2, (1, 1, 1, 1)))])
    core, pair = core_reduce(full)
    vs = [plain(0), plain(1)]
    inst = Instance.make(full, vs, [Constraint("neq", (plain(0), plain(1)))])
    core_inst = translate(inst, pair)
    assert core_inst.structure == core
    down = pushforward({plain(0): 1, plain(1): 0}, pair)
    up = pullback(down, pair)
    assert set(up.values()) <= set(range(2))


def test_hom_equiv_pair_validation():
    bad = HomEquivPair(TWO_COL, TWO_COL, (0, 0), (0, 1))
    assert not check_hom_equiv(bad)
