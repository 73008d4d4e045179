from fractions import Fraction

import pytest

from cspdesk.algebra import GroupSpec, coloring_structure, three_sum_structure
from cspdesk.instances import (Constraint, Instance, ValidationError, Var,
                               assignment_from_json, assignment_to_json, aux1,
                               aux2, const, decode, degree, degrees, encode,
                               max_degree, orig, plain, sub_instance, validate,
                               value)

TWO_COL = coloring_structure(2)


def triangle():
    vs = [plain(i) for i in range(3)]
    cons = [Constraint("neq", (vs[i], vs[(i + 1) % 3])) for i in range(3)]
    return Instance.make(TWO_COL, vs, cons)


def test_var_ordering_and_tags():
    assert plain(1) < orig(0, 0) < const(0, 0, 0) < aux1(0, 0, 0) < aux2(0, 0, 0, 0)
    with pytest.raises(ValueError):
        Var("plain", (1, 2))
    with pytest.raises(ValueError):
        Var("nope", (1,))


def test_make_sorts_and_dedups_variables():
    inst = Instance.make(TWO_COL, [plain(2), plain(0), plain(2)], [])
    assert inst.variables == (plain(0), plain(2))


def test_validate_catches_problems():
    bad = Instance(TWO_COL, (plain(0),), (Constraint("neq", (plain(0), plain(1))),))
    assert any("not in variable set" in p for p in validate(bad))
    bad = Instance(TWO_COL, (plain(0),), (Constraint("eq", (plain(0),)),))
    assert any("unknown relation" in p for p in validate(bad))
    bad = Instance(TWO_COL, (plain(0),), (Constraint("neq", (plain(0),)),))
    assert any("scope length" in p for p in validate(bad))
    with pytest.raises(ValidationError):
        Instance.make(TWO_COL, [plain(0)], [Constraint("neq", (plain(0), plain(0)))])
    # The same repetition is allowed in non-strict mode.
    Instance.make(TWO_COL, [plain(0)], [Constraint("neq", (plain(0), plain(0)))], strict=False)


def test_value_exact_fraction():
    inst = triangle()
    assert value(inst, {plain(0): 0, plain(1): 1, plain(2): 0}) == Fraction(2, 3)
    assert value(inst, {plain(0): 0, plain(1): 0, plain(2): 0}) == 0
    with pytest.raises(ValueError):
        value(inst, {plain(0): 0, plain(1): 1})
    with pytest.raises(ValueError):
        value(Instance.make(TWO_COL, [plain(0)], []), {plain(0): 0})


def test_degrees():
    inst = triangle()
    assert degrees(inst) == {plain(0): 2, plain(1): 2, plain(2): 2}
    assert degree(inst, plain(0)) == 2
    assert max_degree(inst) == 2


def test_sub_instance():
    inst = triangle()
    sub = sub_instance(inst, [plain(0), plain(1)])
    assert sub.num_constraints() == 1
    assert sub.variables == (plain(0), plain(1))


def test_json_roundtrip():
    inst = triangle()
    again = decode(encode(inst))
    assert again == inst
    assert encode(again) == encode(inst)


def test_json_roundtrip_group_instance():
    struct = three_sum_structure(GroupSpec.cyclic(3))
    vs = [orig(j, p) for j in range(2) for p in range(3)]
    cons = [Constraint("sum2", (orig(0, 0), orig(1, 1), orig(0, 2)))]
    inst = Instance.make(struct, vs, cons)
    assert decode(encode(inst)) == inst


def test_assignment_json_roundtrip():
    a = {plain(0): 1, orig(2, 1): 0, aux2(0, 1, 0, 3): 1}
    assert assignment_from_json(assignment_to_json(a)) == a
