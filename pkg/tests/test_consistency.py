import pytest

from cspdesk.algebra import Relation, Structure, coloring_structure
from cspdesk.consistency import (WidthParams, random_instance, width_decide,
                                 width_error_hunt)
from cspdesk.instances import Constraint, Instance, plain, value
from cspdesk.rng import SplitMix64
from cspdesk.solver import solve

TWO_COL = coloring_structure(2)
THREE_COL = coloring_structure(3)
EQ_NEQ = Structure.make(2, [("eq", Relation(2, 2, (1, 0, 0, 1))),
                            ("neq", Relation(2, 2, (0, 1, 1, 0)))])


def test_params_validated():
    with pytest.raises(ValueError):
        WidthParams(3, 2)
    with pytest.raises(ValueError):
        WidthParams(0, 2)


def test_direct_contradiction_detected():
    vs = [plain(0), plain(1), plain(2)]
    cons = [Constraint("eq", (plain(0), plain(1))),
            Constraint("neq", (plain(0), plain(1)))]
    inst = Instance.make(EQ_NEQ, vs, cons)
    assert width_decide(inst, WidthParams(1, 2)) == "unsatisfiable"


def test_propagated_contradiction_detected():
    # An equality chain closed by a disequality: no single 3-subset sees the
    # contradiction, so detection needs the pairwise fixpoint.
    vs = [plain(i) for i in range(4)]
    cons = [Constraint("eq", (plain(0), plain(1))),
            Constraint("eq", (plain(1), plain(2))),
            Constraint("eq", (plain(2), plain(3))),
            Constraint("neq", (plain(0), plain(3)))]
    inst = Instance.make(EQ_NEQ, vs, cons)
    assert width_decide(inst, WidthParams(2, 3)) == "unsatisfiable"


def test_satisfiable_instances_pass():
    vs = [plain(i) for i in range(4)]
    cons = [Constraint("neq", (plain(i), plain(i + 1))) for i in range(3)]
    inst = Instance.make(TWO_COL, vs, cons)
    assert width_decide(inst, WidthParams(1, 2)) == "satisfiable"


def test_four_clique_three_colors_is_a_width_1_2_error():
    # The classic miss: unsatisfiable, but width-(1,2) cannot see it.
    vs = [plain(i) for i in range(4)]
    cons = [Constraint("neq", (plain(i), plain(j)))
            for i in range(4) for j in range(i + 1, 4)]
    inst = Instance.make(THREE_COL, vs, cons)
    assert not solve(inst).sat
    assert width_decide(inst, WidthParams(1, 2)) == "satisfiable"


def test_state_shrinks_monotonically():
    snapshots = []
    vs = [plain(i) for i in range(4)]
    cons = [Constraint("eq", (plain(0), plain(1))),
            Constraint("eq", (plain(1), plain(2))),
            Constraint("neq", (plain(0), plain(2)))]
    inst = Instance.make(EQ_NEQ, vs, cons)
    width_decide(inst, WidthParams(2, 3), on_sweep=snapshots.append)
    for earlier, later in zip(snapshots, snapshots[1:]):
        for key in earlier:
            assert later[key] <= earlier[key]


def test_one_sidedness_on_random_sample():
    rng = SplitMix64(17)
    for _ in range(60):
        n = 2 + rng.randrange(5)
        inst = random_instance(THREE_COL, n, 1 + rng.randrange(2 * n), rng)
        if width_decide(inst, WidthParams(1, 2)) == "unsatisfiable":
            assert not solve(inst).sat


def test_random_instance_well_formed():
    rng = SplitMix64(23)
    inst = random_instance(TWO_COL, 5, 8, rng)
    assert len(inst.variables) == 5
    for c in inst.constraints:
        assert len(set(c.scope)) == len(c.scope)


def test_error_hunt_reports_are_verified():
    report = width_error_hunt(THREE_COL, WidthParams(1, 2), 8, 200, seed=5)
    assert report
    for inst in report:
        assert width_decide(inst, WidthParams(1, 2)) == "satisfiable"
        assert not solve(inst).sat


def test_error_hunt_can_come_up_empty():
    # Every instance of the OR template is satisfiable, so no errors exist.
    or_template = Structure.make(2, [("or", Relation(2, 2, (0, 1, 1, 1)))])
    assert width_error_hunt(or_template, WidthParams(1, 2), 5, 50, seed=1) == []
