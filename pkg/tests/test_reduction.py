import dataclasses
import itertools
import json
from fractions import Fraction

import pytest

from cspdesk.algebra import GroupSpec, Operation, three_sum_structure
from cspdesk.instances import (Constraint, Instance, aux2, const, degrees,
                               orig, value)
from cspdesk.reduction import (audit, completeness_witness, dpair_shape_check,
                               encoded_sum_relation, kit_from_json, kit_to_json,
                               pair_from_json, pair_to_json, pullback_assignment,
                               recover_endomorphism, sample_pair, self_kit,
                               transform, verify_kit)
from cspdesk.solver import solve

Z2 = GroupSpec.cyclic(2)
Z3 = GroupSpec.cyclic(3)


def test_sample_pair_shape_and_completeness():
    s = sample_pair(Z2, 5, 3, seed=1)
    assert s.i_yes.num_constraints() == 15
    assert s.i_no.num_constraints() == 15
    assert set(degrees(s.i_yes).values()) == {3}
    assert value(s.i_yes, s.planted) == 1
    issues, incident = dpair_shape_check(s.i_yes, 3)
    assert not issues
    assert all(len(cis) == 3 for cis in incident.values())


def test_sample_pair_deterministic_json():
    a = json.dumps(pair_to_json(sample_pair(Z3, 3, 2, seed=8)), sort_keys=True)
    b = json.dumps(pair_to_json(sample_pair(Z3, 3, 2, seed=8)), sort_keys=True)
    assert a == b


def test_pair_json_roundtrip():
    s = sample_pair(Z2, 3, 2, seed=5)
    again = pair_from_json(pair_to_json(s))
    assert again == s


def test_no_instance_shares_scopes_with_yes():
    s = sample_pair(Z3, 4, 2, seed=2)
    for cy, cn in zip(s.i_yes.constraints, s.i_no.constraints):
        assert cy.scope == cn.scope


def test_self_kit_verifies():
    for group in (Z2, Z3):
        kit = self_kit(group, 2, 1, 1, seed=3)
        assert verify_kit(kit) == []
        assert kit.r1 == 1


def test_encoded_sum_relation_identity_encoding():
    kit = self_kit(Z3, 2, 1, 1, seed=3)
    for b in range(3):
        rel = encoded_sum_relation(kit, b)
        for t in itertools.product(range(3), repeat=3):
            assert rel.eval(t) == (1 if sum(t) % 3 == b else 0)


def test_verify_kit_catches_bad_phi():
    kit = self_kit(Z2, 2, 1, 1, seed=3)
    bad = dataclasses.replace(kit, dprime=(0,), phi=(0, None))
    issues = verify_kit(bad)
    assert any("surjective" in i for i in issues)


def test_verify_kit_catches_broken_gadget():
    kit = self_kit(Z2, 2, 1, 1, seed=3)
    # Swap the b=0 gadget for the b=1 constraint: misses (0,0,0).
    bad_gadgets = (kit.gadgets[1], kit.gadgets[1])
    bad = dataclasses.replace(kit, gadgets=bad_gadgets)
    issues = verify_kit(bad)
    assert any("sum gadget 0" in i for i in issues)


def test_transform_counts_and_degrees():
    kit = self_kit(Z2, 3, 2, 2, seed=4)
    s = sample_pair(Z2, 3, 2, seed=6)
    out = transform(s.i_yes, kit)
    beta = kit.beta()
    assert len(out.instance.variables) == beta * 3
    lower = kit.d * 3 + kit.l * kit.r1 * 3
    upper = (kit.d + kit.l * kit.r2) * kit.r1 * 3
    assert lower <= out.instance.num_constraints() <= upper
    report = audit(out)
    assert report.ok, report.issues
    assert report.d_prime == kit.d * kit.r1 + kit.l * kit.r2
    assert report.alpha == Fraction(kit.d + kit.l * kit.r1, beta)


def test_transform_deterministic():
    kit = self_kit(Z2, 2, 1, 1, seed=4)
    s = sample_pair(Z2, 2, 1, seed=6)
    assert transform(s.i_yes, kit) == transform(s.i_yes, kit)


def test_transform_rejects_bad_shape():
    kit = self_kit(Z2, 2, 2, 1, seed=4)
    s = sample_pair(Z2, 2, 1, seed=6)  # degree 1, kit expects 2
    with pytest.raises(ValueError):
        transform(s.i_yes, kit)


def test_completeness_witness_value_one():
    for group, seed in ((Z2, 0), (Z3, 1)):
        kit = self_kit(group, 2, 1, 1, seed=seed)
        s = sample_pair(group, 2, 1, seed=seed + 10)
        out = transform(s.i_yes, kit)
        witness = completeness_witness(s, kit, out)
        assert value(out.instance, witness) == 1
        # Const variables carry their value component.
        assert all(witness[v] == v.parts[2] for v in out.instance.variables
                   if v.tag == "const")


def test_pullback_identity_recovers_planted():
    kit = self_kit(Z2, 2, 2, 1, seed=2)
    s = sample_pair(Z2, 2, 2, seed=3)
    out = transform(s.i_yes, kit)
    witness = completeness_witness(s, kit, out)
    tau = pullback_assignment(witness, kit, Operation.identity(2))
    assert value(s.i_yes, tau) == 1
    assert tau == s.planted  # identity encoding


def test_pullback_requires_bijection():
    kit = self_kit(Z2, 2, 1, 1, seed=2)
    with pytest.raises(ValueError):
        pullback_assignment({}, kit, Operation(2, 1, (0, 0)))


def test_recover_endomorphism_from_solver_witness():
    kit = self_kit(Z2, 2, 1, 1, seed=2)
    s = sample_pair(Z2, 2, 1, seed=7)
    out = transform(s.i_yes, kit)
    res = solve(out.instance)
    assert res.sat
    psi = recover_endomorphism(res.witness, kit)
    assert psi.is_permutation()
    tau = pullback_assignment(res.witness, kit, psi)
    assert value(s.i_yes, tau) == 1


def test_unsat_source_transforms_unsat():
    # Two contradictory equations on the same triple.
    kit = self_kit(Z2, 1, 2, 1, seed=2)
    struct = three_sum_structure(Z2)
    vs = [orig(0, p) for p in range(3)]
    cons = [Constraint("sum0", tuple(vs)), Constraint("sum1", tuple(vs))]
    inst = Instance.make(struct, vs, cons)
    assert not solve(inst).sat
    out = transform(inst, kit)
    assert not solve(out.instance).sat


def test_audit_flags_tampering():
    kit = self_kit(Z2, 2, 1, 1, seed=4)
    s = sample_pair(Z2, 2, 1, seed=6)
    out = transform(s.i_yes, kit)
    extra = Constraint("sum0", out.instance.constraints[0].scope)
    tampered = dataclasses.replace(out, instance=Instance(
        out.instance.structure, out.instance.variables,
        out.instance.constraints + (extra,), out.instance.strict))
    report = audit(tampered)
    assert not report.ok


def test_kit_json_roundtrip():
    kit = self_kit(Z2, 2, 2, 1, seed=9)
    again = kit_from_json(kit_to_json(kit))
    assert again == kit
