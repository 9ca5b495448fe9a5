import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sans.circuit import LC, ConstraintSystem, PRIVATE_INPUTS, PUBLIC_INPUTS, assign_witness, build_circuit, satisfied
from sans.circuit import gadgets as g
from sans.circuit.auth import b_wire
from sans.errors import DimensionMismatch, MalformedCredential
from sans.primitives import babyjubjub as bjj
from sans.primitives import eddsa
from sans.primitives.field import R
from sans.primitives.poseidon import poseidon_hash
from sans.protocol import Credential

EXPECTED_CONSTRAINTS = 6467
felts = st.integers(min_value=0, max_value=R - 1)
scalars = st.integers(min_value=0, max_value=bjj.ORDER - 1)


def _fresh_credential(seed=b"\x01" * 32, token=12345, t_exp=1_700_006_400):
    kp = eddsa.keygen(seed)
    sig = eddsa.sign(kp, poseidon_hash([token, t_exp]))
    return Credential(token, t_exp, sig, kp.pk)


# r1cs builder


def test_lc_arithmetic_reduces_mod_r():
    cs = ConstraintSystem()
    x = cs.input("x")
    assert (x - x).terms == {}
    assert (x * R).terms == {}
    assert (x + 3 - 3).terms == x.terms
    assert LC.const(5).constant_value() == 5
    assert x.constant_value() is None
    with pytest.raises(TypeError):
        x * x


def test_mul_by_constant_allocates_nothing():
    cs = ConstraintSystem()
    x = cs.input("x")
    y = cs.mul(x, 7)
    assert len(cs.constraints) == 0
    assert y.terms == (x * 7).terms


def test_compile_orders_public_wires_first():
    cs = ConstraintSystem()
    a = cs.input("a")
    b = cs.input("b", public=True)
    c = cs.mul(a, b, "c")
    cs.make_public(c)
    circ = cs.compile()
    assert circ.wire_names[:3] == ("one", "b", "c")
    w = circ.solve({"a": 3, "b": 5})
    assert w[:3] == [1, 5, 15]
    assert circ.satisfied(w)
    w[2] = 16
    assert not circ.satisfied(w)
    assert circ.violations(w) == [0]


def test_satisfied_checks_dimensions_and_one_wire():
    cs = ConstraintSystem()
    cs.mul(cs.input("a"), cs.input("b"))
    circ = cs.compile()
    with pytest.raises(DimensionMismatch):
        circ.satisfied([1, 2])
    w = circ.solve({"a": 2, "b": 3})
    assert circ.satisfied(w)
    w[0] = 2
    assert not circ.satisfied(w)


# gadgets


@given(st.integers(min_value=0, max_value=(1 << 12) - 1), st.integers(min_value=1, max_value=1 << 12))
@settings(max_examples=60)
def test_lt_const_accepts_exactly_the_values_below_the_bound(x, bound):
    cs = ConstraintSystem()
    v = cs.input("x")
    bits = g.to_bits(cs, v, 12)
    g.assert_lt_const(cs, bits, bound)
    circ = cs.compile()
    assert circ.satisfied(circ.solve({"x": x})) == (x < bound)


def test_bit_decomposition_rejects_wrong_bits():
    cs = ConstraintSystem()
    v = cs.input("x")
    g.to_bits(cs, v, 8)
    circ = cs.compile()
    w = circ.solve({"x": 0b1011})
    assert circ.satisfied(w)
    w[circ.wire_names.index("bit[0]")] = 2
    assert not circ.satisfied(w)


@given(felts)
@settings(max_examples=20)
def test_is_zero(x):
    cs = ConstraintSystem()
    out = g.is_zero(cs, cs.input("x"))
    circ = cs.compile()
    w = circ.solve({"x": x})
    assert circ.satisfied(w)
    assert w[circ.wire_names.index("is_zero")] == (1 if x == 0 else 0)


@pytest.mark.parametrize("arity", [1, 2, 3, 4])
def test_poseidon_gadget_matches_native(arity):
    rng = random.Random(arity)
    cs = ConstraintSystem()
    ins = [cs.input(f"x{i}") for i in range(arity)]
    out = g.poseidon(cs, ins)
    marker = cs.witness("digest", lambda v: v(out))
    cs.enforce(out, 1, marker)
    circ = cs.compile()
    for _ in range(3):
        xs = [rng.randrange(R) for _ in range(arity)]
        w = circ.solve({f"x{i}": x for i, x in enumerate(xs)})
        assert circ.satisfied(w)
        assert w[circ.wire_names.index("digest")] == poseidon_hash(xs)


def _point_circuit(build):
    cs = ConstraintSystem()
    out = build(cs)
    xs = cs.witness("rx", lambda v: v(out[0]))
    ys = cs.witness("ry", lambda v: v(out[1]))
    cs.enforce(out[0], 1, xs)
    cs.enforce(out[1], 1, ys)
    return cs.compile()


@given(scalars, scalars)
@settings(max_examples=10, deadline=None)
def test_point_add_gadget_matches_native(a, b):
    p, q = bjj.mul(a, bjj.BASE8), bjj.mul(b, bjj.BASE8)
    circ = _point_circuit(
        lambda cs: g.point_add(cs, (cs.input("px"), cs.input("py")), (cs.input("qx"), cs.input("qy")))
    )
    w = circ.solve({"px": p[0], "py": p[1], "qx": q[0], "qy": q[1]})
    assert circ.satisfied(w)
    n = circ.wire_names
    assert (w[n.index("rx")], w[n.index("ry")]) == bjj.add(p, q)


@given(st.integers(min_value=0, max_value=(1 << 16) - 1), scalars)
@settings(max_examples=8, deadline=None)
def test_scalar_mul_gadgets_match_native(k, a):
    pt = bjj.mul(a, bjj.BASE8)

    def fixed(cs):
        return g.fixed_base_mul(cs, g.to_bits(cs, cs.input("k"), 16), bjj.BASE8)

    def variable(cs):
        return g.var_base_mul(cs, g.to_bits(cs, cs.input("k"), 16), (cs.input("px"), cs.input("py")))

    for build, expect in ((fixed, bjj.mul(k, bjj.BASE8)), (variable, bjj.mul(k, pt))):
        circ = _point_circuit(build)
        w = circ.solve({"k": k, "px": pt[0], "py": pt[1]})
        assert circ.satisfied(w)
        n = circ.wire_names
        assert (w[n.index("rx")], w[n.index("ry")]) == expect


# the authentication circuit


def test_constraint_count_is_pinned(layout):
    assert layout.num_constraints == EXPECTED_CONSTRAINTS


def test_build_is_deterministic(layout):
    again = build_circuit.__wrapped__()
    assert again.num_constraints == layout.num_constraints
    assert again.fingerprint() == layout.fingerprint()
    assert again.describe() == layout.describe()


def test_public_input_order(layout):
    assert layout.public_names == PUBLIC_INPUTS == ("c", "pk_x", "pk_y", "t_exp", "out")
    assert set(PRIVATE_INPUTS) <= set(layout.inputs)
    assert not set(PRIVATE_INPUTS) & set(layout.public_names)


def test_describe_lists_layout(layout):
    text = layout.describe()
    assert f"constraints: {EXPECTED_CONSTRAINTS}" in text
    assert "public inputs (in order): c, pk_x, pk_y, t_exp, out" in text
    assert "private inputs: token, R_x, R_y, s" in text


def test_honest_witness_satisfies_and_binds_output(layout):
    cred = _fresh_credential()
    w = assign_witness(cred, 777, layout)
    assert satisfied(layout, w)
    assert w[b_wire(layout)] == 1
    assert w.out == poseidon_hash([777, cred.token])
    assert w.public_inputs == (777, cred.pk[0], cred.pk[1], cred.t_exp, w.out)


def test_bad_signature_gives_zero_output(layout):
    cred = _fresh_credential()
    forged = Credential(cred.token + 1, cred.t_exp, cred.signature, cred.pk)
    w = assign_witness(forged, 777, layout)
    assert satisfied(layout, w)
    assert w[b_wire(layout)] == 0
    assert w.out == 0


def test_forcing_the_signature_bit_breaks_satisfaction(layout):
    cred = _fresh_credential()
    forged = Credential(cred.token + 1, cred.t_exp, cred.signature, cred.pk)
    w = assign_witness(forged, 777, layout)
    w = w.replace(b_wire(layout), 1)
    w = w.replace(1 + PUBLIC_INPUTS.index("out"), poseidon_hash([777, forged.token]))
    assert not satisfied(layout, w)


@pytest.mark.parametrize("name", ["token", "R_x", "R_y", "s", "c", "t_exp", "out"])
def test_tampering_any_input_wire_breaks_satisfaction(layout, name):
    w = assign_witness(_fresh_credential(), 777, layout)
    idx = layout.inputs.get(name, 1 + PUBLIC_INPUTS.index(name) if name in PUBLIC_INPUTS else None)
    assert not satisfied(layout, w.replace(idx, w[idx] + 1))


def test_s_above_subgroup_order_is_caught_by_the_range_check(layout):
    # s + l names the same curve point, so only the range check can reject it
    for i in range(1, 50):
        cred = _fresh_credential(seed=bytes([i]) * 32)
        s_big = cred.signature.s + bjj.ORDER
        if s_big < 1 << 251:
            break
    values = {
        "c": 9, "pk_x": cred.pk[0], "pk_y": cred.pk[1], "t_exp": cred.t_exp,
        "token": cred.token, "R_x": cred.signature.R[0], "R_y": cred.signature.R[1], "s": s_big,
    }
    w = layout.solve(values)
    assert w[b_wire(layout)] == 1
    bad = layout.violations(w)
    assert bad
    lt_wires = {j for j, name in enumerate(layout.wire_names) if name.startswith("lt.eq")}
    s_bits = {layout.wire_names.index(f"sig.s[{k}]") for k in range(251)}
    for row in bad:
        touched = {j for lc in layout.rows[row] for j, _ in lc}
        assert touched & (lt_wires | s_bits)


def test_assign_witness_rejects_malformed_credentials(layout):
    cred = _fresh_credential()
    sig = cred.signature
    with pytest.raises(MalformedCredential):
        assign_witness(Credential(cred.token, cred.t_exp, eddsa.Signature(sig.R, bjj.ORDER), cred.pk), 1, layout)
    with pytest.raises(MalformedCredential):
        assign_witness(Credential(cred.token, cred.t_exp, eddsa.Signature((1, 1), sig.s), cred.pk), 1, layout)
    with pytest.raises(MalformedCredential):
        assign_witness(Credential(R, cred.t_exp, sig, cred.pk), 1, layout)


def test_witness_length_matches_layout(layout):
    w = assign_witness(_fresh_credential(), 3, layout)
    assert len(w) == layout.num_wires
    with pytest.raises(DimensionMismatch):
        satisfied(layout, list(w.values)[:-1])
