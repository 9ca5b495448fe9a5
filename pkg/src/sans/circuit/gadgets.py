"""Constraint gadgets: bits, comparisons, Poseidon, Baby Jubjub arithmetic."""

from __future__ import annotations

from collections.abc import Sequence

from ..primitives import babyjubjub as bjj
from ..primitives.field import R
from ..primitives.poseidon import MAX_ARITY, params_for
from .r1cs import LC, ConstraintSystem

LCPoint = tuple[LC, LC]


def assert_bool(cs: ConstraintSystem, x: LC) -> None:
    cs.enforce(x, 1 - x, 0)


def to_bits(cs: ConstraintSystem, x: LC, n: int, name: str = "bit") -> list[LC]:
    """Little-endian decomposition of ``x`` into ``n`` boolean wires.

    Only binds ``x`` modulo R; pair with :func:`assert_lt_const` when ``2^n > R``
    or when the caller needs the integer to be reduced below a bound.
    """
    bits = []
    for i in range(n):
        b = cs.witness(f"{name}[{i}]", lambda v, i=i: (v(x) >> i) & 1)
        assert_bool(cs, b)
        bits.append(b)
    cs.enforce(sum((b * (1 << i) for i, b in enumerate(bits)), LC()), 1, x)
    return bits


def assert_lt_const(cs: ConstraintSystem, bits: Sequence[LC], bound: int) -> None:
    """Constrain the little-endian ``bits`` to encode an integer strictly below ``bound``.

    Scans from the most significant bit keeping ``eq`` = "prefix equals the
    bound's prefix".  A set bit where the bound has 0 is forbidden while
    ``eq`` holds, and ``eq`` must be 0 at the end.
    """
    if bound >= 1 << len(bits):
        return
    eq: LC = LC.const(1)
    for i in reversed(range(len(bits))):
        if (bound >> i) & 1:
            eq = cs.mul(eq, bits[i], "lt.eq")
        else:
            cs.enforce(eq, bits[i], 0)
    cs.enforce(eq, 1, 0)


def is_zero(cs: ConstraintSystem, x: LC, name: str = "is_zero") -> LC:
    inv = cs.witness(f"{name}.inv", lambda v: pow(v(x), -1, R) if v(x) else 0)
    out = cs.witness(name, lambda v: 0 if v(x) else 1)
    cs.enforce(x, inv, 1 - out)
    cs.enforce(x, out, 0)
    return out


def is_equal(cs: ConstraintSystem, a: LC, b: LC, name: str = "is_equal") -> LC:
    return is_zero(cs, a - b, name)


# Poseidon


def poseidon(cs: ConstraintSystem, inputs: Sequence[LC], name: str = "poseidon") -> LC:
    """In-circuit Poseidon matching :func:`sans.primitives.poseidon.poseidon_hash`."""
    if not 1 <= len(inputs) <= MAX_ARITY:
        raise ValueError("poseidon gadget supports arity 1..4")
    p = params_for(len(inputs) + 1)
    state: list[LC] = [LC(), *inputs]
    k = 0
    for r in range(p.rounds):
        state = [s + p.round_constants[k + i] for i, s in enumerate(state)]
        k += p.t
        lanes = range(p.t) if p.is_full_round(r) else range(1)
        for i in lanes:
            state[i] = _pow5(cs, state[i], f"{name}.r{r}.s{i}")
        state = [
            sum((s * m for s, m in zip(state, row)), LC())
            for row in p.mds
        ]
    return state[0]


def _pow5(cs: ConstraintSystem, x: LC, name: str) -> LC:
    x2 = cs.mul(x, x, name + "^2")
    x4 = cs.mul(x2, x2, name + "^4")
    return cs.mul(x4, x, name + "^5")


# Baby Jubjub


def point_add(cs: ConstraintSystem, p: LCPoint, q: LCPoint, name: str = "add") -> LCPoint:
    """Complete twisted Edwards addition, 6 constraints."""
    x1, y1 = p
    x2, y2 = q
    beta = cs.mul(x1, y2, name + ".beta")
    gamma = cs.mul(y1, x2, name + ".gamma")
    delta = cs.mul(y1 - x1 * bjj.A, x2 + y2, name + ".delta")
    tau = cs.mul(beta, gamma, name + ".tau")
    x3 = cs.witness(
        name + ".x",
        lambda v: (v(beta) + v(gamma)) * pow(1 + bjj.D * v(tau), -1, R),
    )
    y3 = cs.witness(
        name + ".y",
        lambda v: (v(delta) + bjj.A * v(beta) - v(gamma)) * pow(1 - bjj.D * v(tau), -1, R),
    )
    cs.enforce(x3, 1 + tau * bjj.D, beta + gamma)
    cs.enforce(y3, 1 - tau * bjj.D, delta + beta * bjj.A - gamma)
    return x3, y3


def on_curve(cs: ConstraintSystem, p: LCPoint, name: str = "on_curve") -> LC:
    x, y = p
    xx = cs.mul(x, x, name + ".xx")
    yy = cs.mul(y, y, name + ".yy")
    xxyy = cs.mul(xx, yy, name + ".xxyy")
    return is_zero(cs, xx * bjj.A + yy - 1 - xxyy * bjj.D, name)


def _const_point(p: bjj.Point) -> LCPoint:
    return LC.const(p[0]), LC.const(p[1])


def fixed_base_mul(
    cs: ConstraintSystem, bits: Sequence[LC], base: bjj.Point, name: str = "fbm"
) -> LCPoint:
    """``sum(bits[i] * 2^i) * base`` using 2-bit windows over precomputed multiples."""
    powers = [base]
    for _ in range(len(bits) - 1):
        powers.append(bjj.add(powers[-1], powers[-1]))
    acc: LCPoint | None = None
    for j in range(0, len(bits), 2):
        if j + 1 < len(bits):
            b0, b1 = bits[j], bits[j + 1]
            c0 = bjj.IDENTITY
            c1, c2 = powers[j], powers[j + 1]
            c3 = bjj.add(c1, c2)
            both = cs.mul(b0, b1, f"{name}.w{j}.both")
            sel = tuple(
                c0[k] + b0 * (c1[k] - c0[k]) + b1 * (c2[k] - c0[k])
                + both * (c3[k] - c2[k] - c1[k] + c0[k])
                for k in range(2)
            )
        else:
            b0 = bits[j]
            sel = (b0 * powers[j][0], 1 + b0 * (powers[j][1] - 1))
        acc = sel if acc is None else point_add(cs, acc, sel, f"{name}.w{j}")
    return acc if acc is not None else _const_point(bjj.IDENTITY)


def var_base_mul(
    cs: ConstraintSystem, bits: Sequence[LC], point: LCPoint, name: str = "vbm"
) -> LCPoint:
    """``sum(bits[i] * 2^i) * point`` by a doubling chain and conditional adds."""
    acc: LCPoint | None = None
    dbl = point
    for i, b in enumerate(bits):
        if i:
            dbl = point_add(cs, dbl, dbl, f"{name}.dbl{i}")
        # b ? dbl : identity
        sel = (
            cs.mul(b, dbl[0], f"{name}.sel{i}.x"),
            cs.mul(b, dbl[1] - 1, f"{name}.sel{i}.y") + 1,
        )
        acc = sel if acc is None else point_add(cs, acc, sel, f"{name}.acc{i}")
    return acc if acc is not None else _const_point(bjj.IDENTITY)


def eddsa_verify(
    cs: ConstraintSystem,
    pk: LCPoint,
    msg: LC,
    R_point: LCPoint,
    s: LC,
    name: str = "eddsa",
) -> LC:
    """Bit that is 1 iff ``s*B == R + h*pk`` and R is on the curve.

    ``s`` is hard-constrained below the subgroup order and ``h`` is decomposed
    strictly below the field modulus, so both scalars have unique bit forms.
    """
    s_bits = to_bits(cs, s, bjj.ORDER.bit_length(), f"{name}.s")
    assert_lt_const(cs, s_bits, bjj.ORDER)

    inner = poseidon(cs, [R_point[0], R_point[1], pk[0], pk[1]], f"{name}.h0")
    h = poseidon(cs, [inner, msg], f"{name}.h")
    h_bits = to_bits(cs, h, R.bit_length(), f"{name}.hbits")
    assert_lt_const(cs, h_bits, R)

    lhs = fixed_base_mul(cs, s_bits, bjj.BASE8, f"{name}.sB")
    h_pk = var_base_mul(cs, h_bits, pk, f"{name}.hA")
    rhs = point_add(cs, R_point, h_pk, f"{name}.rhs")

    eq_x = is_equal(cs, lhs[0], rhs[0], f"{name}.eqx")
    eq_y = is_equal(cs, lhs[1], rhs[1], f"{name}.eqy")
    valid_r = on_curve(cs, R_point, f"{name}.R_on_curve")
    both = cs.mul(eq_x, eq_y, f"{name}.eq")
    ok = cs.mul(both, valid_r, f"{name}.ok")
    assert_bool(cs, ok)
    return ok
