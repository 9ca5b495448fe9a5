"""The session-authentication circuit.

Public inputs, in order: ``c, pk_x, pk_y, t_exp, out``.
Private inputs: ``token, R_x, R_y, s``.

    M   = poseidon([token, t_exp])
    b   = eddsa_verify(pk, M, (R, s))          # 0 or 1
    out = b * poseidon([c, token])

Expiry is not checked here; ``t_exp`` is public and the verifier compares
it with its own clock.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

from ..errors import MalformedCredential, ParameterUnavailable
from ..primitives import babyjubjub as bjj
from ..primitives.field import R, is_canonical
from ..primitives.poseidon import params_for
from . import gadgets as g
from .r1cs import Circuit, ConstraintSystem

if TYPE_CHECKING:
    from ..protocol import Credential

PUBLIC_INPUTS = ("c", "pk_x", "pk_y", "t_exp", "out")
PRIVATE_INPUTS = ("token", "R_x", "R_y", "s")

AuthCircuitLayout = Circuit


@dataclass(frozen=True)
class WitnessAssignment:
    values: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def public_inputs(self) -> tuple[int, ...]:
        return self.values[1 : 1 + len(PUBLIC_INPUTS)]

    @property
    def out(self) -> int:
        return self.values[PUBLIC_INPUTS.index("out") + 1]

    def replace(self, index: int, value: int) -> "WitnessAssignment":
        vals = list(self.values)
        vals[index] = value % R
        return WitnessAssignment(tuple(vals))


@lru_cache(maxsize=1)
def build_circuit() -> AuthCircuitLayout:
    try:
        for t in (3, 5):
            params_for(t)
    except Exception as exc:  # pragma: no cover - vendored tables ship with the package
        raise ParameterUnavailable(str(exc)) from exc

    cs = ConstraintSystem()
    c = cs.input("c", public=True)
    pk = (cs.input("pk_x", public=True), cs.input("pk_y", public=True))
    t_exp = cs.input("t_exp", public=True)
    token = cs.input("token")
    R_point = (cs.input("R_x"), cs.input("R_y"))
    s = cs.input("s")

    msg = g.poseidon(cs, [token, t_exp], "msg")
    b = g.eddsa_verify(cs, pk, msg, R_point, s, "sig")
    h = g.poseidon(cs, [c, token], "bind")
    out = cs.witness("out", lambda v: v(b) * v(h))
    cs.enforce(b, h, out)
    cs.make_public(out)
    circuit = cs.compile()
    assert circuit.public_names == PUBLIC_INPUTS
    return circuit


def b_wire(layout: AuthCircuitLayout) -> int:
    return layout.wire_names.index("sig.ok")


def assign_witness(cred: "Credential", c: int, layout: AuthCircuitLayout | None = None) -> WitnessAssignment:
    """Witness for ``cred`` under challenge ``c``.

    An invalid signature still yields a complete assignment with ``b = 0`` and
    ``out = 0``.  Raises MalformedCredential for non-canonical values, an
    off-curve R or pk, or ``s`` outside ``[0, l)``.
    """
    layout = layout or build_circuit()
    sig = cred.signature
    values = {
        "c": c,
        "pk_x": cred.pk[0],
        "pk_y": cred.pk[1],
        "t_exp": cred.t_exp,
        "token": cred.token,
        "R_x": sig.R[0],
        "R_y": sig.R[1],
        "s": sig.s,
    }
    for name, v in values.items():
        if not is_canonical(v):
            raise MalformedCredential(f"{name} is not a canonical field element")
    if not 0 <= sig.s < bjj.ORDER:
        raise MalformedCredential("signature scalar not below the subgroup order")
    if not bjj.on_curve(sig.R) or not bjj.on_curve(cred.pk):
        raise MalformedCredential("signature nonce point or public key is off the curve")
    try:
        return WitnessAssignment(tuple(layout.solve(values)))
    except ZeroDivisionError as exc:  # pragma: no cover - complete addition law
        raise MalformedCredential("degenerate point arithmetic") from exc


def satisfied(layout: AuthCircuitLayout, w: WitnessAssignment | list[int]) -> bool:
    return layout.satisfied(w.values if isinstance(w, WitnessAssignment) else w)
