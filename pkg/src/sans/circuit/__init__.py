"""Rank-1 constraint systems and the session-authentication circuit."""

from .auth import (
    PRIVATE_INPUTS,
    PUBLIC_INPUTS,
    AuthCircuitLayout,
    WitnessAssignment,
    assign_witness,
    build_circuit,
    satisfied,
)
from .r1cs import LC, Circuit, ConstraintSystem

__all__ = [
    "LC",
    "PRIVATE_INPUTS",
    "PUBLIC_INPUTS",
    "AuthCircuitLayout",
    "Circuit",
    "ConstraintSystem",
    "WitnessAssignment",
    "assign_witness",
    "build_circuit",
    "satisfied",
]
