"""Anonymous, unlinkable slice access with zk-SNARK proofs over a signed token."""

from .circuit import build_circuit
from .protocol import (
    AuthRequest,
    Credential,
    Decision,
    ReplayCache,
    VerifierConfig,
    VerifierState,
    authenticate_prove,
    authenticate_verify,
    derive_challenge,
    register,
    sweep_cache,
)

__version__ = "0.1.0"

__all__ = [
    "AuthRequest",
    "Credential",
    "Decision",
    "ReplayCache",
    "VerifierConfig",
    "VerifierState",
    "authenticate_prove",
    "authenticate_verify",
    "build_circuit",
    "derive_challenge",
    "register",
    "sweep_cache",
]
