"""Groth16 / multi-round proving over a pluggable bilinear engine."""
from .groth import ProverTrace, ProvingError, Verdict, derive_challenges, prove, setup, statement_vector, verify, zeta_at
from .keys import (
    PK_MAGIC,
    PROOF_MAGIC,
    VK_MAGIC,
    KeyFormatError,
    Proof,
    ProvingKey,
    Statement,
    Trapdoor,
    VerifyingKey,
)
from .simulator import SimulatorTrace, simulate
from .transcript import DOMAIN_TAG, Transcript, expand_challenges, fiat_shamir, initial_accumulator

__all__ = [
    "ProverTrace", "ProvingError", "Verdict", "derive_challenges", "prove", "setup", "statement_vector",
    "verify", "zeta_at", "PK_MAGIC", "PROOF_MAGIC", "VK_MAGIC", "KeyFormatError", "Proof", "ProvingKey",
    "Statement", "Trapdoor", "VerifyingKey", "SimulatorTrace", "simulate", "DOMAIN_TAG", "Transcript",
    "expand_challenges", "fiat_shamir", "initial_accumulator",
]
