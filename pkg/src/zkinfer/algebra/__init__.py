"""Field, polynomial, MSM and pairing-group primitives."""
from .field import (
    BN254_FR,
    BN254_SCALAR_MODULUS,
    F9967,
    TEST_FIELD,
    FieldElement,
    PrimeField,
    batch_invert,
    signed_decode,
    signed_encode,
)
from .poly import EvaluationDomain, Polynomial, lagrange_interpolate
from .msm import msm, naive_msm, pippenger
from .engine import BilinearEngine, BN254Engine, Group, MockEngine, get_engine, engine_from_id

__all__ = [
    "BN254_FR", "BN254_SCALAR_MODULUS", "F9967", "TEST_FIELD", "FieldElement", "PrimeField",
    "batch_invert", "signed_decode", "signed_encode", "EvaluationDomain", "Polynomial",
    "lagrange_interpolate", "msm", "naive_msm", "pippenger", "BilinearEngine", "BN254Engine",
    "Group", "MockEngine", "get_engine", "engine_from_id",
]
