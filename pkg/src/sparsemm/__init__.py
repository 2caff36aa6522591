"""Output-sparse matrix multiplication over exact rings."""

from .algebra import BinaryField, CountingRing, DomainError, Integers, PrimeField, RingElement, ring_from_tag
from .osmm import OsmmConfig, PromiseViolation, osmm_deterministic, osmm_randomized, rect_multiply
from .sketch import build_measurement, recover
from .sparse import SparseMat, SparseVec, dense_mm, sparse_mm
from .verify import VerifierConfig, column_wise_mmv

__all__ = [
    "BinaryField", "CountingRing", "DomainError", "Integers", "PrimeField", "RingElement", "ring_from_tag",
    "OsmmConfig", "PromiseViolation", "osmm_deterministic", "osmm_randomized", "rect_multiply",
    "build_measurement", "recover",
    "SparseMat", "SparseVec", "dense_mm", "sparse_mm",
    "VerifierConfig", "column_wise_mmv",
]
