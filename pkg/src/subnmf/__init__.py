"""Subspace NMF: nonnegative matrix factorization with adaptive feature weights."""

from .nmf import AlgorithmConfig, FactorizationState, Variant
from .solver import run
from .weighted import erwnmf_weight_update, fwnmf_weight_update, hard_weight_update

__all__ = [
    "AlgorithmConfig",
    "FactorizationState",
    "Variant",
    "run",
    "hard_weight_update",
    "fwnmf_weight_update",
    "erwnmf_weight_update",
]
