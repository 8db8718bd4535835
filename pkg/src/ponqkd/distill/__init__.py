"""Classical post-processing: QBER estimation, Cascade, privacy amplification, rates."""
from .cascade import CascadeResult, TranscriptEvent, cascade_correct, pass_permutation
from .keys import DistilledKey, RateReport, SiftedKey
from .pipeline import DistillOutcome, DistillParams, distill
from .privacy import (
    privacy_amplify,
    secure_length,
    toeplitz_extract,
    toeplitz_from_seed,
    toeplitz_hash,
    toeplitz_matrix,
)
from .rates import binary_entropy, estimate_qber, net_bit_rate, secret_fraction

__all__ = [
    "CascadeResult",
    "DistillOutcome",
    "DistillParams",
    "DistilledKey",
    "RateReport",
    "SiftedKey",
    "TranscriptEvent",
    "binary_entropy",
    "cascade_correct",
    "distill",
    "estimate_qber",
    "net_bit_rate",
    "pass_permutation",
    "privacy_amplify",
    "secret_fraction",
    "secure_length",
    "toeplitz_extract",
    "toeplitz_from_seed",
    "toeplitz_hash",
    "toeplitz_matrix",
]
