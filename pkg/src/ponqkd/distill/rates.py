from __future__ import annotations

import math

import numpy as np

from .keys import SiftedKey


def binary_entropy(e: float) -> float:
    """h2(e) in bits, with h2(0) = h2(1) = 0."""
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"binary entropy argument must be in [0, 1], got {e}")
    if e == 0.0 or e == 1.0:
        return 0.0
    return -e * math.log2(e) - (1.0 - e) * math.log2(1.0 - e)


def secret_fraction(qber: float, f_ec: float) -> float:
    """Asymptotic secret fraction 1 - f_ec*h2(e) - h2(e), floored at 0."""
    h = binary_entropy(qber)
    return max(0.0, 1.0 - f_ec * h - h)


def net_bit_rate(
    sifted_rate_hz: float,
    qber: float,
    sample_fraction: float = 0.1,
    f_ec: float = 1.2,
    epsilon_rate: float = 0.0,
) -> float:
    if sifted_rate_hz < 0:
        raise ValueError("sifted_rate_hz must be >= 0")
    if not 0.0 <= sample_fraction < 1.0:
        raise ValueError(f"sample_fraction must be in [0, 1), got {sample_fraction}")
    if f_ec < 0 or epsilon_rate < 0:
        raise ValueError("f_ec and epsilon_rate must be >= 0")
    rate = sifted_rate_hz * (1.0 - sample_fraction) * secret_fraction(qber, f_ec) - epsilon_rate
    return max(0.0, rate)


def estimate_qber(
    alice: SiftedKey, bob: SiftedKey, sample_fraction: float, seed: int
) -> tuple[float, SiftedKey, SiftedKey]:
    """Publicly compare a random ceil(s*n)-bit sample and drop it from both keys.

    Returns the observed error fraction and the trimmed keys, whose
    ``disclosed_count`` has grown by the sample size.
    """
    n = len(alice)
    if len(bob) != n:
        raise ValueError(f"key length mismatch: {n} != {len(bob)}")
    if not 0.0 < sample_fraction < 1.0:
        raise ValueError(f"sample_fraction must be in (0, 1), got {sample_fraction}")
    size = math.ceil(sample_fraction * n)
    if size >= n:
        raise ValueError(f"nothing left: sample of {size} bits consumes the whole {n}-bit key")
    gen = np.random.default_rng(seed)
    sample = gen.choice(n, size=size, replace=False)
    mismatches = int(np.count_nonzero(alice.bits[sample] != bob.bits[sample]))
    keep = np.ones(n, dtype=bool)
    keep[sample] = False
    return (
        mismatches / size,
        alice.with_bits(alice.bits[keep], disclosed=size),
        bob.with_bits(bob.bits[keep], disclosed=size),
    )
