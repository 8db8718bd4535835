from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


def as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit strings must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bit strings may only contain 0 and 1")
    return arr


@dataclass(frozen=True, eq=False)
class SiftedKey:
    """Bits kept after sifting, plus how many bits have been revealed publicly."""

    bits: np.ndarray
    session: int = 0
    disclosed_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits))
        if self.disclosed_count < 0:
            raise ValueError("disclosed_count must be >= 0")

    def __len__(self) -> int:
        return int(self.bits.size)

    def with_bits(self, bits, disclosed: int = 0) -> "SiftedKey":
        return replace(self, bits=as_bits(bits), disclosed_count=self.disclosed_count + disclosed)


@dataclass(frozen=True, eq=False)
class DistilledKey:
    bits: np.ndarray
    epsilon_margin: int = 0
    disclosed_count: int = 0
    leaked_bits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits))

    def __len__(self) -> int:
        return int(self.bits.size)


@dataclass(frozen=True)
class RateReport:
    """Per-Bob figures of merit for one scenario evaluation."""

    bob_id: int
    qber: float
    sifted_rate_hz: float
    net_bit_rate_hz: float
    clicks: dict = field(default_factory=dict)
    distilled_rate_hz: float | None = None
    no_signal: bool = False

    def __post_init__(self):
        if not 0.0 <= self.qber <= 1.0:
            raise ValueError(f"qber must be in [0, 1], got {self.qber}")
        if self.sifted_rate_hz < 0 or self.net_bit_rate_hz < 0:
            raise ValueError("rates must be >= 0")
        if self.net_bit_rate_hz > self.sifted_rate_hz * (1 + 1e-12):
            raise ValueError("net bit rate cannot exceed the sifted rate")
