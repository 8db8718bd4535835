from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cascade import CascadeResult, cascade_correct
from .keys import DistilledKey, SiftedKey
from .privacy import privacy_amplify
from .rates import estimate_qber

MAX_RECONCILABLE_QBER = 0.25


@dataclass(frozen=True)
class DistillParams:
    sample_fraction: float = 0.1
    f_ec: float = 1.2
    passes: int = 4
    epsilon_bits: int = 64

    def __post_init__(self):
        if not 0.0 < self.sample_fraction < 1.0:
            raise ValueError(f"sample_fraction must be in (0, 1), got {self.sample_fraction}")
        if self.f_ec < 1.0:
            raise ValueError(f"f_ec must be >= 1, got {self.f_ec}")
        if self.passes < 1:
            raise ValueError(f"passes must be >= 1, got {self.passes}")
        if self.epsilon_bits < 0:
            raise ValueError(f"epsilon_bits must be >= 0, got {self.epsilon_bits}")


@dataclass
class DistillOutcome:
    alice: DistilledKey
    bob: DistilledKey
    qber_estimate: float | None
    reconciliation: CascadeResult | None
    aborted: str | None = None

    @property
    def success(self) -> bool:
        return self.aborted is None


def _empty(params: DistillParams) -> DistilledKey:
    return DistilledKey(np.zeros(0, dtype=np.uint8), epsilon_margin=params.epsilon_bits)


def distill(
    alice: SiftedKey, bob: SiftedKey, params: DistillParams = DistillParams(), seed: int = 0
) -> DistillOutcome:
    """Estimate, reconcile and amplify one sifted key pair.

    Any failure (key too short to sample, QBER too high to reconcile,
    residual mismatch) aborts the session with two empty keys.
    """
    try:
        qber, a, b = estimate_qber(alice, bob, params.sample_fraction, seed)
    except ValueError as exc:
        return DistillOutcome(_empty(params), _empty(params), None, None, aborted=str(exc))
    if qber > MAX_RECONCILABLE_QBER:
        return DistillOutcome(_empty(params), _empty(params), qber, None, aborted="qber too high")

    rec = cascade_correct(a.bits, b.bits, qber, params.passes, seed)
    if not rec.success:
        return DistillOutcome(_empty(params), _empty(params), qber, rec, aborted="residual mismatch")

    disclosed = a.disclosed_count
    # Alice and Bob hash their own (now identical) copies with the shared seed
    alice_out = privacy_amplify(a.bits, qber, rec.leaked_bits, disclosed, params.epsilon_bits, seed)
    bob_out = privacy_amplify(rec.corrected, qber, rec.leaked_bits, disclosed, params.epsilon_bits, seed)
    return DistillOutcome(alice_out, bob_out, qber, rec)
