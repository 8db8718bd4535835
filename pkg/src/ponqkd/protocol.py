"""B92 with polarization encoding: encoder, receiver, slot-level Monte Carlo, sifting.

Alice sends bit 0 as linear polarization 0 deg and bit 1 as ``theta``. Each
slot Bob picks one of two projectors, each orthogonal to one signal state, so a
click behind the projector unambiguously excludes one state and yields the
other as a conclusive bit. Imperfect polarization extinction lets a photon in
the orthogonal case through with probability ``extinction``; these photons are
the optical error floor.
"""
from __future__ import annotations

import enum
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .distill.keys import SiftedKey
from .optics import Detector, OpticalPath

# Malus values below this are treated as an exactly orthogonal projection.
_ORTHOGONAL_TOL = 1e-12


@dataclass(frozen=True)
class B92Alphabet:
    state_angle_deg: float = 45.0
    # Test-harness escape hatch: allows the orthogonal (theta = 90) limit.
    diagnostic: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        theta = self.state_angle_deg
        if self.diagnostic:
            if not 0.0 < theta <= 90.0:
                raise ValueError(f"state_angle_deg must be in (0, 90], got {theta}")
        elif not 0.0 < theta < 90.0:
            raise ValueError(f"state_angle_deg must be in (0, 90), got {theta}")

    @classmethod
    def unchecked(cls, state_angle_deg: float) -> "B92Alphabet":
        return cls(state_angle_deg, diagnostic=True)

    @property
    def overlap(self) -> float:
        return math.cos(math.radians(self.state_angle_deg))


class OutcomeKind(enum.IntEnum):
    NO_CLICK = 0
    INCONCLUSIVE = 1
    CONCLUSIVE = 2


@dataclass(frozen=True)
class SlotOutcome:
    slot_index: int
    kind: OutcomeKind
    bit: int | None = None

    def __post_init__(self):
        if self.slot_index < 0:
            raise ValueError("slot_index must be >= 0")
        if (self.kind is OutcomeKind.CONCLUSIVE) != (self.bit is not None):
            raise ValueError("exactly the conclusive outcomes carry a bit")


def alice_encode(bit: int, alphabet: B92Alphabet) -> float:
    return 0.0 if bit == 0 else float(alphabet.state_angle_deg)


def bob_projector(basis_bit: int, alphabet: B92Alphabet) -> float:
    """Projector angle orthogonal to the state that ``basis_bit`` rules out.

    Basis 0 excludes bit 0 (so a click means 1); basis 1 excludes bit 1.
    """
    return (alice_encode(basis_bit, alphabet) + 90.0) % 180.0


def conclusive_bit(basis_bit: int) -> int:
    return 1 - basis_bit


def malus_pass_probability(state_angle: float, projector_angle: float) -> float:
    return math.cos(math.radians(state_angle - projector_angle)) ** 2


def transmission_probability(state_angle: float, projector_angle: float, extinction: float) -> float:
    """Malus law, except that an orthogonal projection leaks ``extinction``."""
    p = malus_pass_probability(state_angle, projector_angle)
    return extinction if p < _ORTHOGONAL_TOL else p


def transmission_table(alphabet: B92Alphabet, extinction: float) -> np.ndarray:
    """``table[alice_bit, basis_bit]`` = single-photon projector pass probability."""
    table = np.empty((2, 2))
    for a in (0, 1):
        for b in (0, 1):
            table[a, b] = transmission_probability(
                alice_encode(a, alphabet), bob_projector(b, alphabet), extinction
            )
    return table


@dataclass(frozen=True)
class Link:
    """One Bob's view of the channel: mean photon number at the reference plane and the path after it."""

    bob_id: int
    mu: float
    path: OpticalPath
    detector: Detector

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")


@dataclass(frozen=True, eq=False)
class AliceRecord:
    session: int
    bits: np.ndarray

    @property
    def total_slots(self) -> int:
        return int(self.bits.size)


@dataclass(frozen=True, eq=False)
class DetectionRecord:
    """Sparse per-slot record: only slots with a registered click are stored.

    ``slots`` is strictly increasing; ``bits`` is -1 for inconclusive clicks.
    """

    bob_id: int
    session: int
    total_slots: int
    slots: np.ndarray
    kinds: np.ndarray
    bits: np.ndarray
    counters: dict

    @property
    def conclusive_mask(self) -> np.ndarray:
        return self.kinds == OutcomeKind.CONCLUSIVE

    @property
    def conclusive_count(self) -> int:
        return int(np.count_nonzero(self.conclusive_mask))

    def outcome(self, slot_index: int) -> SlotOutcome:
        i = int(np.searchsorted(self.slots, slot_index))
        if i < self.slots.size and self.slots[i] == slot_index:
            kind = OutcomeKind(int(self.kinds[i]))
            bit = int(self.bits[i]) if kind is OutcomeKind.CONCLUSIVE else None
            return SlotOutcome(slot_index, kind, bit)
        return SlotOutcome(slot_index, OutcomeKind.NO_CLICK)

    def outcomes(self) -> Iterator[SlotOutcome]:
        """Iterate over the slots that registered a click."""
        for s, k, b in zip(self.slots.tolist(), self.kinds.tolist(), self.bits.tolist()):
            kind = OutcomeKind(k)
            yield SlotOutcome(s, kind, b if kind is OutcomeKind.CONCLUSIVE else None)


def apply_dead_time(candidates: np.ndarray, dead_slots: int) -> np.ndarray:
    """Mask of candidate clicks that survive a non-paralyzable dead time.

    ``candidates`` must be sorted and unique. Suppressed clicks do not extend
    the blind interval.
    """
    accepted = np.ones(candidates.size, dtype=bool)
    if dead_slots <= 0 or candidates.size < 2:
        return accepted
    last = -dead_slots - 1
    for i, s in enumerate(candidates.tolist()):
        if s - last <= dead_slots:
            accepted[i] = False
        else:
            last = s
    return accepted


def _dark_slots(gen: np.random.Generator, n: int, d: float) -> np.ndarray:
    if d <= 0:
        return np.empty(0, dtype=np.int64)
    k = int(gen.binomial(n, d))
    return np.sort(gen.choice(n, size=k, replace=False)).astype(np.int64)


def _simulate_bob(
    link: Link,
    alice_bits: np.ndarray,
    table: np.ndarray,
    seed: int,
    clock_rate_hz: float,
    forced_photons: int | None,
    monitor_rejected_port: bool,
) -> DetectionRecord:
    n = alice_bits.size
    gen = rngmod.stream(seed, rngmod.BOB, link.bob_id)
    t = link.path.transmittance
    eta = link.detector.efficiency

    # Photons reaching Bob. Poisson thinning makes each Bob's arrivals an
    # independent Poisson(mu * t) process, equivalent to routing every photon
    # through the splitter to a uniformly random port.
    if forced_photons is None:
        total = int(gen.poisson(link.mu * t * n))
        photon_slots = np.sort(gen.integers(0, n, size=total))
    else:
        survivors = gen.binomial(forced_photons, t, size=n)
        photon_slots = np.repeat(np.arange(n), survivors)
    u = gen.random(photon_slots.size)

    dark_t = _dark_slots(gen, n, link.detector.dark_prob_per_slot)
    dark_r = (
        _dark_slots(gen, n, link.detector.dark_prob_per_slot)
        if monitor_rejected_port
        else np.empty(0, dtype=np.int64)
    )

    active = np.unique(np.concatenate([photon_slots, dark_t, dark_r]))
    basis = gen.integers(0, 2, size=active.size, dtype=np.uint8)

    photon_basis = basis[np.searchsorted(active, photon_slots)]
    q = table[alice_bits[photon_slots], photon_basis]
    passed = u < eta * q
    reflected = ~passed & (u < eta)

    signal_t = np.unique(photon_slots[passed])
    cand_t = np.union1d(signal_t, dark_t)
    ok_t = apply_dead_time(cand_t, link.detector.dead_slots(clock_rate_hz))
    clicks_t = cand_t[ok_t]

    if monitor_rejected_port:
        cand_r = np.union1d(np.unique(photon_slots[reflected]), dark_r)
        ok_r = apply_dead_time(cand_r, link.detector.dead_slots(clock_rate_hz))
        clicks_r = cand_r[ok_r]
        # the transmitted-port detector is evaluated first and wins a coincidence
        clicks_r = np.setdiff1d(clicks_r, clicks_t, assume_unique=True)
    else:
        cand_r = clicks_r = np.empty(0, dtype=np.int64)

    slots = np.union1d(clicks_t, clicks_r)
    is_conclusive = np.isin(slots, clicks_t, assume_unique=True)
    kinds = np.where(is_conclusive, OutcomeKind.CONCLUSIVE, OutcomeKind.INCONCLUSIVE).astype(np.int8)
    slot_basis = basis[np.searchsorted(active, slots)].astype(np.int8)
    bits = np.where(is_conclusive, 1 - slot_basis, -1).astype(np.int8)

    is_signal = np.isin(clicks_t, signal_t, assume_unique=True)
    counters = {
        "photons_arrived": int(photon_slots.size),
        "signal_clicks": int(np.count_nonzero(is_signal)),
        "dark_clicks": int(clicks_t.size - np.count_nonzero(is_signal)),
        "dead_time_suppressed": int(cand_t.size - clicks_t.size),
        "inconclusive_clicks": int(clicks_r.size),
    }
    return DetectionRecord(
        bob_id=link.bob_id,
        session=seed,
        total_slots=n,
        slots=slots.astype(np.int64),
        kinds=kinds,
        bits=bits,
        counters=counters,
    )


def run_quantum_phase(
    links: Sequence[Link],
    slots: int,
    seed: int,
    *,
    clock_rate_hz: float,
    alphabet: B92Alphabet = B92Alphabet(),
    extinction: float = 0.02,
    forced_photons: int | None = None,
    monitor_rejected_port: bool = False,
) -> tuple[AliceRecord, list[DetectionRecord]]:
    """Simulate ``slots`` clock periods of B92 transmission to every Bob in ``links``.

    Alice's bits come from her own stream and every Bob has an independent
    one keyed by ``bob_id``, so simulating a subset of Bobs gives exactly the
    records those Bobs would get in the full run.

    ``forced_photons`` replaces the Poissonian source with exactly that many
    photons per pulse at each Bob's reference plane (test harness only).
    ``monitor_rejected_port`` adds a second SPAD on the projector's rejected
    output whose clicks are recorded as inconclusive.
    """
    if slots < 1:
        raise ValueError("empty session")
    if not 0.0 <= extinction <= 1.0:
        raise ValueError(f"extinction must be in [0, 1], got {extinction}")
    if forced_photons is not None and forced_photons < 0:
        raise ValueError("forced_photons must be >= 0")
    ids = [link.bob_id for link in links]
    if len(set(ids)) != len(ids):
        raise ValueError("bob ids must be unique")

    alice_bits = rngmod.stream(seed, rngmod.ALICE).integers(0, 2, size=slots, dtype=np.uint8)
    table = transmission_table(alphabet, extinction)
    records = [
        _simulate_bob(link, alice_bits, table, seed, clock_rate_hz, forced_photons, monitor_rejected_port)
        for link in links
    ]
    return AliceRecord(session=seed, bits=alice_bits), records


def sift(alice: AliceRecord, record: DetectionRecord) -> tuple[SiftedKey, SiftedKey]:
    """Keep the bits of the slots Bob announces as conclusive."""
    if alice.session != record.session or alice.total_slots != record.total_slots:
        raise ValueError("corrupt record: session mismatch")
    announced = record.slots[record.conclusive_mask]
    if announced.size and (announced.min() < 0 or announced.max() >= alice.total_slots):
        raise ValueError("corrupt record: slot index out of range")
    if announced.size > 1 and np.any(np.diff(announced) <= 0):
        raise ValueError("corrupt record: slot indices not strictly increasing")
    alice_key = SiftedKey(alice.bits[announced], session=alice.session)
    bob_key = SiftedKey(record.bits[record.conclusive_mask].astype(np.uint8), session=record.session)
    return alice_key, bob_key
