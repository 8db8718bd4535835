"""Cascade reconciliation with cross-pass back-tracking and an auditable transcript.

Alice holds the reference key and only ever answers parity queries; every
answer she gives is one leaked bit and one ``PARITY`` line in the transcript.
Bob flips bits in his copy until every block he knows about has even
relative parity.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .keys import as_bits


def initial_block_size(qber_estimate: float, n: int) -> int:
    if qber_estimate == 0:
        return max(1, n)
    return max(1, math.ceil(0.73 / qber_estimate))


def block_sizes(qber_estimate: float, n: int, passes: int) -> list[int]:
    k1 = initial_block_size(qber_estimate, n)
    return [min(max(n, 1), k1 * 2**i) for i in range(passes)]


def pass_permutation(n: int, pass_index: int, seed: int) -> np.ndarray:
    """Public shuffle used by pass ``pass_index`` (the first pass is unshuffled)."""
    if pass_index == 0:
        return np.arange(n)
    gen = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=(pass_index,)))
    )
    return gen.permutation(n)


@dataclass(frozen=True)
class TranscriptEvent:
    """One classical-channel event.

    ``lo``/``hi`` index the pass's shuffled order, half-open.
    """

    kind: str  # PASS, PARITY or FLIP
    pass_index: int
    lo: int = 0
    hi: int = 0
    value: int = 0

    def to_line(self) -> str:
        if self.kind == "PASS":
            return f"PASS {self.pass_index} block_size={self.value}"
        if self.kind == "PARITY":
            return f"PARITY {self.pass_index} {self.lo} {self.hi} {self.value}"
        if self.kind == "FLIP":
            return f"FLIP {self.pass_index} {self.value}"
        raise ValueError(f"unknown event kind {self.kind!r}")

    @classmethod
    def from_line(cls, line: str) -> "TranscriptEvent":
        parts = line.split()
        if parts[0] == "PASS":
            return cls("PASS", int(parts[1]), value=int(parts[2].split("=", 1)[1]))
        if parts[0] == "PARITY":
            return cls("PARITY", int(parts[1]), int(parts[2]), int(parts[3]), int(parts[4]))
        if parts[0] == "FLIP":
            return cls("FLIP", int(parts[1]), value=int(parts[2]))
        raise ValueError(f"unrecognised transcript line {line!r}")


@dataclass
class CascadeResult:
    corrected: np.ndarray
    leaked_bits: int
    corrections: int
    success: bool
    block_sizes: list[int]
    transcript: list[TranscriptEvent] = field(default_factory=list)

    def transcript_text(self) -> str:
        return "\n".join(e.to_line() for e in self.transcript) + ("\n" if self.transcript else "")


class _Session:
    def __init__(self, alice: np.ndarray, bob: np.ndarray, log: list[TranscriptEvent]):
        self.alice = alice
        self.bob = bob
        self.log = log
        self.perms: list[np.ndarray] = []
        self.where: list[np.ndarray] = []  # where[j][pos] = index of pos in pass j order
        self.sizes: list[int] = []
        self.known: dict[tuple[int, int, int], int] = {}
        self.leaked = 0
        self.corrections = 0

    def alice_parity(self, j: int, lo: int, hi: int) -> int:
        key = (j, lo, hi)
        if key not in self.known:
            value = int(self.alice[self.perms[j][lo:hi]].sum() & 1)
            self.known[key] = value
            self.leaked += 1
            self.log.append(TranscriptEvent("PARITY", j, lo, hi, value))
        return self.known[key]

    def bob_parity(self, j: int, lo: int, hi: int) -> int:
        return int(self.bob[self.perms[j][lo:hi]].sum() & 1)

    def block_range(self, j: int, block: int) -> tuple[int, int]:
        k = self.sizes[j]
        return block * k, min(block * k + k, self.alice.size)

    def binary_search(self, j: int, lo: int, hi: int) -> int:
        # invariant: [lo, hi) has odd relative parity
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.alice_parity(j, lo, mid) != self.bob_parity(j, lo, mid):
                hi = mid
            else:
                lo = mid
        return int(self.perms[j][lo])

    def flip(self, j: int, pos: int, queue: list) -> None:
        self.bob[pos] ^= 1
        self.corrections += 1
        self.log.append(TranscriptEvent("FLIP", j, value=pos))
        for jj in range(len(self.perms)):
            if jj == j:
                continue
            block = int(self.where[jj][pos]) // self.sizes[jj]
            lo, hi = self.block_range(jj, block)
            known = self.known.get((jj, lo, hi))
            if known is not None and known != self.bob_parity(jj, lo, hi):
                heapq.heappush(queue, (self.sizes[jj], jj, block))

    def drain(self, queue: list) -> None:
        while queue:
            _, j, block = heapq.heappop(queue)
            lo, hi = self.block_range(j, block)
            if self.known[(j, lo, hi)] == self.bob_parity(j, lo, hi):
                continue
            self.flip(j, self.binary_search(j, lo, hi), queue)


def cascade_correct(
    alice_key, bob_key, qber_estimate: float, passes: int = 4, seed: int = 0
) -> CascadeResult:
    """Reconcile ``bob_key`` towards ``alice_key``.

    Pass ``i`` uses blocks of ``k1 * 2**i`` bits in a publicly shuffled order,
    with ``k1 = ceil(0.73 / qber_estimate)``. Every correction re-opens the
    blocks containing the flipped bit in all other passes so far, smallest
    blocks first. ``success`` reports exact agreement at the end; a failed
    session must be discarded by the caller.
    """
    alice = as_bits(alice_key)
    bob = as_bits(bob_key).copy()
    n = alice.size
    if bob.size != n:
        raise ValueError(f"key length mismatch: {n} != {bob.size}")
    if not 0.0 <= qber_estimate <= 0.25:
        raise ValueError(f"qber_estimate must be in [0, 0.25], got {qber_estimate}")
    if passes < 1:
        raise ValueError("passes must be >= 1")

    sizes = block_sizes(qber_estimate, n, passes)
    log: list[TranscriptEvent] = []
    session = _Session(alice, bob, log)
    if n:
        for j, k in enumerate(sizes):
            perm = pass_permutation(n, j, seed)
            where = np.empty(n, dtype=np.int64)
            where[perm] = np.arange(n)
            session.perms.append(perm)
            session.where.append(where)
            session.sizes.append(k)
            log.append(TranscriptEvent("PASS", j, value=k))
            queue: list = []
            for block in range(math.ceil(n / k)):
                lo, hi = session.block_range(j, block)
                if session.alice_parity(j, lo, hi) != session.bob_parity(j, lo, hi):
                    session.flip(j, session.binary_search(j, lo, hi), queue)
                    session.drain(queue)

    return CascadeResult(
        corrected=bob,
        leaked_bits=session.leaked,
        corrections=session.corrections,
        success=bool(np.array_equal(alice, bob)),
        block_sizes=sizes,
        transcript=log,
    )
