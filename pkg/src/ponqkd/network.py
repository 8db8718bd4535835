"""PON topologies for the two splitter placements, mean-photon-number policies and exposure.

``SplitterInAlice``: the 1xN splitter sits inside Alice's secure station and
each Bob has a dedicated fiber; mu is set at the splitter output arms.

``SplitterInChannel``: a shared feeder fiber runs to a field splitter, then
per-Bob drop fibers; mu is set at the feeder input.
"""
from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

from .distill.pipeline import DistillParams
from .optics import Detector, FiberSpan, OpticalPath, PulseSource, Splitter
from .protocol import B92Alphabet, Link


class Placement(str, enum.Enum):
    IN_ALICE = "SplitterInAlice"
    IN_CHANNEL = "SplitterInChannel"


class MuPolicyKind(str, enum.Enum):
    PER_PORT = "PerPort"
    AGGREGATE = "Aggregate"
    AT_FEEDER = "AtFeeder"


_ALLOWED = {
    Placement.IN_ALICE: {MuPolicyKind.PER_PORT, MuPolicyKind.AGGREGATE},
    Placement.IN_CHANNEL: {MuPolicyKind.AT_FEEDER},
}


@dataclass(frozen=True)
class MuPolicy:
    kind: MuPolicyKind
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "kind", MuPolicyKind(self.kind))
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")

    @classmethod
    def per_port(cls, mu: float) -> "MuPolicy":
        return cls(MuPolicyKind.PER_PORT, mu)

    @classmethod
    def aggregate(cls, mu: float) -> "MuPolicy":
        return cls(MuPolicyKind.AGGREGATE, mu)

    @classmethod
    def at_feeder(cls, mu: float) -> "MuPolicy":
        return cls(MuPolicyKind.AT_FEEDER, mu)


@dataclass(frozen=True)
class ResolvedMu:
    mu: float
    reference_plane: str


@dataclass(frozen=True)
class Topology:
    placement: Placement
    splitter: Splitter
    feeder: FiberSpan | None = None
    drops: tuple[FiberSpan, ...] = ()
    dedicated: tuple[FiberSpan, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "placement", Placement(self.placement))
        object.__setattr__(self, "drops", tuple(self.drops))
        object.__setattr__(self, "dedicated", tuple(self.dedicated))
        n = self.fan_out
        if self.placement is Placement.IN_ALICE:
            if self.feeder is not None or self.drops:
                raise ValueError("SplitterInAlice topology has no feeder or drop fibers")
            if len(self.dedicated) != n:
                raise ValueError(f"expected {n} dedicated spans, got {len(self.dedicated)}")
        else:
            if self.dedicated:
                raise ValueError("SplitterInChannel topology has no dedicated fibers")
            if self.feeder is None:
                raise ValueError("SplitterInChannel topology needs a feeder span")
            if len(self.drops) != n:
                raise ValueError(f"expected {n} drop spans, got {len(self.drops)}")

    @property
    def fan_out(self) -> int:
        return self.splitter.fan_out

    @classmethod
    def in_alice(
        cls,
        fan_out: int,
        dedicated_km: float | Sequence[float],
        attenuation_db_per_km: float = 2.2,
        splitter_excess_db: float = 0.0,
    ) -> "Topology":
        lengths = _per_bob(dedicated_km, fan_out, "dedicated_km")
        return cls(
            Placement.IN_ALICE,
            Splitter(fan_out, splitter_excess_db),
            dedicated=tuple(FiberSpan(L, attenuation_db_per_km) for L in lengths),
        )

    @classmethod
    def in_channel(
        cls,
        fan_out: int,
        feeder_km: float,
        drop_km: float | Sequence[float] = 0.0,
        attenuation_db_per_km: float = 2.2,
        splitter_excess_db: float = 3.0,
    ) -> "Topology":
        lengths = _per_bob(drop_km, fan_out, "drop_km")
        return cls(
            Placement.IN_CHANNEL,
            Splitter(fan_out, splitter_excess_db),
            feeder=FiberSpan(feeder_km, attenuation_db_per_km),
            drops=tuple(FiberSpan(L, attenuation_db_per_km) for L in lengths),
        )

    def with_length(self, length_km: float) -> "Topology":
        """Set the sweep-axis length: every dedicated span (InAlice) or the feeder (InChannel)."""
        if self.placement is Placement.IN_ALICE:
            return replace(self, dedicated=tuple(replace(s, length_km=length_km) for s in self.dedicated))
        return replace(self, feeder=replace(self.feeder, length_km=length_km))

    def axis_length_km(self, bob_id: int) -> float:
        if self.placement is Placement.IN_ALICE:
            return self.dedicated[bob_id].length_km
        return self.feeder.length_km


def _per_bob(value, n: int, name: str) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)] * n
    values = [float(v) for v in value]
    if len(values) != n:
        raise ValueError(f"{name} lists {len(values)} lengths for fan_out {n}")
    return values


def check_policy(policy: MuPolicy, placement: Placement) -> None:
    placement = Placement(placement)
    if policy.kind not in _ALLOWED[placement]:
        raise ValueError(f"mu policy {policy.kind.value} is not valid with placement {placement.value}")


def resolve_mu(policy: MuPolicy, fan_out: int, placement: Placement | None = None) -> ResolvedMu:
    """Mean photon number each Bob's path starts from, and where it is defined."""
    if placement is not None:
        check_policy(policy, placement)
    if policy.kind is MuPolicyKind.PER_PORT:
        return ResolvedMu(policy.mu, "splitter output arm")
    if policy.kind is MuPolicyKind.AGGREGATE:
        return ResolvedMu(policy.mu / fan_out, "splitter output arm")
    return ResolvedMu(policy.mu, "feeder input")


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    mu_policy: MuPolicy
    clock_rate_hz: float = 1.25e9
    detector: Detector = Detector()
    alphabet: B92Alphabet = B92Alphabet()
    extinction: float = 0.02
    slots: int = 10_000_000
    seed: int = 0
    distill: DistillParams = field(default_factory=DistillParams)
    forced_photons: int | None = None
    monitor_rejected_port: bool = False

    def __post_init__(self):
        check_policy(self.mu_policy, self.topology.placement)
        if not self.clock_rate_hz > 0:
            raise ValueError(f"clock_rate_hz must be > 0, got {self.clock_rate_hz}")
        if not 0.0 <= self.extinction <= 1.0:
            raise ValueError(f"extinction must be in [0, 1], got {self.extinction}")
        if self.slots < 1:
            raise ValueError(f"slots must be >= 1, got {self.slots}")

    @property
    def fan_out(self) -> int:
        return self.topology.fan_out

    @property
    def resolved_mu(self) -> ResolvedMu:
        return resolve_mu(self.mu_policy, self.fan_out, self.topology.placement)

    @property
    def source(self) -> PulseSource:
        r = self.resolved_mu
        return PulseSource(r.mu, self.clock_rate_hz, r.reference_plane)

    def with_length(self, length_km: float) -> "Scenario":
        return replace(self, topology=self.topology.with_length(length_km))

    def links(self) -> list[Link]:
        mu = self.resolved_mu.mu
        return [Link(b, mu, path, self.detector) for b, path in enumerate(build_paths(self))]


def eavesdropper_exposure(scenario: Scenario) -> float:
    """Mean photon number per pulse available to a tap at the most exposed insecure point.

    For the in-station splitter the adversary is assumed to tap every
    dedicated fiber at the station boundary at once.
    """
    policy = scenario.mu_policy
    if policy.kind is MuPolicyKind.PER_PORT:
        return scenario.fan_out * policy.mu
    return policy.mu


def build_paths(scenario: Scenario) -> list[OpticalPath]:
    topo = scenario.topology
    plane = scenario.resolved_mu.reference_plane
    if topo.placement is Placement.IN_ALICE:
        # the splitter is upstream of the reference plane, so its loss is not in the path
        return [OpticalPath((span,), plane) for span in topo.dedicated]
    return [OpticalPath((topo.feeder, topo.splitter, drop), plane) for drop in topo.drops]
