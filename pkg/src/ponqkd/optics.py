"""Physical-layer models: faint-pulse source, fiber and splitter loss, SPAD response.

All values are immutable and the functions are pure. Losses are kept in dB
where that is the natural unit and converted to transmittance only at the end,
so that splitting a span or reordering elements leaves the budget unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


def db_to_transmittance(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class PulseSource:
    """Attenuated pulsed laser with Poissonian photon-number statistics.

    ``mean_photon_number`` is defined at ``reference_plane``; everything
    downstream of that plane is part of the optical path.
    """

    mean_photon_number: float
    clock_rate_hz: float
    reference_plane: str = "source output"

    def __post_init__(self):
        if not self.mean_photon_number >= 0:
            raise ValueError(f"mean_photon_number must be >= 0, got {self.mean_photon_number}")
        if not self.clock_rate_hz > 0:
            raise ValueError(f"clock_rate_hz must be > 0, got {self.clock_rate_hz}")

    @property
    def slot_s(self) -> float:
        return 1.0 / self.clock_rate_hz


@dataclass(frozen=True)
class FiberSpan:
    length_km: float
    attenuation_db_per_km: float = 2.2

    def __post_init__(self):
        if not self.length_km >= 0:
            raise ValueError(f"length_km must be >= 0, got {self.length_km}")
        if not self.attenuation_db_per_km >= 0:
            raise ValueError(
                f"attenuation_db_per_km must be >= 0, got {self.attenuation_db_per_km}"
            )

    @property
    def loss_db(self) -> float:
        return self.length_km * self.attenuation_db_per_km


@dataclass(frozen=True)
class Splitter:
    """1xN passive splitter. The split loss is derived from ``fan_out``."""

    fan_out: int
    excess_loss_db: float = 0.0

    def __post_init__(self):
        if isinstance(self.fan_out, bool) or int(self.fan_out) != self.fan_out or self.fan_out < 1:
            raise ValueError(f"fan_out must be an integer >= 1, got {self.fan_out}")
        if not self.excess_loss_db >= 0:
            raise ValueError(f"excess_loss_db must be >= 0, got {self.excess_loss_db}")

    @property
    def loss_db(self) -> float:
        return splitter_loss_db(self)


@dataclass(frozen=True)
class FixedLoss:
    """Lumped loss element (connectors, receiver optics, ...)."""

    loss_db: float

    def __post_init__(self):
        if not self.loss_db >= 0:
            raise ValueError(f"loss_db must be >= 0, got {self.loss_db}")


PathElement = Union[FiberSpan, Splitter, FixedLoss]


@dataclass(frozen=True)
class Detector:
    """Gated single-photon avalanche diode.

    Attributes:
        efficiency: probability that an incident photon produces a click.
        dark_prob_per_slot: probability of a dark click in one clock slot.
        dead_time_s: non-paralyzable recovery time after any click.
    """

    efficiency: float = 0.12
    dark_prob_per_slot: float = 1e-7
    dead_time_s: float = 50e-9

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_prob_per_slot < 1.0:
            raise ValueError(
                f"dark_prob_per_slot must be in [0, 1), got {self.dark_prob_per_slot}"
            )
        if not (self.dead_time_s >= 0 and math.isfinite(self.dead_time_s)):
            raise ValueError(f"dead_time_s must be finite and >= 0, got {self.dead_time_s}")

    def dead_slots(self, clock_rate_hz: float) -> int:
        """Number of slots after a click in which the detector is blind.

        A click in slot ``i`` blocks slot ``j > i`` when ``(j - i) / f <= dead_time``.
        """
        # small epsilon so that e.g. 50 ns at 1 GHz gives exactly 50 slots
        return int(math.floor(self.dead_time_s * clock_rate_hz + 1e-9))


@dataclass(frozen=True)
class OpticalPath:
    """Ordered loss elements from the mean-photon-number reference plane to a detector."""

    elements: tuple[PathElement, ...] = ()
    reference_plane: str = "source output"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for element in self.elements:
            if not isinstance(element, (FiberSpan, Splitter, FixedLoss)):
                raise TypeError(f"unsupported path element {element!r}")

    @property
    def loss_db(self) -> float:
        return sum(element_loss_db(e) for e in self.elements)

    @property
    def transmittance(self) -> float:
        return path_transmittance(self)


def element_loss_db(element: PathElement) -> float:
    return element.loss_db


def fiber_transmittance(span: FiberSpan) -> float:
    return db_to_transmittance(span.loss_db)


def splitter_loss_db(s: Splitter) -> float:
    return 10.0 * math.log10(s.fan_out) + s.excess_loss_db


def path_transmittance(path: OpticalPath) -> float:
    # summing dB first keeps the result independent of element order and span splitting
    return db_to_transmittance(path.loss_db)


def click_probability(mu_at_detector: float, det: Detector) -> float:
    """Probability that a Poissonian pulse with mean ``mu_at_detector`` fires the SPAD.

    Dark counts are not included; callers combine them separately.
    """
    if mu_at_detector < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mu_at_detector}")
    return -math.expm1(-mu_at_detector * det.efficiency)


def dead_time_rate(raw_click_rate_hz: float, det: Detector) -> float:
    """Registered click rate of a non-paralyzable detector: R / (1 + R * tau)."""
    if raw_click_rate_hz < 0:
        raise ValueError(f"click rate must be >= 0, got {raw_click_rate_hz}")
    if math.isinf(raw_click_rate_hz):
        return 1.0 / det.dead_time_s if det.dead_time_s > 0 else math.inf
    return raw_click_rate_hz / (1.0 + raw_click_rate_hz * det.dead_time_s)
