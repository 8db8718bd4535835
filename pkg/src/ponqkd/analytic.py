"""Closed-form per-Bob detection probabilities, QBER and rates.

This is both the fast path for sweeps and the oracle the Monte Carlo engine is
checked against, so it models exactly the same receiver: one projector per
slot chosen uniformly, Poissonian arrivals, exact exponentials, dark clicks
that land on the projector regardless of the sent state, and a
non-paralyzable dead time on the total click rate. Coincident signal and dark
clicks in one slot are second order and ignored.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .distill.keys import RateReport
from .distill.rates import net_bit_rate
from .network import Scenario, build_paths
from .optics import dead_time_rate
from .protocol import transmission_table


@dataclass(frozen=True)
class BobAnalytic:
    bob_id: int
    transmittance: float
    mu: float
    p_sig: float
    p_err_opt: float
    p_dark: float
    qber: float
    raw_click_rate_hz: float
    sifted_rate_hz: float
    net_bit_rate_hz: float
    no_signal: bool = False

    @property
    def p_click(self) -> float:
        return self.p_sig + self.p_err_opt + self.p_dark

    @property
    def p_error(self) -> float:
        return 0.5 * self.p_dark + self.p_err_opt

    def to_rate_report(self) -> RateReport:
        return RateReport(
            bob_id=self.bob_id,
            qber=self.qber,
            sifted_rate_hz=self.sifted_rate_hz,
            net_bit_rate_hz=self.net_bit_rate_hz,
            clicks={"p_sig": self.p_sig, "p_err_opt": self.p_err_opt, "p_dark": self.p_dark},
            no_signal=self.no_signal,
        )


@dataclass(frozen=True)
class AnalyticReport:
    bobs: tuple[BobAnalytic, ...]

    def __iter__(self):
        return iter(self.bobs)

    def __len__(self) -> int:
        return len(self.bobs)

    def __getitem__(self, i: int) -> BobAnalytic:
        return self.bobs[i]


def _half_click(x: float) -> float:
    return -0.5 * math.expm1(-x)


def analytic_rates(scenario: Scenario, epsilon_rate: float = 0.0) -> AnalyticReport:
    """Evaluate every Bob of ``scenario``.

    ``epsilon_rate`` (bits/s) is subtracted from the net rate; the default of
    zero is the asymptotic limit.
    """
    table = transmission_table(scenario.alphabet, scenario.extinction)
    mu = scenario.resolved_mu.mu
    det = scenario.detector
    f = scenario.clock_rate_hz
    params = scenario.distill
    out = []
    for bob_id, path in enumerate(build_paths(scenario)):
        t = path.transmittance
        x = mu * t * det.efficiency
        # average over Alice's two bits; Bob's projector admits the sent state
        # when basis = 1 - bit and is orthogonal to it when basis = bit
        p_sig = 0.5 * sum(_half_click(x * table[a, 1 - a]) for a in (0, 1))
        p_err = 0.5 * sum(_half_click(x * table[a, a]) for a in (0, 1))
        p_dark = det.dark_prob_per_slot
        total = p_sig + p_err + p_dark
        if total > 0:
            qber, no_signal = (0.5 * p_dark + p_err) / total, False
        else:
            qber, no_signal = 0.0, True
        raw = f * total
        sifted = dead_time_rate(raw, det)
        net = net_bit_rate(sifted, qber, params.sample_fraction, params.f_ec, epsilon_rate)
        out.append(BobAnalytic(bob_id, t, mu, p_sig, p_err, p_dark, qber, raw, sifted, net, no_signal))
    return AnalyticReport(tuple(out))


def sweep(
    template: Scenario, lengths: Sequence[float], epsilon_rate: float = 0.0
) -> list[tuple[float, AnalyticReport]]:
    """One report per sweep-axis length (dedicated span or feeder), order preserved."""
    lengths = list(lengths)
    if not lengths:
        raise ValueError("sweep needs at least one length")
    if any(not L >= 0 for L in lengths):
        raise ValueError("sweep lengths must be >= 0")
    return [(float(L), analytic_rates(template.with_length(L), epsilon_rate)) for L in lengths]
