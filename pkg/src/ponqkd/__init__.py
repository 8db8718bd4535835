"""Gigahertz-clocked B92 quantum key distribution over passive optical networks."""
from .analytic import AnalyticReport, analytic_rates, sweep
from .network import MuPolicy, Placement, Scenario, Topology, build_paths, eavesdropper_exposure, resolve_mu
from .optics import Detector, FiberSpan, FixedLoss, OpticalPath, PulseSource, Splitter
from .protocol import B92Alphabet, run_quantum_phase, sift
from .simulation import simulate

__version__ = "0.1.0"

__all__ = [
    "AnalyticReport",
    "B92Alphabet",
    "Detector",
    "FiberSpan",
    "FixedLoss",
    "MuPolicy",
    "OpticalPath",
    "Placement",
    "PulseSource",
    "Scenario",
    "Splitter",
    "Topology",
    "analytic_rates",
    "build_paths",
    "eavesdropper_exposure",
    "resolve_mu",
    "run_quantum_phase",
    "sift",
    "simulate",
    "sweep",
]
