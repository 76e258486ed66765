"""Single-shot information flow and leakage for amplitude-amplification dynamics."""

__version__ = "0.1.0"

from .engines import AdiabaticEngine, AnalogEngine, CircuitEngine, make_engine
from .entangle import bipartite_concurrence, multipartite_concurrence
from .infoflow import (
    FlowEstimator,
    FlowRecord,
    conditional_min_entropy,
    guessing_probability,
    information_flow,
    leakage,
    proposition_check,
    trace_distance,
)
from .redyn import ChannelSnapshot, apply, channel_at

__all__ = [
    "AdiabaticEngine",
    "AnalogEngine",
    "ChannelSnapshot",
    "CircuitEngine",
    "FlowEstimator",
    "FlowRecord",
    "apply",
    "bipartite_concurrence",
    "channel_at",
    "conditional_min_entropy",
    "guessing_probability",
    "information_flow",
    "leakage",
    "make_engine",
    "multipartite_concurrence",
    "proposition_check",
    "trace_distance",
]
