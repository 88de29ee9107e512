"""Time-framed stop-and-go packet scheduling.

Library + CLI for per-class frame clocks, hold-until-next-frame scheduling
with non-preemptive class priority, connection admission control, per-class
buffer sizing, and a deterministic discrete-event multihop simulator with
delay-bound verification.
"""

from .admission import (
    AdmissionDecision,
    Connection,
    ConstraintVerdict,
    LinkLoad,
    admit,
    admit_all,
    check_aggregate,
    check_capacity_constraint,
    check_rate,
)
from .buffering import BufferBudget, buffer_size_bits, budgets_for_link
from .errors import ConfigurationError, ScenarioError, StopGoError
from .framing import (
    FrameClock,
    TrafficClass,
    arriving_clock,
    frame_index,
    next_frame_start,
    validate_classes,
)
from .metrics import Metrics, delay_bounds, emit, verify_bounds
from .scenario import Scenario, load
from .scheduling import HopRecord, OutputPort, Packet
from .simcore import Engine, mark_late, run

__all__ = [
    "AdmissionDecision", "Connection", "ConstraintVerdict", "LinkLoad",
    "admit", "admit_all", "check_aggregate", "check_capacity_constraint",
    "check_rate", "BufferBudget", "buffer_size_bits", "budgets_for_link",
    "ConfigurationError", "ScenarioError", "StopGoError", "FrameClock",
    "TrafficClass", "arriving_clock", "frame_index", "next_frame_start",
    "validate_classes", "Metrics", "delay_bounds", "emit", "verify_bounds",
    "Scenario", "load", "HopRecord", "OutputPort", "Packet", "Engine",
    "mark_late", "run",
]

__version__ = "0.1.0"
