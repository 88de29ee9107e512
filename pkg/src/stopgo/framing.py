"""Frame-clock arithmetic for time-framed link scheduling.

Every (link, class) pair carries a periodic frame clock.  Frame instance k
occupies the half-open interval [phase + k*f, phase + (k+1)*f); instances tile
time with no gap or overlap.  A time exactly on a boundary belongs to the new
instance, so the wait until the next boundary is always in (0, f].

All times are integer nanoseconds.  This keeps boundary comparisons exact and
runs deterministic regardless of platform floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigurationError

NS_PER_US = 1_000
NS_PER_MS = 1_000_000
NS_PER_SEC = 1_000_000_000


@dataclass(frozen=True, order=True)
class TrafficClass:
    """A traffic class: smaller frame duration means higher priority.

    Class ids are contiguous 1..N and frame durations are strictly increasing
    with the id, so the id doubles as the priority rank (1 = highest).
    ``bandwidth_fraction`` is the share of link capacity allocated to the
    class; buffer sizing and traffic setup read it.
    """

    class_id: int
    frame_ns: int
    bandwidth_fraction: Fraction = Fraction(0)

    def __post_init__(self):
        if self.class_id < 1:
            raise ConfigurationError(f"class_id must be >= 1, got {self.class_id}")
        if self.frame_ns <= 0:
            raise ConfigurationError(f"frame_ns must be positive, got {self.frame_ns}")
        if not 0 <= self.bandwidth_fraction <= 1:
            raise ConfigurationError(
                f"bandwidth_fraction must be in [0, 1], got {self.bandwidth_fraction}"
            )


def validate_classes(classes: list[TrafficClass]) -> list[TrafficClass]:
    """Check the global class ordering rules; returns the list sorted by id."""
    if not classes:
        raise ConfigurationError("at least one traffic class is required")
    ordered = sorted(classes, key=lambda c: c.class_id)
    for pos, cls in enumerate(ordered, start=1):
        if cls.class_id != pos:
            raise ConfigurationError(
                f"class ids must be contiguous 1..N, got {[c.class_id for c in ordered]}"
            )
    for lo, hi in zip(ordered, ordered[1:]):
        if hi.frame_ns <= lo.frame_ns:
            raise ConfigurationError(
                "frame durations must be strictly increasing with class id "
                f"(class {lo.class_id}: {lo.frame_ns} ns, class {hi.class_id}: {hi.frame_ns} ns)"
            )
    total = sum((c.bandwidth_fraction for c in ordered), Fraction(0))
    if total > 1:
        raise ConfigurationError(f"bandwidth fractions sum to {total} > 1")
    return ordered


@dataclass(frozen=True)
class FrameClock:
    """Periodic frame boundaries on one link for one class."""

    frame_ns: int
    phase_ns: int = 0

    def __post_init__(self):
        if self.frame_ns <= 0:
            raise ConfigurationError(f"frame_ns must be positive, got {self.frame_ns}")
        if not 0 <= self.phase_ns < self.frame_ns:
            raise ConfigurationError(
                f"phase_ns must be in [0, frame_ns), got {self.phase_ns} for frame {self.frame_ns}"
            )


def frame_index(clock: FrameClock, t_ns: int) -> int:
    """Index k of the frame instance containing t.

    A time exactly on a boundary belongs to the new instance.
    """
    if t_ns < clock.phase_ns:
        raise ConfigurationError(
            f"before clock epoch: t={t_ns} ns < phase={clock.phase_ns} ns"
        )
    return (t_ns - clock.phase_ns) // clock.frame_ns


def next_frame_start(clock: FrameClock, t_ns: int) -> int:
    """First boundary strictly after t.

    A packet arriving exactly at a boundary waits a full frame, so the
    returned wait is always in (0, frame_ns].
    """
    return clock.phase_ns + (frame_index(clock, t_ns) + 1) * clock.frame_ns


def frame_start(clock: FrameClock, t_ns: int) -> int:
    """Start of the frame instance containing t."""
    return clock.phase_ns + frame_index(clock, t_ns) * clock.frame_ns


def boundary_after(clock: FrameClock, t_ns: int) -> int:
    """First boundary strictly after t, with the tiling extended to all time.

    Unlike next_frame_start this accepts t < phase (instance indices may be
    negative); the engine needs it because randomized phases put the first
    boundary of some clocks after t = 0.
    """
    k = (t_ns - clock.phase_ns) // clock.frame_ns
    return clock.phase_ns + (k + 1) * clock.frame_ns


def floor_boundary(clock: FrameClock, t_ns: int) -> int:
    """Last boundary at or before t, with the tiling extended to all time."""
    k = (t_ns - clock.phase_ns) // clock.frame_ns
    return clock.phase_ns + k * clock.frame_ns


def arriving_clock(departing: FrameClock, link_latency_ns: int) -> FrameClock:
    """The receiving-end clock of a link: the departing clock shifted by the
    constant link latency, reduced modulo the frame duration."""
    if link_latency_ns < 0:
        raise ConfigurationError(f"link latency must be >= 0, got {link_latency_ns}")
    return FrameClock(
        frame_ns=departing.frame_ns,
        phase_ns=(departing.phase_ns + link_latency_ns) % departing.frame_ns,
    )
