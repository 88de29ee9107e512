"""Admission control: decides whether a connection set is feasible.

Three gates, all evaluated on every link of a connection's path:

  1. rate:      the connection rate must not exceed any path link's capacity;
  2. aggregate: the summed admitted rates on a link must not exceed capacity;
  3. capacity constraint: for each class index j (classes ordered by
     increasing frame duration, j=1 smallest),

        LHS_j = sum_{i=j..N} D_i * (1 + ceil(f_j / f_i)) * (f_i / f_j) - D_j
        LHS_j <= C            for j = 1
        LHS_j <= C - S / f_j  for j = 2..N

     where D_i is the per-class load on the link in bits/s, C the link
     capacity, S the maximum packet size and f the frame durations.

All arithmetic is exact rational over integer bits and nanoseconds, and
comparisons use zero tolerance: admission is a hard gate and a verdict must
never flip on floating-point noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigurationError
from .framing import NS_PER_SEC, TrafficClass


@dataclass(frozen=True)
class Connection:
    """An admitted (or candidate) flow: class, rate, and a static path of
    directed link ids from source to destination."""

    connection_id: int
    class_id: int
    rate_bps: int
    path: tuple[str, ...]

    def __post_init__(self):
        if self.rate_bps < 0:
            raise ConfigurationError(f"rate must be >= 0, got {self.rate_bps}")
        if len(set(self.path)) != len(self.path):
            raise ConfigurationError(f"connection {self.connection_id} path repeats a link")


@dataclass
class LinkLoad:
    """Per-class admitted load on one link."""

    link_id: str
    capacity_bps: int
    max_packet_bits: int
    per_class_load: dict[int, Fraction] = field(default_factory=dict)

    def load(self, class_id: int) -> Fraction:
        return self.per_class_load.get(class_id, Fraction(0))

    def total_load(self) -> Fraction:
        return sum(self.per_class_load.values(), Fraction(0))


@dataclass(frozen=True)
class ConstraintVerdict:
    class_index: int
    ok: bool
    lhs: Fraction
    rhs: Fraction

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class AdmissionDecision:
    admitted: bool
    reason: str | None = None        # "rate" | "aggregate" | "capacity-constraint"
    link_id: str | None = None
    class_index: int | None = None   # failing j for the capacity constraint


def check_rate(conn: Connection, capacities: dict[str, int]) -> bool:
    """True iff the connection rate fits every link on its path."""
    for link_id in conn.path:
        if link_id not in capacities:
            raise ConfigurationError(f"unknown link id {link_id!r} on connection path")
        if conn.rate_bps > capacities[link_id]:
            return False
    return True


def check_aggregate(load: LinkLoad) -> bool:
    """True iff the summed per-class loads fit the link capacity."""
    return load.total_load() <= load.capacity_bps


def check_capacity_constraint(
    load: LinkLoad, classes: list[TrafficClass]
) -> list[ConstraintVerdict]:
    """Evaluate the per-class capacity constraint for every class index j.

    ``classes`` must be sorted by increasing frame duration with ids 1..N.
    Returns one verdict per j; overall admission needs all of them true.
    """
    if not classes:
        raise ConfigurationError("capacity constraint needs at least one traffic class")
    n = len(classes)
    verdicts = []
    for j in range(1, n + 1):
        f_j = classes[j - 1].frame_ns
        lhs = Fraction(0)
        for i in range(j, n + 1):
            f_i = classes[i - 1].frame_ns
            d_i = load.load(i)
            lhs += d_i * (1 + math.ceil(Fraction(f_j, f_i))) * Fraction(f_i, f_j)
        lhs -= load.load(j)
        if j == 1:
            rhs = Fraction(load.capacity_bps)
        else:
            rhs = Fraction(load.capacity_bps) - Fraction(load.max_packet_bits * NS_PER_SEC, f_j)
        verdicts.append(ConstraintVerdict(class_index=j, ok=lhs <= rhs, lhs=lhs, rhs=rhs))
    return verdicts


def admit(
    conn: Connection,
    network: dict[str, LinkLoad],
    classes: list[TrafficClass],
) -> AdmissionDecision:
    """Try to add one connection to the network load state.

    The connection's rate is tentatively added to its class's load on every
    path link, then all three checks run on those links.  On success the load
    stays; on rejection it is rolled back and the first failing check is
    reported.
    """
    capacities = {link_id: ll.capacity_bps for link_id, ll in network.items()}
    for link_id in conn.path:
        if link_id not in network:
            raise ConfigurationError(f"unknown link id {link_id!r} on connection path")

    def roll_forward():
        for link_id in conn.path:
            loads = network[link_id].per_class_load
            loads[conn.class_id] = loads.get(conn.class_id, Fraction(0)) + conn.rate_bps

    def roll_back():
        for link_id in conn.path:
            loads = network[link_id].per_class_load
            loads[conn.class_id] -= conn.rate_bps

    if not check_rate(conn, capacities):
        bad = next(l for l in conn.path if conn.rate_bps > capacities[l])
        return AdmissionDecision(False, reason="rate", link_id=bad)

    roll_forward()
    for link_id in conn.path:
        if not check_aggregate(network[link_id]):
            roll_back()
            return AdmissionDecision(False, reason="aggregate", link_id=link_id)
    for link_id in conn.path:
        for verdict in check_capacity_constraint(network[link_id], classes):
            if not verdict.ok:
                roll_back()
                return AdmissionDecision(
                    False,
                    reason="capacity-constraint",
                    link_id=link_id,
                    class_index=verdict.class_index,
                )
    return AdmissionDecision(True)


def admit_all(
    connections: list[Connection],
    link_capacities: dict[str, int],
    classes: list[TrafficClass],
    max_packet_bits: int,
) -> tuple[dict[int, AdmissionDecision], dict[str, LinkLoad]]:
    """Admit connections in order; returns per-connection decisions and the
    resulting load state (rejected connections contribute no load)."""
    network = {
        link_id: LinkLoad(link_id, capacity, max_packet_bits)
        for link_id, capacity in link_capacities.items()
    }
    decisions = {}
    for conn in connections:
        decisions[conn.connection_id] = admit(conn, network, classes)
    return decisions, network
