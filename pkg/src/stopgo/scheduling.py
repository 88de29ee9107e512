"""Per-node stop-and-go discipline for one output link.

An arriving packet is held until the next departing frame boundary of its
class on the output link, then joins its class's eligible FIFO.  The link
serves eligible packets in non-preemptive class-priority order: smallest
frame duration (lowest class id) first, FIFO within a class.

Buffer occupancy counts bits in the holding + eligible queues; the packet in
transmission has left the buffer.  When accepting a packet would push the
class occupancy past its budget, the arriving packet is dropped (drop-tail)
and counted as an overflow.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .framing import NS_PER_SEC, FrameClock, boundary_after


@dataclass
class HopRecord:
    node_id: str
    link_id: str | None
    arrival_ns: int
    eligible_ns: int | None = None
    departure_ns: int | None = None


@dataclass
class Packet:
    packet_id: int
    class_id: int
    size_bits: int
    connection_id: int
    creation_ns: int
    deadline_ns: int
    late: bool = False
    dropped: bool = False
    drop_reason: str | None = None
    hops: list[HopRecord] = field(default_factory=list)

    def __post_init__(self):
        if self.size_bits <= 0:
            raise ConfigurationError(f"packet size must be positive, got {self.size_bits}")


def transmission_ns(size_bits: int, capacity_bps: int) -> int:
    """Wire time of a packet, rounded up to the nanosecond."""
    return -(-size_bits * NS_PER_SEC // capacity_bps)


class OutputPort:
    """Scheduler state of one directed link at its transmitting node.

    ``budgets_bits`` maps class id to the buffer budget; a class missing from
    the map while carrying traffic is a configuration error.  ``budgets_bits``
    may be None to disable occupancy accounting limits (unlimited buffers).
    """

    def __init__(
        self,
        link_id: str,
        capacity_bps: int,
        clocks: dict[int, FrameClock],
        budgets_bits: dict[int, int] | None = None,
    ):
        if capacity_bps <= 0:
            raise ConfigurationError(f"link capacity must be positive, got {capacity_bps}")
        self.link_id = link_id
        self.capacity_bps = capacity_bps
        self.clocks = dict(clocks)
        self.budgets_bits = dict(budgets_bits) if budgets_bits is not None else None
        self.class_ids = sorted(self.clocks)
        # holding: min-heap of (eligibility_time, fifo_seq, packet)
        self.holding: list[tuple[int, int, Packet]] = []
        self.eligible: dict[int, list[Packet]] = {c: [] for c in self.class_ids}
        self.occupancy_bits: dict[int, int] = {c: 0 for c in self.class_ids}
        self.peak_occupancy_bits: dict[int, int] = {c: 0 for c in self.class_ids}
        self.overflow_drops: dict[int, int] = {c: 0 for c in self.class_ids}
        self.frame_overruns = 0
        self.busy_until = 0
        self.busy_ns = 0
        self._seq = 0

    def enqueue(self, packet: Packet, now: int) -> int | None:
        """Hold a packet until the next frame boundary of its class.

        Returns the eligibility time, or None if the packet was dropped for
        lack of buffer space.
        """
        clock = self.clocks.get(packet.class_id)
        if clock is None:
            raise ConfigurationError(
                f"link {self.link_id} has no frame clock for class {packet.class_id}"
            )
        if self.budgets_bits is not None:
            budget = self.budgets_bits.get(packet.class_id)
            if budget is None:
                raise ConfigurationError(
                    f"link {self.link_id} has no buffer budget for class {packet.class_id}"
                )
            if self.occupancy_bits[packet.class_id] + packet.size_bits > budget:
                self.overflow_drops[packet.class_id] += 1
                packet.dropped = True
                packet.drop_reason = "overflow"
                return None
        eligibility = boundary_after(clock, now)
        heapq.heappush(self.holding, (eligibility, self._seq, packet))
        self._seq += 1
        occ = self.occupancy_bits[packet.class_id] + packet.size_bits
        self.occupancy_bits[packet.class_id] = occ
        if occ > self.peak_occupancy_bits[packet.class_id]:
            self.peak_occupancy_bits[packet.class_id] = occ
        return eligibility

    def promote(self, now: int) -> int:
        """Move every held packet whose eligibility time has passed into its
        class's eligible FIFO.  Returns the number of packets moved."""
        moved = 0
        while self.holding and self.holding[0][0] <= now:
            _, _, packet = heapq.heappop(self.holding)
            self.eligible[packet.class_id].append(packet)
            moved += 1
        return moved

    def select_next(self, now: int) -> Packet | None:
        """Head of the highest-priority non-empty eligible queue, or None.

        Callers must have promoted up to ``now`` and the link must be free.
        """
        if now < self.busy_until:
            raise ConfigurationError(
                f"link {self.link_id} busy until {self.busy_until}, cannot select at {now}"
            )
        for class_id in self.class_ids:
            queue = self.eligible[class_id]
            if queue:
                return queue[0]
        return None

    def transmit(self, packet: Packet, now: int) -> int:
        """Start transmitting the given eligible head; returns completion time.

        Non-preemptive: the link is busy until completion.  If the packet
        cannot complete inside the frame instance it became eligible for, the
        frame-overrun counter increments (never happens for admitted traffic).
        """
        if now < self.busy_until:
            raise ConfigurationError(f"link {self.link_id} is busy until {self.busy_until}")
        queue = self.eligible[packet.class_id]
        if not queue or queue[0] is not packet:
            raise ConfigurationError("transmit must be called with the selected head packet")
        queue.pop(0)
        self.occupancy_bits[packet.class_id] -= packet.size_bits
        completion = now + transmission_ns(packet.size_bits, self.capacity_bps)
        hop = packet.hops[-1]
        if hop.eligible_ns is not None and completion > hop.eligible_ns + self.clocks[packet.class_id].frame_ns:
            self.frame_overruns += 1
        hop.departure_ns = completion
        self.busy_ns += completion - now
        self.busy_until = completion
        return completion

    def pending_count(self) -> int:
        return len(self.holding) + sum(len(q) for q in self.eligible.values())
