"""Deterministic discrete-event engine.

The engine drives the per-port stop-and-go discipline over a static topology:
constant-rate generators shaped to the per-frame budget inject packets, each
hop holds a packet until the next departing frame boundary of its class, the
link serves eligible packets in non-preemptive priority order, and arrivals
propagate after the constant link latency.

Determinism comes from a single tie-break rule at equal timestamps: frame
boundaries first, then transmission completions, then transmission-start
decisions, then arrivals, then generator emissions; within a category, lower
packet id first.  Identical scenario + seed gives bit-identical results.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import ConfigurationError
from .framing import NS_PER_SEC, FrameClock, boundary_after, floor_boundary
from .metrics import LinkClassStats, Metrics
from .scenario import ConnectionSpec, Scenario
from .scheduling import HopRecord, OutputPort, Packet

# Event categories, in tie-break order at equal timestamps.
CAT_BOUNDARY = 0
CAT_COMPLETE = 1
CAT_START = 2
CAT_ARRIVAL = 3
CAT_GENERATE = 4


@dataclass
class _GenState:
    """Constant-rate generator: one packet of fixed size every size/rate
    seconds, deferred to the next source frame boundary whenever emitting
    would break the per-frame budget rate * frame."""

    spec: ConnectionSpec
    clock: FrameClock            # departing clock of the first path link
    next_index: int = 0
    frame_start_ns: int | None = None
    bits_in_frame: int = 0

    def nominal_ns(self, k: int) -> int:
        spec = self.spec
        return spec.start_ns + spec.offset_ns + -(
            -k * spec.packet_size_bits * NS_PER_SEC // spec.rate_bps
        )

    def fits_budget(self, t_ns: int) -> bool:
        start = floor_boundary(self.clock, t_ns)
        if start != self.frame_start_ns:
            self.frame_start_ns = start
            self.bits_in_frame = 0
        used = self.bits_in_frame + self.spec.packet_size_bits
        return used * NS_PER_SEC <= self.spec.rate_bps * self.clock.frame_ns

    def charge(self):
        self.bits_in_frame += self.spec.packet_size_bits


def mark_late(packet: Packet, now_ns: int) -> Packet:
    """Flag the packet late if its elapsed time strictly exceeds the deadline.

    Evaluated on every node arrival; the flag is sticky and the packet is
    still forwarded (unless the scenario's drop_late option is set).
    """
    if now_ns - packet.creation_ns > packet.deadline_ns:
        packet.late = True
    return packet


class Engine:
    """Single-threaded simulation of one scenario.  Instances are one-shot:
    build, run(), read the metrics."""

    def __init__(self, scenario: Scenario, seed: int | None = None, record_trace: bool = False):
        self.scenario = scenario
        self.phases = scenario.resolve_phases(seed_override=seed)
        self.record_trace = record_trace
        self.trace: list[tuple] = []

        frames = {c.class_id: c.frame_ns for c in scenario.classes}
        budgets = scenario.budgets()
        self.ports: dict[str, OutputPort] = {}
        for link_id, link in scenario.topology.links.items():
            clocks = {
                cid: FrameClock(frames[cid], self.phases[(link_id, cid)])
                for cid in frames
            }
            self.ports[link_id] = OutputPort(
                link_id,
                link.capacity_bps,
                clocks,
                {cid: b.budget_bits for cid, b in budgets[link_id].items()},
            )
        self.budgets = budgets
        self.links = scenario.topology.links
        self.admission, self.final_loads = scenario.evaluate_admission()

        self._heap: list[tuple] = []
        self._push_seq = 0
        self._boundary_scheduled: set[tuple[str, int]] = set()
        self._next_packet_id = 1
        self._specs = {c.connection_id: c for c in scenario.connections}
        self.packets: list[Packet] = []
        self.delivered_ns: dict[int, int] = {}
        self._gens: dict[int, _GenState] = {}
        self._ran = False

    # -- event plumbing -----------------------------------------------------

    def _push(self, t_ns: int, category: int, packet_id: int, payload):
        heapq.heappush(self._heap, (t_ns, category, packet_id, self._push_seq, payload))
        self._push_seq += 1

    def _emit_trace(self, t_ns: int, kind: str, packet_id: int, place: str):
        if self.record_trace:
            self.trace.append((t_ns, kind, packet_id, place))

    # -- run ----------------------------------------------------------------

    def run(self) -> Metrics:
        if self._ran:
            raise ConfigurationError("an Engine instance can only run once")
        self._ran = True
        scenario = self.scenario

        for spec in scenario.connections:
            if spec.rate_bps <= 0:
                continue
            clock = self.ports[spec.path[0]].clocks[spec.class_id]
            gen = _GenState(spec=spec, clock=clock)
            self._gens[spec.connection_id] = gen
            first = gen.nominal_ns(0)
            if first < self._stop_ns(spec):
                # generator events tie-break on connection id
                self._push(first, CAT_GENERATE, spec.connection_id, spec.connection_id)

        horizon = scenario.horizon_ns
        heap = self._heap
        while heap:
            t_ns, category, packet_id, _, payload = heapq.heappop(heap)
            if t_ns >= horizon:
                break
            if category == CAT_BOUNDARY:
                self._boundary_scheduled.discard((payload, t_ns))
                port = self.ports[payload]
                port.promote(t_ns)
                self._try_start(port, t_ns)
            elif category == CAT_COMPLETE:
                packet, link_id = payload
                link = self.links[link_id]
                self._arrive(packet, link.dst, t_ns + link.latency_ns)
                self._push(t_ns, CAT_START, 0, link_id)
            elif category == CAT_START:
                self._try_start(self.ports[payload], t_ns)
            elif category == CAT_ARRIVAL:
                packet, node = payload
                self._arrive_now(packet, node, t_ns)
            elif category == CAT_GENERATE:
                self._generate(payload, t_ns)
        return self._collect()

    def _stop_ns(self, spec: ConnectionSpec) -> int:
        stop = spec.stop_ns if spec.stop_ns is not None else self.scenario.horizon_ns
        return min(stop, self.scenario.horizon_ns)

    def _generate(self, connection_id: int, t_ns: int):
        gen = self._gens[connection_id]
        spec = gen.spec
        if t_ns >= self._stop_ns(spec):
            return
        if not gen.fits_budget(t_ns):
            # emitting now would break per-frame smoothness; wait the frame out
            retry = boundary_after(gen.clock, t_ns)
            if retry < self._stop_ns(spec):
                self._push(retry, CAT_GENERATE, connection_id, connection_id)
            return
        gen.charge()
        hops = len(spec.path)
        packet = Packet(
            packet_id=self._next_packet_id,
            class_id=spec.class_id,
            size_bits=spec.packet_size_bits,
            connection_id=spec.connection_id,
            creation_ns=t_ns,
            deadline_ns=spec.deadline_ns,
        )
        self._next_packet_id += 1
        self.packets.append(packet)
        source = self.links[spec.path[0]].src
        self._arrive_now(packet, source, t_ns)

        gen.next_index += 1
        nxt = max(gen.nominal_ns(gen.next_index), t_ns)
        if nxt < self._stop_ns(spec):
            self._push(nxt, CAT_GENERATE, connection_id, connection_id)

    def _arrive(self, packet: Packet, node: str, t_ns: int):
        self._push(t_ns, CAT_ARRIVAL, packet.packet_id, (packet, node))

    def _arrive_now(self, packet: Packet, node: str, t_ns: int):
        self._emit_trace(t_ns, "arrive", packet.packet_id, node)
        mark_late(packet, t_ns)
        spec = self._specs[packet.connection_id]
        hop_index = len(packet.hops)
        if hop_index == len(spec.path):
            packet.hops.append(HopRecord(node, None, t_ns))
            self.delivered_ns[packet.packet_id] = t_ns
            self._emit_trace(t_ns, "deliver", packet.packet_id, node)
            return
        if packet.late and self.scenario.options.drop_late:
            packet.dropped = True
            packet.drop_reason = "late"
            packet.hops.append(HopRecord(node, None, t_ns))
            self._emit_trace(t_ns, "drop", packet.packet_id, node)
            return
        link_id = spec.path[hop_index]
        port = self.ports[link_id]
        hop = HopRecord(node, link_id, t_ns)
        packet.hops.append(hop)
        eligibility = port.enqueue(packet, t_ns)
        if eligibility is None:
            self._emit_trace(t_ns, "drop", packet.packet_id, link_id)
            return
        hop.eligible_ns = eligibility
        self._emit_trace(t_ns, "enqueue", packet.packet_id, link_id)
        self._emit_trace(eligibility, "eligible", packet.packet_id, link_id)
        key = (link_id, eligibility)
        if key not in self._boundary_scheduled:
            self._boundary_scheduled.add(key)
            self._push(eligibility, CAT_BOUNDARY, 0, link_id)

    def _try_start(self, port: OutputPort, t_ns: int):
        if t_ns < port.busy_until:
            return
        packet = port.select_next(t_ns)
        if packet is None:
            return
        completion = port.transmit(packet, t_ns)
        self._emit_trace(t_ns, "tx_start", packet.packet_id, port.link_id)
        self._emit_trace(completion, "tx_end", packet.packet_id, port.link_id)
        self._push(completion, CAT_COMPLETE, packet.packet_id, (packet, port.link_id))

    # -- results ------------------------------------------------------------

    def _collect(self) -> Metrics:
        scenario = self.scenario
        link_class = {}
        for link_id, port in sorted(self.ports.items()):
            for cid in port.class_ids:
                link_class[(link_id, cid)] = LinkClassStats(
                    link_id=link_id,
                    class_id=cid,
                    budget_bits=self.budgets[link_id][cid].budget_bits,
                    peak_occupancy_bits=port.peak_occupancy_bits[cid],
                    overflow_drops=port.overflow_drops[cid],
                )
        return Metrics(
            classes=list(scenario.classes),
            horizon_ns=scenario.horizon_ns,
            warm_up_ns=scenario.warm_up_ns,
            admission={cid: dec for cid, dec in self.admission.items()},
            packets=list(self.packets),
            delivered_ns=dict(self.delivered_ns),
            link_class=link_class,
            frame_overruns={
                link_id: port.frame_overruns for link_id, port in sorted(self.ports.items())
            },
            utilization={
                link_id: port.busy_ns / scenario.horizon_ns
                for link_id, port in sorted(self.ports.items())
            },
        )


def run(scenario: Scenario, seed: int | None = None, record_trace: bool = False) -> Metrics:
    """Simulate a scenario from t=0 to its horizon and return the metrics."""
    return Engine(scenario, seed=seed, record_trace=record_trace).run()
