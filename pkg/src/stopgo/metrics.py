"""Measurement collection and reporting.

Per-packet hop timelines come out of the engine; this module turns them into
the analytic delay envelope (per class: hops*f minimum, 2*hops*f maximum
queuing delay), a bound-compliance report, a per-hop CSV and a plain-text
summary table.

The analytic minimum is an envelope figure only: with favorable phases a
packet can queue for less than one frame per hop, so only the maximum is a
hard assertion.  Delays are integer nanoseconds; tables render milliseconds
with 3 decimals.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .admission import AdmissionDecision
from .framing import NS_PER_MS, TrafficClass
from .scheduling import Packet

CSV_COLUMNS = [
    "packet_id", "class", "hop", "arrival_ns", "eligible_ns",
    "departure_ns", "e2e_ns", "late", "dropped",
]


@dataclass(frozen=True)
class LinkClassStats:
    link_id: str
    class_id: int
    budget_bits: int
    peak_occupancy_bits: int
    overflow_drops: int


@dataclass
class Metrics:
    classes: list[TrafficClass]
    horizon_ns: int
    warm_up_ns: int
    admission: dict[int, AdmissionDecision]
    packets: list[Packet]
    delivered_ns: dict[int, int]            # packet_id -> delivery time
    link_class: dict[tuple[str, int], LinkClassStats]
    frame_overruns: dict[str, int]
    utilization: dict[str, float]

    def generated(self) -> int:
        return len(self.packets)

    def delivered(self) -> int:
        return len(self.delivered_ns)

    def dropped(self) -> int:
        return sum(1 for p in self.packets if p.dropped)

    def in_flight(self) -> int:
        return self.generated() - self.delivered() - self.dropped()

    def late_count(self) -> int:
        return sum(1 for p in self.packets if p.late)

    def overflow_total(self) -> int:
        return sum(s.overflow_drops for s in self.link_class.values())

    def overrun_total(self) -> int:
        return sum(self.frame_overruns.values())

    def fully_admitted(self) -> bool:
        return all(d.admitted for d in self.admission.values())

    def analyzed(self) -> list[Packet]:
        """Packets counted by statistics: created at or after the warm-up."""
        return [p for p in self.packets if p.creation_ns >= self.warm_up_ns]


def queuing_delays(packet: Packet) -> list[int]:
    """Per-hop queuing delay (departure - arrival) for completed transit hops."""
    return [
        h.departure_ns - h.arrival_ns
        for h in packet.hops
        if h.link_id is not None and h.departure_ns is not None
    ]


def delay_bounds(cls: TrafficClass, hops: int) -> tuple[int, int]:
    """Analytic queuing-delay envelope over a path: (hops*f, 2*hops*f) ns.

    Excludes link latency and reflects the per-node rule: up to one frame of
    eligibility wait plus transmission inside the following frame.
    """
    if hops < 0:
        raise ValueError(f"hops must be >= 0, got {hops}")
    return hops * cls.frame_ns, 2 * hops * cls.frame_ns


@dataclass(frozen=True)
class BoundViolation:
    packet_id: int
    class_id: int
    kind: str              # "per-hop" | "path-total" | "eligibility-wait"
    link_id: str | None
    delay_ns: int
    limit_ns: int


@dataclass
class ClassDelayStats:
    class_id: int
    delivered: int = 0
    min_total_ns: int | None = None
    max_total_ns: int | None = None
    sum_total_ns: int = 0
    max_per_hop_ns: int = 0
    max_hops: int = 0

    def mean_total_ns(self) -> float | None:
        return self.sum_total_ns / self.delivered if self.delivered else None


@dataclass
class BoundReport:
    violations: list[BoundViolation] = field(default_factory=list)
    per_class: dict[int, ClassDelayStats] = field(default_factory=dict)

    def ok(self) -> bool:
        return not self.violations


def verify_bounds(metrics: Metrics) -> BoundReport:
    """Check every delivered packet against the stop-and-go delay bounds.

    Per hop: eligibility wait in (0, frame] and queuing delay <= 2*frame.
    Per path: summed queuing delay <= 2*hops*frame.  Expected empty for
    admitted scenarios.
    """
    frames = {c.class_id: c.frame_ns for c in metrics.classes}
    report = BoundReport(per_class={c.class_id: ClassDelayStats(c.class_id)
                                    for c in metrics.classes})
    for packet in metrics.analyzed():
        frame = frames[packet.class_id]
        stats = report.per_class[packet.class_id]
        for hop in packet.hops:
            if hop.link_id is None:
                continue
            if hop.eligible_ns is not None:
                wait = hop.eligible_ns - hop.arrival_ns
                if not 0 < wait <= frame:
                    report.violations.append(BoundViolation(
                        packet.packet_id, packet.class_id, "eligibility-wait",
                        hop.link_id, wait, frame))
        if packet.packet_id not in metrics.delivered_ns:
            continue
        delays = queuing_delays(packet)
        total = sum(delays)
        stats.delivered += 1
        stats.sum_total_ns += total
        stats.max_hops = max(stats.max_hops, len(delays))
        stats.min_total_ns = total if stats.min_total_ns is None else min(stats.min_total_ns, total)
        stats.max_total_ns = total if stats.max_total_ns is None else max(stats.max_total_ns, total)
        for hop, delay in zip([h for h in packet.hops if h.link_id is not None], delays):
            stats.max_per_hop_ns = max(stats.max_per_hop_ns, delay)
            if delay > 2 * frame:
                report.violations.append(BoundViolation(
                    packet.packet_id, packet.class_id, "per-hop",
                    hop.link_id, delay, 2 * frame))
        if total > 2 * len(delays) * frame:
            report.violations.append(BoundViolation(
                packet.packet_id, packet.class_id, "path-total",
                None, total, 2 * len(delays) * frame))
    return report


# -- CSV ---------------------------------------------------------------------

def csv_rows(metrics: Metrics) -> list[tuple]:
    """One row per hop record, in packet-id then hop order.

    Missing times (never eligible, never departed, not delivered) are empty.
    """
    rows = []
    for packet in metrics.packets:
        e2e = metrics.delivered_ns.get(packet.packet_id)
        e2e = e2e - packet.creation_ns if e2e is not None else None
        for hop_index, hop in enumerate(packet.hops):
            rows.append((
                packet.packet_id,
                packet.class_id,
                hop_index,
                hop.arrival_ns,
                hop.eligible_ns,
                hop.departure_ns,
                e2e,
                int(packet.late),
                int(packet.dropped),
            ))
    return rows


def write_csv(metrics: Metrics, destination: str | Path) -> Path:
    destination = Path(destination)
    try:
        with destination.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for row in csv_rows(metrics):
                writer.writerow(["" if v is None else v for v in row])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {destination}: {exc}") from exc
    return destination


def read_csv(path: str | Path) -> list[tuple]:
    """Inverse of write_csv: returns rows with the same types as csv_rows."""
    rows = []
    with Path(path).open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        for raw in reader:
            rows.append(tuple(None if v == "" else int(v) for v in raw))
    return rows


def counts_from_rows(rows: list[tuple]) -> dict[str, int]:
    """Recompute the headline counters from raw CSV rows (summary oracle)."""
    by_packet: dict[int, list[tuple]] = {}
    for row in rows:
        by_packet.setdefault(row[0], []).append(row)
    generated = len(by_packet)
    delivered = sum(1 for rows_ in by_packet.values() if rows_[0][6] is not None)
    dropped = sum(1 for rows_ in by_packet.values() if rows_[0][8])
    late = sum(1 for rows_ in by_packet.values() if rows_[0][7])
    return {
        "generated": generated,
        "delivered": delivered,
        "dropped": dropped,
        "in_flight": generated - delivered - dropped,
        "late": late,
    }


# -- summary -----------------------------------------------------------------

def _ms(value_ns) -> str:
    if value_ns is None:
        return "-"
    return f"{value_ns / NS_PER_MS:.3f}"


def render_summary(metrics: Metrics, report: BoundReport | None = None) -> str:
    """Plain-text summary: headline counts, admission echo, per-class delays
    against the analytic envelope, buffer budgets and occupancy peaks."""
    if report is None:
        report = verify_bounds(metrics)
    lines = []
    lines.append("== counts ==")
    lines.append(
        f"generated={metrics.generated()} delivered={metrics.delivered()} "
        f"dropped={metrics.dropped()} in_flight={metrics.in_flight()} "
        f"late={metrics.late_count()}"
    )
    lines.append(
        f"overflow_drops={metrics.overflow_total()} "
        f"frame_overruns={metrics.overrun_total()} "
        f"bound_violations={len(report.violations)}"
    )
    lines.append("")
    lines.append("== admission ==")
    if not metrics.admission:
        lines.append("no connections")
    for conn_id in sorted(metrics.admission):
        decision = metrics.admission[conn_id]
        if decision.admitted:
            lines.append(f"connection {conn_id}: admitted")
        else:
            where = f" link={decision.link_id}" if decision.link_id else ""
            which = f" j={decision.class_index}" if decision.class_index else ""
            lines.append(f"connection {conn_id}: rejected ({decision.reason}{where}{which})")
    lines.append("")
    lines.append("== queuing delay per class (ms) ==")
    lines.append("class  frame     observed min/mean/max   envelope min/max (hops)")
    for cls in metrics.classes:
        stats = report.per_class.get(cls.class_id)
        if stats is None or stats.delivered == 0:
            lines.append(f"{cls.class_id:<6} {_ms(cls.frame_ns):<9} no delivered packets")
            continue
        lo, hi = delay_bounds(cls, stats.max_hops)
        mean = stats.mean_total_ns()
        lines.append(
            f"{cls.class_id:<6} {_ms(cls.frame_ns):<9} "
            f"{_ms(stats.min_total_ns)}/{mean / NS_PER_MS:.3f}/{_ms(stats.max_total_ns):<12} "
            f"{_ms(lo)}/{_ms(hi)} ({stats.max_hops})"
        )
    lines.append("")
    lines.append("== buffers (bits) ==")
    lines.append("link         class  budget      peak        overflow")
    for (link_id, class_id), stats in sorted(metrics.link_class.items()):
        lines.append(
            f"{link_id:<12} {class_id:<6} {stats.budget_bits:<11} "
            f"{stats.peak_occupancy_bits:<11} {stats.overflow_drops}"
        )
    lines.append("")
    lines.append("== link utilization ==")
    for link_id in sorted(metrics.utilization):
        lines.append(f"{link_id}: {metrics.utilization[link_id]:.4f}")
    return "\n".join(lines) + "\n"


def emit(metrics: Metrics, format: str, destination: str | Path) -> Path:
    """Write metrics as 'csv' or 'summary' to a file path."""
    if format == "csv":
        return write_csv(metrics, destination)
    if format == "summary":
        destination = Path(destination)
        try:
            destination.write_text(render_summary(metrics))
        except OSError as exc:
            raise OSError(f"cannot write summary to {destination}: {exc}") from exc
        return destination
    raise ValueError(f"unknown format {format!r} (expected 'csv' or 'summary')")
