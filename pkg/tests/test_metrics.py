from fractions import Fraction

import pytest

import stopgo
from stopgo.framing import NS_PER_MS, TrafficClass
from stopgo.metrics import (
    Metrics,
    counts_from_rows,
    csv_rows,
    delay_bounds,
    read_csv,
    render_summary,
    verify_bounds,
    write_csv,
)
from stopgo.scenario import from_dict, load
from paths import FIVE_HOP, BUFFER_ALLOC

MS = NS_PER_MS


class TestDelayBounds:
    @pytest.mark.parametrize("frame_ms,expected_ms", [
        (1, (5, 10)),
        (5, (25, 50)),
        (10, (50, 100)),
    ])
    def test_five_hop_envelope(self, frame_ms, expected_ms):
        cls = TrafficClass(1, frame_ms * MS)
        assert delay_bounds(cls, 5) == (expected_ms[0] * MS, expected_ms[1] * MS)

    def test_zero_hops(self):
        assert delay_bounds(TrafficClass(1, 10 * MS), 0) == (0, 0)

    def test_negative_hops_rejected(self):
        with pytest.raises(ValueError):
            delay_bounds(TrafficClass(1, MS), -1)


def empty_metrics():
    return Metrics(
        classes=[TrafficClass(1, MS)], horizon_ns=MS, warm_up_ns=0,
        admission={}, packets=[], delivered_ns={}, link_class={},
        frame_overruns={}, utilization={},
    )


def test_verify_bounds_empty_metrics_empty_report():
    report = verify_bounds(empty_metrics())
    assert report.ok()
    assert report.per_class[1].delivered == 0


def test_admitted_run_has_no_violations():
    metrics = stopgo.run(load(FIVE_HOP))
    assert metrics.fully_admitted()
    report = verify_bounds(metrics)
    assert report.ok()
    assert metrics.overrun_total() == 0
    for cls in metrics.classes:
        stats = report.per_class[cls.class_id]
        if stats.delivered:
            _, hard_max = delay_bounds(cls, stats.max_hops)
            assert stats.max_total_ns <= hard_max
            assert stats.max_per_hop_ns <= 2 * cls.frame_ns


def over_admitted_scenario():
    # 1.6 Mb/s of class-1 traffic into a 1 Mb/s link: eligible bits pile up
    return from_dict({
        "schema_version": 1, "max_packet_size_bits": 14_000,
        "classes": [{"class_id": 1, "frame_ms": 1, "bandwidth_fraction": 0.5},
                    {"class_id": 2, "frame_ms": 5, "bandwidth_fraction": 0.2}],
        "topology": {"nodes": ["a", "b"], "links": [
            {"link_id": "ab", "src": "a", "dst": "b", "capacity_bps": 1_000_000,
             "latency_ns": 0}]},
        "connections": [
            {"connection_id": 1, "class_id": 1, "rate_bps": 800_000,
             "packet_size_bits": 400, "path": ["ab"]},
            {"connection_id": 2, "class_id": 1, "rate_bps": 800_000,
             "packet_size_bits": 400, "path": ["ab"]},
        ],
        "horizon_ms": 100,
        "buffer_y": 50,
        "options": {"bypass_admission": True},
    })


def test_over_admitted_scenario_shows_overruns_or_violations():
    metrics = stopgo.run(over_admitted_scenario())
    assert not metrics.fully_admitted()
    report = verify_bounds(metrics)
    assert metrics.overrun_total() > 0 or not report.ok()


def test_csv_round_trip(tmp_path):
    metrics = stopgo.run(load(FIVE_HOP))
    path = write_csv(metrics, tmp_path / "packets.csv")
    assert read_csv(path) == csv_rows(metrics)


def test_zero_packet_run_writes_header_only_csv(tmp_path):
    path = write_csv(empty_metrics(), tmp_path / "empty.csv")
    assert path.read_text().strip() == ("packet_id,class,hop,arrival_ns,eligible_ns,"
                                        "departure_ns,e2e_ns,late,dropped")
    assert read_csv(path) == []


def test_summary_counts_match_csv_recomputation(tmp_path):
    metrics = stopgo.run(load(FIVE_HOP))
    path = write_csv(metrics, tmp_path / "packets.csv")
    counts = counts_from_rows(read_csv(path))
    assert counts == {
        "generated": metrics.generated(),
        "delivered": metrics.delivered(),
        "dropped": metrics.dropped(),
        "in_flight": metrics.in_flight(),
        "late": metrics.late_count(),
    }


def test_summary_renders_budget_table_and_counts():
    metrics = stopgo.run(load(BUFFER_ALLOC))
    text = render_summary(metrics)
    assert "280000" in text and "400000" in text
    assert "generated=0" in text


def test_unwritable_destination_surfaces_path(tmp_path):
    metrics = empty_metrics()
    with pytest.raises(OSError, match="no/such"):
        write_csv(metrics, tmp_path / "no" / "such" / "dir.csv")
