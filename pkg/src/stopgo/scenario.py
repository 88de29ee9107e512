"""Scenario schema: the single canonical, versioned input format.

A scenario is a YAML document (conventionally ``*.scenario``) with
``schema_version: 1``.  It describes traffic classes, the topology, frame
phases, connections with their constant-rate generators, buffer constants and
run options.  Loading validates every invariant and reports each violation
with the path of the offending field.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .admission import AdmissionDecision, Connection, LinkLoad, admit_all
from .buffering import BufferBudget, budgets_for_link
from .errors import ScenarioError
from .framing import NS_PER_MS, TrafficClass, validate_classes

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Link:
    link_id: str
    src: str
    dst: str
    capacity_bps: int
    latency_ns: int


@dataclass(frozen=True)
class Topology:
    nodes: tuple[str, ...]
    links: dict[str, Link]


@dataclass(frozen=True)
class ConnectionSpec:
    """A connection plus its constant-rate generator parameters."""

    connection_id: int
    class_id: int
    rate_bps: int
    path: tuple[str, ...]
    packet_size_bits: int
    deadline_ns: int          # end-to-end, relative to creation
    start_ns: int = 0
    stop_ns: int | None = None
    offset_ns: int = 0        # shift of the first nominal emission

    def as_connection(self) -> Connection:
        return Connection(self.connection_id, self.class_id, self.rate_bps, self.path)


@dataclass(frozen=True)
class Options:
    drop_late: bool = False
    bypass_admission: bool = False


@dataclass
class Scenario:
    classes: list[TrafficClass]
    max_packet_size_bits: int
    topology: Topology
    connections: list[ConnectionSpec]
    horizon_ns: int
    warm_up_ns: int = 0
    phase_default_ns: int = 0
    phase_seed: int | None = None
    phase_overrides: dict[tuple[str, int], int] = field(default_factory=dict)
    y_default: Fraction = Fraction(2)
    y_overrides: dict[tuple[str, int], Fraction] = field(default_factory=dict)
    options: Options = field(default_factory=Options)

    def resolve_phases(self, seed_override: int | None = None) -> dict[tuple[str, int], int]:
        """Phase of every (link, class) departing clock, in nanoseconds.

        Explicit overrides win; otherwise a seeded RNG draws a phase in
        [0, frame) per (link, class), or the default applies.  Iteration order
        is sorted so a given seed always yields the same phases.
        """
        seed = seed_override if seed_override is not None else self.phase_seed
        rng = random.Random(seed) if seed is not None else None
        phases = {}
        for link_id in sorted(self.topology.links):
            for cls in self.classes:
                key = (link_id, cls.class_id)
                if key in self.phase_overrides:
                    phases[key] = self.phase_overrides[key] % cls.frame_ns
                elif rng is not None:
                    phases[key] = rng.randrange(cls.frame_ns)
                else:
                    phases[key] = self.phase_default_ns % cls.frame_ns
        return phases

    def budgets(self) -> dict[str, dict[int, BufferBudget]]:
        out = {}
        for link_id, link in sorted(self.topology.links.items()):
            y_of = {
                cls.class_id: self.y_overrides.get((link_id, cls.class_id), self.y_default)
                for cls in self.classes
            }
            out[link_id] = budgets_for_link(link_id, link.capacity_bps, self.classes, y_of)
        return out

    def evaluate_admission(self) -> tuple[dict[int, AdmissionDecision], dict[str, LinkLoad]]:
        capacities = {l.link_id: l.capacity_bps for l in self.topology.links.values()}
        return admit_all(
            [c.as_connection() for c in self.connections],
            capacities,
            self.classes,
            self.max_packet_size_bits,
        )


def _duration_ns(raw: dict, base: str, problems: list[str], path: str, *, required=True, default=None):
    """Accept either <base>_ns (integer) or <base>_ms (exact decimal)."""
    if f"{base}_ns" in raw:
        value = raw[f"{base}_ns"]
        if not isinstance(value, int) or isinstance(value, bool):
            problems.append(f"{path}.{base}_ns: must be an integer nanosecond count")
            return default
        return value
    if f"{base}_ms" in raw:
        try:
            exact = Fraction(str(raw[f"{base}_ms"])) * NS_PER_MS
        except (ValueError, ZeroDivisionError):
            problems.append(f"{path}.{base}_ms: not a number")
            return default
        if exact.denominator != 1:
            problems.append(f"{path}.{base}_ms: not an integer number of nanoseconds")
            return default
        return int(exact)
    if required:
        problems.append(f"{path}.{base}_ns: missing")
    return default


def _require_int(raw, key, problems, path, *, minimum=None):
    value = raw.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        problems.append(f"{path}.{key}: must be an integer")
        return None
    if minimum is not None and value < minimum:
        problems.append(f"{path}.{key}: must be >= {minimum}, got {value}")
        return None
    return value


def load(path: str | Path) -> Scenario:
    """Parse and validate a scenario file; raises ScenarioError listing every
    violation found, each with the offending field path."""
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("parse error: scenario must be a mapping, got "
                            f"{type(raw).__name__ if raw is not None else 'empty file'}")
    return from_dict(raw)


def from_dict(raw: dict) -> Scenario:
    problems: list[str] = []

    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ScenarioError(
            f"schema_version: expected {SCHEMA_VERSION}, got {raw.get('schema_version')!r}"
        )

    # classes
    classes = []
    for idx, item in enumerate(raw.get("classes") or []):
        path = f"classes[{idx}]"
        cid = _require_int(item, "class_id", problems, path, minimum=1)
        frame = _duration_ns(item, "frame", problems, path)
        frac = Fraction(0)
        if "bandwidth_fraction" in item:
            try:
                frac = Fraction(str(item["bandwidth_fraction"]))
            except (ValueError, ZeroDivisionError):
                problems.append(f"{path}.bandwidth_fraction: not a number")
        if cid is not None and frame is not None and frame > 0 and 0 <= frac <= 1:
            classes.append(TrafficClass(cid, frame, frac))
        elif frame is not None and frame <= 0:
            problems.append(f"{path}.frame: must be positive")
        elif not 0 <= frac <= 1:
            problems.append(f"{path}.bandwidth_fraction: must be in [0, 1]")
    if not (raw.get("classes") or []):
        problems.append("classes: at least one traffic class is required")
    if classes and not problems:
        try:
            classes = validate_classes(classes)
        except Exception as exc:
            problems.append(f"classes: {exc}")
    class_ids = {c.class_id for c in classes}
    frames = {c.class_id: c.frame_ns for c in classes}

    max_packet = _require_int(raw, "max_packet_size_bits", problems, "scenario", minimum=1)

    # topology
    topo_raw = raw.get("topology") or {}
    nodes = tuple(topo_raw.get("nodes") or [])
    if not nodes:
        problems.append("topology.nodes: must list at least one node")
    if len(set(nodes)) != len(nodes):
        problems.append("topology.nodes: duplicate node ids")
    links: dict[str, Link] = {}
    for idx, item in enumerate(topo_raw.get("links") or []):
        path = f"topology.links[{idx}]"
        link_id = item.get("link_id")
        if not isinstance(link_id, str) or not link_id:
            problems.append(f"{path}.link_id: must be a non-empty string")
            continue
        if link_id in links:
            problems.append(f"{path}.link_id: duplicate link id {link_id!r}")
            continue
        src, dst = item.get("src"), item.get("dst")
        for end, name in ((src, "src"), (dst, "dst")):
            if end not in nodes:
                problems.append(f"{path}.{name}: unknown node {end!r}")
        capacity = _require_int(item, "capacity_bps", problems, path, minimum=1)
        latency = _duration_ns(item, "latency", problems, path, required=False, default=0)
        if capacity is not None and latency is not None and latency >= 0 \
                and src in nodes and dst in nodes:
            links[link_id] = Link(link_id, src, dst, capacity, latency)
        elif latency is not None and latency < 0:
            problems.append(f"{path}.latency_ns: must be >= 0")

    # connections
    connections: list[ConnectionSpec] = []
    horizon = _duration_ns(raw, "horizon", problems, "scenario")
    if horizon is not None and horizon <= 0:
        problems.append("scenario.horizon_ns: must be positive")
    warm_up = _duration_ns(raw, "warm_up", problems, "scenario", required=False, default=0)
    seen_conn_ids = set()
    for idx, item in enumerate(raw.get("connections") or []):
        path = f"connections[{idx}]"
        conn_id = _require_int(item, "connection_id", problems, path)
        if conn_id in seen_conn_ids:
            problems.append(f"{path}.connection_id: duplicate id {conn_id}")
            continue
        seen_conn_ids.add(conn_id)
        cid = _require_int(item, "class_id", problems, path, minimum=1)
        rate = _require_int(item, "rate_bps", problems, path, minimum=0)
        size = _require_int(item, "packet_size_bits", problems, path, minimum=1)
        conn_path = tuple(item.get("path") or [])
        if cid is not None and classes and cid not in class_ids:
            problems.append(f"{path}.class_id: unknown class {cid}")
            cid = None
        if not conn_path:
            problems.append(f"{path}.path: must list at least one link")
        else:
            ok_path = True
            for link_id in conn_path:
                if link_id not in links:
                    problems.append(f"{path}.path: unknown link id {link_id!r}")
                    ok_path = False
            if ok_path:
                visited = [links[conn_path[0]].src]
                for a, b in zip(conn_path, conn_path[1:]):
                    if links[a].dst != links[b].src:
                        problems.append(
                            f"{path}.path: links {a!r} and {b!r} are not consecutive"
                        )
                        ok_path = False
                for link_id in conn_path:
                    visited.append(links[link_id].dst)
                if ok_path and len(set(visited)) != len(visited):
                    problems.append(f"{path}.path: path revisits a node (loop)")
            if not ok_path:
                conn_path = ()
        if max_packet is not None and size is not None and size > max_packet:
            problems.append(
                f"{path}.packet_size_bits: {size} exceeds max_packet_size_bits {max_packet}"
            )
        start = _duration_ns(item, "start", problems, path, required=False, default=0)
        stop = _duration_ns(item, "stop", problems, path, required=False, default=None)
        offset = _duration_ns(item, "offset", problems, path, required=False, default=0)
        deadline = _duration_ns(item, "deadline", problems, path, required=False, default=None)
        if None in (conn_id, cid, rate, size) or not conn_path:
            continue
        if deadline is None and cid in frames:
            # default: the analytic end-to-end envelope, 2 * hops * frame
            deadline = 2 * len(conn_path) * frames[cid]
        if rate > 0 and cid in frames:
            # a packet must fit the per-frame budget or it can never be emitted
            if size * 1_000_000_000 > rate * frames[cid]:
                problems.append(
                    f"{path}.packet_size_bits: {size} bits exceeds the per-frame "
                    f"budget rate*frame of connection {conn_id}"
                )
                continue
        connections.append(
            ConnectionSpec(conn_id, cid, rate, conn_path, size,
                           deadline if deadline is not None else 0,
                           start or 0, stop, offset or 0)
        )

    # phases
    phases_raw = raw.get("phases") or {}
    phase_default = _duration_ns(phases_raw, "default", problems, "phases",
                                 required=False, default=0)
    phase_seed = phases_raw.get("seed")
    if phase_seed is not None and not isinstance(phase_seed, int):
        problems.append("phases.seed: must be an integer or null")
        phase_seed = None
    phase_overrides = {}
    for idx, item in enumerate(phases_raw.get("overrides") or []):
        path = f"phases.overrides[{idx}]"
        link_id = item.get("link_id")
        cid = _require_int(item, "class_id", problems, path, minimum=1)
        value = _duration_ns(item, "phase", problems, path)
        if link_id not in links:
            problems.append(f"{path}.link_id: unknown link id {link_id!r}")
        elif cid is not None and value is not None:
            phase_overrides[(link_id, cid)] = value

    # buffer constant y
    y_raw = raw.get("buffer_y", 2)
    y_default, y_overrides = Fraction(2), {}
    if isinstance(y_raw, dict):
        try:
            y_default = Fraction(str(y_raw.get("default", 2)))
        except (ValueError, ZeroDivisionError):
            problems.append("buffer_y.default: not a number")
        for idx, item in enumerate(y_raw.get("overrides") or []):
            path = f"buffer_y.overrides[{idx}]"
            link_id = item.get("link_id")
            cid = _require_int(item, "class_id", problems, path, minimum=1)
            try:
                y_val = Fraction(str(item.get("y")))
            except (ValueError, ZeroDivisionError, TypeError):
                problems.append(f"{path}.y: not a number")
                continue
            if link_id not in links:
                problems.append(f"{path}.link_id: unknown link id {link_id!r}")
            elif cid is not None:
                y_overrides[(link_id, cid)] = y_val
    else:
        try:
            y_default = Fraction(str(y_raw))
        except (ValueError, ZeroDivisionError):
            problems.append("buffer_y: not a number")
    if y_default < 1:
        problems.append(f"buffer_y.default: must be >= 1, got {y_default}")

    opts_raw = raw.get("options") or {}
    options = Options(
        drop_late=bool(opts_raw.get("drop_late", False)),
        bypass_admission=bool(opts_raw.get("bypass_admission", False)),
    )

    if problems:
        raise ScenarioError(problems)

    return Scenario(
        classes=classes,
        max_packet_size_bits=max_packet,
        topology=Topology(nodes=nodes, links=links),
        connections=connections,
        horizon_ns=horizon,
        warm_up_ns=warm_up or 0,
        phase_default_ns=phase_default or 0,
        phase_seed=phase_seed,
        phase_overrides=phase_overrides,
        y_default=y_default,
        y_overrides=y_overrides,
        options=options,
    )
