"""Command-line front end.

Subcommands:
  run <scenario> [--seed N] [--out DIR] [--csv] [--summary] [--plot]
      Admission check, simulate, emit metrics.  Exit 0 on a clean run,
      2 if bound violations, frame overruns or buffer overflows occurred,
      1 on errors.
  admit <scenario>
      Print rate/aggregate checks and the per-link per-class capacity
      constraint verdicts with exact slacks.  Exit 0 if fully admitted,
      3 if any connection is rejected.
  bounds <scenario> [--hops H]
      Analytic queuing-delay envelope per class (default H=5).
  buffers <scenario>
      Per-link per-class buffer budgets (y * D * T).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import admission as adm
from . import metrics as met
from . import simcore
from .errors import ScenarioError, StopGoError
from .framing import NS_PER_MS
from .scenario import Scenario, load


def _load(path: str) -> Scenario:
    if not Path(path).exists():
        raise ScenarioError(f"scenario file not found: {path}")
    return load(path)


def cmd_run(args) -> int:
    scenario = _load(args.scenario)
    metrics = simcore.run(scenario, seed=args.seed)
    report = met.verify_bounds(metrics)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.csv:
        met.write_csv(metrics, out_dir / "packets.csv")
    summary = met.render_summary(metrics, report)
    if args.summary:
        (out_dir / "summary.txt").write_text(summary)
    if args.plot:
        from . import report as report_mod  # matplotlib import is deferred

        report_mod.render_figures(metrics, out_dir)
    sys.stdout.write(summary)

    trouble = report.violations or metrics.overflow_total() or metrics.overrun_total()
    return 2 if trouble else 0


def cmd_admit(args) -> int:
    scenario = _load(args.scenario)
    decisions, network = scenario.evaluate_admission()
    for conn in scenario.connections:
        decision = decisions[conn.connection_id]
        if decision.admitted:
            print(f"connection {conn.connection_id}: admitted")
        else:
            where = f" link={decision.link_id}" if decision.link_id else ""
            which = f" j={decision.class_index}" if decision.class_index is not None else ""
            print(f"connection {conn.connection_id}: rejected ({decision.reason}{where}{which})")
    print()
    for link_id in sorted(network):
        load_state = network[link_id]
        total = load_state.total_load()
        agg = "ok" if adm.check_aggregate(load_state) else "FAIL"
        print(f"link {link_id}: capacity={load_state.capacity_bps} bps "
              f"load={float(total):.0f} bps aggregate={agg}")
        for verdict in adm.check_capacity_constraint(load_state, scenario.classes):
            status = "ok" if verdict.ok else "FAIL"
            print(f"  j={verdict.class_index} {status} lhs={verdict.lhs} "
                  f"rhs={verdict.rhs} slack={verdict.slack}")
    admitted = all(d.admitted for d in decisions.values())
    print()
    print("verdict: admitted" if admitted else "verdict: rejected")
    return 0 if admitted else 3


def cmd_bounds(args) -> int:
    scenario = _load(args.scenario)
    print("class  frame_ms  min_delay_ms  max_delay_ms")
    for cls in scenario.classes:
        lo, hi = met.delay_bounds(cls, args.hops)
        print(f"{cls.class_id}  {cls.frame_ns / NS_PER_MS:.3f}  "
              f"{lo / NS_PER_MS:.3f}  {hi / NS_PER_MS:.3f}")
    return 0


def cmd_buffers(args) -> int:
    scenario = _load(args.scenario)
    print("link  class  frame_ms  load_bps  y  budget_bits  budget_kilobits")
    for link_id, budgets in scenario.budgets().items():
        for class_id in sorted(budgets):
            b = budgets[class_id]
            print(f"{link_id}  {class_id}  {b.frame_ns / NS_PER_MS:.3f}  "
                  f"{float(b.load_bps):.0f}  {b.y}  {b.budget_bits}  "
                  f"{float(b.kilobits):g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stopgo",
        description="Time-framed stop-and-go scheduling: admission, buffers, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and emit metrics")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario's phase seed")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--csv", action="store_true", help="write packets.csv")
    p_run.add_argument("--summary", action="store_true", help="write summary.txt")
    p_run.add_argument("--plot", action="store_true", help="render figures")
    p_run.set_defaults(func=cmd_run)

    p_admit = sub.add_parser("admit", help="evaluate admission for a scenario")
    p_admit.add_argument("scenario")
    p_admit.set_defaults(func=cmd_admit)

    p_bounds = sub.add_parser("bounds", help="analytic delay envelope per class")
    p_bounds.add_argument("scenario")
    p_bounds.add_argument("--hops", type=int, default=5)
    p_bounds.set_defaults(func=cmd_bounds)

    p_buf = sub.add_parser("buffers", help="buffer budgets per link and class")
    p_buf.add_argument("scenario")
    p_buf.set_defaults(func=cmd_buffers)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 1
    except (StopGoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
