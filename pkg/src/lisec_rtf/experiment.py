"""Experiment orchestration: one world per (arm, seed), CSV reports.

Outputs land in the chosen directory as `runs.csv` (one row per run),
`summary.csv` (per-arm mean and 95% CI half-width across seeds) and,
when tracing is on, `trace-<arm>-<seed>.log` in the shared trace format.
Seeds are offset by the LISEC_SEED_BASE environment variable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .config import ARMS
from .engine import build_random_world
from .metrics import MetricUndefinedError, aggregate_ci, ae2ed, apc, pdr
from .scenario import Scenario

RUNS_HEADER = "arm,seed,attackers,mobility,pdr,ae2ed_s,apc_mw,n_blacklist,rt_peak"
SUMMARY_HEADER = ("arm,attackers,mobility,pdr_mean,pdr_ci95,"
                  "ae2ed_s_mean,ae2ed_s_ci95,apc_mw_mean,apc_mw_ci95")


def seed_base() -> int:
    return int(os.environ.get("LISEC_SEED_BASE", "0"))


@dataclass
class RunResult:
    arm: str
    seed: int
    attackers: int
    mobility: bool
    pdr: float
    ae2ed_s: float
    apc_mw: float
    n_blacklist: int
    rt_peak: int
    counters: object = field(repr=False, default=None)
    world: object = field(repr=False, default=None)

    def csv_row(self) -> str:
        return (f"{self.arm},{self.seed},{self.attackers},"
                f"{'on' if self.mobility else 'off'},"
                f"{self.pdr:.6f},{self.ae2ed_s:.6f},{self.apc_mw:.6f},"
                f"{self.n_blacklist},{self.rt_peak}")


@dataclass
class ExperimentReport:
    rows: list
    summary: list  # dict per arm

    def arm_rows(self, arm: str) -> list:
        return [r for r in self.rows if r.arm == arm]

    def arm_mean(self, arm: str, attr: str) -> float:
        values = [getattr(r, attr) for r in self.arm_rows(arm)]
        return sum(values) / len(values)


def run_single(scenario: Scenario, arm_name: str, seed: int,
               trace: bool = False, keep_world: bool = False) -> RunResult:
    arm = ARMS[arm_name]
    # malicious nodes are placed in every arm (identical topology per seed)
    # but only emit volleys when the arm switches the attack on
    world = build_random_world(scenario.params, arm, seed,
                               n_clients=scenario.n_clients,
                               n_attackers=scenario.n_attackers,
                               mobility=scenario.mobility,
                               trace=trace)
    counters = world.run()
    try:
        delay = ae2ed(counters)
    except MetricUndefinedError:
        delay = math.nan
    return RunResult(
        arm=arm_name, seed=seed, attackers=scenario.n_attackers,
        mobility=scenario.mobility,
        pdr=pdr(counters), ae2ed_s=delay,
        apc_mw=apc(counters, scenario.params.duration_s, scenario.params),
        n_blacklist=counters.n_blacklisted, rt_peak=counters.rt_peak(),
        counters=counters, world=world if keep_world else None)


def summarize(rows: list) -> list:
    out = []
    arms_in_order = []
    for row in rows:
        if row.arm not in arms_in_order:
            arms_in_order.append(row.arm)
    for arm in arms_in_order:
        group = [r for r in rows if r.arm == arm]
        entry = {"arm": arm, "attackers": group[0].attackers,
                 "mobility": group[0].mobility}
        for attr in ("pdr", "ae2ed_s", "apc_mw"):
            values = [getattr(r, attr) for r in group
                      if not math.isnan(getattr(r, attr))]
            if len(values) >= 2:
                mean, half = aggregate_ci(values)
            elif values:
                mean, half = values[0], 0.0
            else:
                mean, half = math.nan, math.nan
            entry[f"{attr}_mean"] = mean
            entry[f"{attr}_ci95"] = half
        out.append(entry)
    return out


def run_experiment(scenario: Scenario, out_dir=None, trace: bool = False,
                   base: int | None = None) -> ExperimentReport:
    scenario.validate()
    base = seed_base() if base is None else base
    rows = []
    traces = {}
    for arm_name in scenario.effective_arms():
        for s in scenario.seeds:
            result = run_single(scenario, arm_name, base + s, trace=trace,
                                keep_world=trace)
            rows.append(result)
            if trace:
                traces[(arm_name, base + s)] = result.world.trace_lines
                result.world = None
    report = ExperimentReport(rows=rows, summary=summarize(rows))
    if out_dir is not None:
        write_report(report, traces, out_dir)
    return report


def write_report(report: ExperimentReport, traces: dict, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = [RUNS_HEADER] + [r.csv_row() for r in report.rows]
    (out / "runs.csv").write_text("\n".join(runs) + "\n", encoding="ascii")
    lines = [SUMMARY_HEADER]
    for entry in report.summary:
        lines.append(
            f"{entry['arm']},{entry['attackers']},"
            f"{'on' if entry['mobility'] else 'off'},"
            f"{entry['pdr_mean']:.6f},{entry['pdr_ci95']:.6f},"
            f"{entry['ae2ed_s_mean']:.6f},{entry['ae2ed_s_ci95']:.6f},"
            f"{entry['apc_mw_mean']:.6f},{entry['apc_mw_ci95']:.6f}")
    (out / "summary.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    for (arm, seed), trace_lines in traces.items():
        path = out / f"trace-{arm}-{seed}.log"
        path.write_text("\n".join(trace_lines) + "\n", encoding="utf-8")
