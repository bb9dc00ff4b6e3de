"""Evaluation metrics: delivery ratio, mean delay, power, and t-based CIs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .config import SimParams


class MetricUndefinedError(ValueError):
    """Metric has no value for this run (nothing sent / delivered)."""


@dataclass
class EnergyLedger:
    """Seconds spent per radio/CPU state; low-power mode is the residual."""

    tx_s: float = 0.0
    rx_s: float = 0.0
    cpu_s: float = 0.0

    def lpm_s(self, elapsed_s: float) -> float:
        return max(0.0, elapsed_s - self.tx_s - self.rx_s - self.cpu_s)

    def energy_mj(self, elapsed_s: float, params: SimParams) -> float:
        return (self.tx_s * params.p_tx_mw
                + self.rx_s * params.p_rx_mw
                + self.cpu_s * params.p_cpu_mw
                + self.lpm_s(elapsed_s) * params.p_lpm_mw)

    def power_mw(self, elapsed_s: float, params: SimParams) -> float:
        if elapsed_s <= 0:
            raise ValueError("elapsed time must be positive")
        return self.energy_mj(elapsed_s, params) / elapsed_s


@dataclass
class RunCounters:
    """Raw per-run observations the metrics are computed from."""

    sent_per_node: dict = field(default_factory=dict)
    received_at_root: int = 0
    delays: list = field(default_factory=list)
    ledgers: dict = field(default_factory=dict)       # node_id -> EnergyLedger
    client_ids: list = field(default_factory=list)
    n_blacklisted: int = 0
    rt_occupancy_timeline: list = field(default_factory=list)  # (t, max occupancy)
    control_transmissions: int = 0
    dao_path_transmissions: int = 0
    data_transmissions: int = 0
    status_drops: int = 0
    root_admission_drops: int = 0
    link_losses: int = 0
    decode_errors: int = 0
    forged_acked: int = 0
    forged_nacked: int = 0
    genuine_acked: int = 0
    genuine_nacked: int = 0

    def total_sent(self) -> int:
        return sum(self.sent_per_node.values())

    def rt_peak(self) -> int:
        return max((occ for _, occ in self.rt_occupancy_timeline), default=0)


def pdr(counters: RunCounters) -> float:
    sent = counters.total_sent()
    if sent == 0:
        raise MetricUndefinedError("no data packets were sent")
    return counters.received_at_root / sent


def ae2ed(counters: RunCounters) -> float:
    if not counters.delays:
        raise MetricUndefinedError("no data packets were delivered")
    return float(sum(counters.delays) / len(counters.delays))


def apc(counters: RunCounters, elapsed_s: float, params: SimParams) -> float:
    """Mean power over legitimate clients (attacker and root excluded)."""
    if elapsed_s <= 0:
        raise ValueError("elapsed time must be positive")
    powers = [counters.ledgers[i].power_mw(elapsed_s, params)
              for i in counters.client_ids]
    if not powers:
        raise MetricUndefinedError("no client ledgers")
    return float(sum(powers) / len(powers))


def aggregate_ci(values: list[float], confidence: float = 0.95) -> tuple[float, float]:
    """Mean and Student-t half-width across per-seed values."""
    n = len(values)
    if n < 2:
        raise ValueError("need at least two values for a confidence interval")
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1))
    t = float(stats.t.ppf((1 + confidence) / 2, n - 1))
    return mean, t * sd / math.sqrt(n)
