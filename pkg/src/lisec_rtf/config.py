"""All tunable protocol and simulation constants in one place.

Values mirror the desk-scale experiment defaults: 200 m grid, 50 m unit-disk
radio, hop-count ranks with MRHOF-style hysteresis, Z1-class power numbers.
Nothing in the simulator reads a constant that is not on this object.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class SimParams:
    # rank / parent selection
    min_rank: int = 256
    rank_increase: int = 256
    hysteresis: int = 128
    max_rank: int = 0xFFFF

    # storing-mode routing
    rt_cap: int = 16              # route entries per client router
    root_rt_cap: int = 128        # border router is resource-rich but finite; 0 = unbounded
    route_lifetime_s: float = 0.0  # 0 = entries persist for the whole run
    dao_period_s: float = 60.0    # registration refresh
    reg_lifetime_s: float = 120.0  # client registration valid this long past an ACK

    # trickle
    trickle_imin_s: float = 4.0
    trickle_doublings: int = 8
    trickle_k: int = 3

    # joining and data plane
    dis_period_s: float = 10.0
    data_period_s: float = 30.0
    data_bytes: int = 30
    dio_bytes: int = 24
    dis_bytes: int = 8

    # attacker
    attack_period_s: float = 30.0
    forged_per_period: int = 4
    attacker_self_dao_delay_s: float = 1.0  # registers itself after the first volley

    # radio
    tx_range_m: float = 50.0
    loss_prob: float = 0.0
    d_hop_s: float = 0.005        # per-hop propagation + MAC delay
    bitrate_bps: float = 250_000.0

    # energy (Z1-class engineering defaults, config-overridable)
    p_tx_mw: float = 52.2
    p_rx_mw: float = 56.4
    p_cpu_mw: float = 1.8
    p_lpm_mw: float = 0.0545
    cpu_per_packet_s: float = 0.0005

    # world
    grid_m: float = 200.0
    mobility_tick_s: float = 1.0
    speed_min_mps: float = 1.0
    speed_max_mps: float = 2.0
    pause_s: float = 0.0
    duration_s: float = 1800.0
    startup_stagger_s: float = 900.0   # clients power on uniformly in [0, stagger]
    attacker_start_window_s: float = 30.0
    data_warmup_s: float = 1200.0      # PDR/AE2ED measured from here to duration
    rt_sample_period_s: float = 30.0

    # licensing
    license_width: int = 8
    shared_key_bytes: int = 16

    def trickle_cap_s(self) -> float:
        return self.trickle_imin_s * (1 << self.trickle_doublings)

    def airtime_s(self, n_bytes: int) -> float:
        return n_bytes * 8.0 / self.bitrate_bps


@dataclass(frozen=True)
class ArmFlags:
    """What a comparison arm switches on."""

    name: str
    attack: bool
    defense: bool
    encrypted: bool = False


ARMS = {
    "baseline": ArmFlags("baseline", attack=False, defense=False),
    "attack": ArmFlags("attack", attack=True, defense=False),
    "defense": ArmFlags("defense", attack=True, defense=True),
    "defense_encrypted": ArmFlags("defense_encrypted", attack=True, defense=True,
                                  encrypted=True),
}
