"""Hand-placed nine-node topology that tells the overflow story end to end.

Node b sits next to the root with a two-entry routing table.  The malicious
child d floods b with registrations for nonexistent children, so the late
joiner h (below e) cannot be registered while the network is undefended.
With license checks on, the border router refuses the forged registrations,
b purges them and blacklists d once d's own unregistered DAO bounces, and h
registers normally.
"""

from __future__ import annotations

from .config import ARMS, SimParams
from .engine import World
from .node import NodeRole

# unit-disk links (range 50): root-a, root-b, a-c, c-f, c-g, b-d, b-e, e-h
_LAYOUT = {
    "root": (100.0, 100.0),
    "a": (60.0, 100.0),
    "b": (140.0, 100.0),
    "c": (20.0, 100.0),
    "d": (140.0, 60.0),
    "e": (180.0, 100.0),
    "f": (20.0, 60.0),
    "g": (20.0, 140.0),
    "h": (180.0, 140.0),
}
_STARTS = {"e": 30.0, "h": 60.0}  # everyone else powers on at t=0
_B_TABLE_CAP = 2


def overflow_world(arm_name: str, trace: bool = False) -> World:
    params = SimParams(duration_s=120.0, startup_stagger_s=0.0,
                       data_warmup_s=0.0, data_period_s=1e9,
                       forged_per_period=2, attack_period_s=30.0)
    world = World(params, ARMS[arm_name], seed=42, trace=trace)
    for node_id, pos in _LAYOUT.items():
        if node_id == "root":
            role = NodeRole.ROOT
        elif node_id == "d":
            role = NodeRole.MALICIOUS
        else:
            role = NodeRole.CLIENT
        cap = _B_TABLE_CAP if node_id == "b" else None
        world.add_node(node_id, role, pos, start_time=_STARTS.get(node_id, 0.0),
                       rt_cap=cap)
    # d was reprogrammed after capture and holds no valid registration
    world.provision(skip={"d"})
    return world


def run_overflow_demo(arm_name: str, trace: bool = False) -> dict:
    world = overflow_world(arm_name, trace=trace)
    counters = world.run()
    b = world.nodes["b"]
    d = world.nodes["d"]
    forged_targets = [t for t in b.routing if t[0] == 0xFE]
    forged_anywhere = any(t[0] == 0xFE for n in world.nodes.values()
                          for t in n.routing)
    return {
        "arm": arm_name,
        "h_registered": "h" in world.ever_registered,
        "e_registered": "e" in world.ever_registered,
        "b_table_size": len(b.routing),
        "b_forged_entries": len(forged_targets),
        "forged_routes_anywhere": forged_anywhere,
        "d_blacklisted_at_b": d.address in b.blacklist,
        "forged_acked": counters.forged_acked,
        "forged_nacked": counters.forged_nacked,
        "world": world,
    }
