"""Deterministic discrete-event kernel: unit-disk radio, random-waypoint
mobility, per-node energy accounting, and the event loops that drive the
protocol handlers in `node`.

One World is one logical timeline.  Everything random flows through seeded
generators: `rng_topo` (topology and provisioning, identical across
comparison arms for a given seed), `rng_mobility` (trajectories, likewise
arm-independent) and `rng` (protocol-driven draws).  Replaying the same
seed and configuration reproduces the event trace byte for byte.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
from dataclasses import dataclass, field

from .config import ArmFlags, SimParams
from .messages import (
    DaoModified,
    DaoStatus,
    DioMessage,
    DisMessage,
    STATUS_LEN,
    encode_dao,
    format_address,
    is_forged_address,
    node_address,
)
from .metrics import EnergyLedger, RunCounters
from .node import NodeRole, NodeState
from .puf import CRDatabase, KeyedPuf


class ScheduleInPastError(ValueError):
    pass


class SetupError(RuntimeError):
    """Topology generation could not satisfy its constraints."""


DATA_HOP_LIMIT = 64
DRAIN_S = 1.0  # lets transmissions issued right at the horizon land


@dataclass(order=True)
class Event:
    time: float
    seq: int
    kind: str = field(compare=False)
    node_id: str | None = field(compare=False, default=None)
    payload: object = field(compare=False, default=None)


class DataPacket:
    __slots__ = ("src_id", "src_addr", "created", "counted", "hops")

    def __init__(self, src_id: str, src_addr: bytes, created: float, counted: bool):
        self.src_id = src_id
        self.src_addr = src_addr
        self.created = created
        self.counted = counted
        self.hops = 0


@dataclass
class RwpState:
    waypoint: tuple[float, float]
    speed: float
    pause_until: float = 0.0


class World:
    def __init__(self, params: SimParams, arm: ArmFlags, seed: int,
                 trace: bool = False):
        self.params = params
        self.arm = arm
        self.seed = seed
        self.rng_topo = random.Random(seed)
        self.rng = random.Random((seed << 16) ^ 0x5EED)
        # separate stream so trajectories match across arms at equal seed
        self.rng_mobility = random.Random((seed << 16) ^ 0x30B1)
        self.clock = 0.0
        self._queue: list[Event] = []
        self._seq = 0
        self.nodes: dict[str, NodeState] = {}
        self.by_addr: dict[bytes, NodeState] = {}
        self.positions: dict[str, tuple[float, float]] = {}
        self.start_times: dict[str, float] = {}
        self.mobility: dict[str, RwpState] = {}
        self.ledgers: dict[str, EnergyLedger] = {}
        self.db = CRDatabase(width=params.license_width)
        self.addr_to_id: dict[bytes, str] = {}
        self.counters = RunCounters()
        self.trace_enabled = trace
        self.trace_lines: list[str] = []
        self._joined: set[str] = set()
        self._trickle_wake: dict[str, float] = {}
        self.ever_registered: set[str] = set()

    # -- construction ------------------------------------------------------

    def add_node(self, node_id: str, role: NodeRole, pos: tuple[float, float],
                 start_time: float = 0.0, rt_cap: int | None = None) -> NodeState:
        address = node_address(len(self.nodes))
        node = NodeState(node_id, address, role, self.params, rt_cap=rt_cap)
        node.encrypted = self.arm.encrypted
        if self.trace_enabled:
            node.tracer = self._trace
        self.nodes[node_id] = node
        self.by_addr[address] = node
        self.positions[node_id] = pos
        self.start_times[node_id] = start_time
        self.ledgers[node_id] = EnergyLedger()
        return node

    def provision(self, skip: set[str] | None = None) -> None:
        """Registration phase: store one pair per node, hand out licenses."""
        skip = skip or set()
        for node in self.nodes.values():
            if node.role is NodeRole.ROOT or node.node_id in skip:
                continue
            secret = hashlib.blake2b(f"{self.seed}|{node.node_id}".encode(),
                                     digest_size=16).digest()
            device = KeyedPuf(node.node_id, secret, self.params.license_width)
            _, license_bits = self.db.register(node.node_id, device, self.rng_topo)
            node.license = license_bits
            self.addr_to_id[node.address] = node.node_id
            if self.arm.encrypted:
                key = self.rng_topo.randbytes(self.params.shared_key_bytes)
                self.db.assign_key(node.node_id, key)
                node.shared_key = key

    # -- event queue -------------------------------------------------------

    def schedule(self, time: float, kind: str, node_id: str | None = None,
                 payload=None) -> None:
        if time < self.clock:
            raise ScheduleInPastError(f"cannot schedule at {time} (clock {self.clock})")
        heapq.heappush(self._queue, Event(time, self._seq, kind, node_id, payload))
        self._seq += 1

    def run_until(self, t_end: float) -> None:
        if t_end < self.clock:
            raise ValueError("t_end before current clock")
        while self._queue and self._queue[0].time <= t_end:
            event = heapq.heappop(self._queue)
            self.clock = event.time
            self._dispatch(event)
        self.clock = t_end

    def run(self) -> RunCounters:
        self._schedule_initial()
        self.run_until(self.params.duration_s + DRAIN_S)
        self._finalize()
        return self.counters

    def _reschedule(self, time: float, kind: str, node_id: str) -> None:
        """Periodic loops stop at the horizon; only deliveries may outlive it."""
        if time <= self.params.duration_s:
            self.schedule(time, kind, node_id)

    def _schedule_initial(self) -> None:
        p = self.params
        for node_id, t0 in self.start_times.items():
            self.schedule(t0, "start", node_id)
        k = int(p.data_warmup_s // p.data_period_s)
        t = (k + 1) * p.data_period_s
        grid = []
        while t <= p.duration_s + 1e-9:
            grid.append(t)
            t += p.data_period_s
        pre = [t for t in self._pre_window_grid() if t <= p.duration_s]
        for node in self.nodes.values():
            if node.role is not NodeRole.CLIENT:
                continue
            for t in pre:
                self.schedule(t, "data", node.node_id, payload=False)
            for t in grid:
                self.schedule(t, "data", node.node_id, payload=True)
        t = p.rt_sample_period_s
        while t <= p.duration_s:
            self.schedule(t, "rt_sample")
            t += p.rt_sample_period_s
        if self.mobility:
            t = p.mobility_tick_s
            while t <= p.duration_s:
                self.schedule(t, "mobility")
                t += p.mobility_tick_s

    def _pre_window_grid(self) -> list[float]:
        p = self.params
        out = []
        t = p.data_period_s
        while t <= p.data_warmup_s + 1e-9:
            out.append(t)
            t += p.data_period_s
        return out

    # -- radio -------------------------------------------------------------

    def _distance(self, a: str, b: str) -> float:
        (xa, ya), (xb, yb) = self.positions[a], self.positions[b]
        return math.hypot(xa - xb, ya - yb)

    def _size_of(self, message) -> int:
        p = self.params
        if isinstance(message, DioMessage):
            return p.dio_bytes
        if isinstance(message, DisMessage):
            return p.dis_bytes
        if isinstance(message, DaoModified):
            return len(encode_dao(message))
        if isinstance(message, DaoStatus):
            return STATUS_LEN
        return p.data_bytes

    def _count_tx(self, message) -> None:
        if isinstance(message, DataPacket):
            self.counters.data_transmissions += 1
            return
        self.counters.control_transmissions += 1
        if isinstance(message, (DaoModified, DaoStatus)):
            self.counters.dao_path_transmissions += 1

    def transmit(self, sender: NodeState, dest: bytes | None, message) -> None:
        p = self.params
        airtime = p.airtime_s(self._size_of(message))
        self.ledgers[sender.node_id].tx_s += airtime
        self._count_tx(message)
        if dest is None:
            for other in self.nodes.values():
                if other is sender or self.clock < self.start_times[other.node_id]:
                    continue
                if self._distance(sender.node_id, other.node_id) > p.tx_range_m:
                    continue
                if self.rng.random() < p.loss_prob:
                    self.counters.link_losses += 1
                    continue
                self.schedule(self.clock + p.d_hop_s, "deliver", other.node_id,
                              payload=(sender.address, message, airtime))
            return
        receiver = self.by_addr.get(dest)
        if receiver is None or self.clock < self.start_times[receiver.node_id]:
            self.counters.link_losses += 1
            return
        if self._distance(sender.node_id, receiver.node_id) > p.tx_range_m:
            self.counters.link_losses += 1
            return
        if self.rng.random() < p.loss_prob:
            self.counters.link_losses += 1
            return
        self.schedule(self.clock + p.d_hop_s, "deliver", receiver.node_id,
                      payload=(sender.address, message, airtime))

    def _send_all(self, node: NodeState, outgoing: list) -> None:
        for dest, message in outgoing:
            self.transmit(node, dest, message)

    # -- dispatch ----------------------------------------------------------

    def _dispatch(self, event: Event) -> None:
        handler = getattr(self, f"_on_{event.kind}")
        handler(event)

    def _on_start(self, event: Event) -> None:
        node = self.nodes[event.node_id]
        if node.role is NodeRole.ROOT:
            from .node import TrickleState
            node.trickle = TrickleState.start(self.params, self.rng, self.clock)
            self._joined.add(node.node_id)
            self._schedule_trickle(node)
        else:
            self.schedule(self.clock, "dis", node.node_id)

    def _on_dis(self, event: Event) -> None:
        node = self.nodes[event.node_id]
        if node.joined:
            return
        self._trace(self.clock, node.node_id, "DIS_TX", "soliciting")
        self.transmit(node, None, DisMessage(sender=node.address))
        self._reschedule(self.clock + self.params.dis_period_s, "dis", node.node_id)

    def _on_deliver(self, event: Event) -> None:
        node = self.nodes[event.node_id]
        sender_addr, message, airtime = event.payload
        ledger = self.ledgers[node.node_id]
        ledger.rx_s += airtime
        ledger.cpu_s += self.params.cpu_per_packet_s
        now = self.clock

        if isinstance(message, DataPacket):
            self._handle_data(node, message)
            return
        if isinstance(message, DisMessage):
            self._send_all(node, node.handle_dis(message, now))
            return
        if isinstance(message, DioMessage):
            out = node.handle_dio(message, now, self.rng)
            self._send_all(node, out)
            self._after_protocol_step(node)
            return
        if isinstance(message, DaoModified):
            if node.role is NodeRole.ROOT:
                out = node.root_handle_dao(message, sender_addr, now, self.db,
                                           self.addr_to_id, self.arm.defense)
                self._record_root_decision(message, out)
                self._send_all(node, out)
            else:
                self._send_all(node, node.handle_dao(message, sender_addr, now))
            return
        if isinstance(message, DaoStatus):
            out = node.handle_status(message, now)
            if message.originator == node.address:
                if message.is_ack:
                    self.ever_registered.add(node.node_id)
            elif not out:
                self.counters.status_drops += 1
            self._send_all(node, out)
            self._after_protocol_step(node)

    def _record_root_decision(self, dao: DaoModified, out: list) -> None:
        accepted = bool(out) and out[0][1].is_ack
        if is_forged_address(dao.src):
            if accepted:
                self.counters.forged_acked += 1
            else:
                self.counters.forged_nacked += 1
        else:
            if accepted:
                self.counters.genuine_acked += 1
            else:
                self.counters.genuine_nacked += 1

    def _after_protocol_step(self, node: NodeState) -> None:
        if node.joined and node.node_id not in self._joined:
            self._joined.add(node.node_id)
            self._schedule_trickle(node)
            if node.role is NodeRole.MALICIOUS:
                if self.arm.attack:
                    self.schedule(self.clock, "volley", node.node_id)
                self._reschedule(self.clock + self.params.attacker_self_dao_delay_s,
                                 "dao_refresh", node.node_id)
            else:
                self._reschedule(self.clock + self.params.dao_period_s,
                                 "dao_refresh", node.node_id)
        elif node.trickle is not None:
            self._schedule_trickle(node)

    def _schedule_trickle(self, node: NodeState) -> None:
        if node.trickle is None:
            return
        t = node.trickle.t_fire
        if t > self.params.duration_s:
            return
        pending = self._trickle_wake.get(node.node_id)
        if pending is None or t < pending - 1e-9:
            self._trickle_wake[node.node_id] = t
            self.schedule(t, "trickle", node.node_id)

    def _on_trickle(self, event: Event) -> None:
        node = self.nodes[event.node_id]
        if node.trickle is None:
            return
        if self._trickle_wake.get(node.node_id) == event.time:
            del self._trickle_wake[node.node_id]
        if node.trickle.t_fire <= self.clock + 1e-9:
            self._send_all(node, node.trickle_fire(self.clock, self.rng))
        self._schedule_trickle(node)

    def _on_dao_refresh(self, event: Event) -> None:
        node = self.nodes[event.node_id]
        if node.joined:
            self._send_all(node, node.build_own_dao(self.clock, self.rng))
        self._reschedule(self.clock + self.params.dao_period_s, "dao_refresh",
                         node.node_id)

    def _on_volley(self, event: Event) -> None:
        node = self.nodes[event.node_id]
        self._send_all(node, node.emit_forged(self.clock, self.rng))
        self._reschedule(self.clock + self.params.attack_period_s, "volley",
                         node.node_id)

    def _on_data(self, event: Event) -> None:
        node = self.nodes[event.node_id]
        counted = bool(event.payload)
        if counted:
            self.counters.sent_per_node[node.node_id] = (
                self.counters.sent_per_node.get(node.node_id, 0) + 1)
        if not node.joined or node.parent is None:
            return  # orphan: packet lost at the source
        packet = DataPacket(node.node_id, node.address, self.clock, counted)
        self._trace(self.clock, node.node_id, "DATA_TX", f"counted={counted}")
        self.transmit(node, node.parent, packet)

    def _handle_data(self, node: NodeState, packet: DataPacket) -> None:
        if node.role is NodeRole.ROOT:
            # the sink only accepts traffic from sources it holds a
            # registered downward route for
            node._purge_expired(self.clock)
            if packet.src_addr not in node.routing:
                self.counters.root_admission_drops += 1
                return
            self._trace(self.clock, node.node_id, "DATA_RX",
                        f"from {packet.src_id}")
            if packet.counted:
                self.counters.received_at_root += 1
                self.counters.delays.append(self.clock - packet.created)
            return
        packet.hops += 1
        if packet.hops > DATA_HOP_LIMIT or node.parent is None:
            return
        self.transmit(node, node.parent, packet)

    def _on_rt_sample(self, event: Event) -> None:
        occ = max((n.rt_occupancy(self.clock) for n in self.nodes.values()
                   if n.role is not NodeRole.ROOT), default=0)
        self.counters.rt_occupancy_timeline.append((self.clock, occ))

    def _on_mobility(self, event: Event) -> None:
        p = self.params
        for node_id, state in self.mobility.items():
            x, y = self.positions[node_id]
            if self.clock < state.pause_until:
                continue
            wx, wy = state.waypoint
            dx, dy = wx - x, wy - y
            dist = math.hypot(dx, dy)
            step = state.speed * p.mobility_tick_s
            if dist <= step:
                self.positions[node_id] = (wx, wy)
                state.waypoint = (self.rng_mobility.uniform(0, p.grid_m),
                                  self.rng_mobility.uniform(0, p.grid_m))
                state.speed = self.rng_mobility.uniform(p.speed_min_mps,
                                                        p.speed_max_mps)
                state.pause_until = self.clock + p.pause_s
            else:
                nx = min(max(x + dx / dist * step, 0.0), p.grid_m)
                ny = min(max(y + dy / dist * step, 0.0), p.grid_m)
                self.positions[node_id] = (nx, ny)

    # -- teardown ----------------------------------------------------------

    def _finalize(self) -> None:
        c = self.counters
        c.ledgers = self.ledgers
        c.client_ids = [n.node_id for n in self.nodes.values()
                        if n.role is NodeRole.CLIENT]
        c.n_blacklisted = sum(n.n_bl for n in self.nodes.values()
                              if n.role is not NodeRole.ROOT)

    def _trace(self, now: float, node_id: str, event: str, detail: str) -> None:
        if self.trace_enabled:
            self.trace_lines.append(f"{now:.6f}\t{node_id}\t{event}\t{detail}")

    # -- debugging ---------------------------------------------------------

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.clock:.9f}".encode())
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            x, y = self.positions[node_id]
            h.update(node_id.encode())
            h.update(f"|{node.rank}|{node.parent.hex() if node.parent else '-'}"
                     f"|{node.n_bl}|{node.dao_seq}|{x:.6f},{y:.6f}".encode())
            for target in sorted(node.routing):
                entry = node.routing[target]
                h.update(target.hex().encode())
                h.update(entry.next_hop.hex().encode())
            for addr in sorted(node.blacklist):
                h.update(addr.hex().encode())
        c = self.counters
        h.update(f"{c.total_sent()}|{c.received_at_root}|{c.control_transmissions}"
                 f"|{c.data_transmissions}|{c.link_losses}".encode())
        return h.hexdigest()

    def snapshot(self) -> str:
        lines = [f"clock={self.clock:.3f} arm={self.arm.name} seed={self.seed}"]
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            x, y = self.positions[node_id]
            parent = format_address(node.parent) if node.parent else "-"
            lines.append(
                f"{node_id} role={node.role.value} rank={node.rank} "
                f"parent={parent} pos=({x:.1f},{y:.1f}) "
                f"routes={len(node.routing)} blacklist={len(node.blacklist)} "
                f"registered_until={node.registered_until:.1f}")
        return "\n".join(lines)


# -- topology generation ----------------------------------------------------


def _connected(positions: dict[str, tuple[float, float]], rng_range: float,
               root_id: str) -> tuple[bool, dict[str, int]]:
    """BFS over the unit-disk graph; returns reachability and hop depths."""
    ids = list(positions)
    depth = {root_id: 0}
    frontier = [root_id]
    while frontier:
        nxt = []
        for a in frontier:
            xa, ya = positions[a]
            for b in ids:
                if b in depth:
                    continue
                xb, yb = positions[b]
                if math.hypot(xa - xb, ya - yb) <= rng_range:
                    depth[b] = depth[a] + 1
                    nxt.append(b)
        frontier = nxt
    return len(depth) == len(ids), depth


def _max_subtree_load(positions: dict, depth: dict, rng_range: float,
                      root_id: str) -> int:
    """Descendant count of the busiest router in a min-hop tree.

    A router stores one route per node below it, so a placement that funnels
    more nodes than the table cap through one relay cannot serve them even
    without an attacker; the generator rejects such deployments.
    """
    ids = sorted(positions)
    parent = {}
    for v in ids:
        if v == root_id:
            continue
        xv, yv = positions[v]
        for u in ids:
            if depth.get(u) == depth[v] - 1:
                xu, yu = positions[u]
                if math.hypot(xv - xu, yv - yu) <= rng_range:
                    parent[v] = u
                    break
    load = {v: 0 for v in ids}
    for v in ids:
        if v == root_id:
            continue
        u = parent.get(v)
        while u is not None and u != root_id:
            load[u] += 1
            u = parent.get(u)
    return max((load[v] for v in ids if v != root_id), default=0)


def build_random_world(params: SimParams, arm: ArmFlags, seed: int,
                       n_clients: int = 29, n_attackers: int = 1,
                       mobility: bool = False, trace: bool = False,
                       max_tries: int = 200) -> World:
    """Uniform placement, root at the grid center, attackers at depth >= 2.

    Positions, start times and provisioning draw only from the topology
    generator, so every arm sees the same network for a given seed.
    """
    world = World(params, arm, seed, trace=trace)
    rng = world.rng_topo
    half = params.grid_m / 2

    for attempt in range(max_tries):
        positions = {"root": (half, half)}
        for i in range(n_clients):
            positions[f"c{i + 1:02d}"] = (rng.uniform(0, params.grid_m),
                                          rng.uniform(0, params.grid_m))
        for i in range(n_attackers):
            positions[f"m{i + 1:02d}"] = (rng.uniform(0, params.grid_m),
                                          rng.uniform(0, params.grid_m))
        ok, depth = _connected(positions, params.tx_range_m, "root")
        if not ok:
            continue
        if any(depth[f"m{i + 1:02d}"] < 2 for i in range(n_attackers)):
            continue
        if _max_subtree_load(positions, depth, params.tx_range_m,
                             "root") > params.rt_cap - 4:
            continue
        break
    else:
        raise SetupError(f"no connected topology after {max_tries} tries")

    world.add_node("root", NodeRole.ROOT, positions["root"], start_time=0.0)
    for i in range(n_clients):
        node_id = f"c{i + 1:02d}"
        world.add_node(node_id, NodeRole.CLIENT, positions[node_id],
                       start_time=rng.uniform(0.0, params.startup_stagger_s))
    for i in range(n_attackers):
        node_id = f"m{i + 1:02d}"
        world.add_node(node_id, NodeRole.MALICIOUS, positions[node_id],
                       start_time=rng.uniform(0.0, params.attacker_start_window_s))
    world.provision()

    if mobility:
        for node in world.nodes.values():
            if node.role is NodeRole.ROOT:
                continue  # the sink stays where it is deployed
            world.mobility[node.node_id] = RwpState(
                waypoint=(rng.uniform(0, params.grid_m), rng.uniform(0, params.grid_m)),
                speed=rng.uniform(params.speed_min_mps, params.speed_max_mps))
    return world
