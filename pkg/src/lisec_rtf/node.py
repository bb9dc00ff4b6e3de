"""Per-node RPL state machine: joining, ranks, trickle, storing-mode DAO
handling, the forged-DAO attacker, and the license check at the root.

Handlers mutate the node and return a list of (destination, message) pairs
for the engine to transmit; destination None means broadcast.  Nothing here
touches the event queue or the radio, which keeps every operation unit
testable in isolation.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

from .config import SimParams
from .messages import (
    DaoModified,
    DaoStatus,
    DioMessage,
    DisMessage,
    STATUS_ACK,
    STATUS_NACK,
    encode_dao,
    forged_address,
    format_address,
)
from .puf import CRDatabase, LicenseDecodeError, decrypt_license, encrypt_license


class NodeRole(enum.Enum):
    ROOT = "root"
    CLIENT = "client"
    MALICIOUS = "malicious"


def compute_rank(parent_rank: int, params: SimParams) -> int:
    """Hop-count rank: parent rank plus a fixed increment, saturating."""
    return min(parent_rank + params.rank_increase, params.max_rank)


@dataclass
class TrickleState:
    i_min: float
    cap: float
    k: int
    interval: float
    t_fire: float
    counter: int = 0

    @classmethod
    def start(cls, params: SimParams, rng: random.Random, now: float) -> "TrickleState":
        t = cls(i_min=params.trickle_imin_s, cap=params.trickle_cap_s(),
                k=params.trickle_k, interval=params.trickle_imin_s, t_fire=0.0)
        t.redraw(rng, now)
        return t

    def redraw(self, rng: random.Random, now: float) -> None:
        self.t_fire = now + rng.uniform(self.interval / 2, self.interval)

    def step(self, rng: random.Random, now: float) -> bool:
        """Advance one round at the scheduled fire time; True means transmit."""
        fired = self.counter < self.k
        self.interval = min(2 * self.interval, self.cap)
        self.counter = 0
        self.redraw(rng, now)
        return fired

    def reset(self, rng: random.Random, now: float) -> None:
        self.interval = self.i_min
        self.counter = 0
        self.redraw(rng, now)


@dataclass
class RoutingEntry:
    target: bytes
    next_hop: bytes
    installed_at: float
    expires_at: float = math.inf


class NodeState:
    """One sensor node (or the border router)."""

    def __init__(self, node_id: str, address: bytes, role: NodeRole,
                 params: SimParams, rt_cap: int | None = None):
        self.node_id = node_id
        self.address = address
        self.role = role
        self.params = params
        if rt_cap is None:
            if role is NodeRole.ROOT:
                rt_cap = params.root_rt_cap if params.root_rt_cap > 0 else None
            else:
                rt_cap = params.rt_cap
        self.rt_cap = rt_cap

        self.rank: int | None = params.min_rank if role is NodeRole.ROOT else None
        self.parent: bytes | None = None
        self.parent_rank: int | None = None
        self.neighbors: dict[bytes, int | None] = {}
        self.routing: dict[bytes, RoutingEntry] = {}
        self.blacklist: set[bytes] = set()
        self.n_bl = 0
        self.trickle: TrickleState | None = None

        self.license = 0
        self.shared_key: bytes | None = None
        self.encrypted = False
        self.dao_seq = 0
        self.registered_until = -math.inf
        self.tracer = None

    # -- plumbing ---------------------------------------------------------

    @property
    def joined(self) -> bool:
        return self.rank is not None

    def is_registered(self, now: float) -> bool:
        return now <= self.registered_until

    def rt_occupancy(self, now: float) -> int:
        self._purge_expired(now)
        return len(self.routing)

    def _trace(self, now: float, event: str, detail: str) -> None:
        if self.tracer is not None:
            self.tracer(now, self.node_id, event, detail)

    def _purge_expired(self, now: float) -> None:
        if self.params.route_lifetime_s <= 0:
            return
        dead = [t for t, e in self.routing.items() if e.expires_at <= now]
        for t in dead:
            del self.routing[t]

    def add_route(self, target: bytes, next_hop: bytes, now: float) -> str:
        """Install or refresh a downward route; returns what happened."""
        if target in self.blacklist:
            return "refused"
        if next_hop not in self.neighbors:
            return "refused"
        self._purge_expired(now)
        lifetime = self.params.route_lifetime_s
        expires = now + lifetime if lifetime > 0 else math.inf
        entry = self.routing.get(target)
        if entry is not None:
            entry.next_hop = next_hop
            entry.installed_at = now
            entry.expires_at = expires
            return "updated"
        if self.rt_cap is not None and len(self.routing) >= self.rt_cap:
            self._trace(now, "ROUTE_FULL", format_address(target))
            return "full"
        self.routing[target] = RoutingEntry(target, next_hop, now, expires)
        self._trace(now, "ROUTE_ADD", f"{format_address(target)} via {format_address(next_hop)}")
        return "added"

    def _learn_neighbor(self, addr: bytes, rank: int | None) -> None:
        if addr in self.blacklist or addr == self.address:
            return
        if rank is not None or addr not in self.neighbors:
            self.neighbors[addr] = rank

    # -- control plane ----------------------------------------------------

    def handle_dis(self, dis: DisMessage, now: float) -> list:
        if not self.joined:
            return []
        self._trace(now, "DIO_TX", f"rank={self.rank} (solicited)")
        return [(None, self._dio())]

    def _dio(self) -> DioMessage:
        return DioMessage(sender=self.address, dodag_id=self.address if
                          self.role is NodeRole.ROOT else b"\x00" * 16,
                          version=1, rank=self.rank)

    def handle_dio(self, dio: DioMessage, now: float, rng: random.Random) -> list:
        if dio.sender in self.blacklist:
            return []
        self._learn_neighbor(dio.sender, dio.rank)
        if self.role is NodeRole.ROOT:
            return []

        candidate = compute_rank(dio.rank, self.params)
        if not self.joined:
            self.parent = dio.sender
            self.parent_rank = dio.rank
            self.rank = candidate
            self.trickle = TrickleState.start(self.params, rng, now)
            if self.role is NodeRole.MALICIOUS:
                return []  # lies low; registers only after its first volley
            return self.build_own_dao(now, rng)

        if dio.sender == self.parent:
            self.parent_rank = dio.rank
            if candidate != self.rank:
                self.rank = candidate
                if self.trickle:
                    self.trickle.reset(rng, now)
            else:
                if self.trickle:
                    self.trickle.counter += 1
            return []

        current_path = compute_rank(self.parent_rank, self.params)
        if candidate + self.params.hysteresis < current_path:
            self.parent = dio.sender
            self.parent_rank = dio.rank
            self.rank = candidate
            if self.trickle:
                self.trickle.reset(rng, now)
            if self.role is NodeRole.MALICIOUS:
                return []
            return self.build_own_dao(now, rng)
        if self.trickle:
            self.trickle.counter += 1
        return []

    def trickle_fire(self, now: float, rng: random.Random) -> list:
        if self.trickle is None or not self.joined:
            return []
        fired = self.trickle.step(rng, now)
        if not fired:
            return []
        self._trace(now, "DIO_TX", f"rank={self.rank}")
        return [(None, self._dio())]

    # -- DAO path ---------------------------------------------------------

    def build_own_dao(self, now: float, rng: random.Random) -> list:
        """Register (or refresh) this node at the root through its parent."""
        if self.parent is None or self.role is NodeRole.ROOT:
            return []
        self.dao_seq = (self.dao_seq + 1) % 256
        if self.encrypted:
            nonce = rng.randbytes(8)
            options = encrypt_license(self.shared_key, self.license, nonce,
                                      self.params.license_width)
            dao = DaoModified(src=self.address, target=self.address,
                              sequence=self.dao_seq, reserved=0, options=options)
        else:
            dao = DaoModified(src=self.address, target=self.address,
                              sequence=self.dao_seq, reserved=self.license)
        self._trace(now, "DAO_TX", f"seq={self.dao_seq} frame={encode_dao(dao).hex()}")
        return [(self.parent, dao)]

    def emit_forged(self, now: float, rng: random.Random) -> list:
        """One attack volley: forged registrations for nonexistent children."""
        if self.role is not NodeRole.MALICIOUS or self.parent is None:
            return []
        out = []
        for _ in range(self.params.forged_per_period):
            fake = forged_address(rng)
            self.dao_seq = (self.dao_seq + 1) % 256
            if self.encrypted:
                n = 8 + (self.params.license_width + 7) // 8
                dao = DaoModified(src=fake, target=fake, sequence=self.dao_seq,
                                  reserved=0, options=rng.randbytes(n))
            else:
                dao = DaoModified(src=fake, target=fake, sequence=self.dao_seq,
                                  reserved=rng.randrange(256))
            self._trace(now, "DAO_TX",
                        f"forged frame={encode_dao(dao).hex()}")
            out.append((self.parent, dao))
        return out

    def handle_dao(self, dao: DaoModified, sender: bytes, now: float) -> list:
        """Storing-mode relay: install the advertised route, forward upward."""
        if dao.src in self.blacklist:
            return []
        self._learn_neighbor(sender, None)
        self.add_route(dao.target, sender, now)
        if self.parent is None:
            return []
        self._trace(now, "DAO_FWD",
                    f"{format_address(dao.src)} frame={encode_dao(dao).hex()}")
        return [(self.parent, dao)]

    def root_handle_dao(self, dao: DaoModified, sender: bytes, now: float,
                        db: CRDatabase, addr_to_id: dict[bytes, str],
                        defense: bool) -> list:
        """Border-router check: recover the response and ACK or NACK.

        A registration is only acknowledged once its downward route is
        actually stored; a full table means the node cannot be registered
        and is refused like any other bad DAO.
        """
        self._learn_neighbor(sender, None)
        accepted = self._verify_dao(dao, db, addr_to_id) if defense else True
        if accepted:
            accepted = self.add_route(dao.target, sender, now) in ("added", "updated")
        status = DaoStatus(originator=dao.src, sequence=dao.sequence,
                           status=STATUS_ACK if accepted else STATUS_NACK)
        self._trace(now, "ACK" if accepted else "NACK", format_address(dao.src))
        return [(sender, status)]

    def _verify_dao(self, dao: DaoModified, db: CRDatabase,
                    addr_to_id: dict[bytes, str]) -> bool:
        node_id = addr_to_id.get(dao.src)
        if node_id is None:
            return False
        if self.encrypted:
            key = db.keys.get(node_id)
            if key is None:
                return False
            try:
                license_bits = decrypt_license(key, dao.options,
                                               self.params.license_width)
            except LicenseDecodeError:
                return False
        else:
            license_bits = dao.reserved
        return db.verify(node_id, license_bits)

    def handle_status(self, st: DaoStatus, now: float) -> list:
        """Consume our own ACK/NACK or relay it one hop further down."""
        if st.originator == self.address:
            if st.is_ack:
                self.registered_until = now + self.params.reg_lifetime_s
                self._trace(now, "ACK", "registered")
            else:
                self._trace(now, "NACK", "registration rejected")
            return []

        self._purge_expired(now)
        entry = self.routing.get(st.originator)
        if not st.is_ack:
            # forward first, then blacklist the rejected source and scrub
            # it from the routing and neighbor tables
            out = [(entry.next_hop, st)] if entry is not None else []
            self.routing.pop(st.originator, None)
            if st.originator not in self.blacklist:
                self.blacklist.add(st.originator)
                self.n_bl += 1
                self._trace(now, "BLACKLIST", format_address(st.originator))
            self.neighbors.pop(st.originator, None)
            if self.parent == st.originator:
                self.parent = None
                self.parent_rank = None
            return out
        if entry is None:
            return []
        return [(entry.next_hop, st)]
