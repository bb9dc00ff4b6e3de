"""Control-message model and the DAO wire codec.

DIS and DIO travel as in-memory values only.  DAO and the ACK/NACK status
message have a fixed binary layout so traces can dump exact frames:

DAO (36 bytes + options):
    octet 0       instance id, constant 0
    octet 1       flags, K bit (0x80) set
    octet 2       reserved, carries the 8-bit license in plain mode
    octet 3       sequence
    octets 4-19   target address
    octets 20-35  source address
    octets 36+    options: 1-byte length then payload, omitted when empty

Status (20 bytes):
    octet 0       instance id, constant 0
    octet 1       reserved, 0
    octet 2       status: 0 = ACK, >= 128 = NACK
    octet 3       sequence
    octets 4-19   originator address
"""

from __future__ import annotations

import random
from dataclasses import dataclass

ADDRESS_LEN = 16
NODE_PREFIX = 0xFD     # addresses assigned to real nodes
FORGED_PREFIX = 0xFE   # reserved block the attacker draws fake addresses from

DAO_BASE_LEN = 36
STATUS_LEN = 20
STATUS_ACK = 0
STATUS_NACK = 128
FLAG_K = 0x80


class DecodeError(Exception):
    """Buffer does not parse as the expected message."""


def node_address(index: int) -> bytes:
    """Stable unicast address for node number `index`."""
    if not 0 <= index < 1 << 16:
        raise ValueError("node index out of range")
    return bytes([NODE_PREFIX]) + b"\x00" * 13 + index.to_bytes(2, "big")


def forged_address(rng: random.Random) -> bytes:
    """Fresh fake address from the reserved block; never a real node."""
    return bytes([FORGED_PREFIX]) + rng.randbytes(ADDRESS_LEN - 1)


def is_forged_address(addr: bytes) -> bool:
    return addr[0] == FORGED_PREFIX


def format_address(addr: bytes) -> str:
    return ":".join(addr[i:i + 2].hex() for i in range(0, ADDRESS_LEN, 2))


def _check_address(addr: bytes, name: str) -> None:
    if not isinstance(addr, bytes) or len(addr) != ADDRESS_LEN:
        raise ValueError(f"{name} must be {ADDRESS_LEN} bytes")


@dataclass(frozen=True)
class DisMessage:
    sender: bytes


@dataclass(frozen=True)
class DioMessage:
    sender: bytes
    dodag_id: bytes
    version: int
    rank: int
    of_id: int = 0

    def __post_init__(self):
        _check_address(self.sender, "sender")
        _check_address(self.dodag_id, "dodag_id")
        if not 0 <= self.version < 256:
            raise ValueError("version must be one octet")
        if not 0 <= self.rank < 1 << 16:
            raise ValueError("rank must fit 16 bits")


@dataclass(frozen=True)
class DaoModified:
    """DAO whose reserved octet carries the license (or 0 in encrypted mode)."""

    src: bytes
    target: bytes
    sequence: int
    reserved: int
    options: bytes = b""

    def __post_init__(self):
        _check_address(self.src, "src")
        _check_address(self.target, "target")
        if not 0 <= self.sequence < 256:
            raise ValueError("sequence must be one octet")
        if not 0 <= self.reserved < 256:
            raise ValueError("reserved must be one octet")
        if len(self.options) > 255:
            raise ValueError("options longer than 255 bytes")


@dataclass(frozen=True)
class DaoStatus:
    """DAO-ACK (status 0) or DAO-NACK (status >= 128)."""

    originator: bytes
    sequence: int
    status: int

    def __post_init__(self):
        _check_address(self.originator, "originator")
        if not 0 <= self.sequence < 256:
            raise ValueError("sequence must be one octet")
        if self.status != STATUS_ACK and not STATUS_NACK <= self.status < 256:
            raise ValueError("status must be 0 or in [128, 255]")

    @property
    def is_ack(self) -> bool:
        return self.status == STATUS_ACK


def encode_dao(m: DaoModified) -> bytes:
    head = bytes([0, FLAG_K, m.reserved, m.sequence]) + m.target + m.src
    if not m.options:
        return head
    return head + bytes([len(m.options)]) + m.options


def decode_dao(buf: bytes) -> DaoModified:
    if len(buf) < DAO_BASE_LEN:
        raise DecodeError(f"DAO shorter than {DAO_BASE_LEN} bytes")
    target = buf[4:20]
    src = buf[20:36]
    options = b""
    if len(buf) > DAO_BASE_LEN:
        n = buf[DAO_BASE_LEN]
        if len(buf) != DAO_BASE_LEN + 1 + n:
            raise DecodeError("bad option length")
        options = buf[DAO_BASE_LEN + 1:]
    return DaoModified(src=src, target=target, sequence=buf[3],
                       reserved=buf[2], options=options)


def encode_status(m: DaoStatus) -> bytes:
    return bytes([0, 0, m.status, m.sequence]) + m.originator


def decode_status(buf: bytes) -> DaoStatus:
    if len(buf) != STATUS_LEN:
        raise DecodeError(f"status message must be {STATUS_LEN} bytes")
    try:
        return DaoStatus(originator=buf[4:20], sequence=buf[3], status=buf[2])
    except ValueError as exc:
        raise DecodeError(str(exc)) from None
