"""SBCP wire format.

A frame is [0xFF, class_id, device_id, length, instruction, params...,
checksum]. length counts instruction + params + checksum. The checksum is the
bitwise complement of (device_id + length + instruction + sum(params)) mod
256; class_id is deliberately excluded so that frames with class_id 0xFF are
byte-identical to Dynamixel protocol-1 packets (whose two-byte 0xFFFF
preamble the class byte replaces), letting legacy servos share the bus.

See docs/sbcp-protocol.md for the standalone wire-format description.
"""

import enum
from dataclasses import dataclass

PREAMBLE = 0xFF
LEGACY_BIOLOID_CLASS = 0xFF
MAX_PARAMS = 250

# device_id addressing every slave of a class; such frames get no response
BROADCAST_ID = 0xFE


class Instruction(enum.IntEnum):
    """Instruction byte values (Dynamixel protocol-1 compatible subset)."""

    PING = 0x01
    READ = 0x02
    WRITE = 0x03
    SYNC_WRITE = 0x83


class FrameTooLarge(ValueError):
    """params exceed the 250-byte limit."""


@dataclass(frozen=True)
class SbcpFrame:
    """One protocol packet; length and checksum are derived on encode."""

    class_id: int
    device_id: int
    instruction: int
    params: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "params", bytes(self.params))
        for name in ("class_id", "device_id", "instruction"):
            value = getattr(self, name)
            if not 0 <= value <= 0xFF:
                raise ValueError(f"{name} must be a byte, got {value}")
        if len(self.params) > MAX_PARAMS:
            raise FrameTooLarge(
                f"params length {len(self.params)} exceeds {MAX_PARAMS}")

    @property
    def length(self):
        return len(self.params) + 2

    @property
    def checksum(self):
        return checksum(self.device_id, self.length, self.instruction,
                        self.params)

    @property
    def is_legacy(self):
        return self.class_id == LEGACY_BIOLOID_CLASS


def checksum(device_id, length, instruction, params):
    """Bitwise complement of the byte sum; class_id is not covered."""
    return ~(device_id + length + instruction + sum(params)) & 0xFF


def encode(frame):
    """Serialise a frame, recomputing length and checksum."""
    return bytes([PREAMBLE, frame.class_id, frame.device_id, frame.length,
                  frame.instruction, *frame.params, frame.checksum])


@dataclass(frozen=True)
class DecodeFailure:
    """Base class for parser failures returned (not raised) by decode."""


@dataclass(frozen=True)
class BadPreamble(DecodeFailure):
    got: int


@dataclass(frozen=True)
class BadLength(DecodeFailure):
    got: int


@dataclass(frozen=True)
class Truncated(DecodeFailure):
    needed: int


@dataclass(frozen=True)
class ChecksumMismatch(DecodeFailure):
    expected: int
    got: int


def decode(buf, start=0):
    """Parse one frame at buf[start].

    Returns (SbcpFrame | DecodeFailure, bytes_consumed). Truncated input
    consumes nothing (feed more bytes and retry); any other failure consumes
    one byte so a caller can resynchronise by scanning forward.
    """
    avail = len(buf) - start
    if avail < 1:
        return Truncated(needed=6), 0
    if buf[start] != PREAMBLE:
        return BadPreamble(got=buf[start]), 1
    if avail < 4:
        return Truncated(needed=6 - avail), 0
    length = buf[start + 3]
    if not 2 <= length <= MAX_PARAMS + 2:
        return BadLength(got=length), 1
    total = 4 + length
    if avail < total:
        return Truncated(needed=total - avail), 0
    class_id = buf[start + 1]
    device_id = buf[start + 2]
    instruction = buf[start + 4]
    params = bytes(buf[start + 5:start + 3 + length])
    expected = checksum(device_id, length, instruction, params)
    got = buf[start + 3 + length]
    if got != expected:
        return ChecksumMismatch(expected=expected, got=got), 1
    return SbcpFrame(class_id=class_id, device_id=device_id,
                     instruction=instruction, params=params), total


def iter_frames(buf):
    """Yield (offset, frame) for every decodable frame, resynchronising on
    garbage by advancing one byte at a time."""
    pos = 0
    while pos < len(buf):
        result, consumed = decode(buf, pos)
        if isinstance(result, SbcpFrame):
            yield pos, result
            pos += consumed
        elif isinstance(result, Truncated):
            pos += 1
        else:
            pos += consumed
