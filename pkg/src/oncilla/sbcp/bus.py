"""Deterministic half-duplex bus simulator and master transaction scheduler.

The bus is a discrete-event model of the shared RS-485 wire: a transmission
occupies the wire for byte_count * 10 / baud seconds (8N1 framing) and is
delivered base_latency plus a seeded uniform jitter later. Two transmissions
overlapping on the wire corrupt each other. The master sends the frames of a
group strictly sequentially, never transmitting while a response is pending,
and turns silent slaves into Timeout outcomes after a configurable delay.
"""

import enum
import heapq
import random
from dataclasses import dataclass, field

from .frame import BROADCAST_ID, Instruction, SbcpFrame, decode, encode

MAX_GROUP = 8

BITS_PER_BYTE_ON_WIRE = 10  # 8N1: start bit + 8 data bits + stop bit


class GroupTooLarge(ValueError):
    """A packet group holds more than 8 frames."""


class FaultMode(enum.Enum):
    RESPONSIVE = "responsive"
    SILENT = "silent"
    CORRUPTING = "corrupting"


# status responses reuse the instruction byte position as an error bitfield
ERR_NONE = 0x00
ERR_INSTRUCTION = 0x40


@dataclass
class SimSlave:
    """Test double for a bus device with a byte-addressed register map."""

    class_id: int
    device_id: int
    registers: bytearray = field(default_factory=lambda: bytearray(64))
    response_latency: float = 2e-6
    fault: FaultMode = FaultMode.RESPONSIVE

    def handle(self, frame):
        """Execute an instruction frame; returns the response frame or None."""
        if self.fault is FaultMode.SILENT:
            return None
        broadcast = frame.device_id == BROADCAST_ID
        response = None
        if frame.instruction == Instruction.PING:
            response = self._status(ERR_NONE)
        elif frame.instruction == Instruction.READ and len(frame.params) == 2:
            addr, count = frame.params
            response = self._status(ERR_NONE,
                                    bytes(self.registers[addr:addr + count]))
        elif frame.instruction == Instruction.WRITE and len(frame.params) >= 1:
            addr = frame.params[0]
            data = frame.params[1:]
            self.registers[addr:addr + len(data)] = data
            response = self._status(ERR_NONE)
        elif frame.instruction == Instruction.SYNC_WRITE:
            self._sync_write(frame.params)
            return None  # sync writes are never answered
        else:
            response = self._status(ERR_INSTRUCTION)
        if broadcast:
            return None
        return response

    def _sync_write(self, params):
        if len(params) < 2:
            return
        addr, per_id = params[0], params[1]
        pos = 2
        while pos + per_id < len(params):
            if params[pos] == self.device_id:
                data = params[pos + 1:pos + 1 + per_id]
                self.registers[addr:addr + per_id] = data
            pos += 1 + per_id

    def _status(self, error, params=b""):
        return SbcpFrame(class_id=self.class_id, device_id=self.device_id,
                         instruction=error, params=params)


@dataclass(frozen=True)
class BusConfig:
    """Timing model of the shared wire."""

    baud: float = 3.3e6
    base_latency: float = 12e-6
    jitter_max: float = 2.2e-6
    slave_timeout: float = 100e-6
    rng_seed: int = 0

    def __post_init__(self):
        if self.baud <= 0:
            raise ValueError("baud must be > 0")
        if self.jitter_max < 0:
            raise ValueError("jitter_max must be >= 0")


@dataclass(frozen=True)
class PacketGroup:
    """1-8 frames handled as one master transaction."""

    frames: tuple
    expect_response: tuple = None

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if not 1 <= len(frames) <= MAX_GROUP:
            raise GroupTooLarge(
                f"group must hold 1..{MAX_GROUP} frames, got {len(frames)}")
        expect = self.expect_response
        if expect is None:
            expect = tuple(True for _ in frames)
        object.__setattr__(self, "expect_response", tuple(expect))
        if len(self.expect_response) != len(frames):
            raise ValueError("expect_response must match frames")


@dataclass(frozen=True)
class Response:
    """A decoded slave response."""

    frame: SbcpFrame
    t: float


@dataclass(frozen=True)
class Timeout:
    """No response arrived before the timeout deadline."""

    t: float


@dataclass(frozen=True)
class Corrupted:
    """A response arrived but was corrupted (collision or fault)."""

    t: float


@dataclass(frozen=True)
class Sent:
    """Frame transmitted; no response was expected."""

    t: float


class HalfDuplexBus:
    """Event-driven shared wire with attached slaves and a master port.

    All timing draws come from one seeded RNG in schedule order, so a fixed
    (config, schedule) is bit-reproducible. The trace records
    (t_us, actor, event, bytes_hex) rows for every wire activity.
    """

    MASTER = "master"

    def __init__(self, cfg=BusConfig(), slaves=()):
        self.cfg = cfg
        self.rng = random.Random(cfg.rng_seed)
        self.now = 0.0
        self.trace = []
        self.slaves = {}
        self._events = []
        self._seq = 0
        self._wire = []  # transmission records, kept for collision checks
        self._master_inbox = []
        for slave in slaves:
            self.add_slave(slave)

    def add_slave(self, slave):
        key = (slave.class_id, slave.device_id)
        if key in self.slaves:
            raise ValueError(f"duplicate slave address {key}")
        self.slaves[key] = slave

    # -- wire model ---------------------------------------------------------

    def wire_time(self, n_bytes):
        return n_bytes * BITS_PER_BYTE_ON_WIRE / self.cfg.baud

    def transmit(self, actor, data, t_start):
        """Schedule a transmission; returns (wire_end, record).

        Overlap with any other transmission corrupts both (half-duplex
        violation); the corruption flag is late-bound so delivery events see
        it even when the collision happens after scheduling.
        """
        end = t_start + self.wire_time(len(data))
        record = {"actor": actor, "start": t_start, "end": end,
                  "data": bytes(data), "corrupted": False}
        for other in self._wire:
            if t_start < other["end"] and other["start"] < end:
                record["corrupted"] = True
                other["corrupted"] = True
                self._log(t_start, actor, "collision", data)
        self._wire.append(record)
        self._log(t_start, actor, "tx_start", data)
        delivery = end + self.cfg.base_latency + self.rng.uniform(
            0.0, self.cfg.jitter_max)
        self._push(delivery, "deliver", record)
        return end, record

    def _push(self, t, kind, payload):
        heapq.heappush(self._events, (t, self._seq, kind, payload))
        self._seq += 1

    def _log(self, t, actor, event, data):
        self.trace.append((t, actor, event, bytes(data).hex()))

    # -- event loop ---------------------------------------------------------

    def step(self):
        """Process the next timed event; returns (t, kind, payload) or None."""
        if not self._events:
            return None
        t, _, kind, record = heapq.heappop(self._events)
        self.now = max(self.now, t)
        if kind == "deliver":
            self._deliver(t, record)
        return t, kind, record

    def _deliver(self, t, record):
        data, corrupted = record["data"], record["corrupted"]
        if record["actor"] == self.MASTER:
            self._deliver_to_slaves(t, data, corrupted)
        else:
            self._log(t, self.MASTER, "rx_corrupt" if corrupted else "rx",
                      data)
            self._master_inbox.append((t, data, corrupted))

    def _deliver_to_slaves(self, t, data, corrupted):
        if corrupted:
            return  # slaves ignore mangled frames
        result, _ = decode(data)
        if not isinstance(result, SbcpFrame):
            return
        for (class_id, device_id), slave in self.slaves.items():
            if class_id != result.class_id:
                continue
            if result.device_id not in (device_id, BROADCAST_ID):
                continue
            self._log(t, f"slave:{class_id:02x}:{device_id:02x}", "rx", data)
            response = slave.handle(result)
            if response is not None:
                payload = bytearray(encode(response))
                if slave.fault is FaultMode.CORRUPTING:
                    payload[-1] ^= 0xFF
                self.transmit(f"slave:{class_id:02x}:{device_id:02x}",
                              bytes(payload), t + slave.response_latency)

    def run_until(self, t):
        """Process all events up to time t; advances the clock to t."""
        while self._events and self._events[0][0] <= t:
            self.step()
        self.now = max(self.now, t)

    def run_until_idle(self):
        """Process every queued event (e.g. in-flight deliveries)."""
        while self._events:
            self.step()

    def pop_master_rx(self):
        if self._master_inbox:
            return self._master_inbox.pop(0)
        return None


def master_transact(group, bus, cfg=None):
    """Send a packet group over the bus; returns one outcome per frame.

    Frames go out strictly sequentially: the master never starts the next
    transmission while it still awaits a response. A frame whose slave stays
    silent resolves to Timeout at wire_end + slave_timeout and the group
    continues. Outcomes preserve frame order.
    """
    if not isinstance(group, PacketGroup):
        group = PacketGroup(frames=tuple(group))
    cfg = cfg or bus.cfg
    outcomes = []
    for frame, expects in zip(group.frames, group.expect_response):
        while bus.pop_master_rx() is not None:
            pass  # drop stale deliveries from earlier timed-out frames
        data = encode(frame)
        wire_end, _ = bus.transmit(HalfDuplexBus.MASTER, data, bus.now)
        if not expects or frame.device_id == BROADCAST_ID or \
                frame.instruction == Instruction.SYNC_WRITE:
            bus.run_until(wire_end)
            outcomes.append(Sent(t=wire_end))
            continue
        deadline = wire_end + cfg.slave_timeout
        outcome = None
        while outcome is None:
            rx = bus.pop_master_rx()
            if rx is not None:
                t, payload, corrupted = rx
                if corrupted:
                    outcome = Corrupted(t=t)
                    break
                result, _ = decode(payload)
                if not isinstance(result, SbcpFrame):
                    outcome = Corrupted(t=t)
                elif (result.class_id, result.device_id) != (
                        frame.class_id, frame.device_id):
                    continue  # stale response from an earlier frame
                else:
                    outcome = Response(frame=result, t=t)
                break
            if not bus._events or bus._events[0][0] > deadline:
                bus.run_until(deadline)
                bus._log(deadline, HalfDuplexBus.MASTER, "timeout", data)
                outcome = Timeout(t=deadline)
                break
            bus.step()
        outcomes.append(outcome)
    return outcomes
