"""Simple Binary Communication Protocol: frame codec, master scheduler, and
a deterministic half-duplex bus simulator."""

from .frame import (  # noqa: F401
    BadLength,
    BadPreamble,
    ChecksumMismatch,
    DecodeFailure,
    FrameTooLarge,
    Instruction,
    LEGACY_BIOLOID_CLASS,
    MAX_PARAMS,
    PREAMBLE,
    SbcpFrame,
    Truncated,
    checksum,
    decode,
    encode,
    iter_frames,
)
from .bus import (  # noqa: F401
    BusConfig,
    Corrupted,
    FaultMode,
    GroupTooLarge,
    HalfDuplexBus,
    PacketGroup,
    Response,
    SimSlave,
    Timeout,
    master_transact,
)
