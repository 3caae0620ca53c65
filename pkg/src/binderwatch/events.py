"""Domain types shared by every stage of the pipeline.

Everything here is a frozen dataclass: values are built once and passed
between the feeder and consumer threads without copying.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Union

MAX_BUFFER = 1 << 20
FIRST_APP_UID = 10000
UINT32_MAX = 0xFFFFFFFF


def now_ns() -> int:
    return time.monotonic_ns()


class InvalidEvent(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True, order=True)
class AppId:
    uid: int

    def __post_init__(self):
        if not isinstance(self.uid, int) or not 0 <= self.uid <= UINT32_MAX:
            raise InvalidEvent([f"uid out of range: {self.uid!r}"])

    @property
    def is_system(self) -> bool:
        """System senders stay representable; they are flagged, not rejected."""
        return self.uid < FIRST_APP_UID

    def __int__(self):
        return self.uid

    def __str__(self):
        return str(self.uid)


def as_app(uid) -> AppId:
    return uid if isinstance(uid, AppId) else AppId(int(uid))


class SyscallKind(enum.Enum):
    OPEN = "open"
    CONNECT = "connect"


class AddrFamily(enum.Enum):
    INET4 = 1
    INET6 = 2
    UNIX = 3
    OTHER = 4

    @classmethod
    def parse(cls, text: str) -> "AddrFamily":
        key = text.strip().upper()
        aliases = {"AF_INET": "INET4", "INET": "INET4", "AF_INET6": "INET6",
                   "AF_UNIX": "UNIX", "AF_LOCAL": "UNIX"}
        key = aliases.get(key, key)
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown address family {text!r}") from None


@dataclass(frozen=True)
class SyscallEvent:
    kind: SyscallKind
    uid: AppId
    timestamp: int = field(default_factory=now_ns)
    path: str | None = None
    addr_family: AddrFamily | None = None
    addr: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "uid", as_app(self.uid))
        problems = validate_event(self)
        if problems:
            raise InvalidEvent(problems)

    @classmethod
    def open(cls, uid, path, timestamp=None):
        ts = now_ns() if timestamp is None else timestamp
        return cls(SyscallKind.OPEN, as_app(uid), ts, path=path)

    @classmethod
    def connect(cls, uid, family, addr, timestamp=None):
        ts = now_ns() if timestamp is None else timestamp
        return cls(SyscallKind.CONNECT, as_app(uid), ts, addr_family=family, addr=addr)

    @property
    def sender(self) -> AppId:
        return self.uid


@dataclass(frozen=True)
class BinderTransactionRecord:
    sender_euid: AppId
    code: int
    buffer: bytes
    timestamp: int = field(default_factory=now_ns)

    def __post_init__(self):
        object.__setattr__(self, "sender_euid", as_app(self.sender_euid))
        object.__setattr__(self, "buffer", bytes(self.buffer))
        problems = validate_event(self)
        if problems:
            raise InvalidEvent(problems)

    @property
    def sender(self) -> AppId:
        return self.sender_euid

    @property
    def uid(self) -> AppId:
        return self.sender_euid


class ArgKind(enum.Enum):
    INT32 = "int32"
    INT64 = "int64"
    FLOAT32 = "float32"
    FLOAT64 = "float64"
    BOOL = "bool"
    STR = "str"
    BYTES = "bytes"
    COMPOSITE = "composite"


@dataclass(frozen=True)
class ArgValue:
    """One decoded argument.

    For ``COMPOSITE`` values, ``value`` is a tuple of ArgValue fields and
    ``type_name`` names the registered composite.
    """

    kind: ArgKind
    value: object
    type_name: str | None = None

    @classmethod
    def int32(cls, v):
        return cls(ArgKind.INT32, int(v))

    @classmethod
    def int64(cls, v):
        return cls(ArgKind.INT64, int(v))

    @classmethod
    def float32(cls, v):
        return cls(ArgKind.FLOAT32, float(v))

    @classmethod
    def float64(cls, v):
        return cls(ArgKind.FLOAT64, float(v))

    @classmethod
    def bool_(cls, v):
        return cls(ArgKind.BOOL, bool(v))

    @classmethod
    def str_(cls, v):
        return cls(ArgKind.STR, str(v))

    @classmethod
    def bytes_(cls, v):
        return cls(ArgKind.BYTES, bytes(v))

    @classmethod
    def composite(cls, type_name, fields):
        return cls(ArgKind.COMPOSITE, tuple(fields), type_name)

    def plain(self):
        """The Python value with tags stripped (composites become tuples)."""
        if self.kind is ArgKind.COMPOSITE:
            return tuple(f.plain() for f in self.value)
        return self.value


@dataclass(frozen=True)
class DecodedCall:
    sender: AppId
    interface_name: str
    method_name: str
    args: tuple
    timestamp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sender", as_app(self.sender))
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def uid(self) -> AppId:
        return self.sender


@dataclass(frozen=True)
class RawUndecoded:
    """Notice that a Binder interaction happened but could not be decoded."""

    sender: AppId
    code: int
    error: str
    timestamp: int = 0

    @property
    def uid(self) -> AppId:
        return self.sender


Event = Union[SyscallEvent, BinderTransactionRecord]


def validate_event(e, max_buffer: int = MAX_BUFFER) -> list[str]:
    """Return every invariant violation of ``e``; an empty list means ok."""
    problems = []
    if isinstance(e, SyscallEvent):
        if not isinstance(e.uid, AppId):
            problems.append("uid is not an AppId")
        if not isinstance(e.timestamp, int) or e.timestamp < 0:
            problems.append("bad timestamp")
        if e.kind is SyscallKind.OPEN:
            if not e.path:
                problems.append("empty path on Open")
            if e.addr_family is not None or e.addr is not None:
                problems.append("addr on Open")
        elif e.kind is SyscallKind.CONNECT:
            if e.path is not None:
                problems.append("path on Connect")
            if not isinstance(e.addr_family, AddrFamily):
                problems.append("missing addr_family on Connect")
            if e.addr is None:
                problems.append("missing addr on Connect")
        else:
            problems.append(f"unknown kind {e.kind!r}")
    elif isinstance(e, BinderTransactionRecord):
        if not isinstance(e.sender_euid, AppId):
            problems.append("sender_euid is not an AppId")
        if not isinstance(e.code, int) or not 0 <= e.code <= UINT32_MAX:
            problems.append("code out of range")
        if not isinstance(e.timestamp, int) or e.timestamp < 0:
            problems.append("bad timestamp")
        n = len(e.buffer)
        if n > max_buffer:
            problems.append(f"buffer exceeds {max_buffer} bytes")
        if n % 4:
            problems.append("alignment")
    else:
        problems.append(f"not an event: {type(e).__name__}")
    return problems
