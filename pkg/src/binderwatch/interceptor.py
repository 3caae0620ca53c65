"""Kernel-side event source: probe points, per-UID switches and filters.

Raw events come from trace files or direct calls, one feeder thread at a
time. Handlers run synchronously on that thread.

Trace file lines::

    open <uid> <path>
    connect <uid> <family> <addr>
    binder <uid> <interface> <code> <hex-payload>

``#`` starts a comment; blank lines are skipped. ``<path>`` runs to the
end of the line. The ``<interface>`` column of binder lines is a label for
readers only; the payload carries its own interface token.
"""
from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .events import (AddrFamily, BinderTransactionRecord, SyscallEvent, as_app,
                     now_ns)


class ProbePoint(enum.Enum):
    SYS_OPEN = "sys_open"
    SYS_CONNECT = "sys_connect"
    BINDER_THREAD_WRITE = "binder_thread_write"


class BinderSignal(enum.Enum):
    # command codes mirror binder.h's BC_* ordering
    BC_TRANSACTION = 0
    BC_REPLY = 1
    BC_ACQUIRE_RESULT = 2
    BC_FREE_BUFFER = 3
    BC_INCREFS = 4
    BC_ACQUIRE = 5
    BC_RELEASE = 6
    BC_DECREFS = 7


class AlreadyAttached(Exception):
    pass


class ParseError(ValueError):
    def __init__(self, line_no, message=""):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if message else f"line {line_no}")


@dataclass
class RawTransaction:
    """Mutable stand-in for the driver's in-flight transaction struct."""

    sender_euid: int
    code: int
    buffer: bytearray


@dataclass(frozen=True)
class RawOpen:
    uid: int
    path: str
    flags: int = 0


@dataclass(frozen=True)
class RawConnect:
    uid: int
    family: AddrFamily
    addr: str


@dataclass(frozen=True)
class RawBinder:
    uid: int
    interface: str
    code: int
    payload: bytes
    signal: BinderSignal = BinderSignal.BC_TRANSACTION


class Interceptor:
    def __init__(self, sdcard_substring: str = "sdcard", globally_enabled: bool = True,
                 monitored=()):
        self.sdcard_substring = sdcard_substring
        self.globally_enabled = globally_enabled
        self._monitored = frozenset(as_app(u) for u in monitored)
        self._handlers: dict[ProbePoint, Callable] = {}
        self._lock = threading.Lock()

    @property
    def monitored_uids(self) -> frozenset:
        return self._monitored

    def attach_probe(self, point: ProbePoint, handler: Callable) -> "Interceptor":
        with self._lock:
            if point in self._handlers:
                raise AlreadyAttached(point.value)
            self._handlers[point] = handler
        return self

    def detach_probe(self, point: ProbePoint) -> "Interceptor":
        with self._lock:
            self._handlers.pop(point, None)
        return self

    def attach_all(self, handler: Callable) -> "Interceptor":
        for point in ProbePoint:
            self.attach_probe(point, handler)
        return self

    def set_monitored(self, uid, on: bool) -> "Interceptor":
        app = as_app(uid)
        with self._lock:
            self._monitored = self._monitored | {app} if on else self._monitored - {app}
        return self

    def set_global(self, on: bool) -> "Interceptor":
        self.globally_enabled = bool(on)
        return self

    def _active(self, point: ProbePoint, uid) -> Callable | None:
        if not self.globally_enabled:
            return None
        handler = self._handlers.get(point)
        if handler is None or as_app(uid) not in self._monitored:
            return None
        return handler

    def on_sys_open(self, uid, path: str, flags: int = 0) -> SyscallEvent | None:
        handler = self._active(ProbePoint.SYS_OPEN, uid)
        if handler is None or self.sdcard_substring not in path:
            return None
        event = SyscallEvent.open(uid, path, now_ns())
        handler(event)
        return event

    def on_sys_connect(self, uid, family: AddrFamily, addr: str) -> SyscallEvent | None:
        handler = self._active(ProbePoint.SYS_CONNECT, uid)
        if handler is None or family not in (AddrFamily.INET4, AddrFamily.INET6):
            return None
        event = SyscallEvent.connect(uid, family, addr, now_ns())
        handler(event)
        return event

    def on_binder_write(self, signal: BinderSignal, txn) -> BinderTransactionRecord | None:
        handler = self._active(ProbePoint.BINDER_THREAD_WRITE, txn.sender_euid)
        if handler is None or signal is not BinderSignal.BC_TRANSACTION:
            return None
        # bytes(...) snapshots the buffer before the target ever sees it
        record = BinderTransactionRecord(as_app(txn.sender_euid), txn.code,
                                         bytes(txn.buffer), now_ns())
        handler(record)
        return record

    def feed(self, raw):
        if isinstance(raw, RawOpen):
            return self.on_sys_open(raw.uid, raw.path, raw.flags)
        if isinstance(raw, RawConnect):
            return self.on_sys_connect(raw.uid, raw.family, raw.addr)
        if isinstance(raw, RawBinder):
            return self.on_binder_write(
                raw.signal, RawTransaction(raw.uid, raw.code, bytearray(raw.payload)))
        raise TypeError(f"not a raw event: {raw!r}")

    def feed_all(self, raws: Iterable) -> Iterator:
        for raw in raws:
            event = self.feed(raw)
            if event is not None:
                yield event

    def replay(self, trace) -> Iterator:
        """Feed a trace (see parse_trace) and yield what gets emitted.

        The whole trace is parsed before anything is fed, so a malformed
        line raises before any handler runs.
        """
        return self.feed_all(parse_trace(trace))


def _parse_line(line: str):
    kind, _, rest = line.partition(" ")
    if kind == "open":
        uid, _, path = rest.strip().partition(" ")
        path = path.strip()
        if not path:
            raise ValueError("open needs <uid> <path>")
        return RawOpen(_uid(uid), path)
    if kind == "connect":
        parts = rest.split()
        if len(parts) != 3:
            raise ValueError("connect needs <uid> <family> <addr>")
        return RawConnect(_uid(parts[0]), AddrFamily.parse(parts[1]), parts[2])
    if kind == "binder":
        parts = rest.split()
        if len(parts) != 4:
            raise ValueError("binder needs <uid> <interface> <code> <hex-payload>")
        code = int(parts[2], 0)
        if not 0 <= code <= 0xFFFFFFFF:
            raise ValueError("code out of range")
        return RawBinder(_uid(parts[0]), parts[1], code, bytes.fromhex(parts[3]))
    raise ValueError(f"unknown record type {kind!r}")


def _uid(text: str) -> int:
    uid = int(text)
    if not 0 <= uid <= 0xFFFFFFFF:
        raise ValueError(f"uid {uid} out of range")
    return uid


def parse_trace(trace) -> list:
    """Parse a trace given as a Path, an open file, trace text, or lines."""
    if isinstance(trace, Path):
        lines = trace.read_text().splitlines()
    elif isinstance(trace, str):
        lines = trace.splitlines()
    elif hasattr(trace, "read"):
        lines = trace.read().splitlines()
    else:
        lines = list(trace)
    raws = []
    for line_no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            raws.append(_parse_line(line))
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from None
    return raws


def format_trace_line(raw) -> str:
    if isinstance(raw, RawOpen):
        return f"open {raw.uid} {raw.path}"
    if isinstance(raw, RawConnect):
        return f"connect {raw.uid} {raw.family.name.lower()} {raw.addr}"
    if isinstance(raw, RawBinder):
        return f"binder {raw.uid} {raw.interface} {raw.code} {raw.payload.hex()}"
    raise TypeError(f"not a raw event: {raw!r}")
