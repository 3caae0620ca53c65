"""Framed kernel/user channel.

Frame layout, little-endian::

    offset  size  field
    0       2     magic 0x44 0x54 ("DT")
    2       1     version (1)
    3       1     msg_type
    4       4     uid (u32)
    8       4     payload_len (u32)
    12      n     payload
    12+n    4     CRC-32 (IEEE) of bytes 0 .. 12+n-1

Event payloads start with a kind byte (1 open, 2 connect, 3 binder)::

    binder:  uid u32, code u32, timestamp u64, buffer_len u32, buffer
    open:    uid u32, timestamp u64, path (parcel string)
    connect: uid u32, timestamp u64, family u8, addr (parcel string)

Events flow up through a bounded queue to a single callback running on a
consumer thread; control frames flow down synchronously and are acked.
"""
from __future__ import annotations

import enum
import logging
import queue
import struct
import threading
import time
import zlib
from dataclasses import dataclass
from typing import Callable

from .events import (AddrFamily, AppId, BinderTransactionRecord, SyscallEvent,
                     SyscallKind)
from .parcel import CodecError, ParcelBuffer

log = logging.getLogger(__name__)

MAGIC = b"DT"
VERSION = 1
HEADER = struct.Struct("<2sBBII")
CRC = struct.Struct("<I")
HEADER_SIZE = HEADER.size
MIN_FRAME = HEADER_SIZE + CRC.size
DEFAULT_CAPACITY = 4096


class MsgType(enum.IntEnum):
    EVENT = 0x01
    ENABLE_UID = 0x02
    DISABLE_UID = 0x03
    GLOBAL_ON = 0x04
    GLOBAL_OFF = 0x05
    ACK = 0x06


CONTROL_TYPES = frozenset({MsgType.ENABLE_UID, MsgType.DISABLE_UID,
                           MsgType.GLOBAL_ON, MsgType.GLOBAL_OFF})


class FrameError(Exception):
    pass


class BadMagic(FrameError):
    pass


class BadVersion(FrameError):
    pass


class UnknownMsgType(FrameError):
    pass


class ChecksumMismatch(FrameError):
    pass


class Truncated(FrameError):
    pass


class ChannelClosed(Exception):
    pass


class QueueFull(Exception):
    pass


class CallbackAlreadySet(Exception):
    pass


@dataclass(frozen=True)
class NetlinkFrame:
    msg_type: MsgType
    uid: int
    payload: bytes
    checksum: int = 0
    magic: bytes = MAGIC
    version: int = VERSION

    @property
    def payload_len(self) -> int:
        return len(self.payload)


def encode_frame(msg_type: MsgType, uid: int, payload: bytes = b"") -> bytes:
    if len(payload) >= 1 << 32:
        raise ValueError("payload too large for a frame")
    head = HEADER.pack(MAGIC, VERSION, int(msg_type), int(uid), len(payload)) + bytes(payload)
    return head + CRC.pack(zlib.crc32(head))


def _check_header(data) -> None:
    if len(data) >= 2 and data[:2] != MAGIC:
        raise BadMagic(f"magic {bytes(data[:2]).hex()}")
    if len(data) >= 3 and data[2] != VERSION:
        raise BadVersion(f"version {data[2]}")


def _msg_type(code: int) -> MsgType:
    try:
        return MsgType(code)
    except ValueError:
        raise UnknownMsgType(f"msg_type 0x{code:02x}") from None


def decode_frame(data: bytes) -> NetlinkFrame:
    """Decode exactly one frame occupying all of ``data``.

    The trailing CRC is checked before the length field is trusted, so a
    corrupted length reads as a checksum failure rather than a short read.
    """
    data = bytes(data)
    _check_header(data)
    if len(data) < MIN_FRAME:
        raise Truncated(f"{len(data)} bytes, frame needs at least {MIN_FRAME}")
    body, (crc,) = data[:-CRC.size], CRC.unpack(data[-CRC.size:])
    if zlib.crc32(body) != crc:
        raise ChecksumMismatch(f"crc {crc:08x} != {zlib.crc32(body):08x}")
    _, _, code, uid, plen = HEADER.unpack_from(body)
    if plen != len(body) - HEADER_SIZE:
        raise Truncated(f"payload_len {plen} but {len(body) - HEADER_SIZE} payload bytes")
    return NetlinkFrame(_msg_type(code), uid, body[HEADER_SIZE:], crc)


class FrameReader:
    """Incremental decoder for a byte stream of concatenated frames."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[NetlinkFrame]:
        self._buf += data
        frames = []
        while True:
            if len(self._buf) < HEADER_SIZE:
                _check_header(self._buf)
                break
            _check_header(self._buf)
            plen = HEADER.unpack_from(self._buf)[4]
            size = HEADER_SIZE + plen + CRC.size
            if len(self._buf) < size:
                break
            frames.append(decode_frame(self._buf[:size]))
            del self._buf[:size]
        return frames

    @property
    def pending(self) -> int:
        return len(self._buf)

    def close(self) -> None:
        if self._buf:
            raise Truncated(f"{len(self._buf)} trailing bytes")


def iter_frames(data: bytes) -> list[NetlinkFrame]:
    reader = FrameReader()
    frames = reader.feed(data)
    reader.close()
    return frames


# -- event payloads ---------------------------------------------------------

_KIND_OPEN, _KIND_CONNECT, _KIND_BINDER = 1, 2, 3
_U32 = struct.Struct("<I")
_BINDER_HEAD = struct.Struct("<IIQI")
_SYS_HEAD = struct.Struct("<IQ")


def encode_event(e) -> bytes:
    if isinstance(e, BinderTransactionRecord):
        return (bytes([_KIND_BINDER])
                + _BINDER_HEAD.pack(e.sender_euid.uid, e.code, e.timestamp, len(e.buffer))
                + e.buffer)
    if isinstance(e, SyscallEvent):
        head = _SYS_HEAD.pack(e.uid.uid, e.timestamp)
        if e.kind is SyscallKind.OPEN:
            return bytes([_KIND_OPEN]) + head + ParcelBuffer().write_string(e.path).data
        return (bytes([_KIND_CONNECT]) + head + bytes([e.addr_family.value])
                + ParcelBuffer().write_string(e.addr).data)
    raise TypeError(f"cannot encode {type(e).__name__}")


class EventDecodeError(FrameError):
    pass


def decode_event(payload: bytes):
    if not payload:
        raise EventDecodeError("empty event payload")
    kind, body = payload[0], payload[1:]
    try:
        if kind == _KIND_BINDER:
            uid, code, ts, n = _BINDER_HEAD.unpack_from(body)
            buf = body[_BINDER_HEAD.size:]
            if len(buf) != n:
                raise EventDecodeError(f"buffer_len {n} but {len(buf)} bytes")
            return BinderTransactionRecord(AppId(uid), code, buf, ts)
        if kind in (_KIND_OPEN, _KIND_CONNECT):
            uid, ts = _SYS_HEAD.unpack_from(body)
            rest = body[_SYS_HEAD.size:]
            if kind == _KIND_OPEN:
                reader = ParcelBuffer(rest)
                event = SyscallEvent.open(uid, reader.read_string(), ts)
            else:
                family = AddrFamily(rest[0])
                reader = ParcelBuffer(rest[1:])
                event = SyscallEvent.connect(uid, family, reader.read_string(), ts)
            if reader.remaining:
                raise EventDecodeError(f"{reader.remaining} trailing bytes")
            return event
    except (struct.error, IndexError, CodecError, ValueError) as exc:
        if isinstance(exc, EventDecodeError):
            raise
        raise EventDecodeError(str(exc)) from exc
    raise EventDecodeError(f"unknown event kind {kind}")


# -- the channel ------------------------------------------------------------

_STOP = object()


class Bridge:
    """Bidirectional channel between an Interceptor and one user-space callback.

    Frames sent before a callback is registered wait in the queue and are
    flushed in order once it is. There is no polling interface.
    """

    def __init__(self, interceptor=None, capacity: int = DEFAULT_CAPACITY):
        self.interceptor = interceptor
        self.capacity = capacity
        self._queue: queue.Queue = queue.Queue(maxsize=capacity)
        self._callback: Callable | None = None
        self._thread: threading.Thread | None = None
        self._closed = False
        self._control_lock = threading.Lock()
        self._reg_lock = threading.Lock()

    @property
    def closed(self) -> bool:
        return self._closed

    def send_event(self, e) -> None:
        if self._closed:
            raise ChannelClosed("bridge is closed")
        frame = encode_frame(MsgType.EVENT, e.uid.uid, encode_event(e))
        try:
            self._queue.put_nowait(frame)
        except queue.Full:
            raise QueueFull(f"{self.capacity} frames pending") from None

    def register_callback(self, f: Callable) -> None:
        with self._reg_lock:
            if self._callback is not None:
                raise CallbackAlreadySet("bridge already has a callback")
            if self._closed:
                raise ChannelClosed("bridge is closed")
            self._callback = f
            self._thread = threading.Thread(target=self._consume, name="bridge-consumer",
                                            daemon=True)
            self._thread.start()

    def _consume(self) -> None:
        q = self._queue
        while True:
            item = q.get()
            try:
                if item is _STOP:
                    return
                try:
                    frame = decode_frame(item)
                except FrameError:
                    log.exception("dropping undecodable frame")
                    continue
                try:
                    self._callback(frame)
                except Exception:
                    log.exception("callback raised")
            finally:
                q.task_done()

    def drain(self, timeout: float | None = None) -> bool:
        """Block until every queued frame has been delivered."""
        q = self._queue
        deadline = None if timeout is None else time.monotonic() + timeout
        with q.all_tasks_done:
            while q.unfinished_tasks:
                if deadline is None:
                    q.all_tasks_done.wait()
                else:
                    left = deadline - time.monotonic()
                    if left <= 0:
                        return False
                    q.all_tasks_done.wait(left)
        return True

    def pending(self) -> int:
        return self._queue.qsize()

    def send_control(self, msg_type: MsgType, uid: int = 0) -> NetlinkFrame:
        if self._closed:
            raise ChannelClosed("bridge is closed")
        msg_type = MsgType(msg_type)
        if msg_type not in CONTROL_TYPES:
            raise ValueError(f"{msg_type.name} is not a control message")
        with self._control_lock:
            reply = self._kernel_control(encode_frame(msg_type, uid))
        ack = decode_frame(reply)
        if ack.msg_type is not MsgType.ACK:
            raise FrameError(f"expected ACK, got {ack.msg_type.name}")
        return ack

    def _kernel_control(self, raw: bytes) -> bytes:
        frame = decode_frame(raw)
        icpt = self.interceptor
        if icpt is None:
            raise ChannelClosed("no interceptor on the kernel side")
        if frame.msg_type is MsgType.ENABLE_UID:
            icpt.set_monitored(frame.uid, True)
        elif frame.msg_type is MsgType.DISABLE_UID:
            icpt.set_monitored(frame.uid, False)
        elif frame.msg_type is MsgType.GLOBAL_ON:
            icpt.set_global(True)
        elif frame.msg_type is MsgType.GLOBAL_OFF:
            icpt.set_global(False)
        return encode_frame(MsgType.ACK, frame.uid, bytes([int(frame.msg_type)]))

    def close(self, timeout: float | None = 5.0) -> None:
        if self._closed:
            return
        self._closed = True
        if self._thread is not None:
            self._queue.put(_STOP)
            self._thread.join(timeout)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
