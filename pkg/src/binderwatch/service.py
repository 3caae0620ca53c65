"""User-space tracer service: decode frames and fan them out to subscribers."""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Callable

from .bridge import Bridge, FrameError, MsgType, NetlinkFrame, decode_event
from .codec import decode_payload
from .events import BinderTransactionRecord, RawUndecoded, as_app
from .parcel import CodecError
from .registry import SignatureRegistry

log = logging.getLogger(__name__)

ALL = "all"


class DuplicateClient(Exception):
    pass


class UnknownClient(Exception):
    pass


@dataclass
class Subscription:
    client_id: str
    delivery: Callable
    uid_filter: object = ALL

    def __post_init__(self):
        if self.uid_filter != ALL:
            self.uid_filter = frozenset(as_app(u) for u in self.uid_filter)

    def wants(self, uid) -> bool:
        return self.uid_filter == ALL or uid in self.uid_filter


@dataclass
class ServiceStats:
    frames_in: int = 0
    decode_ok: int = 0
    decode_failed: int = 0
    delivered: int = 0
    notices: int = 0

    def line(self) -> str:
        return (f"frames_in={self.frames_in} decode_ok={self.decode_ok} "
                f"decode_failed={self.decode_failed} delivered={self.delivered} "
                f"notices={self.notices}")


@dataclass
class TracerService:
    bridge: Bridge
    registry: SignatureRegistry
    stats: ServiceStats = field(default_factory=ServiceStats)

    def __post_init__(self):
        self._subs: dict[str, Subscription] = {}
        self._lock = threading.Lock()

    @classmethod
    def start(cls, bridge: Bridge, registry: SignatureRegistry) -> "TracerService":
        service = cls(bridge, registry)
        bridge.register_callback(service._on_frame)
        return service

    def subscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub.client_id in self._subs:
                raise DuplicateClient(sub.client_id)
            subs = dict(self._subs)
            subs[sub.client_id] = sub
            self._subs = subs

    def unsubscribe(self, client_id: str) -> None:
        with self._lock:
            if client_id not in self._subs:
                raise UnknownClient(client_id)
            subs = dict(self._subs)
            del subs[client_id]
            self._subs = subs

    def set_app_monitoring(self, uid, on: bool) -> NetlinkFrame:
        t = MsgType.ENABLE_UID if on else MsgType.DISABLE_UID
        return self.bridge.send_control(t, as_app(uid).uid)

    def set_global(self, on: bool) -> NetlinkFrame:
        return self.bridge.send_control(MsgType.GLOBAL_ON if on else MsgType.GLOBAL_OFF, 0)

    def _decode(self, frame: NetlinkFrame):
        try:
            event = decode_event(frame.payload)
        except FrameError as exc:
            self.stats.decode_failed += 1
            return RawUndecoded(as_app(frame.uid), -1, f"{type(exc).__name__}: {exc}")
        if not isinstance(event, BinderTransactionRecord):
            self.stats.decode_ok += 1
            return event
        try:
            call = decode_payload(event.sender_euid, event.code, event.buffer,
                                  self.registry, event.timestamp)
        except CodecError as exc:
            self.stats.decode_failed += 1
            return RawUndecoded(event.sender_euid, event.code,
                                f"{type(exc).__name__}: {exc}", event.timestamp)
        self.stats.decode_ok += 1
        return call

    def _on_frame(self, frame: NetlinkFrame) -> None:
        if frame.msg_type is not MsgType.EVENT:
            return
        self.stats.frames_in += 1
        item = self._decode(frame)
        # snapshot so subscribe/unsubscribe from other threads lands between frames
        for sub in self._subs.values():
            if sub.wants(item.uid):
                try:
                    sub.delivery(item)
                except Exception:
                    log.exception("subscriber %s raised", sub.client_id)
                if isinstance(item, RawUndecoded):
                    self.stats.notices += 1
                else:
                    self.stats.delivered += 1
