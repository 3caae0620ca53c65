"""Interception, decoding and runtime verification of app/platform interactions.

Pipeline: ``Interceptor`` (kernel-side probes) -> ``Bridge`` (framed channel)
-> ``TracerService`` (decode + fan-out) -> subscribers such as
``rv.MonitorRouter``.
"""
from .bridge import Bridge, MsgType, NetlinkFrame, decode_frame, encode_frame
from .codec import (ArityMismatch, DecodeFailed, TypeMismatch, UnknownCode, UnknownComposite,
                    UnknownInterface, decode_payload, marshal, unmarshal)
from .events import (AddrFamily, AppId, ArgKind, ArgValue, BinderTransactionRecord,
                     DecodedCall, InvalidEvent, RawUndecoded, SyscallEvent, SyscallKind,
                     validate_event)
from .interceptor import BinderSignal, Interceptor, ProbePoint, RawTransaction, parse_trace
from .parcel import BufferUnderrun, CodecError, MalformedData, ParcelBuffer
from .registry import (CyclicComposite, DuplicateEntry, MethodSignature, SignatureRegistry,
                       TypeDescriptor, load_registry, parse_registry)
from .service import ServiceStats, Subscription, TracerService

__version__ = "0.1.0"

__all__ = [
    "AddrFamily", "AppId", "ArgKind", "ArgValue", "ArityMismatch", "BinderSignal",
    "BinderTransactionRecord", "Bridge", "BufferUnderrun", "CodecError", "CyclicComposite",
    "DecodeFailed", "DecodedCall", "DuplicateEntry", "Interceptor", "InvalidEvent",
    "MalformedData", "MethodSignature", "MsgType", "NetlinkFrame", "ParcelBuffer", "ProbePoint",
    "RawTransaction", "RawUndecoded", "ServiceStats", "SignatureRegistry", "Subscription",
    "SyscallEvent", "SyscallKind", "TracerService", "TypeDescriptor", "TypeMismatch",
    "UnknownCode", "UnknownComposite", "UnknownInterface", "decode_frame", "decode_payload",
    "encode_frame", "load_registry", "marshal", "parse_registry", "parse_trace", "unmarshal",
    "validate_event",
]
