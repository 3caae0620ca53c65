"""Marshal method calls into parcels and decode intercepted transactions.

The interface token is written first, then each argument in signature
order. Composites are their registered fields back to back, untagged, so
the reader must know the signature to walk the buffer. If one argument
cannot be read, nothing after it can be located either.
"""
from __future__ import annotations

import math
import struct

from .events import ArgKind, ArgValue, BinderTransactionRecord, DecodedCall, as_app
from .parcel import CodecError, ParcelBuffer
from .registry import MethodSignature, SignatureRegistry, TypeDescriptor


class ArityMismatch(CodecError):
    pass


class TypeMismatch(CodecError):
    pass


class UnknownComposite(CodecError):
    pass


class UnknownInterface(CodecError):
    def __init__(self, interface_name):
        self.interface_name = interface_name
        super().__init__(f"unknown interface {interface_name!r}")


class UnknownCode(CodecError):
    def __init__(self, interface_name, code):
        self.interface_name, self.code = interface_name, code
        super().__init__(f"interface {interface_name!r} has no code {code}")


class DecodeFailed(CodecError):
    def __init__(self, arg_index, partial_args, cause, interface_name=None, method_name=None):
        self.arg_index = arg_index
        self.partial_args = tuple(partial_args)
        self.cause = cause
        self.interface_name = interface_name
        self.method_name = method_name
        where = f"{interface_name}.{method_name}" if method_name else "payload"
        super().__init__(f"{where}: argument {arg_index} undecodable ({cause})")


_INT_RANGES = {
    ArgKind.INT32: (-(1 << 31), (1 << 31) - 1),
    ArgKind.INT64: (-(1 << 63), (1 << 63) - 1),
}

_WRITERS = {
    ArgKind.INT32: ParcelBuffer.write_int32,
    ArgKind.INT64: ParcelBuffer.write_int64,
    ArgKind.FLOAT32: ParcelBuffer.write_float32,
    ArgKind.FLOAT64: ParcelBuffer.write_float64,
    ArgKind.BOOL: ParcelBuffer.write_bool,
    ArgKind.STR: ParcelBuffer.write_string,
    ArgKind.BYTES: ParcelBuffer.write_bytes,
}

_READERS = {
    ArgKind.INT32: ParcelBuffer.read_int32,
    ArgKind.INT64: ParcelBuffer.read_int64,
    ArgKind.FLOAT32: ParcelBuffer.read_float32,
    ArgKind.FLOAT64: ParcelBuffer.read_float64,
    ArgKind.BOOL: ParcelBuffer.read_bool,
    ArgKind.STR: ParcelBuffer.read_string,
    ArgKind.BYTES: ParcelBuffer.read_bytes,
}


def _check_value(td: TypeDescriptor, v: ArgValue, path: str):
    if not isinstance(v, ArgValue) or v.kind is not td.kind:
        got = v.kind.value if isinstance(v, ArgValue) else type(v).__name__
        raise TypeMismatch(f"{path}: expected {td}, got {got}")
    if td.kind is ArgKind.COMPOSITE and v.type_name != td.type_name:
        raise TypeMismatch(f"{path}: expected composite {td.type_name}, got {v.type_name}")
    if td.kind in _INT_RANGES:
        lo, hi = _INT_RANGES[td.kind]
        if not isinstance(v.value, int) or isinstance(v.value, bool) or not lo <= v.value <= hi:
            raise TypeMismatch(f"{path}: {v.value!r} does not fit {td}")
    elif td.kind is ArgKind.FLOAT32:
        if not math.isfinite(v.value):
            return
        try:
            struct.pack("<f", v.value)
        except OverflowError:
            raise TypeMismatch(f"{path}: {v.value!r} overflows float32") from None


def _write_value(buf: ParcelBuffer, td: TypeDescriptor, v: ArgValue,
                 registry: SignatureRegistry, path: str):
    _check_value(td, v, path)
    if td.kind is ArgKind.COMPOSITE:
        fields = registry.composite_fields(td.type_name)
        if fields is None:
            raise UnknownComposite(f"{path}: composite {td.type_name} not registered")
        if len(v.value) != len(fields):
            raise ArityMismatch(f"{path}: {td.type_name} has {len(fields)} fields, got {len(v.value)}")
        for i, (ftd, fv) in enumerate(zip(fields, v.value)):
            _write_value(buf, ftd, fv, registry, f"{path}.{i}")
    else:
        _WRITERS[td.kind](buf, v.value)


def marshal(sig: MethodSignature, args, registry: SignatureRegistry) -> ParcelBuffer:
    args = tuple(args)
    if len(args) != sig.arity:
        raise ArityMismatch(f"{sig.method_name} takes {sig.arity} arguments, got {len(args)}")
    buf = ParcelBuffer().write_string(sig.interface_name)
    for i, (td, v) in enumerate(zip(sig.arg_types, args)):
        _write_value(buf, td, v, registry, f"arg{i}")
    return buf


def read_value(buf: ParcelBuffer, td: TypeDescriptor, registry: SignatureRegistry) -> ArgValue:
    if td.kind is ArgKind.COMPOSITE:
        fields = registry.composite_fields(td.type_name)
        if fields is None:
            raise UnknownComposite(f"composite {td.type_name} not registered")
        return ArgValue.composite(td.type_name, [read_value(buf, f, registry) for f in fields])
    return ArgValue(td.kind, _READERS[td.kind](buf))


def decode_payload(sender, code: int, data: bytes, registry: SignatureRegistry,
                   timestamp: int = 0) -> DecodedCall:
    """Decode a raw payload; works on any byte string, aligned or not."""
    buf = ParcelBuffer(data)
    interface_name = buf.read_string()
    sig = registry.lookup(interface_name, code)
    if sig is None:
        if registry.knows_interface(interface_name):
            raise UnknownCode(interface_name, code)
        raise UnknownInterface(interface_name)
    args = []
    for i, td in enumerate(sig.arg_types):
        try:
            args.append(read_value(buf, td, registry))
        except CodecError as exc:
            raise DecodeFailed(i, args, exc, interface_name, sig.method_name) from exc
    return DecodedCall(as_app(sender), interface_name, sig.method_name, tuple(args), timestamp)


def unmarshal(rec: BinderTransactionRecord, registry: SignatureRegistry) -> DecodedCall:
    return decode_payload(rec.sender_euid, rec.code, rec.buffer, registry, rec.timestamp)
