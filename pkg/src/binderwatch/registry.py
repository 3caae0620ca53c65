"""Transaction-code and composite-type registry.

Config grammar, one entry per line, ``#`` starts a comment::

    sig <interface> <code> <method> <type>*
    composite <type_name> <field_type>*

Types are ``int32 int64 float32 float64 bool str bytes`` or the name of a
composite (optionally written ``composite:<name>``).
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .events import ArgKind
from .parcel import CodecError


class RegistryError(CodecError):
    pass


class DuplicateEntry(RegistryError):
    pass


class CyclicComposite(RegistryError):
    pass


class RegistrySyntaxError(RegistryError):
    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


@dataclass(frozen=True)
class TypeDescriptor:
    kind: ArgKind
    type_name: str | None = None

    def __post_init__(self):
        if self.kind is ArgKind.COMPOSITE and not self.type_name:
            raise ValueError("composite type descriptor needs a type_name")

    @classmethod
    def parse(cls, token: str) -> "TypeDescriptor":
        if token.startswith("composite:"):
            return cls(ArgKind.COMPOSITE, token.split(":", 1)[1])
        try:
            kind = ArgKind(token)
        except ValueError:
            return cls(ArgKind.COMPOSITE, token)
        if kind is ArgKind.COMPOSITE:
            raise ValueError("bare 'composite' needs a type name")
        return cls(kind)

    def __str__(self):
        return self.type_name if self.kind is ArgKind.COMPOSITE else self.kind.value


INT32 = TypeDescriptor(ArgKind.INT32)
INT64 = TypeDescriptor(ArgKind.INT64)
FLOAT32 = TypeDescriptor(ArgKind.FLOAT32)
FLOAT64 = TypeDescriptor(ArgKind.FLOAT64)
BOOL = TypeDescriptor(ArgKind.BOOL)
STR = TypeDescriptor(ArgKind.STR)
BYTES = TypeDescriptor(ArgKind.BYTES)


def Composite(type_name: str) -> TypeDescriptor:
    return TypeDescriptor(ArgKind.COMPOSITE, type_name)


@dataclass(frozen=True)
class MethodSignature:
    interface_name: str
    code: int
    method_name: str
    arg_types: tuple = ()

    def __post_init__(self):
        if not self.method_name:
            raise ValueError("method_name must be non-empty")
        if not self.interface_name:
            raise ValueError("interface_name must be non-empty")
        object.__setattr__(self, "arg_types", tuple(self.arg_types))

    @property
    def arity(self) -> int:
        return len(self.arg_types)


class SignatureRegistry:
    """(interface, code) -> MethodSignature, plus composite field layouts."""

    def __init__(self):
        self._sigs: dict[tuple[str, int], MethodSignature] = {}
        self._interfaces: set[str] = set()
        self._composites: dict[str, tuple] = {}

    def register_signature(self, sig: MethodSignature) -> "SignatureRegistry":
        key = (sig.interface_name, sig.code)
        if key in self._sigs:
            raise DuplicateEntry(f"{sig.interface_name} code {sig.code} already registered")
        self._sigs[key] = sig
        self._interfaces.add(sig.interface_name)
        return self

    def register_composite(self, type_name: str, fields) -> "SignatureRegistry":
        if not type_name:
            raise ValueError("composite type_name must be non-empty")
        if type_name in self._composites:
            raise DuplicateEntry(f"composite {type_name} already registered")
        fields = tuple(fields)
        # forward references are allowed; a cycle can only close through this entry
        stack = [f.type_name for f in fields if f.kind is ArgKind.COMPOSITE]
        seen = set()
        while stack:
            name = stack.pop()
            if name == type_name:
                raise CyclicComposite(f"composite {type_name} contains itself")
            if name in seen:
                continue
            seen.add(name)
            stack.extend(f.type_name for f in self._composites.get(name, ())
                         if f.kind is ArgKind.COMPOSITE)
        self._composites[type_name] = fields
        return self

    def lookup(self, interface_name: str, code: int) -> MethodSignature | None:
        return self._sigs.get((interface_name, code))

    def knows_interface(self, interface_name: str) -> bool:
        return interface_name in self._interfaces

    def composite_fields(self, type_name: str):
        return self._composites.get(type_name)

    def signatures(self):
        return list(self._sigs.values())

    def composites(self):
        return dict(self._composites)

    def find_method(self, interface_name: str, method_name: str) -> MethodSignature | None:
        for sig in self._sigs.values():
            if sig.interface_name == interface_name and sig.method_name == method_name:
                return sig
        return None

    def __len__(self):
        return len(self._sigs)


def parse_registry(text: str, registry: SignatureRegistry | None = None) -> SignatureRegistry:
    reg = registry if registry is not None else SignatureRegistry()
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "sig":
                if len(parts) < 4:
                    raise ValueError("sig needs <interface> <code> <method>")
                code = int(parts[2], 0)
                if not 0 <= code <= 0xFFFFFFFF:
                    raise ValueError(f"code {code} out of range")
                types = [TypeDescriptor.parse(t) for t in parts[4:]]
                reg.register_signature(MethodSignature(parts[1], code, parts[3], types))
            elif parts[0] == "composite":
                if len(parts) < 2:
                    raise ValueError("composite needs a type name")
                reg.register_composite(parts[1], [TypeDescriptor.parse(t) for t in parts[2:]])
            else:
                raise ValueError(f"unknown directive {parts[0]!r}")
        except RegistryError as exc:
            if isinstance(exc, RegistrySyntaxError):
                raise
            raise type(exc)(f"line {line_no}: {exc}") from None
        except ValueError as exc:
            raise RegistrySyntaxError(line_no, str(exc)) from None
    return reg


def load_registry(path=None) -> SignatureRegistry:
    """Load a registry config; with no path, the shipped fixture."""
    if path is None:
        text = resources.files("binderwatch.data").joinpath("registry.conf").read_text()
    else:
        text = Path(path).read_text()
    return parse_registry(text)
