"""Turn decoded calls and syscall events into ground predicates.

Mapping file lines::

    map <interface> <method> -> <pred>(<term>, ...)
    map syscall open -> <pred>(<term>, ...)
    map syscall connect -> <pred>(<term>, ...)

Terms: ``uid``, ``arg<i>`` (i-th decoded argument), ``path``, ``addr``,
``family``, or a quoted/integer constant. A method may map to several
predicates. Facts files hold ``<pred> <value>*`` lines (``contact 123``);
fact values are kept as strings.
"""
from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..events import DecodedCall, SyscallEvent, SyscallKind
from .monitor import MonitorInstance, Violation, spawn_monitor


class MappingError(ValueError):
    pass


class MappingArityError(MappingError):
    pass


_RULE = re.compile(r"^map\s+(\S+)\s+(\S+)\s*->\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$")
_ARG = re.compile(r"^arg(\d+)$")
_FIELDS = {"uid", "path", "addr", "family", "method", "interface"}


@dataclass(frozen=True)
class MapRule:
    interface: str
    method: str
    pred: str
    terms: tuple


def _parse_term(tok: str):
    tok = tok.strip()
    if tok in _FIELDS:
        return ("field", tok)
    m = _ARG.match(tok)
    if m:
        return ("arg", int(m.group(1)))
    if re.fullmatch(r"-?\d+", tok):
        return ("const", int(tok))
    if len(tok) >= 2 and tok[0] == tok[-1] and tok[0] in "\"'":
        return ("const", tok[1:-1])
    raise MappingError(f"bad term {tok!r}")


@dataclass
class EventMapping:
    rules: dict = field(default_factory=dict)
    arities: dict = field(default_factory=dict)

    def add(self, rule: MapRule) -> None:
        known = self.arities.setdefault(rule.pred, len(rule.terms))
        if known != len(rule.terms):
            raise MappingArityError(
                f"{rule.pred} used with arity {len(rule.terms)} and {known}")
        self.rules.setdefault((rule.interface, rule.method), []).append(rule)

    def _key(self, e):
        if isinstance(e, DecodedCall):
            return (e.interface_name, e.method_name)
        if isinstance(e, SyscallEvent):
            return ("syscall", e.kind.value)
        return None

    def map_event(self, e) -> frozenset:
        rules = self.rules.get(self._key(e), ())
        out = set()
        for rule in rules:
            values = []
            for kind, ref in rule.terms:
                if kind == "const":
                    values.append(ref)
                elif kind == "arg":
                    args = getattr(e, "args", ())
                    if ref >= len(args):
                        raise MappingArityError(
                            f"{rule.pred} reads arg{ref} but {rule.method} has {len(args)} args")
                    values.append(args[ref].plain())
                else:
                    values.append(_field(e, ref))
            out.add((rule.pred, tuple(values)))
        return frozenset(out)


def _field(e, name):
    if name == "uid":
        return e.uid.uid
    if name == "method":
        return getattr(e, "method_name", getattr(e, "kind", None) and e.kind.value)
    if name == "interface":
        return getattr(e, "interface_name", "syscall")
    if isinstance(e, SyscallEvent):
        if name == "path" and e.kind is SyscallKind.OPEN:
            return e.path
        if name == "addr" and e.kind is SyscallKind.CONNECT:
            return e.addr
        if name == "family" and e.kind is SyscallKind.CONNECT:
            return e.addr_family.name.lower()
    raise MappingArityError(f"event has no field {name!r}")


def parse_mapping(text: str) -> EventMapping:
    mapping = EventMapping()
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RULE.match(line)
        if not m:
            raise MappingError(f"line {line_no}: expected 'map <interface> <method> -> pred(...)'")
        iface, method, pred, body = m.groups()
        terms = tuple(_parse_term(t) for t in body.split(",")) if body.strip() else ()
        try:
            mapping.add(MapRule(iface, method, pred, terms))
        except MappingError as exc:
            raise type(exc)(f"line {line_no}: {exc}") from None
    return mapping


def parse_facts(text: str) -> frozenset:
    facts = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = shlex.split(line)
        facts.add((parts[0], tuple(parts[1:])))
    return frozenset(facts)


def _read(path, default_name):
    if path is None:
        return resources.files("binderwatch.data").joinpath(default_name).read_text()
    return Path(path).read_text()


def load_mapping(path=None) -> EventMapping:
    return parse_mapping(_read(path, "mapping.conf"))


def load_facts(path=None) -> frozenset:
    return parse_facts(_read(path, "contacts.txt"))


class MonitorRouter:
    """Spawns one monitor per (app, policy) and routes each event by sender."""

    def __init__(self, policies, background=frozenset(), mapping: EventMapping | None = None,
                 exempt=()):
        self.policies = list(policies)
        self.background = frozenset(background)
        self.mapping = mapping if mapping is not None else load_mapping()
        self.exempt = {int(u) for u in exempt}
        self.monitors: dict[tuple, MonitorInstance] = {}
        self.violations: list[Violation] = []
        self.listeners = []

    def monitors_for(self, uid: int) -> list[MonitorInstance]:
        out = []
        for p in self.policies:
            key = (uid, p.name)
            if key not in self.monitors:
                self.monitors[key] = spawn_monitor(uid, p, self.background, self.mapping)
            out.append(self.monitors[key])
        return out

    def deliver(self, event) -> list[Violation]:
        if not isinstance(event, (DecodedCall, SyscallEvent)):
            return []
        uid = event.uid.uid
        if uid in self.exempt:
            return []
        ground = self.mapping.map_event(event)
        found = []
        for m in self.monitors_for(uid):
            found.extend(m.step_ground(ground))
        self.violations.extend(found)
        for listener in self.listeners:
            for v in found:
                listener(v)
        return found

    __call__ = deliver
