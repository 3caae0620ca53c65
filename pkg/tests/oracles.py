"""Independent reference implementations used only by the tests.

None of these import the package code they are checked against.
"""
from __future__ import annotations

import itertools


def crc32_bitwise(data: bytes) -> int:
    """Reflected CRC-32, polynomial 0xEDB88320, one bit at a time."""
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ 0xEDB88320 if crc & 1 else crc >> 1
    return crc ^ 0xFFFFFFFF


def le32(n: int) -> bytes:
    n &= 0xFFFFFFFF
    return bytes([n & 0xFF, (n >> 8) & 0xFF, (n >> 16) & 0xFF, (n >> 24) & 0xFF])


def le64(n: int) -> bytes:
    n &= (1 << 64) - 1
    return bytes((n >> (8 * i)) & 0xFF for i in range(8))


def hand_string(s: str) -> bytes:
    """Byte-by-byte parcel string: count, UTF-16LE units, 0x0000, pad to 4."""
    units = []
    for ch in s:
        cp = ord(ch)
        if cp >= 0x10000:
            cp -= 0x10000
            units += [0xD800 + (cp >> 10), 0xDC00 + (cp & 0x3FF)]
        else:
            units.append(cp)
    out = bytearray(le32(len(units)))
    for u in units:
        out += bytes([u & 0xFF, u >> 8])
    out += b"\x00\x00"
    while len(out) % 4:
        out.append(0)
    return bytes(out)


def hand_frame(msg_type: int, uid: int, payload: bytes) -> bytes:
    body = b"\x44\x54" + bytes([1, msg_type]) + le32(uid) + le32(len(payload)) + payload
    return body + le32(crc32_bitwise(body))


# -- brute-force past-time temporal logic -----------------------------------
#
# Formulas are nested tuples so the oracle shares nothing with the parser:
#   ("atom", pred, terms, is_background)   terms: ("var", name) | ("const", v)
#   ("true",) ("false",) ("not", f) ("and", f, g) ("or", f, g) ("implies", f, g)
#   ("prev", f) ("once", f) ("hist", f) ("since", f, g)

def from_ast(node):
    """Convert the package AST to oracle tuples (structure only)."""
    name = type(node).__name__
    if name == "Atom":
        terms = tuple(("var", t.name) if type(t).__name__ == "Var" else ("const", t.value)
                      for t in node.terms)
        return ("atom", node.pred, terms, node.background)
    if name == "Truth":
        return ("true",) if node.value else ("false",)
    unary = {"Not": "not", "Prev": "prev", "Once": "once", "Historically": "hist"}
    if name in unary:
        return (unary[name], from_ast(node.sub))
    binary = {"And": "and", "Or": "or", "Implies": "implies", "Since": "since"}
    return (binary[name], from_ast(node.left), from_ast(node.right))


def _walk(f):
    yield f
    for c in f[1:]:
        if isinstance(c, tuple) and c and isinstance(c[0], str) and c[0] in (
                "atom", "true", "false", "not", "and", "or", "implies", "prev", "once",
                "hist", "since"):
            yield from _walk(c)


def oracle_vars(f) -> list:
    out = []
    for g in _walk(f):
        if g[0] == "atom":
            for t in g[2]:
                if t[0] == "var" and t[1] not in out:
                    out.append(t[1])
    return out


def sat(f, trace, i, val, facts, memo=None) -> bool:
    if memo is None:
        return _sat(f, trace, i, val, facts)
    key = (f, i)
    if key not in memo:
        memo[key] = _sat(f, trace, i, val, facts, memo)
    return memo[key]


def _sat(f, trace, i, val, facts, memo=None) -> bool:
    def sat_(g, j):
        return sat(g, trace, j, val, facts, memo)

    op = f[0]
    if op == "atom":
        _, pred, terms, bg = f
        ground = (pred, tuple(val[t[1]] if t[0] == "var" else t[1] for t in terms))
        return ground in facts if bg else ground in trace[i]
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "not":
        return not sat_(f[1], i)
    if op == "and":
        return sat_(f[1], i) and sat_(f[2], i)
    if op == "or":
        return sat_(f[1], i) or sat_(f[2], i)
    if op == "implies":
        return (not sat_(f[1], i)) or sat_(f[2], i)
    if op == "prev":
        return i > 0 and sat_(f[1], i - 1)
    if op == "once":
        return any(sat_(f[1], j) for j in range(i + 1))
    if op == "hist":
        return all(sat_(f[1], j) for j in range(i + 1))
    if op == "since":
        return any(sat_(f[2], j)
                   and all(sat_(f[1], k) for k in range(j + 1, i + 1))
                   for j in range(i + 1))
    raise ValueError(op)


def domains(f, trace, upto) -> dict:
    dom = {v: set() for v in oracle_vars(f)}
    event_atoms = [g for g in _walk(f) if g[0] == "atom" and not g[3]]
    for i in range(upto + 1):
        for pred, vals in trace[i]:
            for a in event_atoms:
                if a[1] == pred and len(a[2]) == len(vals):
                    for t, v in zip(a[2], vals):
                        if t[0] == "var":
                            dom[t[1]].add(v)
    return dom


def violations_at(f, trace, i, facts, memos=None) -> set:
    """Valuations (as sorted item tuples) whose formula is false at step i.

    ``memos`` (a dict) caches truth values per valuation across calls on
    the same trace; leave it None to evaluate from scratch.
    """
    names = oracle_vars(f)
    dom = domains(f, trace, i)
    out = set()
    for combo in itertools.product(*[sorted(dom[n], key=repr) for n in names]):
        val = dict(zip(names, combo))
        memo = None if memos is None else memos.setdefault(combo, {})
        if not sat(f, trace, i, val, facts, memo):
            out.add(tuple(sorted(val.items())))
    return out
