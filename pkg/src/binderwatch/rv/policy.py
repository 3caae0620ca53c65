"""Policy language: parameterized past-time temporal logic.

Grammar (keywords are upper case; lowest precedence first)::

    formula  := or_expr [ 'IMPLIES' formula ]
    or_expr  := and_expr { 'OR' and_expr }
    and_expr := since { 'AND' since }
    since    := unary { 'SINCE' unary }
    unary    := ('NOT' | 'PREV' | 'ONCE' | 'HISTORICALLY') unary
              | '(' formula ')' | 'TRUE' | 'FALSE' | atom
    atom     := name '(' [ term { ',' term } ] ')'
    term     := variable | integer | quoted string

Every formula is checked at every event (an implicit outer ALWAYS).
Predicates named in ``background`` are rigid facts; all others are
matched against events.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

DEFAULT_BACKGROUND = frozenset({"contact"})


class PolicyError(Exception):
    pass


class PolicySyntaxError(PolicyError):
    def __init__(self, pos, message):
        self.pos = pos
        super().__init__(f"at {pos}: {message}")


class UngroundedVariable(PolicyError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name!r} never appears in an event predicate")


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: object

    def __str__(self):
        return repr(self.value) if isinstance(self.value, str) else str(self.value)


@dataclass(frozen=True)
class Atom:
    pred: str
    terms: tuple
    background: bool = False

    def __str__(self):
        return f"{self.pred}({', '.join(map(str, self.terms))})"


@dataclass(frozen=True)
class Truth:
    value: bool

    def __str__(self):
        return "TRUE" if self.value else "FALSE"


@dataclass(frozen=True)
class Not:
    sub: object

    def __str__(self):
        return f"NOT {_wrap(self.sub)}"


@dataclass(frozen=True)
class Prev:
    sub: object

    def __str__(self):
        return f"PREV {_wrap(self.sub)}"


@dataclass(frozen=True)
class Once:
    sub: object

    def __str__(self):
        return f"ONCE {_wrap(self.sub)}"


@dataclass(frozen=True)
class Historically:
    sub: object

    def __str__(self):
        return f"HISTORICALLY {_wrap(self.sub)}"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} AND {self.right})"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} OR {self.right})"


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} IMPLIES {self.right})"


@dataclass(frozen=True)
class Since:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} SINCE {self.right})"


UNARY = (Not, Prev, Once, Historically)
BINARY = (And, Or, Implies, Since)


def _wrap(f):
    return str(f) if isinstance(f, (Atom, Truth) + UNARY) else f"({f})"


def children(f) -> tuple:
    if isinstance(f, UNARY):
        return (f.sub,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    return ()


def subformulas(f) -> list:
    """Distinct subformulas in post-order: children always precede parents."""
    out, seen = [], set()

    def walk(g):
        if g in seen:
            return
        for c in children(g):
            walk(c)
        seen.add(g)
        out.append(g)

    walk(f)
    return out


def atoms(f) -> list[Atom]:
    return [g for g in subformulas(f) if isinstance(g, Atom)]


@dataclass(frozen=True)
class Policy:
    name: str
    formula: object
    variables: tuple = field(default=())

    @property
    def event_predicates(self) -> frozenset:
        return frozenset(a.pred for a in atoms(self.formula) if not a.background)

    @property
    def background_predicates(self) -> frozenset:
        return frozenset(a.pred for a in atoms(self.formula) if a.background)

    def __str__(self):
        return f"policy {self.name}: {self.formula}"


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>-?\d+)
  | (?P<str>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),])
""", re.VERBOSE)

KEYWORDS = {"NOT", "AND", "OR", "IMPLIES", "PREV", "ONCE", "HISTORICALLY", "SINCE",
            "TRUE", "FALSE"}


def _tokenize(text):
    pos, toks = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolicySyntaxError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "name" and value in KEYWORDS:
                kind = "kw"
            toks.append((kind, value, pos))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text, background):
        self.toks = _tokenize(text)
        self.i = 0
        self.background = background

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise PolicySyntaxError(tok[2], f"expected {want!r}, got {tok[1] or 'end of input'!r}")
        return tok

    def at_kw(self, word):
        tok = self.peek()
        return tok[0] == "kw" and tok[1] == word

    def formula(self):
        left = self.or_expr()
        if self.at_kw("IMPLIES"):
            self.next()
            return Implies(left, self.formula())
        return left

    def or_expr(self):
        left = self.and_expr()
        while self.at_kw("OR"):
            self.next()
            left = Or(left, self.and_expr())
        return left

    def and_expr(self):
        left = self.since()
        while self.at_kw("AND"):
            self.next()
            left = And(left, self.since())
        return left

    def since(self):
        left = self.unary()
        while self.at_kw("SINCE"):
            self.next()
            left = Since(left, self.unary())
        return left

    def unary(self):
        kind, value, pos = self.peek()
        ops = {"NOT": Not, "PREV": Prev, "ONCE": Once, "HISTORICALLY": Historically}
        if kind == "kw" and value in ops:
            self.next()
            return ops[value](self.unary())
        if kind == "kw" and value in ("TRUE", "FALSE"):
            self.next()
            return Truth(value == "TRUE")
        if kind == "punct" and value == "(":
            self.next()
            f = self.formula()
            self.expect("punct", ")")
            return f
        if kind == "name":
            return self.atom()
        raise PolicySyntaxError(pos, f"expected a formula, got {value or 'end of input'!r}")

    def atom(self):
        _, pred, _ = self.next()
        self.expect("punct", "(")
        terms = []
        if not (self.peek()[0] == "punct" and self.peek()[1] == ")"):
            terms.append(self.term())
            while self.peek()[0] == "punct" and self.peek()[1] == ",":
                self.next()
                terms.append(self.term())
        self.expect("punct", ")")
        return Atom(pred, tuple(terms), pred in self.background)

    def term(self):
        kind, value, pos = self.next()
        if kind == "name":
            return Var(value)
        if kind == "num":
            return Const(int(value))
        if kind == "str":
            return Const(bytes(value[1:-1], "utf-8").decode("unicode_escape"))
        raise PolicySyntaxError(pos, f"expected a term, got {value or 'end of input'!r}")


def parse_formula(text: str, background=DEFAULT_BACKGROUND):
    p = _Parser(text, frozenset(background))
    f = p.formula()
    kind, value, pos = p.peek()
    if kind != "end":
        raise PolicySyntaxError(pos, f"unexpected {value!r}")
    return f


def free_variables(f) -> tuple:
    out = []
    for a in atoms(f):
        for t in a.terms:
            if isinstance(t, Var) and t.name not in out:
                out.append(t.name)
    return tuple(out)


def parse_policy(text: str, name: str = "policy", background=DEFAULT_BACKGROUND) -> Policy:
    formula = parse_formula(text, background)
    variables = free_variables(formula)
    bound = {t.name for a in atoms(formula) if not a.background
             for t in a.terms if isinstance(t, Var)}
    for v in variables:
        if v not in bound:
            raise UngroundedVariable(v)
    return Policy(name, formula, variables)


def parse_policy_file(text: str, background=DEFAULT_BACKGROUND) -> list[Policy]:
    """Parse ``policy <name>: <formula>`` blocks.

    A block runs until the next ``policy`` line; ``background <pred>``
    lines add rigid predicate names for every policy in the file.
    """
    background = set(background)
    blocks: list[list] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip()
        if head.startswith("background "):
            background.update(head.split()[1:])
        elif head.startswith("policy "):
            name, sep, body = head[len("policy "):].partition(":")
            if not sep or not name.strip():
                raise PolicySyntaxError(0, f"line {line_no}: expected 'policy <name>: <formula>'")
            blocks.append([name.strip(), body, line_no])
        elif blocks:
            blocks[-1][1] += " " + head
        else:
            raise PolicySyntaxError(0, f"line {line_no}: text outside a policy block")
    names = set()
    policies = []
    for name, body, line_no in blocks:
        if name in names:
            raise PolicyError(f"line {line_no}: duplicate policy {name!r}")
        names.add(name)
        policies.append(parse_policy(body, name, background))
    return policies
