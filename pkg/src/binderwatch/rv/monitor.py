"""Incremental monitors: one propositional past-time monitor per valuation.

Each variable's domain holds the values seen for it in event predicates.
A placeholder binding, where a variable stands for "a value never seen
yet", is carried along from the first step. When a value first shows up
its binding copies the placeholder's state, which is exactly the history
that value would have had. Values mentioned in background facts can make
rigid atoms true before they appear in any event, so they get their own
shadow bindings from the start. Only bindings made of real trace values
are counted or reported.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .policy import (And, Atom, Const, Historically, Implies, Not, Once, Or, Policy,
                     Prev, Since, Truth, Var, subformulas)


class _Unseen:
    __slots__ = ()

    def __repr__(self):
        return "<unseen>"


UNSEEN = _Unseen()


@dataclass(frozen=True)
class Violation:
    policy: str
    uid: int | None
    binding: tuple
    event_index: int

    @property
    def valuation(self) -> dict:
        return dict(self.binding)


def _atom_values(atom: Atom, binding: dict) -> tuple:
    return tuple(binding[t.name] if isinstance(t, Var) else t.value for t in atom.terms)


class MonitorInstance:
    def __init__(self, uid, policy: Policy, background=frozenset(), mapping=None):
        self.uid = uid
        self.policy = policy
        self.background = frozenset(background)
        self.mapping = mapping
        self.step_count = 0
        self._nodes = subformulas(policy.formula)
        self._index = {n: i for i, n in enumerate(self._nodes)}
        self._vars = policy.variables
        self._event_atoms = [n for n in self._nodes if isinstance(n, Atom) and not n.background]
        self.domains: dict[str, set] = {v: set() for v in self._vars}
        self._shadow = self._shadow_values()
        self._initial = self._no_past()
        # keys are value tuples over self._vars; each maps to last step's truth vector
        self._states: dict[tuple, list] = {}
        for key in itertools.product(*[[UNSEEN, *sorted(self._shadow[v], key=repr)]
                                       for v in self._vars]):
            self._states[key] = list(self._initial)

    def _shadow_values(self) -> dict:
        shadow = {v: set() for v in self._vars}
        for n in self._nodes:
            if isinstance(n, Atom) and n.background:
                for k, t in enumerate(n.terms):
                    if isinstance(t, Var):
                        shadow[t.name].update(f[1][k] for f in self.background
                                              if f[0] == n.pred and len(f[1]) == len(n.terms))
        return shadow

    def _no_past(self) -> list:
        return [isinstance(n, Historically) for n in self._nodes]

    @property
    def binding_count(self) -> int:
        count = 1
        for v in self._vars:
            count *= len(self.domains[v])
        return count

    def bindings(self) -> list[dict]:
        return [dict(zip(self._vars, key)) for key in self._states if self._is_real(key)]

    def _is_real(self, key) -> bool:
        return all(val in self.domains[v] for v, val in zip(self._vars, key))

    def _admit(self, var: str, value) -> None:
        """Add ``value`` to ``var``'s domain, creating bindings from the placeholder."""
        self.domains[var].add(value)
        if value in self._shadow[var]:
            return
        pos = self._vars.index(var)
        for key in [k for k in self._states if k[pos] is UNSEEN]:
            new = key[:pos] + (value,) + key[pos + 1:]
            self._states[new] = list(self._states[key])

    def _eval(self, key, prev, ground: frozenset) -> list:
        binding = dict(zip(self._vars, key))
        first = self.step_count == 0
        cur = [False] * len(self._nodes)
        idx = self._index
        for i, n in enumerate(self._nodes):
            if isinstance(n, Atom):
                fact = (n.pred, _atom_values(n, binding))
                cur[i] = fact in (self.background if n.background else ground)
            elif isinstance(n, Truth):
                cur[i] = n.value
            elif isinstance(n, Not):
                cur[i] = not cur[idx[n.sub]]
            elif isinstance(n, And):
                cur[i] = cur[idx[n.left]] and cur[idx[n.right]]
            elif isinstance(n, Or):
                cur[i] = cur[idx[n.left]] or cur[idx[n.right]]
            elif isinstance(n, Implies):
                cur[i] = (not cur[idx[n.left]]) or cur[idx[n.right]]
            elif isinstance(n, Prev):
                cur[i] = (not first) and prev[idx[n.sub]]
            elif isinstance(n, Once):
                cur[i] = cur[idx[n.sub]] or prev[i]
            elif isinstance(n, Historically):
                cur[i] = cur[idx[n.sub]] and prev[i]
            elif isinstance(n, Since):
                cur[i] = cur[idx[n.right]] or (cur[idx[n.left]] and prev[i])
            else:
                raise TypeError(f"unknown formula node {n!r}")
        return cur

    def step_ground(self, ground) -> list[Violation]:
        """Advance one step over a set of ground event predicates ``(pred, values)``."""
        ground = frozenset((p, tuple(vals)) for p, vals in ground)
        for atom in self._event_atoms:
            for pred, vals in ground:
                if pred != atom.pred or len(vals) != len(atom.terms):
                    continue
                for t, val in zip(atom.terms, vals):
                    if isinstance(t, Var) and val not in self.domains[t.name]:
                        self._admit(t.name, val)
        root = len(self._nodes) - 1
        violations = []
        for key, prev in self._states.items():
            cur = self._eval(key, prev, ground)
            self._states[key] = cur
            if not cur[root] and self._is_real(key):
                violations.append(Violation(self.policy.name, self.uid,
                                            tuple(zip(self._vars, key)), self.step_count))
        self.step_count += 1
        return violations

    def copy(self) -> "MonitorInstance":
        """An independent fork with the same history."""
        twin = object.__new__(MonitorInstance)
        twin.__dict__.update(self.__dict__)
        twin.domains = {v: set(d) for v, d in self.domains.items()}
        twin._states = {k: list(s) for k, s in self._states.items()}
        return twin

    def step(self, event) -> list[Violation]:
        if self.mapping is None:
            raise ValueError("monitor has no event mapping; use step_ground")
        return self.step_ground(self.mapping.map_event(event))


def spawn_monitor(uid, policy: Policy, background=frozenset(), mapping=None) -> MonitorInstance:
    return MonitorInstance(uid, policy, background, mapping)
