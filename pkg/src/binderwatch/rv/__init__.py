from .mapping import (EventMapping, MappingArityError, MappingError, MonitorRouter,
                      load_facts, load_mapping, parse_facts, parse_mapping)
from .monitor import MonitorInstance, Violation, spawn_monitor
from .policy import (Policy, PolicyError, PolicySyntaxError, UngroundedVariable,
                     parse_formula, parse_policy, parse_policy_file)


def load_policies(path=None):
    from importlib import resources
    from pathlib import Path
    if path is None:
        text = resources.files("binderwatch.data").joinpath("policies.pol").read_text()
    else:
        text = Path(path).read_text()
    return parse_policy_file(text)


__all__ = [
    "EventMapping", "MappingArityError", "MappingError", "MonitorInstance", "MonitorRouter",
    "Policy", "PolicyError", "PolicySyntaxError", "UngroundedVariable", "Violation",
    "load_facts", "load_mapping", "load_policies", "parse_facts", "parse_formula",
    "parse_mapping", "parse_policy", "parse_policy_file", "spawn_monitor",
]
