"""Bundled fixture models with recorded baselines.

Baselines are values this toolchain computed once and froze so CI can
detect drift: structure-automaton shapes, initial-state counts and
property verdicts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from ..errors import UnknownFixture

_FILES = {
    "resource-allocation": ("resource_allocation.rcp", "resource_allocation.ltl"),
    "ping": ("ping.rcp", None),
    "deadlock-multicast": ("deadlock_multicast.rcp", None),
    "broadcast-exclude": ("broadcast_exclude.rcp", None),
}

# agent -> (state count, edge count), derived by applying the five
# translation rules by hand to the case-study processes
AUTOMATON_SHAPES = {
    "resource-allocation": {
        "Client": (6, 9),
        "Manager": (4, 5),
        "Machine": (2, 6),
    },
}

INITIAL_STATE_COUNTS = {
    "resource-allocation": 1,
    "ping": 1,
    "deadlock-multicast": 1,
    "broadcast-exclude": 1,
}


@dataclass
class Fixture:
    name: str
    model_text: str
    properties_text: str | None
    baselines: dict = field(default_factory=dict)


def fixture_names() -> list[str]:
    return sorted(_FILES)


def load_fixture(name: str) -> Fixture:
    if name not in _FILES:
        raise UnknownFixture(f"unknown fixture {name!r}; have {', '.join(fixture_names())}")
    model_file, props_file = _FILES[name]
    pkg = resources.files(__package__)
    model_text = (pkg / model_file).read_text(encoding="utf-8")
    props_text = (pkg / props_file).read_text(encoding="utf-8") if props_file else None
    baselines = {
        "automaton_shapes": AUTOMATON_SHAPES.get(name, {}),
        "initial_states": INITIAL_STATE_COUNTS.get(name),
    }
    return Fixture(name, model_text, props_text, baselines)
