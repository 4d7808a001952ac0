"""Workbench for reconfigurable multi-agent models.

Parses `.rcp` models, builds structure automata, compiles agents to
symbolic guarded-transition form, enumerates joint transitions,
model-checks LTL over message-exchange labels, exports SMV text and
drives an interactive constraint-guided simulator.
"""
from __future__ import annotations

__version__ = "0.1.0"


def load_system(model_text: str):
    """Parse, typecheck and compile a model in one call."""
    from .lang.parser import parse_model
    from .symbolic import compile_system
    from .types import typecheck

    return compile_system(typecheck(parse_model(model_text)))
