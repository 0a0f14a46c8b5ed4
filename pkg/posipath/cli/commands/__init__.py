"""
CLI verb modules.

Each module exposes register(subparsers) and run(args, settings) -> int.
"""
from posipath.cli.commands import (
    classify,
    connect,
    extend,
    index,
    selftest,
    stability,
    sweep,
    trace,
)

VERBS = {
    "classify": classify,
    "trace": trace,
    "connect": connect,
    "extend": extend,
    "index": index,
    "stability": stability,
    "sweep": sweep,
    "selftest": selftest,
}

__all__ = ["VERBS"]
