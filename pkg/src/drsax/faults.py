"""Deliberate bugs, switched on only by tests and experiments that check the
harness notices them."""

from __future__ import annotations

import contextlib
import os

KNOWN = frozenset({"drop_persistence", "drop_plus_path_eq", "skip_with_entailment"})
ENV = "DRSAX_FAULTS"

# comma-separated names in the environment switch faults on for a whole run
_active: set[str] = {f for f in os.environ.get(ENV, "").split(",") if f}
if _active - KNOWN:
    raise ValueError(f"unknown faults in {ENV}: {sorted(_active - KNOWN)}")


def active(name: str) -> bool:
    return name in _active


@contextlib.contextmanager
def inject(name: str):
    if name not in KNOWN:
        raise ValueError(f"unknown fault {name!r}")
    _active.add(name)
    try:
        yield
    finally:
        _active.discard(name)
