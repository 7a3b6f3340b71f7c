"""Deterministic trace log and trace replay helpers.

Each entry is a flat JSON object {seq, actor, kind, data}; assertion sets
inside patches are sorted by the canonical ordering so two runs of the same
program serialize byte-identically.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .patches import Patch
from .values import from_jsonable, intersect, sort_patterns, to_jsonable

__all__ = ["TraceLog", "aggregate_snapshots", "patch_jsonable"]


@dataclass
class TraceLog:
    """Append-only ordered record of everything a network run did."""

    entries: list = field(default_factory=list)

    def emit(self, actor: str, kind: str, data) -> None:
        self.entries.append(
            {"seq": len(self.entries), "actor": actor, "kind": kind, "data": data}
        )

    def lines(self) -> list[str]:
        return [json.dumps(e, separators=(",", ":")) for e in self.entries]


def patch_jsonable(p: Patch) -> dict:
    return {
        "added": [to_jsonable(a) for a in sort_patterns(p.added)],
        "removed": [to_jsonable(a) for a in sort_patterns(p.removed)],
    }


def _iter_entries(trace):
    for item in trace:
        yield json.loads(item) if isinstance(item, str) else item


def aggregate_snapshots(trace, lens) -> list[frozenset]:
    """Distinct aggregate snapshots visible through a lens pattern.

    Replays the patch-out entries of a trace into an assertion bag and
    records the support restricted to lens-matching assertions, collapsing
    consecutive duplicates.  Actor identities are deliberately erased.
    """
    bag: Counter = Counter()
    snaps = [frozenset()]
    for entry in _iter_entries(trace):
        if entry["kind"] != "patch-out":
            continue
        for x in entry["data"]["added"]:
            bag[from_jsonable(x)] += 1
        for x in entry["data"]["removed"]:
            a = from_jsonable(x)
            n = bag[a] - 1
            if n:
                bag[a] = n
            else:
                del bag[a]
        cur = frozenset(a for a in bag if intersect(lens, a) is not None)
        if cur != snaps[-1]:
            snaps.append(cur)
    return snaps
