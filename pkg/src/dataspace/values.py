"""Structured values, patterns, and projections.

Everything routed through a dataspace is a finite tree built from four atom
kinds (symbol, string, integer, boolean) and labelled records.  Patterns
extend values with a wildcard leaf; projections mark capture holes; surface
patterns add named binders that compile down to the other two forms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable

__all__ = [
    "Bind",
    "Capture",
    "CaptureUnbounded",
    "DuplicateBinder",
    "MalformedText",
    "Record",
    "Sym",
    "WILDCARD",
    "canonical_decode",
    "canonical_encode",
    "canonical_key",
    "compile_surface",
    "erase",
    "from_jsonable",
    "intersect",
    "is_ground",
    "is_pattern",
    "matches",
    "observe",
    "project_assertions",
    "rec",
    "sort_patterns",
    "to_jsonable",
]


class MalformedText(ValueError):
    """canonical_decode was handed text outside the canonical grammar."""


class CaptureUnbounded(Exception):
    """A wildcard sits inside a capture hole: the capture set would be infinite."""


class DuplicateBinder(ValueError):
    """A surface pattern uses the same binder name more than once."""


@dataclass(frozen=True)
class Sym:
    """Symbol atom, distinct from the string atom with the same spelling."""

    name: str

    def __repr__(self) -> str:
        return f"'{self.name}"


class _Wildcard:
    """Matches any value; a singleton."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "_"


WILDCARD = _Wildcard()


@dataclass(frozen=True)
class Record:
    """Labelled record with an ordered field tuple."""

    label: Sym
    fields: tuple

    def __repr__(self) -> str:
        return "(" + " ".join([self.label.name, *(repr(f) for f in self.fields)]) + ")"


@dataclass(frozen=True)
class Capture:
    """Projection hole; the subtree unified at this position is extracted."""

    sub: Any = WILDCARD

    def __repr__(self) -> str:
        return f"(?! {self.sub!r})"


@dataclass(frozen=True)
class Bind:
    """Named binder in a surface pattern."""

    name: str

    def __repr__(self) -> str:
        return f"${self.name}"


OBSERVE = Sym("observe")


def rec(label: str | Sym, *fields) -> Record:
    """Build a record; a plain string label is promoted to a symbol."""
    return Record(label if isinstance(label, Sym) else Sym(label), tuple(fields))


def observe(p) -> Record:
    """Wrap a pattern as an assertion of interest in values matching it."""
    return rec(OBSERVE, p)


def _same_atom(a, b) -> bool:
    # type identity guards the bool/int overlap in Python's equality
    return type(a) is type(b) and a == b


def is_pattern(p) -> bool:
    """True for wildcards, atoms of the supported kinds, and records thereof."""
    if p is WILDCARD or isinstance(p, (Sym, str, int, bool)):
        return True
    if isinstance(p, Record):
        return all(is_pattern(f) for f in p.fields)
    return False


def is_ground(p) -> bool:
    """True when the pattern contains no wildcard, i.e. it is a value."""
    if p is WILDCARD:
        return False
    if isinstance(p, Record):
        return all(is_ground(f) for f in p.fields)
    return True


def intersect(p, q):
    """Most specific pattern matched by exactly the values matching both.

    Returns None when no ground value matches both.  Wildcard is the
    identity; records unify fieldwise when label and arity agree.
    """
    if p is WILDCARD:
        return q
    if q is WILDCARD:
        return p
    if isinstance(p, Record):
        if (
            not isinstance(q, Record)
            or p.label != q.label
            or len(p.fields) != len(q.fields)
        ):
            return None
        out = []
        for a, b in zip(p.fields, q.fields):
            m = intersect(a, b)
            if m is None:
                return None
            out.append(m)
        return Record(p.label, tuple(out))
    if isinstance(q, Record):
        return None
    return p if _same_atom(p, q) else None


def matches(p, v) -> bool:
    """True iff ground value v is matched by pattern p."""
    if p is WILDCARD:
        return True
    if isinstance(p, Record):
        return (
            isinstance(v, Record)
            and p.label == v.label
            and len(p.fields) == len(v.fields)
            and all(matches(a, b) for a, b in zip(p.fields, v.fields))
        )
    return _same_atom(p, v)


def erase(proj):
    """Strip capture markers, leaving the underlying pattern."""
    if isinstance(proj, Capture):
        return proj.sub
    if isinstance(proj, Record):
        return Record(proj.label, tuple(erase(f) for f in proj.fields))
    return proj


def capture_count(proj) -> int:
    if isinstance(proj, Capture):
        return 1
    if isinstance(proj, Record):
        return sum(capture_count(f) for f in proj.fields)
    return 0


def _walk_captures(proj, unified, out: list) -> None:
    if isinstance(proj, Capture):
        if not is_ground(unified):
            raise CaptureUnbounded(f"wildcard under capture hole: {unified!r}")
        out.append(unified)
    elif isinstance(proj, Record):
        for pf, uf in zip(proj.fields, unified.fields):
            _walk_captures(pf, uf, out)


def project_assertions(assertions: Iterable, proj) -> set:
    """Extract capture tuples from every assertion matching the projection.

    Raises CaptureUnbounded when a matching assertion carries a wildcard
    inside a capture position; the caller decides policy.
    """
    stripped = erase(proj)
    out = set()
    for a in assertions:
        unified = intersect(stripped, a)
        if unified is None:
            continue
        caps: list = []
        _walk_captures(proj, unified, caps)
        out.add(tuple(caps))
    return out


def compile_surface(sp):
    """Split a surface pattern into (subscription, extraction, binder names).

    Binders become wildcards in the subscription and capture holes in the
    extraction; names are reported in left-to-right order.
    """
    names: list[str] = []

    def scan(p) -> None:
        if isinstance(p, Bind):
            if p.name in names:
                raise DuplicateBinder(p.name)
            names.append(p.name)
        elif isinstance(p, Record):
            for f in p.fields:
                scan(f)

    def to_subscription(p):
        if isinstance(p, Bind):
            return WILDCARD
        if isinstance(p, Record):
            return Record(p.label, tuple(to_subscription(f) for f in p.fields))
        return p

    def to_extraction(p):
        if isinstance(p, Bind):
            return Capture(WILDCARD)
        if isinstance(p, Record):
            return Record(p.label, tuple(to_extraction(f) for f in p.fields))
        return p

    scan(sp)
    return to_subscription(sp), to_extraction(sp), tuple(names)


def to_jsonable(p):
    """Canonical JSON-ready form: symbols quote-prefixed, records as arrays."""
    if p is WILDCARD:
        return "_"
    if isinstance(p, bool):
        return p
    if isinstance(p, int):
        return p
    if isinstance(p, str):
        if p == "_" or p.startswith("'"):
            raise ValueError(f"string {p!r} collides with the canonical grammar")
        return p
    if isinstance(p, Sym):
        return "'" + p.name
    if isinstance(p, Capture):
        return ["?!", to_jsonable(p.sub)]
    if isinstance(p, Record):
        if p.label.name == "?!":
            raise ValueError("record label '?!' collides with the capture marker")
        return [p.label.name, *(to_jsonable(f) for f in p.fields)]
    raise TypeError(f"not a pattern: {p!r}")


def from_jsonable(x):
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        if x == "_":
            return WILDCARD
        if x.startswith("'"):
            return Sym(x[1:])
        return x
    if isinstance(x, list):
        if not x or not isinstance(x[0], str):
            raise MalformedText(f"record array needs a string label: {x!r}")
        if x[0] == "?!":
            if len(x) != 2:
                raise MalformedText(f"capture marker takes one argument: {x!r}")
            return Capture(from_jsonable(x[1]))
        return Record(Sym(x[0]), tuple(from_jsonable(f) for f in x[1:]))
    raise MalformedText(f"unsupported node: {x!r}")


def canonical_encode(p) -> str:
    """Render a pattern as canonical text (compact JSON)."""
    return json.dumps(to_jsonable(p), separators=(",", ":"))


def canonical_decode(text: str):
    """Parse canonical text back into a pattern."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedText(str(exc)) from exc
    return from_jsonable(data)


def canonical_key(p):
    """Sort key giving the total canonical ordering: atoms before records."""
    if p is WILDCARD:
        return (0,)
    if isinstance(p, bool):
        return (1, p)
    if isinstance(p, int):
        return (2, p)
    if isinstance(p, str):
        return (3, p)
    if isinstance(p, Sym):
        return (4, p.name)
    if isinstance(p, Capture):
        return (5, canonical_key(p.sub))
    return (6, p.label.name, len(p.fields), tuple(canonical_key(f) for f in p.fields))


def sort_patterns(patterns: Iterable) -> list:
    return sorted(patterns, key=canonical_key)
