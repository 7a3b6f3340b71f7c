"""Shared strategies and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools

import hypothesis.strategies as st
from hypothesis import settings

from dataspace import Capture, Record, Sym, WILDCARD, erase, matches, rec

settings.register_profile("deterministic", derandomize=True, max_examples=150)
settings.load_profile("deterministic")


ATOM_VOCAB = (0, 1, 2, "a", "b", Sym("x"), Sym("y"))
LABEL_VOCAB = ("f", "g", "observe")


def atom_strategy():
    return st.sampled_from(ATOM_VOCAB)


def pattern_strategy(allow_wildcard=True, max_leaves=8):
    leaves = atom_strategy()
    if allow_wildcard:
        leaves = leaves | st.just(WILDCARD)
    return st.recursive(
        leaves,
        lambda children: st.builds(
            lambda label, fields: rec(label, *fields),
            st.sampled_from(LABEL_VOCAB),
            st.lists(children, min_size=0, max_size=3),
        ),
        max_leaves=max_leaves,
    )


def value_strategy(max_leaves=8):
    return pattern_strategy(allow_wildcard=False, max_leaves=max_leaves)


def ground_universe(atoms=("novel.txt", "x", 0, Sym("s")), labels=("file", "observe")):
    """Every ground value of depth <= 3 over a small vocabulary."""
    depth1 = list(atoms)
    depth2 = [
        rec(label, *fields)
        for label in labels
        for arity in (1, 2)
        for fields in itertools.product(depth1, repeat=arity)
    ]
    depth3 = [rec(label, v) for label in labels for v in depth2]
    return depth1 + depth2 + depth3


def match_set(p, universe):
    return frozenset(v for v in universe if matches(p, v))


def capture_paths(proj, path=()):
    if isinstance(proj, Capture):
        return [path]
    if isinstance(proj, Record):
        out = []
        for i, f in enumerate(proj.fields):
            out.extend(capture_paths(f, (*path, i)))
        return out
    return []


def subtree_at(value, path):
    for i in path:
        value = value.fields[i]
    return value


def brute_force_project(assertions, proj):
    """Filter-and-extract oracle for projections over ground assertion sets."""
    paths = capture_paths(proj)
    stripped = erase(proj)
    out = set()
    for a in assertions:
        if matches(stripped, a):
            out.add(tuple(subtree_at(a, p) for p in paths))
    return out
