import itertools

import hypothesis.strategies as st
import pytest
from hypothesis import given

from dataspace import (
    EMPTY_PATCH,
    Patch,
    Sym,
    WILDCARD,
    apply_patch,
    clamp_patch,
    delta,
    interests_of,
    observe,
    rec,
    seq_patches,
    visible,
)


def account(x):
    return rec("account", x)


def deposit(x):
    return rec("deposit", x)


UNIVERSE = (
    account(0),
    account(100),
    observe(deposit(WILDCARD)),
    observe(account(WILDCARD)),
    rec("file", "novel.txt", False),
    Sym("ok"),
)

sets = st.frozensets(st.sampled_from(UNIVERSE), max_size=6)


@st.composite
def patches(draw):
    added = draw(sets)
    removed = draw(sets) - added
    return Patch(added, removed)


def test_patch_disjointness_enforced():
    with pytest.raises(ValueError):
        Patch({account(0)}, {account(0)})


def test_apply_patch_startup():
    p = Patch({account(0), observe(deposit(WILDCARD))}, ())
    assert apply_patch(frozenset(), p) == {account(0), observe(deposit(WILDCARD))}


def test_apply_patch_balance_update():
    p = Patch({account(100)}, {account(0)})
    assert apply_patch(frozenset({account(0)}), p) == {account(100)}


def test_apply_empty_patch_is_identity():
    s = frozenset({account(0), Sym("ok")})
    assert apply_patch(s, EMPTY_PATCH) == s


def test_seq_patches_balance_update():
    got = seq_patches(Patch((), {account(0)}), Patch({account(100)}, ()))
    assert got == Patch({account(100)}, {account(0)})


def test_seq_patches_add_then_remove():
    x = account(0)
    got = seq_patches(Patch({x}, ()), Patch((), {x}))
    assert got == Patch((), {x})
    # set oracle: apply in both orders over every subset of a 2-element universe
    y = account(100)
    for subset in map(frozenset, itertools.chain.from_iterable(
        itertools.combinations({x, y}, n) for n in range(3)
    )):
        assert apply_patch(subset, got) == apply_patch(
            apply_patch(subset, Patch({x}, ())), Patch((), {x})
        )


def test_seq_patches_right_identity():
    p = Patch({account(0)}, {account(100)})
    assert seq_patches(p, EMPTY_PATCH) == p
    assert seq_patches(EMPTY_PATCH, p) == p


def test_clamp_patch_reassertion_noop():
    a = account(0)
    assert clamp_patch(Patch({a}, ()), frozenset({a})) == EMPTY_PATCH


def test_clamp_patch_absent_retraction_noop():
    assert clamp_patch(Patch((), {account(100)}), frozenset({account(0)})) == EMPTY_PATCH


def test_clamp_patch_balance_update_passes_through():
    current = frozenset({account(0), observe(deposit(WILDCARD))})
    p = Patch({account(100)}, {account(0)})
    clamped = clamp_patch(p, current)
    assert clamped == p
    assert apply_patch(current, clamped) == apply_patch(current, p)


def test_interests_of_unwraps_one_level():
    s = {observe(deposit(WILDCARD)), account(0)}
    assert interests_of(s) == {deposit(WILDCARD)}
    nested = {observe(observe(deposit(WILDCARD)))}
    assert interests_of(nested) == {observe(deposit(WILDCARD))}
    assert interests_of({account(0)}) == frozenset()


def test_visible_examples():
    agg = {account(0), observe(deposit(WILDCARD))}
    assert visible(agg, {account(WILDCARD)}) == {account(0)}
    assert visible({observe(deposit(WILDCARD))}, {observe(deposit(WILDCARD))}) == {
        observe(deposit(WILDCARD))
    }
    assert visible(agg, set()) == frozenset()


def test_delta_examples():
    assert delta(frozenset({account(0)}), frozenset({account(100)})) == Patch(
        {account(100)}, {account(0)}
    )
    s = frozenset({account(0)})
    assert delta(s, s) == EMPTY_PATCH
    f = rec("file", "novel.txt", False)
    assert delta(frozenset(), frozenset({f})) == Patch({f}, ())


@given(sets, patches(), patches())
def test_apply_seq_homomorphism(s, p1, p2):
    assert apply_patch(apply_patch(s, p1), p2) == apply_patch(s, seq_patches(p1, p2))


@given(patches(), patches(), patches())
def test_seq_associative(p1, p2, p3):
    assert seq_patches(seq_patches(p1, p2), p3) == seq_patches(p1, seq_patches(p2, p3))


@given(patches())
def test_empty_patch_two_sided_identity(p):
    assert seq_patches(p, EMPTY_PATCH) == p
    assert seq_patches(EMPTY_PATCH, p) == p


@given(sets, sets)
def test_delta_apply_round_trip(before, after):
    d = delta(before, after)
    assert apply_patch(before, d) == after
    # delta is already clamped relative to before
    assert clamp_patch(d, before) == d


@given(sets, patches())
def test_clamp_preserves_effect(s, p):
    assert apply_patch(s, clamp_patch(p, s)) == apply_patch(s, p)


@given(sets, sets, sets)
def test_visible_monotone(agg, extra, interests):
    assert visible(agg, interests) <= visible(agg | extra, interests)
    assert visible(agg, interests) <= visible(agg, interests | {WILDCARD})
