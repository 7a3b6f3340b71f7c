"""Reactive actors: sequential scripts, blocking states, and facets.

A script is a generator over an :class:`ActorContext`; yielding a state spec
blocks the script until one of the state's termination clauses fires.  Every
state runs its facets in a fresh actor: the parent installs an internal
watcher for a reserved completion assertion, the fresh actor hosts the
facets, and the termination clause's result values travel back through the
dataspace.  Facets of one actor share a reference-counted assertion mux so
overlapping contributions never interfere.
"""

from __future__ import annotations

import inspect
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .network import (
    Continue,
    MessageAction,
    MessageEvent,
    OutputAction,
    PatchAction,
    PatchEvent,
    QUIT,
    SpawnAction,
)
from .patches import Patch
from .values import (
    Bind,
    Capture,
    Record,
    Sym,
    compile_surface,
    intersect,
    is_ground,
    is_pattern,
    matches,
    observe,
    project_assertions,
    rec,
    sort_patterns,
)

__all__ = [
    "Assert",
    "Asserted",
    "Message",
    "On",
    "ReactiveState",
    "Retracted",
    "RisingEdge",
    "StateSpec",
    "When",
    "forever",
    "reactive_actor",
    "state",
    "until",
]

RESERVED_LABEL = Sym("state-result")
_VALUES_LABEL = Sym("values")


# -- event specifications ----------------------------------------------------


@dataclass(frozen=True)
class Message:
    """Triggered by an incoming message matching the surface pattern."""

    pattern: Any


@dataclass(frozen=True)
class Asserted:
    """Triggered once per assertion added to the dataspace and matching."""

    pattern: Any


@dataclass(frozen=True)
class Retracted:
    """Triggered once per matching assertion removed from the dataspace."""

    pattern: Any


@dataclass(frozen=True)
class RisingEdge:
    """Triggered when the predicate over collected values turns true."""

    predicate: Callable


@dataclass(frozen=True)
class Assert:
    """Facet keeping one assertion derived from the collected values current."""

    template: Callable


@dataclass(frozen=True)
class On:
    """Facet running a body for each triggering event."""

    spec: Any
    body: Callable


@dataclass(frozen=True)
class When:
    """Termination clause; its body's return values resume the waiting script."""

    spec: Any
    body: Optional[Callable] = None


@dataclass(frozen=True)
class _CompiledOn:
    kind: str  # message | asserted | retracted
    subscription: Any
    extraction: Any
    names: tuple
    body: Optional[Callable]


@dataclass(frozen=True)
class _CompiledWhen:
    kind: str  # message | asserted | retracted | rising-edge
    subscription: Any = None
    extraction: Any = None
    names: tuple = ()
    predicate: Optional[Callable] = None
    body: Optional[Callable] = None


@dataclass(frozen=True)
class StateSpec:
    """Compiled state: collected bindings, facets, termination clauses."""

    collect: tuple
    asserts: tuple
    ons: tuple
    whens: tuple


def _contains_reserved(p) -> bool:
    if isinstance(p, Record):
        return p.label == RESERVED_LABEL or any(
            _contains_reserved(f) for f in p.fields
        )
    if isinstance(p, (Capture, Bind)):
        return isinstance(p, Capture) and _contains_reserved(p.sub)
    return False


def _check_arity(fn: Callable, expected: int, what: str) -> None:
    try:
        params = list(inspect.signature(fn).parameters.values())
    except (TypeError, ValueError):
        return
    if any(p.kind == p.VAR_POSITIONAL for p in params):
        return
    positional = [
        p for p in params if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)
    ]
    required = [p for p in positional if p.default is p.empty]
    if not (len(required) <= expected <= len(positional)):
        raise ValueError(
            f"{what} takes {len(positional)} positional args, expected {expected}"
        )


def _compile_pattern_event(spec, check_reserved: bool):
    kind = {Message: "message", Asserted: "asserted", Retracted: "retracted"}[
        type(spec)
    ]
    if check_reserved and _contains_reserved(spec.pattern):
        raise ValueError(f"pattern uses the reserved label {RESERVED_LABEL!r}")
    subscription, extraction, names = compile_surface(spec.pattern)
    return kind, subscription, extraction, names


def _make_spec(collect, facets, stop, *, check_reserved=True) -> StateSpec:
    collect = tuple((str(name), init) for name, init in collect)
    n = len(collect)
    asserts = []
    ons = []
    for f in facets:
        if isinstance(f, Assert):
            _check_arity(f.template, n, "assert template")
            asserts.append(f)
        elif isinstance(f, On):
            if isinstance(f.spec, RisingEdge):
                raise TypeError("rising-edge events only trigger termination clauses")
            kind, sub, ext, names = _compile_pattern_event(f.spec, check_reserved)
            _check_arity(f.body, 1 + n + len(names), f"on({kind}) body")
            ons.append(_CompiledOn(kind, sub, ext, names, f.body))
        else:
            raise TypeError(f"not a facet: {f!r}")
    whens = []
    for w in stop:
        if isinstance(w.spec, RisingEdge):
            _check_arity(w.spec.predicate, n, "rising-edge predicate")
            if w.body is not None:
                _check_arity(w.body, 1 + n, "termination body")
            whens.append(
                _CompiledWhen(kind="rising-edge", predicate=w.spec.predicate, body=w.body)
            )
        else:
            kind, sub, ext, names = _compile_pattern_event(w.spec, check_reserved)
            if w.body is not None:
                _check_arity(w.body, 1 + n + len(names), "termination body")
            whens.append(
                _CompiledWhen(
                    kind=kind,
                    subscription=sub,
                    extraction=ext,
                    names=names,
                    body=w.body,
                )
            )
    return StateSpec(collect, tuple(asserts), tuple(ons), tuple(whens))


def state(*, collect=(), facets=(), stop=()) -> StateSpec:
    """A blocking state: facets stay active until a stop clause fires."""
    return _make_spec(collect, facets, stop)


def until(spec, *, collect=(), facets=(), body=None) -> StateSpec:
    """A state with exactly one termination event."""
    return _make_spec(collect, facets, (When(spec, body),))


def forever(*, collect=(), facets=()) -> StateSpec:
    """A state with no termination events; it never returns."""
    return _make_spec(collect, facets, ())


# -- per-actor runtime ---------------------------------------------------------


class Mux:
    """Reference-counted assertion claims shared by all of an actor's facets.

    The actor's outbound assertion set is the support of the bag; only
    0<->1 transitions produce visible patch actions.
    """

    def __init__(self) -> None:
        self._counts: Counter = Counter()

    def claim(self, a) -> bool:
        self._counts[a] += 1
        return self._counts[a] == 1

    def release(self, a) -> bool:
        n = self._counts[a] - 1
        if n < 0:
            raise KeyError(f"releasing an unclaimed assertion: {a!r}")
        if n:
            self._counts[a] = n
            return False
        del self._counts[a]
        return True

    def support(self) -> frozenset:
        return frozenset(self._counts)


class _Group:
    """One installed state: collected values, facets, and mux contributions."""

    def __init__(self, gid: int, spec: StateSpec, on_complete: Callable):
        self.gid = gid
        self.spec = spec
        self.collected = tuple(init for _, init in spec.collect)
        self.on_complete = on_complete
        self.subscriptions = tuple(
            observe(c.subscription)
            for c in (*spec.ons, *spec.whens)
            if c.kind != "rising-edge"
        )
        self.assert_current: list = [None] * len(spec.asserts)
        self.baselines: list = [None] * len(spec.whens)


class ActorContext:
    """Imperative surface handed to scripts and facet bodies."""

    def __init__(self, runtime: "ReactiveState"):
        self._runtime = runtime

    def send(self, value) -> None:
        """Send a message as a side effect."""
        self._runtime._buffer(MessageAction(value))

    def display(self, value) -> None:
        """Record console-style output as an event-message trace entry."""
        self._runtime._buffer(OutputAction(value))

    def actor(self, script) -> None:
        """Spawn a sibling actor running the given script."""
        self._runtime._buffer(SpawnAction(_reactive_step, ReactiveState(script), ()))

    def detach(self, spec: StateSpec) -> None:
        """Run a state in an independent child actor without waiting for it."""
        self._runtime._buffer(
            SpawnAction(_reactive_step, ReactiveState(None, _initial=(spec, None)), ())
        )


class ReactiveState:
    """Private state of a reactive actor: its script and installed groups."""

    def __init__(self, script, *, _initial=None):
        self._script_fn = script
        self._initial = _initial  # (spec, handshake id | None) for state hosts
        self._gen = None
        self._groups: dict[int, _Group] = {}
        self._mux = Mux()
        self._next_gid = 0
        self._pending: Optional[list] = None
        self._fresh_sid: Optional[Callable] = None
        self._matched = False
        self.ctx = ActorContext(self)

    # -- plumbing -------------------------------------------------------------

    def _buffer(self, action) -> None:
        if self._pending is None:
            raise RuntimeError("actor effect requested outside an actor step")
        self._pending.append(action)

    def collect_actions(self, thunk: Callable[[], None]) -> list:
        """Run thunk with an action buffer installed; return what it emitted."""
        prev = self._pending
        self._pending = []
        try:
            thunk()
            return self._pending
        finally:
            self._pending = prev

    def on_spawn(self, actor_id, network) -> list:
        self._fresh_sid = network.fresh_handshake_id
        return self.collect_actions(self._start)

    def _start(self) -> None:
        if self._initial is not None:
            spec, sid = self._initial
            if sid is None:
                self.install_group(spec, self._complete_detached)
            else:
                self.install_group(spec, lambda raw: self._complete_handshake(sid, raw))
            return
        if self._script_fn is not None:
            out = self._script_fn(self.ctx)
            if inspect.isgenerator(out):
                self._gen = out
                self._advance(None)
                return
        self._finish_script()

    # -- script execution -------------------------------------------------------

    def _advance(self, send_value) -> None:
        try:
            spec = self._gen.send(send_value)
        except StopIteration:
            self._gen = None
            self._finish_script()
            return
        if not isinstance(spec, StateSpec):
            raise TypeError(f"script yielded {spec!r}; expected a state spec")
        self._enter_state(spec)

    def _finish_script(self) -> None:
        if not self._groups:
            self._buffer(QUIT)

    def _enter_state(self, spec: StateSpec) -> None:
        sid = self._fresh_sid()
        watcher_pattern = rec(RESERVED_LABEL, sid, Bind("payload"))
        watcher = _make_spec(
            (),
            (),
            (When(Asserted(watcher_pattern), lambda ctx, payload: payload),),
            check_reserved=False,
        )
        self.install_group(watcher, self._resume_script)
        self._buffer(
            SpawnAction(_reactive_step, ReactiveState(None, _initial=(spec, sid)), ())
        )

    def _resume_script(self, raw) -> None:
        values = raw.fields  # raw is the ground values record
        if len(values) == 0:
            self._advance(None)
        elif len(values) == 1:
            self._advance(values[0])
        else:
            self._advance(tuple(values))

    # -- completion hooks for state-hosting child actors -------------------------

    def _complete_handshake(self, sid: int, raw) -> None:
        vs = _pack_values(raw)
        self._buffer(PatchAction(Patch({rec(RESERVED_LABEL, sid, vs)}, ())))
        self._buffer(QUIT)

    def _complete_detached(self, raw) -> None:
        self._buffer(QUIT)

    # -- group lifecycle ----------------------------------------------------------

    def install_group(self, spec: StateSpec, on_complete: Optional[Callable] = None) -> int:
        """Install a state group: claim its assertions, seed edge baselines."""
        gid = self._next_gid
        self._next_gid += 1
        group = _Group(gid, spec, on_complete or (lambda raw: None))
        added = []
        for a in group.subscriptions:
            if self._mux.claim(a):
                added.append(a)
        for i, f in enumerate(spec.asserts):
            out = f.template(*group.collected)
            group.assert_current[i] = out
            if self._mux.claim(out):
                added.append(out)
        if added:
            self._buffer(PatchAction(Patch(added, ())))
        self._groups[gid] = group
        for i, w in enumerate(spec.whens):
            if w.kind == "rising-edge":
                group.baselines[i] = bool(w.predicate(*group.collected))
        # a predicate already true at install fires without waiting for an event
        for i, w in enumerate(spec.whens):
            if w.kind == "rising-edge" and group.baselines[i]:
                self._fire(group, w, ())
                break
        return gid

    def teardown_group(self, gid: int) -> None:
        """Release the group's mux claims, retracting what nobody else holds."""
        group = self._groups.pop(gid)
        removed = []
        for a in group.subscriptions:
            if self._mux.release(a):
                removed.append(a)
        for out in group.assert_current:
            if out is not None and self._mux.release(out):
                removed.append(out)
        if removed:
            self._buffer(PatchAction(Patch((), removed)))

    # -- event handling ------------------------------------------------------------

    def _deliver(self, event) -> None:
        self._matched = False
        for group in list(self._groups.values()):
            if group.gid not in self._groups:
                continue  # torn down by an earlier group's resumption
            if self._group_handle(group, event):
                self._matched = True

    def _group_handle(self, group: _Group, event) -> bool:
        matched = False
        # 1. facet bodies fold the collected tuple
        if isinstance(event, MessageEvent):
            for c in group.spec.ons:
                if c.kind == "message" and matches(c.subscription, event.body):
                    self._run_body(group, c, event.body)
                    matched = True
        elif isinstance(event, PatchEvent):
            for c in group.spec.ons:
                if c.kind == "asserted":
                    pool = event.patch.added
                elif c.kind == "retracted":
                    pool = event.patch.removed
                else:
                    continue
                hits = [a for a in pool if intersect(c.subscription, a) is not None]
                for a in sort_patterns(hits):
                    self._run_body(group, c, a)
                    matched = True
        # 2. assert facets re-evaluate against the new collected tuple
        if group.gid in self._groups:
            self._refresh_asserts(group)
        # 3. termination clauses, declaration order, first satisfied fires
        if group.gid in self._groups:
            fired = self._check_stop(group, event)
            matched = matched or fired
        return matched

    def _run_body(self, group: _Group, c: _CompiledOn, value) -> None:
        bindings = self._extract(c, value)
        result = c.body(self.ctx, *group.collected, *bindings)
        group.collected = self._fold(group, result)

    def _extract(self, c, value) -> tuple:
        if not c.names:
            return ()
        tuples = project_assertions((value,), c.extraction)
        return next(iter(tuples))

    def _fold(self, group: _Group, result) -> tuple:
        n = len(group.spec.collect)
        if n == 0:
            if result is not None:
                raise ValueError("facet body returned values but nothing is collected")
            return ()
        if n == 1:
            return (result,)
        if not isinstance(result, (tuple, list)) or len(result) != n:
            raise ValueError(f"facet body must return {n} values, got {result!r}")
        return tuple(result)

    def _refresh_asserts(self, group: _Group) -> None:
        adds: list = []
        removes: list = []
        for i, f in enumerate(group.spec.asserts):
            new = f.template(*group.collected)
            old = group.assert_current[i]
            if new == old:
                continue
            if self._mux.release(old):
                if old in adds:
                    adds.remove(old)
                else:
                    removes.append(old)
            if self._mux.claim(new):
                if new in removes:
                    removes.remove(new)
                else:
                    adds.append(new)
            group.assert_current[i] = new
        if adds or removes:
            self._buffer(PatchAction(Patch(adds, removes)))

    def _check_stop(self, group: _Group, event) -> bool:
        for i, w in enumerate(group.spec.whens):
            if w.kind == "rising-edge":
                now = bool(w.predicate(*group.collected))
                fire = now and not group.baselines[i]
                group.baselines[i] = now
                if fire:
                    self._fire(group, w, ())
                    return True
            elif w.kind == "message":
                if isinstance(event, MessageEvent) and matches(w.subscription, event.body):
                    self._fire(group, w, self._extract(w, event.body))
                    return True
            else:
                if not isinstance(event, PatchEvent):
                    continue
                pool = event.patch.added if w.kind == "asserted" else event.patch.removed
                hits = [a for a in pool if intersect(w.subscription, a) is not None]
                if hits:
                    self._fire(group, w, self._extract(w, sort_patterns(hits)[0]))
                    return True
        return False

    def _fire(self, group: _Group, w: _CompiledWhen, bindings: tuple) -> None:
        raw = w.body(self.ctx, *group.collected, *bindings) if w.body else None
        self.teardown_group(group.gid)
        group.on_complete(raw)


def _pack_values(raw) -> Record:
    """Encode a clause body's return into the ground handshake payload."""
    if raw is None:
        vs: tuple = ()
    elif isinstance(raw, tuple):
        vs = raw
    else:
        vs = (raw,)
    payload = rec(_VALUES_LABEL, *vs)
    if not (is_pattern(payload) and is_ground(payload)):
        raise ValueError(f"state result is not a ground value: {raw!r}")
    return payload


def _reactive_step(event, state: ReactiveState):
    actions = state.collect_actions(lambda: state._deliver(event))
    if not actions and not state._matched:
        return None
    return Continue(state, actions)


def synthesize_behaviour():
    """The behaviour function shared by every reactive actor."""
    return _reactive_step


def reactive_actor(net, script) -> tuple[int, ...]:
    """Spawn an actor that runs the script until it completes or suspends."""
    return net.spawn(_reactive_step, ReactiveState(script), ())
